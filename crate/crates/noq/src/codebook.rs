//! Codebooks: sets of p well-spread single-qubit states standing in for the
//! p values of a discrete variable.
//!
//! A codebook is an ordered list of unit Bloch vectors n_q. A qubit prepared
//! at vector n represents value q with fidelity (1 + n_q . n)/2, so spreading
//! the vectors apart makes the values as distinguishable as single-qubit
//! readout allows. For p in {2, 3, 4, 6, 8, 12, 20} the crate ships fixed
//! vertex sets (antipodal pair, equatorial triangle, and the five platonic
//! solids); for any other p, [`optimize_codebook`] minimizes the Riesz energy
//! sum 1/|n_i - n_j| over the sphere.
//!
//! Labels follow a canonical order: descending z, then ascending azimuth in
//! [0, 2pi). The [`ValueMap`] assigns label i to the i-th smallest value.

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::simulator::ReducedDensityMatrix;

/// Point on (or in) the Bloch ball.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochVector<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> BlochVector<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn dot(&self, other: &Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// Azimuthal angle in [0, 2pi).
    pub fn azimuth(&self) -> T {
        let a = self.y.atan2(self.x);
        if a < T::zero() {
            a + T::PI() + T::PI()
        } else {
            a
        }
    }

    pub fn is_unit(&self) -> bool {
        (self.norm_sq() - T::one()).abs() <= T::TOL_TIGHT
    }

    pub fn scaled(&self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Single-qubit pure state for a unit Bloch vector, with the global phase
/// fixed so the first amplitude is real and nonnegative; when that amplitude
/// vanishes (south pole), the second amplitude carries the azimuthal phase.
pub fn bloch_to_state<T: Real>(v: &BlochVector<T>) -> Result<[Complex<T>; 2]> {
    if !v.is_unit() {
        return Err(Error::NonUnitBloch { norm: v.norm().as_f64() });
    }
    let one = T::one();
    let theta = v.z.min(one).max(-one).acos();
    let phi = v.y.atan2(v.x);
    let half = theta / (one + one);
    Ok([
        Complex::new(half.cos(), T::zero()),
        Complex::from_polar(half.sin(), phi),
    ])
}

/// Fidelity <psi_v| rho |psi_v> of a codebook state against a reduced density
/// matrix, computed from the explicit matrix element and clamped to [0, 1]
/// against rounding at the boundary. Equals (1 + v . r)/2 for rho with Bloch
/// vector r.
pub fn state_fidelity<T: Real>(v: &BlochVector<T>, rho: &ReducedDensityMatrix<T>) -> Result<T> {
    rho.validate()?;
    let psi = bloch_to_state(v)?;
    let m = rho.matrix();
    let mut acc = Complex::new(T::zero(), T::zero());
    for a in 0..2 {
        for b in 0..2 {
            acc += psi[a].conj() * m[a][b] * psi[b];
        }
    }
    Ok(acc.re.min(T::one()).max(T::zero()))
}

/// Ordered set of p distinct unit Bloch vectors; the label of a vector is its
/// position.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook<T> {
    vectors: Vec<BlochVector<T>>,
}

impl<T: Real> Codebook<T> {
    /// Builds a codebook from the given vectors in the given label order,
    /// validating unit norms and pairwise distinctness.
    pub fn new(vectors: Vec<BlochVector<T>>) -> Result<Self> {
        if vectors.len() < 2 {
            return Err(Error::CodebookTooSmall { p: vectors.len() });
        }
        for v in &vectors {
            if !v.is_unit() {
                return Err(Error::NonUnitBloch { norm: v.norm().as_f64() });
            }
        }
        let near_one = T::one() - T::TOL_TIGHT;
        for i in 0..vectors.len() {
            for j in (i + 1)..vectors.len() {
                if vectors[i].dot(&vectors[j]) >= near_one {
                    return Err(Error::CodebookJson {
                        reason: format!("vectors {i} and {j} coincide"),
                    });
                }
            }
        }
        Ok(Self { vectors })
    }

    pub fn p(&self) -> usize {
        self.vectors.len()
    }

    pub fn vector(&self, label: usize) -> Result<&BlochVector<T>> {
        self.vectors.get(label).ok_or(Error::LabelOutOfRange {
            label,
            p: self.vectors.len(),
        })
    }

    pub fn vectors(&self) -> &[BlochVector<T>] {
        &self.vectors
    }

    /// Norm of the vector sum; zero for balanced sets.
    pub fn balance_norm(&self) -> T {
        let mut s = BlochVector::<T>::default();
        for v in &self.vectors {
            s.x += v.x;
            s.y += v.y;
            s.z += v.z;
        }
        s.norm()
    }

    pub fn is_balanced(&self) -> bool {
        self.balance_norm() < T::TOL_LOOSE
    }

    /// Smallest pairwise angle, in radians.
    pub fn min_pairwise_angle(&self) -> T {
        let one = T::one();
        let mut max_dot = -one;
        for i in 0..self.vectors.len() {
            for j in (i + 1)..self.vectors.len() {
                max_dot = max_dot.max(self.vectors[i].dot(&self.vectors[j]));
            }
        }
        max_dot.min(one).max(-one).acos()
    }

    /// Riesz s=1 energy: sum over pairs of 1/|n_i - n_j|.
    pub fn riesz_energy(&self) -> T {
        let mut e = T::zero();
        for i in 0..self.vectors.len() {
            for j in (i + 1)..self.vectors.len() {
                let d = BlochVector::new(
                    self.vectors[i].x - self.vectors[j].x,
                    self.vectors[i].y - self.vectors[j].y,
                    self.vectors[i].z - self.vectors[j].z,
                )
                .norm();
                e += d.recip();
            }
        }
        e
    }

    /// Serializes as `{"p": ..., "vectors": [[x,y,z], ...]}` in label order
    /// at full double precision.
    pub fn to_json(&self) -> String {
        let dto = CodebookJson {
            p: self.vectors.len(),
            vectors: self
                .vectors
                .iter()
                .map(|v| [v.x.as_f64(), v.y.as_f64(), v.z.as_f64()])
                .collect(),
        };
        serde_json::to_string_pretty(&dto).expect("codebook serializes")
    }

    /// Reads the JSON produced by [`Codebook::to_json`]; unknown fields are
    /// ignored so files carrying extra metadata still load.
    pub fn from_json(text: &str) -> Result<Self> {
        let dto: CodebookJson = serde_json::from_str(text).map_err(|e| Error::CodebookJson {
            reason: e.to_string(),
        })?;
        if dto.p != dto.vectors.len() {
            return Err(Error::CodebookJson {
                reason: format!("p = {} but {} vectors", dto.p, dto.vectors.len()),
            });
        }
        Self::new(
            dto.vectors
                .into_iter()
                .map(|[x, y, z]| {
                    BlochVector::new(
                        T::from_f64_lossy(x),
                        T::from_f64_lossy(y),
                        T::from_f64_lossy(z),
                    )
                })
                .collect(),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct CodebookJson {
    p: usize,
    vectors: Vec<[f64; 3]>,
}

/// Mapping from codebook labels to the classical values of a variable,
/// strictly increasing so label i carries the i-th smallest value.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueMap<T> {
    values: Vec<T>,
}

impl<T: Real> ValueMap<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::ValuesNotIncreasing);
        }
        for w in values.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::ValuesNotIncreasing);
            }
        }
        Ok(Self { values })
    }

    /// Consecutive integers lo..=hi as values.
    pub fn integer_range(lo: i64, hi: i64) -> Result<Self> {
        Self::new((lo..=hi).map(|v| T::from_f64_lossy(v as f64)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, label: usize) -> Result<T> {
        self.values.get(label).copied().ok_or(Error::LabelOutOfRange {
            label,
            p: self.values.len(),
        })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Sorts f64 points into canonical label order: descending z, then ascending
/// azimuth in [0, 2pi).
fn canonical_sort(points: &mut [[f64; 3]]) {
    let az = |p: &[f64; 3]| {
        let a = p[1].atan2(p[0]);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    };
    points.sort_by(|a, b| {
        b[2].total_cmp(&a[2]).then_with(|| az(a).total_cmp(&az(b)))
    });
}

fn build_codebook<T: Real>(mut points: Vec<[f64; 3]>) -> Codebook<T> {
    canonical_sort(&mut points);
    Codebook::new(
        points
            .into_iter()
            .map(|[x, y, z]| {
                BlochVector::new(
                    T::from_f64_lossy(x),
                    T::from_f64_lossy(y),
                    T::from_f64_lossy(z),
                )
            })
            .collect(),
    )
    .expect("constructed vertex sets are valid")
}

/// Fixed maximally-spread vertex sets: antipodal pair (p=2), equatorial
/// equilateral triangle (p=3), and the five platonic solids (4, 6, 8, 12,
/// 20), in canonical label order.
pub fn platonic_codebook<T: Real>(p: usize) -> Result<Codebook<T>> {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let points: Vec<[f64; 3]> = match p {
        2 => vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]],
        3 => {
            let h = 3.0_f64.sqrt() / 2.0;
            vec![[1.0, 0.0, 0.0], [-0.5, h, 0.0], [-0.5, -h, 0.0]]
        }
        4 => {
            let s = 1.0 / 3.0_f64.sqrt();
            vec![[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]]
        }
        6 => vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ],
        8 => {
            let s = 1.0 / 3.0_f64.sqrt();
            let mut pts = Vec::with_capacity(8);
            for &x in &[s, -s] {
                for &y in &[s, -s] {
                    for &z in &[s, -s] {
                        pts.push([x, y, z]);
                    }
                }
            }
            pts
        }
        12 => {
            let s = 1.0 / (1.0 + phi * phi).sqrt();
            let mut pts = Vec::with_capacity(12);
            for &a in &[1.0, -1.0] {
                for &b in &[phi, -phi] {
                    pts.push([0.0, a * s, b * s]);
                    pts.push([a * s, b * s, 0.0]);
                    pts.push([b * s, 0.0, a * s]);
                }
            }
            pts
        }
        20 => {
            let s = 1.0 / 3.0_f64.sqrt();
            let mut pts = Vec::with_capacity(20);
            for &x in &[s, -s] {
                for &y in &[s, -s] {
                    for &z in &[s, -s] {
                        pts.push([x, y, z]);
                    }
                }
            }
            let a = s / phi;
            let b = s * phi;
            for &u in &[a, -a] {
                for &v in &[b, -b] {
                    pts.push([0.0, u, v]);
                    pts.push([u, v, 0.0]);
                    pts.push([v, 0.0, u]);
                }
            }
            pts
        }
        _ => return Err(Error::UnsupportedPlatonicSize { p }),
    };
    Ok(build_codebook(points))
}

/// Output of [`optimize_codebook`]: the best codebook over all restarts, its
/// Riesz energy, and whether the gradient tolerance was met before the
/// iteration cap.
#[derive(Debug, Clone)]
pub struct OptimizeOutcome<T> {
    pub codebook: Codebook<T>,
    pub energy: T,
    pub converged: bool,
}

const DESCENT_ITERS: usize = 5000;
const GRAD_TOL: f64 = 1e-9;

/// Spreads p points on the sphere by minimizing the Riesz s=1 energy with
/// projected gradient descent, backtracking line search, and seeded random
/// restarts. Deterministic for a fixed seed; internal arithmetic is f64
/// regardless of `T`.
pub fn optimize_codebook<T: Real>(p: usize, restarts: usize, seed: u64) -> Result<OptimizeOutcome<T>> {
    if p < 2 {
        return Err(Error::CodebookTooSmall { p });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let restarts = restarts.max(1);
    let mut best: Option<(f64, Vec<[f64; 3]>, bool)> = None;
    for _ in 0..restarts {
        let mut pts: Vec<[f64; 3]> = (0..p).map(|_| random_unit(&mut rng)).collect();
        let (energy, converged) = descend(&mut pts);
        if best.as_ref().map_or(true, |(e, _, _)| energy < *e) {
            best = Some((energy, pts, converged));
        }
    }
    let (energy, pts, converged) = best.expect("at least one restart");
    Ok(OptimizeOutcome {
        codebook: build_codebook(pts),
        energy: T::from_f64_lossy(energy),
        converged,
    })
}

fn random_unit(rng: &mut ChaCha20Rng) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let az: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).sqrt();
    [r * az.cos(), r * az.sin(), z]
}

fn riesz_f64(pts: &[[f64; 3]]) -> f64 {
    let mut e = 0.0;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = dist(&pts[i], &pts[j]);
            e += 1.0 / d;
        }
    }
    e
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Gradient of the Riesz energy with respect to each point (ambient, not yet
/// projected to the tangent plane).
fn riesz_grad(pts: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let n = pts.len();
    let mut g = vec![[0.0; 3]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist(&pts[i], &pts[j]);
            let c = 1.0 / (d * d * d);
            for k in 0..3 {
                let diff = (pts[i][k] - pts[j][k]) * c;
                g[i][k] -= diff;
                g[j][k] += diff;
            }
        }
    }
    g
}

fn descend(pts: &mut Vec<[f64; 3]>) -> (f64, bool) {
    let mut energy = riesz_f64(pts);
    let mut step = 1e-2;
    for _ in 0..DESCENT_ITERS {
        let grad = riesz_grad(pts);
        let mut max_tan = 0.0_f64;
        let mut tangential = vec![[0.0; 3]; pts.len()];
        for (i, p) in pts.iter().enumerate() {
            let radial = grad[i][0] * p[0] + grad[i][1] * p[1] + grad[i][2] * p[2];
            let mut norm_sq = 0.0;
            for k in 0..3 {
                tangential[i][k] = grad[i][k] - radial * p[k];
                norm_sq += tangential[i][k] * tangential[i][k];
            }
            max_tan = max_tan.max(norm_sq.sqrt());
        }
        if max_tan < GRAD_TOL * (1.0 + energy) {
            return (energy, true);
        }
        let mut accepted = false;
        for _ in 0..60 {
            let candidate: Vec<[f64; 3]> = pts
                .iter()
                .zip(&tangential)
                .map(|(p, t)| {
                    let moved = [p[0] - step * t[0], p[1] - step * t[1], p[2] - step * t[2]];
                    let n = (moved[0] * moved[0] + moved[1] * moved[1] + moved[2] * moved[2]).sqrt();
                    [moved[0] / n, moved[1] / n, moved[2] / n]
                })
                .collect();
            let e = riesz_f64(&candidate);
            if e < energy {
                *pts = candidate;
                energy = e;
                step *= 1.25;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // Line search exhausted: no descent direction at f64 resolution.
            return (energy, true);
        }
    }
    (energy, false)
}
