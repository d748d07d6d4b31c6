use std::f64::consts::TAU;

use num_complex::Complex;
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use noq::codebook::{platonic_codebook, BlochVector, ValueMap};
use noq::decoder::{
    codebook_fidelities, decode, marginal_from_bloch, marginal_from_rho, Configuration,
    MarginalDistribution,
};
use noq::simulator::ReducedDensityMatrix;
use noq::Error;

const PLATONIC_SIZES: [usize; 7] = [2, 3, 4, 6, 8, 12, 20];

fn rho_from_bloch(r: &BlochVector<f64>) -> ReducedDensityMatrix<f64> {
    ReducedDensityMatrix::new([
        [
            Complex::new((1.0 + r.z) / 2.0, 0.0),
            Complex::new(r.x / 2.0, -r.y / 2.0),
        ],
        [
            Complex::new(r.x / 2.0, r.y / 2.0),
            Complex::new((1.0 - r.z) / 2.0, 0.0),
        ],
    ])
    .unwrap()
}

fn random_ball_vector(rng: &mut ChaCha20Rng) -> BlochVector<f64> {
    let z = rng.gen::<f64>() * 2.0 - 1.0;
    let az = rng.gen::<f64>() * TAU;
    let radius = rng.gen::<f64>().cbrt() * 0.999999;
    let s = (1.0 - z * z).sqrt();
    BlochVector::new(radius * s * az.cos(), radius * s * az.sin(), radius * z)
}

#[test]
fn maximally_mixed_state_is_uniform_for_every_codebook() {
    let rho = rho_from_bloch(&BlochVector::new(0.0, 0.0, 0.0));
    for p in PLATONIC_SIZES {
        let cb = platonic_codebook::<f64>(p).unwrap();
        let m = marginal_from_rho(&rho, &cb).unwrap();
        for &prob in m.probabilities() {
            assert!((prob - 1.0 / p as f64).abs() < 1e-12, "p = {p}");
        }
    }
}

#[test]
fn antipodal_codebook_reads_out_basis_populations() {
    // With labels on +z / -z the marginal must equal the diagonal of rho
    // for any state, mixed or pure.
    let cb = platonic_codebook::<f64>(2).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for _ in 0..200 {
        let r = random_ball_vector(&mut rng);
        let rho = rho_from_bloch(&r);
        let m = marginal_from_rho(&rho, &cb).unwrap();
        assert!((m.prob(0) - rho.matrix()[0][0].re).abs() < 1e-12);
        assert!((m.prob(1) - rho.matrix()[1][1].re).abs() < 1e-12);
    }
    let north = rho_from_bloch(&BlochVector::new(0.0, 0.0, 1.0));
    let m = marginal_from_rho(&north, &cb).unwrap();
    assert!((m.prob(0) - 1.0).abs() < 1e-12);
    assert!(m.prob(1).abs() < 1e-12);
}

#[test]
fn tetrahedron_vertex_state_splits_half_and_sixths() {
    let cb = platonic_codebook::<f64>(4).unwrap();
    let v0 = cb.vectors()[0];
    let rho = rho_from_bloch(&v0);
    let m = marginal_from_rho(&rho, &cb).unwrap();
    assert!((m.prob(0) - 0.5).abs() < 1e-12);
    for label in 1..4 {
        assert!((m.prob(label) - 1.0 / 6.0).abs() < 1e-12);
    }
    assert_eq!(m.argmax(), 0);
}

#[test]
fn vertex_states_decode_to_their_own_label() {
    for p in PLATONIC_SIZES {
        let cb = platonic_codebook::<f64>(p).unwrap();
        for label in 0..p {
            let rho = rho_from_bloch(&cb.vectors()[label]);
            let m = marginal_from_rho(&rho, &cb).unwrap();
            assert_eq!(m.argmax(), label, "p = {p}");
        }
    }
}

#[test]
fn rho_and_bloch_paths_agree() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for p in PLATONIC_SIZES {
        let cb = platonic_codebook::<f64>(p).unwrap();
        for _ in 0..100 {
            let r = random_ball_vector(&mut rng);
            let from_rho = marginal_from_rho(&rho_from_bloch(&r), &cb).unwrap();
            let from_bloch = marginal_from_bloch(&r, &cb).unwrap();
            let mut sum = 0.0;
            for label in 0..p {
                assert!((from_rho.prob(label) - from_bloch.prob(label)).abs() < 1e-12);
                sum += from_rho.prob(label);
            }
            assert!((sum - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn raw_fidelities_of_balanced_codebooks_sum_to_half_p() {
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    for p in PLATONIC_SIZES {
        let cb = platonic_codebook::<f64>(p).unwrap();
        for _ in 0..50 {
            let rho = rho_from_bloch(&random_ball_vector(&mut rng));
            let fids = codebook_fidelities(&rho, &cb).unwrap();
            let sum: f64 = fids.iter().sum();
            assert!((sum - p as f64 / 2.0).abs() < 1e-9, "p = {p}");
        }
    }
}

#[test]
fn bloch_vectors_outside_the_ball_are_rejected() {
    let cb = platonic_codebook::<f64>(4).unwrap();
    let r = BlochVector::new(0.8, 0.8, 0.8);
    assert!(matches!(
        marginal_from_bloch(&r, &cb),
        Err(Error::BlochOutsideBall { .. })
    ));
}

#[test]
fn argmax_ties_break_to_the_lowest_label() {
    let m = MarginalDistribution::new(vec![0.4, 0.4, 0.2]).unwrap();
    assert_eq!(m.argmax(), 0);
    let m = MarginalDistribution::new(vec![0.2, 0.4, 0.4]).unwrap();
    assert_eq!(m.argmax(), 1);
    let uniform = MarginalDistribution::new(vec![0.25; 4]).unwrap();
    assert_eq!(uniform.argmax(), 0);
}

#[test]
fn marginal_validation() {
    assert!(matches!(
        MarginalDistribution::new(vec![1.0]),
        Err(Error::MarginalLength { .. })
    ));
    assert!(MarginalDistribution::new(vec![0.7, 0.2]).is_err());
    assert!(MarginalDistribution::new(vec![1.2, -0.2]).is_err());
    assert!(MarginalDistribution::new(vec![0.5, 0.5]).is_ok());
}

#[test]
fn decode_resolves_labels_and_values() {
    let vm = ValueMap::integer_range(-1, 2).unwrap();
    let marginals = vec![
        MarginalDistribution::new(vec![0.1, 0.6, 0.2, 0.1]).unwrap(),
        MarginalDistribution::new(vec![0.7, 0.1, 0.1, 0.1]).unwrap(),
        MarginalDistribution::new(vec![0.1, 0.1, 0.1, 0.7]).unwrap(),
    ];
    let config = decode(&marginals, &vm).unwrap();
    assert_eq!(config.labels(), &[1, 0, 3]);
    assert_eq!(config.values().unwrap(), &[0.0, -1.0, 2.0]);

    let wrong_vm = ValueMap::new(vec![0.0, 1.0]).unwrap();
    assert_eq!(
        decode(&marginals, &wrong_vm).unwrap_err(),
        Error::MarginalLength { expected: 2, got: 4 }
    );
}

#[test]
fn configuration_contract() {
    assert!(matches!(
        Configuration::<f64>::from_labels(vec![0, 4], 4),
        Err(Error::LabelOutOfRange { label: 4, p: 4 })
    ));
    let config = Configuration::<f64>::from_labels(vec![3, 0], 4).unwrap();
    assert_eq!(config.len(), 2);
    assert!(config.values().is_none());
    let vm = ValueMap::new(vec![-9.0, 0.5, 1.0, 10.0]).unwrap();
    let resolved = config.resolve(&vm).unwrap();
    assert_eq!(resolved.values().unwrap(), &[10.0, -9.0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn marginals_are_normalized_distributions(seed in 0u64..1_000_000, idx in 0usize..7) {
        let p = PLATONIC_SIZES[idx];
        let cb = platonic_codebook::<f64>(p).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let r = random_ball_vector(&mut rng);
        let m = marginal_from_bloch(&r, &cb).unwrap();
        let sum: f64 = m.probabilities().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-10);
        for &prob in m.probabilities() {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&prob));
        }
    }

    #[test]
    fn shrinking_toward_the_center_keeps_the_argmax(
        seed in 0u64..1_000_000,
        idx in 0usize..7,
        shrink in 0.1f64..0.9,
    ) {
        // Scaling a Bloch vector toward the origin rescales every fidelity
        // affinely by the same factor, which cannot move the argmax (up to
        // ties, excluded here by a strict-gap guard).
        let p = PLATONIC_SIZES[idx];
        let cb = platonic_codebook::<f64>(p).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let r = random_ball_vector(&mut rng);
        let m = marginal_from_bloch(&r, &cb).unwrap();
        let best = m.argmax();
        let mut sorted: Vec<f64> = m.probabilities().to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        prop_assume!(sorted[0] - sorted[1] > 1e-9);
        let shrunk = marginal_from_bloch(&r.scaled(shrink), &cb).unwrap();
        prop_assert_eq!(shrunk.argmax(), best);
    }
}
