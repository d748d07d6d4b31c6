//! Scalar abstraction for the numeric core.
//!
//! Everything numeric in this crate is generic over [`Real`], which bundles the
//! `num-traits` capabilities the algorithms need plus per-type tolerance
//! constants. `f64` is the working precision (and what the CLI uses); `f32`
//! instantiations are supported with proportionally looser tolerances.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, RemAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the crate.
///
/// The three tolerance constants mirror the precision tiers the algorithms
/// are validated against: `TOL_TIGHT` for identities that hold to machine
/// precision (unit norms, algebraic rewrites), `TOL_MEDIUM` for quantities
/// accumulated over a full register (state norms, traces), and `TOL_LOOSE`
/// for aggregates of many such quantities (balance sums, normalizers).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + RemAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    const TOL_TIGHT: Self;
    const TOL_MEDIUM: Self;
    const TOL_LOOSE: Self;

    /// Lossy conversion from `f64`, used for constants and seeded random
    /// draws so that `f32` and `f64` runs consume identical RNG streams.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to any Real")
    }

    /// Widening conversion for serialization and reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real widens to f64")
    }
}

impl Real for f64 {
    const TOL_TIGHT: Self = 1e-12;
    const TOL_MEDIUM: Self = 1e-10;
    const TOL_LOOSE: Self = 1e-9;
}

impl Real for f32 {
    const TOL_TIGHT: Self = 1e-5;
    const TOL_MEDIUM: Self = 1e-4;
    const TOL_LOOSE: Self = 1e-3;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip() {
        assert_eq!(f64::from_f64_lossy(0.25), 0.25);
        assert_eq!(f32::from_f64_lossy(0.25), 0.25f32);
        assert_eq!(0.25f64.as_f64(), 0.25);
    }

    #[test]
    fn tolerance_ordering() {
        fn check<T: Real>() {
            assert!(T::TOL_TIGHT < T::TOL_MEDIUM);
            assert!(T::TOL_MEDIUM < T::TOL_LOOSE);
        }
        check::<f32>();
        check::<f64>();
    }
}
