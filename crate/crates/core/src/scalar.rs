//! Scalar abstraction shared by the state, verification and emission code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point type the simulator is generic over (`f32` or `f64`).
///
/// The associated thresholds are the per-precision defaults for amplitude
/// pruning and for the norm/fidelity checks.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Amplitudes with magnitude below this are dropped from the sparse map.
    fn default_prune() -> Self;
    /// Tolerance used for norm, trace and Hermiticity checks.
    fn default_tolerance() -> Self;

    /// Lossy conversion from `f64`; every `Real` can represent the value approximately.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("real converts to f64")
    }
}

impl Real for f64 {
    fn default_prune() -> Self {
        1e-14
    }
    fn default_tolerance() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn default_prune() -> Self {
        1e-7
    }
    fn default_tolerance() -> Self {
        1e-5
    }
}
