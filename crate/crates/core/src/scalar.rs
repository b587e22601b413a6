//! Scalar abstractions shared by the numeric kernels.
//!
//! [`Scalar`] is the minimum needed by exact linear algebra (a field with an
//! ordering), so the trophic solver also runs over rationals. [`Real`] adds
//! the transcendental functions needed by softmax and sampling.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, NumAssign, Signed, ToPrimitive};

pub trait Scalar:
    Num + NumAssign + Signed + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + 'static
{
    /// Pivot test used by the direct solver. Exact types compare against
    /// zero; floats compare against a tolerance relative to `scale`.
    fn is_negligible(self, scale: Self) -> bool;

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn is_negligible(self, scale: Self) -> bool {
        self.abs() <= 1e-13 * scale.abs().max(1.0)
    }
}

impl Scalar for f32 {
    fn is_negligible(self, scale: Self) -> bool {
        self.abs() <= 1e-6 * scale.abs().max(1.0)
    }
}

macro_rules! exact_ratio {
    ($($int:ty),*) => {$(
        impl Scalar for num_rational::Ratio<$int> {
            fn is_negligible(self, _scale: Self) -> bool {
                num_traits::Zero::is_zero(&self)
            }
        }
    )*};
}

exact_ratio!(i64, i128);

/// Floating-point scalar used by the stochastic and statistical parts.
pub trait Real: Scalar + Float {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }
}

impl Real for f64 {}
impl Real for f32 {}
