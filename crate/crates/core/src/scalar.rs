//! Scalar abstraction shared by the tensor, sampler and metric code.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

/// Floating point type the engine can run on: `f32` or `f64`.
///
/// Random variate generation lives on the trait because `rand_distr`
/// expresses its support through per-type `Distribution` impls, which a
/// generic bound cannot carry through supertraits.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Draw from the standard normal distribution.
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Draw from a chi-square distribution. `dof` must be positive.
    fn chi_squared<R: Rng + ?Sized>(dof: Self, rng: &mut R) -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion to f64")
    }
}

macro_rules! impl_real {
    ($($t:ty),*) => {$(
        impl Real for $t {
            #[inline]
            fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }

            #[inline]
            fn chi_squared<R: Rng + ?Sized>(dof: Self, rng: &mut R) -> Self {
                ChiSquared::new(dof)
                    .expect("chi-square degrees of freedom must be positive")
                    .sample(rng)
            }
        }
    )*};
}

impl_real!(f32, f64);
