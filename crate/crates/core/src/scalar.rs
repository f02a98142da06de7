//! Scalar abstraction shared by every numeric module.
//!
//! All matrix kernels, bound evaluators and estimators are written against
//! [`Real`], which is implemented for `f32` and `f64`. The free-algebra oracle
//! uses the looser [`Coeff`](crate::freealg::Coeff) trait so that it can also
//! run over exact rationals.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar used throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion from a count.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over a [`Real`].
pub type Cplx<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> Cplx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn czero<T: Real>() -> Cplx<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn cone<T: Real>() -> Cplx<T> {
    Complex::new(T::one(), T::zero())
}

/// Exponential of a complex number written out so that it stays generic.
#[inline]
pub(crate) fn cexp<T: Real>(z: Cplx<T>) -> Cplx<T> {
    let m = z.re.exp();
    Complex::new(m * z.im.cos(), m * z.im.sin())
}

/// Natural log of `n!`, exact summation (no gamma approximation).
pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// `n!` as `f64`; exact up to 20!, log-space above.
pub(crate) fn factorial(n: usize) -> f64 {
    if n <= 20 {
        (1..=n as u64).product::<u64>() as f64
    } else {
        ln_factorial(n).exp()
    }
}

/// Falling factorial `L (L-1) ... (L-s+1)`, zero when `s > L`.
pub(crate) fn falling_factorial(l: usize, s: usize) -> f64 {
    if s > l {
        return 0.0;
    }
    (0..s).map(|i| (l - i) as f64).product()
}

/// Formats a float with `sig` significant digits in scientific notation.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    format!("{:.*e}", sig.saturating_sub(1), x)
}
