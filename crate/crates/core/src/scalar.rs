//! Coefficient field tower.
//!
//! Every algebraic routine in the crate is generic over [`Scalar`], which has
//! two implementations: [`Cq`], complex numbers with exact rational real and
//! imaginary parts, and [`C64`], binary64 complex numbers. Models whose inputs
//! are all rational run in `Cq`, so identities such as `σᵀMσ = M` hold
//! bit-exactly; as soon as one input is a float the whole computation is
//! demoted to `C64`.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::complex::Complex;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

/// Exact complex rational.
pub type Cq = Complex<BigRational>;
/// Floating complex.
pub type C64 = Complex<f64>;

/// Arithmetic mode of a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumberMode {
    Rational,
    Float,
}

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const MODE: NumberMode;

    fn from_i64(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Builds `re + i·im`. Exact scalars convert the binary64 values exactly.
    fn from_parts_f64(re: f64, im: f64) -> Self;
    fn from_c64(z: C64) -> Self {
        Self::from_parts_f64(z.re, z.im)
    }
    fn i() -> Self;
    fn conj(&self) -> Self;
    fn to_c64(&self) -> C64;

    /// Zero test: exact for rational scalars, `|z| <= tol` for floats.
    fn is_negligible(&self, tol: f64) -> bool;

    /// Magnitude used for pivot selection.
    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }

    /// Sign of the real part, `0` when it is negligible.
    fn re_sign(&self, tol: f64) -> i8;

    /// `1/k!` as a scalar.
    fn inv_factorial(k: usize) -> Self {
        let mut f = Self::one();
        for j in 2..=k {
            f = f / Self::from_i64(j as i64);
        }
        f
    }

    fn pow_u(&self, e: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for Cq {
    const MODE: NumberMode = NumberMode::Rational;

    fn from_i64(v: i64) -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(v)), BigRational::zero())
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    fn from_parts_f64(re: f64, im: f64) -> Self {
        let conv = |x: f64| BigRational::from_float(x).expect("finite value");
        Complex::new(conv(re), conv(im))
    }

    fn i() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn to_c64(&self) -> C64 {
        Complex::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn re_sign(&self, _tol: f64) -> i8 {
        if self.re.is_zero() {
            0
        } else if self.re.is_positive() {
            1
        } else {
            -1
        }
    }
}

impl Scalar for C64 {
    const MODE: NumberMode = NumberMode::Float;

    fn from_i64(v: i64) -> Self {
        Complex::new(v as f64, 0.0)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(num as f64 / den as f64, 0.0)
    }

    fn from_parts_f64(re: f64, im: f64) -> Self {
        Complex::new(re, im)
    }

    fn i() -> Self {
        Complex::new(0.0, 1.0)
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn to_c64(&self) -> C64 {
        *self
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    fn re_sign(&self, tol: f64) -> i8 {
        if self.re.abs() <= tol {
            0
        } else if self.re > 0.0 {
            1
        } else {
            -1
        }
    }
}

/// Rational value `num/den` with arbitrary-size parts, as an exact scalar.
pub fn cq_from_bigint_ratio(num: BigInt, den: BigInt) -> Cq {
    Complex::new(BigRational::new(num, den), BigRational::zero())
}

/// Powers of `i`: `(√−1)^k` for any integer `k`.
pub fn i_pow<S: Scalar>(k: i64) -> S {
    match k.rem_euclid(4) {
        0 => S::one(),
        1 => S::i(),
        2 => -S::one(),
        _ => -S::i(),
    }
}
