//! Extended-precision reals.
//!
//! [`Real`] wraps an `astro_float::BigFloat` together with its working
//! precision. Binary operations run at the larger of the two operand
//! precisions and round to nearest-even, so every result is a deterministic
//! function of the inputs and the precision.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Exponent, RoundingMode, Sign, Word};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::ExactRational;

const RM: RoundingMode = RoundingMode::ToEven;
const WORD_BITS: usize = Word::BITS as usize;

pub const DEFAULT_MANTISSA_BITS: usize = 256;
pub const MIN_MANTISSA_BITS: usize = 64;

thread_local! {
    // One constant cache per precision: a cache filled at one precision and
    // re-rounded to another could differ in the last place.
    static CONSTS: RefCell<HashMap<usize, Consts>> = RefCell::new(HashMap::new());
}

fn with_consts<R>(prec: usize, f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|cell| {
        let mut map = cell.borrow_mut();
        let cc = map
            .entry(prec)
            .or_insert_with(|| Consts::new().expect("constant cache allocation"));
        f(cc)
    })
}

/// Working precision and comparison tolerance for one family of evaluations.
#[derive(Clone, Debug)]
pub struct PrecisionContext {
    mantissa_bits: usize,
    comparison_tolerance: Real,
}

impl PrecisionContext {
    pub fn new(mantissa_bits: usize) -> Result<Self> {
        if mantissa_bits < MIN_MANTISSA_BITS {
            return Err(Error::Domain(format!(
                "mantissa_bits must be at least {MIN_MANTISSA_BITS}, got {mantissa_bits}"
            )));
        }
        let comparison_tolerance = Real::from_rational(&ExactRational::ratio(1, 1_000_000_000_000), mantissa_bits);
        Ok(Self {
            mantissa_bits,
            comparison_tolerance,
        })
    }

    pub fn with_tolerance(mut self, tolerance: &ExactRational) -> Result<Self> {
        if !tolerance.is_positive() {
            return Err(Error::Domain("comparison tolerance must be positive".into()));
        }
        self.comparison_tolerance = self.rational(tolerance);
        Ok(self)
    }

    pub fn mantissa_bits(&self) -> usize {
        self.mantissa_bits
    }

    pub fn comparison_tolerance(&self) -> &Real {
        &self.comparison_tolerance
    }

    /// Bits needed to keep about 60 significant bits in differences
    /// `w(n) - w(n+1)` for `n <= n_max`.
    pub fn required_bits_for(n_max: u64) -> usize {
        128 + 4 * (64 - n_max.max(1).leading_zeros() as usize)
    }

    pub fn ensure_bits_for(&self, n_max: u64) -> Result<()> {
        let need = Self::required_bits_for(n_max);
        if self.mantissa_bits < need {
            return Err(Error::InsufficientPrecision {
                have: self.mantissa_bits,
                need,
            });
        }
        Ok(())
    }

    pub fn zero(&self) -> Real {
        Real::from_i64(0, self.mantissa_bits)
    }

    pub fn one(&self) -> Real {
        Real::from_i64(1, self.mantissa_bits)
    }

    pub fn int(&self, n: i64) -> Real {
        Real::from_i64(n, self.mantissa_bits)
    }

    pub fn uint(&self, n: u64) -> Real {
        Real::from_u64(n, self.mantissa_bits)
    }

    pub fn rational(&self, q: &ExactRational) -> Real {
        Real::from_rational(q, self.mantissa_bits)
    }

    /// Euler's number, evaluated as `exp(1)` at the context precision.
    pub fn e(&self) -> Real {
        self.one().exp()
    }

    pub fn pi(&self) -> Real {
        let p = self.mantissa_bits;
        Real::wrap(with_consts(p, |cc| cc.pi(p, RM)), p)
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self::new(DEFAULT_MANTISSA_BITS).expect("default precision is valid")
    }
}

#[derive(Clone, Debug)]
pub struct Real {
    value: BigFloat,
    prec: usize,
}

impl Real {
    fn wrap(value: BigFloat, prec: usize) -> Self {
        Self { value, prec }
    }

    pub fn from_i64(n: i64, prec: usize) -> Self {
        Self::wrap(BigFloat::from_i64(n, prec), prec)
    }

    pub fn from_u64(n: u64, prec: usize) -> Self {
        Self::wrap(BigFloat::from_u64(n, prec), prec)
    }

    /// Nearest `prec`-bit value to `x`. Exact for binary fractions that fit.
    pub fn from_f64(x: f64, prec: usize) -> Self {
        Self::wrap(BigFloat::from_f64(x, prec), prec)
    }

    /// Correctly rounded conversion: a single rounding of the exact rational.
    pub fn from_rational(q: &ExactRational, prec: usize) -> Self {
        if q.is_zero() {
            return Self::from_i64(0, prec);
        }
        let num = q.numer().magnitude();
        let den = q.denom().magnitude();
        // Scale so the integer quotient carries prec + 2 bits, then fold the
        // remainder into a sticky bit.
        let shift = (prec as i64 + 2) - (num.bits() as i64 - den.bits() as i64);
        let (scaled_num, scaled_den) = if shift >= 0 {
            (num << shift as usize, den.clone())
        } else {
            (num.clone(), den << (-shift) as usize)
        };
        let (mut quot, rem) = scaled_num.div_rem(&scaled_den);
        let mut shift = shift;
        if !rem.is_zero() {
            quot = (quot << 1usize) | BigUint::one();
            shift += 1;
        }
        let sign = if q.is_negative() { Sign::Neg } else { Sign::Pos };
        let exact = biguint_to_bigfloat(&quot, sign, -shift);
        let mut value = exact;
        value.set_precision(prec, RM).expect("valid precision");
        Self::wrap(value, prec)
    }

    /// Exact value of this binary float as a rational.
    pub fn to_rational(&self) -> Result<ExactRational> {
        if self.value.is_zero() {
            return Ok(ExactRational::zero());
        }
        let (words, _bits, sign, exponent, _) = self
            .value
            .as_raw_parts()
            .ok_or_else(|| Error::Domain("non-finite value".into()))?;
        let mantissa = BigUint::from_slice(
            &words
                .iter()
                .flat_map(|w| [(*w & 0xffff_ffff) as u32, (*w >> 32) as u32])
                .collect::<Vec<_>>(),
        );
        let scale = exponent as i64 - (words.len() * WORD_BITS) as i64;
        let mut numer = BigInt::from(mantissa);
        if sign == Sign::Neg {
            numer = -numer;
        }
        let two = ExactRational::from(2);
        Ok(ExactRational::from_integer(numer) * two.pow(scale as i32))
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.value.is_nan() && !self.value.is_inf()
    }

    pub fn is_positive(&self) -> bool {
        !self.value.is_zero() && self.value.is_positive() && !self.value.is_nan()
    }

    pub fn is_negative(&self) -> bool {
        !self.value.is_zero() && self.value.is_negative() && !self.value.is_nan()
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.value.abs(), self.prec)
    }

    pub fn recip(&self) -> Self {
        Self::wrap(self.value.reciprocal(self.prec, RM), self.prec)
    }

    pub fn exp(&self) -> Self {
        let p = self.prec;
        Self::wrap(with_consts(p, |cc| self.value.exp(p, RM, cc)), p)
    }

    /// Natural logarithm; NaN for negative input, -inf at zero.
    pub fn ln(&self) -> Self {
        let p = self.prec;
        Self::wrap(with_consts(p, |cc| self.value.ln(p, RM, cc)), p)
    }

    pub fn sin(&self) -> Self {
        let p = self.prec;
        Self::wrap(with_consts(p, |cc| self.value.sin(p, RM, cc)), p)
    }

    pub fn sinh(&self) -> Self {
        let p = self.prec;
        Self::wrap(with_consts(p, |cc| self.value.sinh(p, RM, cc)), p)
    }

    pub fn cosh(&self) -> Self {
        let p = self.prec;
        Self::wrap(with_consts(p, |cc| self.value.cosh(p, RM, cc)), p)
    }

    pub fn sqrt(&self) -> Self {
        Self::wrap(self.value.sqrt(self.prec, RM), self.prec)
    }

    pub fn powi(&self, n: usize) -> Self {
        Self::wrap(self.value.powi(n, self.prec, RM), self.prec)
    }

    /// `self^y` for positive `self`.
    pub fn pow(&self, y: &Real) -> Self {
        let p = self.prec.max(y.prec);
        Self::wrap(with_consts(p, |cc| self.value.pow(&y.value, p, RM, cc)), p)
    }

    /// Multiplies by `2^k` exactly.
    pub fn ldexp(&self, k: i32) -> Self {
        if self.value.is_zero() {
            return self.clone();
        }
        let mut value = self.value.clone();
        let e = value.exponent().expect("finite value");
        value.set_exponent(e + k as Exponent);
        Self::wrap(value, self.prec)
    }

    pub fn max<'a>(&'a self, other: &'a Real) -> &'a Real {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min<'a>(&'a self, other: &'a Real) -> &'a Real {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.value.is_nan() {
            return f64::NAN;
        }
        if self.value.is_inf() {
            return if self.value.is_positive() {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
        }
        self.to_rational().map(|q| q.to_f64()).unwrap_or(f64::NAN)
    }

    /// Scientific notation with `digits` significant decimal digits,
    /// e.g. `1.7320508e0`. Rounded half away from zero from the exact
    /// binary value.
    pub fn to_decimal(&self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.value.is_nan() {
            return "NaN".into();
        }
        if self.value.is_inf() {
            return if self.value.is_positive() { "inf".into() } else { "-inf".into() };
        }
        let q = match self.to_rational() {
            Ok(q) => q,
            Err(_) => return "NaN".into(),
        };
        if q.is_zero() {
            return format!("{}e0", ExactRational::zero().to_decimal(digits - 1));
        }
        let mag = q.abs();
        // Decimal exponent guess from the bit lengths, corrected below.
        let bits = mag.numer().bits() as f64 - mag.denom().bits() as f64;
        let mut exp10 = (bits * std::f64::consts::LOG10_2).floor() as i32;
        let ten = ExactRational::from(10);
        loop {
            let scaled = &mag / ten.pow(exp10);
            if scaled >= 10 {
                exp10 += 1;
            } else if scaled < 1 {
                exp10 -= 1;
            } else {
                break;
            }
        }
        let mut mantissa = (&mag / ten.pow(exp10)).to_decimal(digits - 1);
        if mantissa.starts_with("10") {
            exp10 += 1;
            mantissa = (&mag / ten.pow(exp10)).to_decimal(digits - 1);
        }
        let sign = if q.is_negative() { "-" } else { "" };
        format!("{sign}{mantissa}e{exp10}")
    }
}

/// Exact conversion of `sign * m * 2^scale`.
fn biguint_to_bigfloat(m: &BigUint, sign: Sign, scale: i64) -> BigFloat {
    let digits = m.to_u64_digits();
    let words: Vec<Word> = digits.iter().map(|&d| d as Word).collect();
    let exponent = scale + (words.len() * WORD_BITS) as i64;
    BigFloat::from_words(&words, sign, exponent as Exponent)
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.value.cmp(&other.value) == Some(0)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.cmp(&other.value).map(|c| c.cmp(&0))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(((self.prec as f64) * std::f64::consts::LOG10_2) as usize);
        f.write_str(&self.to_decimal(digits))
    }
}

macro_rules! real_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let p = self.prec.max(rhs.prec);
                Real::wrap(self.value.$method(&rhs.value, p, RM), p)
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
        impl $trait<i64> for &Real {
            type Output = Real;
            fn $method(self, rhs: i64) -> Real {
                self.$method(&Real::from_i64(rhs, self.prec))
            }
        }
        impl $trait<i64> for Real {
            type Output = Real;
            fn $method(self, rhs: i64) -> Real {
                (&self).$method(&Real::from_i64(rhs, self.prec))
            }
        }
    };
}

real_binop!(Add, add);
real_binop!(Sub, sub);
real_binop!(Mul, mul);
real_binop!(Div, div);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::wrap(BigFloat::neg(&self.value), self.prec)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::wrap(BigFloat::neg(&self.value), self.prec)
    }
}

/// Pairwise summation in index order; the result does not depend on how the
/// terms were produced.
pub fn pairwise_sum(terms: &[Real], prec: usize) -> Real {
    match terms.len() {
        0 => Real::from_i64(0, prec),
        1 => terms[0].clone(),
        n => {
            let (lo, hi) = terms.split_at(n / 2);
            pairwise_sum(lo, prec) + pairwise_sum(hi, prec)
        }
    }
}
