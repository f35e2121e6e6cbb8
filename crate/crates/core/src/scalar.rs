//! Coefficient backends: exact rationals (real and complex) and machine complex floats.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use num_complex::Complex64;

/// Gaussian rational: a complex number with exact rational parts.
pub type ComplexRational = Complex<BigRational>;

/// Which arithmetic a value lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    ExactRational,
    ComplexFloat,
}

/// Field operations shared by every coefficient backend.
///
/// Exact backends never round; float backends compare through explicit
/// tolerances (see [`Scalar::is_negligible`]).
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
    const BACKEND: Backend;

    fn from_rational(r: &BigRational) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    fn conj(&self) -> Self;

    /// |x| as a machine float.
    fn magnitude(&self) -> f64;

    fn to_complex64(&self) -> Complex64;

    /// Exactly zero on exact backends, `|x| <= tol` on float backends.
    fn is_negligible(&self, tol: f64) -> bool;

    /// True when the value is real (imaginary part zero, or within `tol` on floats)
    /// and its real part is `>= 0` (or `>= -tol`).
    fn is_nonneg_real(&self, tol: f64) -> bool;

    fn is_exact() -> bool {
        Self::BACKEND == Backend::ExactRational
    }
}

impl Scalar for BigRational {
    const BACKEND: Backend = Backend::ExactRational;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn conj(&self) -> Self {
        self.clone()
    }

    fn magnitude(&self) -> f64 {
        rational_to_f64(&self.abs())
    }

    fn to_complex64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn is_nonneg_real(&self, _tol: f64) -> bool {
        !self.is_negative()
    }
}

impl Scalar for ComplexRational {
    const BACKEND: Backend = Backend::ExactRational;

    fn from_rational(r: &BigRational) -> Self {
        Complex::new(r.clone(), BigRational::zero())
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn magnitude(&self) -> f64 {
        self.to_complex64().norm()
    }

    fn to_complex64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn is_nonneg_real(&self, _tol: f64) -> bool {
        self.im.is_zero() && !self.re.is_negative()
    }
}

impl Scalar for Complex64 {
    const BACKEND: Backend = Backend::ComplexFloat;

    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(rational_to_f64(r), 0.0)
    }

    fn from_int(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn to_complex64(&self) -> Complex64 {
        *self
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    fn is_nonneg_real(&self, tol: f64) -> bool {
        self.im.abs() <= tol && self.re >= -tol
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn complex_rational(re: BigRational, im: BigRational) -> ComplexRational {
    Complex::new(re, im)
}

/// Parses `"3/10"`, `"-2"`, `"0.25"` or `"1.5e-2"` into an exact rational.
///
/// Decimal strings are read exactly (`"0.1"` is `1/10`, not the nearest double).
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if s.contains('/') {
        let r = BigRational::from_str(s).map_err(|_| bad())?;
        return Ok(r);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(&all_digits).map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Formats a rational as `"num/den"` (or just `"num"` for integers).
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Formats a Gaussian rational as `"re"`, `"re+imi"` or `"re-imi"`.
pub fn format_complex_rational(z: &ComplexRational) -> String {
    if z.im.is_zero() {
        return format_rational(&z.re);
    }
    let im = if z.im.is_negative() {
        format!("-{}i", format_rational(&-z.im.clone()))
    } else {
        format!("+{}i", format_rational(&z.im))
    };
    if z.re.is_zero() {
        im.trim_start_matches('+').to_string()
    } else {
        format!("{}{}", format_rational(&z.re), im)
    }
}

/// Fixed 15-significant-digit decimal rendering, independent of locale.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_fraction(&s)
    } else {
        let s = format!("{x:.14e}");
        match s.split_once('e') {
            Some((m, e)) => format!("{}e{}", trim_fraction(m), e),
            None => s,
        }
    }
}

fn trim_fraction(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn format_complex64(z: Complex64) -> String {
    if z.im == 0.0 {
        format_f64(z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", format_f64(z.re), format_f64(-z.im))
    } else {
        format!("{}+{}i", format_f64(z.re), format_f64(z.im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!(parse_rational("3/10").unwrap(), rational(3, 10));
        assert_eq!(parse_rational("0.3").unwrap(), rational(3, 10));
        assert_eq!(parse_rational("-1.25").unwrap(), rational(-5, 4));
        assert_eq!(parse_rational("1").unwrap(), rational(1, 1));
        assert_eq!(parse_rational(".5").unwrap(), rational(1, 2));
        assert_eq!(parse_rational("2.5e-1").unwrap(), rational(1, 4));
        assert_eq!(parse_rational("1e2").unwrap(), rational(100, 1));
        assert!(parse_rational("").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0x").is_err());
    }

    #[test]
    fn fifteen_significant_digits() {
        assert_eq!(format_f64(2f64.sqrt()), "1.4142135623731");
        assert_eq!(format_f64(5.0), "5");
        assert_eq!(format_f64(-0.5), "-0.5");
        assert_eq!(format_f64(1.0 / 3.0), "0.333333333333333");
        assert_eq!(format_f64(1.5e-9), "1.5e-9");
        assert_eq!(format_f64(0.0), "0");
    }

    #[test]
    fn rational_strings() {
        assert_eq!(format_rational(&rational(-6, 4)), "-3/2");
        assert_eq!(format_rational(&rational(4, 2)), "2");
        let z = complex_rational(rational(1, 2), rational(-1, 3));
        assert_eq!(format_complex_rational(&z), "1/2-1/3i");
        let w = complex_rational(rational(0, 1), rational(2, 1));
        assert_eq!(format_complex_rational(&w), "2i");
    }

    #[test]
    fn backends_agree_on_conversion() {
        let r = rational(7, 8);
        assert_eq!(<Complex64 as Scalar>::from_rational(&r), Complex64::new(0.875, 0.0));
        let z = <ComplexRational as Scalar>::from_rational(&r);
        assert_eq!(z.to_complex64(), Complex64::new(0.875, 0.0));
        assert!(Complex64::new(1e-13, 0.0).is_negligible(1e-12));
        assert!(!ComplexRational::new(rational(1, 1000000), rational(0, 1)).is_negligible(1.0));
    }
}
