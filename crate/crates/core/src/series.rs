//! Truncated formal power series.
//!
//! A [`TruncatedSeries`] stores the coefficients of `z^0 ..= z^order` and
//! nothing beyond: every operation computes the order up to which its output
//! is trustworthy, and reading past it is an error rather than a silent zero.

use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Complex64, Scalar};

/// Tolerance used for the float backend's structural checks (normalization,
/// leading coefficients). Exact backends ignore it.
pub const STRUCTURAL_TOL: f64 = 1e-12;

/// Default truncation order for workflows that are not driven by a fold order.
pub const DEFAULT_ORDER: usize = 30;

/// Default truncation order for workflows driven by fold order `m`:
/// just past the `a_{3m+1}` term.
pub fn default_order_for_fold(m: usize) -> usize {
    3 * m + 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> TruncatedSeries<S> {
    /// Series with the given coefficients; `order = coeffs.len() - 1`.
    /// An empty vector is read as the zero series of order 0.
    pub fn new(mut coeffs: Vec<S>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(S::zero());
        }
        Self { coeffs }
    }

    /// A polynomial known exactly, padded with zeros (or truncated) to `order`.
    pub fn from_polynomial(coeffs: &[S], order: usize) -> Self {
        let mut c: Vec<S> = coeffs.iter().take(order + 1).cloned().collect();
        c.resize(order + 1, S::zero());
        Self { coeffs: c }
    }

    pub fn zero(order: usize) -> Self {
        Self { coeffs: vec![S::zero(); order + 1] }
    }

    pub fn constant(c: S, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    pub fn one(order: usize) -> Self {
        Self::constant(S::one(), order)
    }

    /// The identity series `z`.
    pub fn identity(order: usize) -> Self {
        Self::monomial(S::one(), 1, order)
    }

    pub fn monomial(c: S, exponent: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if exponent <= order {
            s.coeffs[exponent] = c;
        }
        s
    }

    /// `1/(1-z) = 1 + z + z^2 + ...`
    pub fn geometric(order: usize) -> Self {
        Self { coeffs: vec![S::one(); order + 1] }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Result<&S> {
        self.coeffs.get(n).ok_or(Error::BeyondOrder { index: n, order: self.order() })
    }

    /// Drops coefficients above `order`. Raising the order is an error.
    pub fn truncate(&self, order: usize) -> Result<Self> {
        if order > self.order() {
            return Err(Error::BeyondOrder { index: order, order: self.order() });
        }
        Ok(Self { coeffs: self.coeffs[..=order].to_vec() })
    }

    /// Index of the first coefficient that is not exactly zero.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// `coeff[0] = 0` and `coeff[1] = 1` (the `z + a_2 z^2 + ...` form).
    pub fn is_normalized(&self) -> bool {
        self.order() >= 1
            && self.coeffs[0].is_negligible(STRUCTURAL_TOL)
            && (self.coeffs[1].clone() - S::one()).is_negligible(STRUCTURAL_TOL)
    }

    /// True iff this is `z` up to the series order, under the backend's tolerance.
    pub fn is_identity(&self, tol: f64) -> bool {
        self.coeffs.iter().enumerate().all(|(n, c)| {
            if n == 1 {
                (c.clone() - S::one()).is_negligible(tol)
            } else {
                c.is_negligible(tol)
            }
        })
    }

    pub fn scale(&self, factor: &S) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.clone() * factor.clone()).collect() }
    }

    pub fn add_constant(&self, c: &S) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = out.coeffs[0].clone() + c.clone();
        out
    }

    /// Multiplication by `z^k`; the known order grows by `k`.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![S::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self { coeffs }
    }

    /// Division by `z^k`; the first `k` coefficients must be exactly zero.
    pub fn shift_down(&self, k: usize) -> Result<Self> {
        if k > self.order() {
            return Err(Error::TooShort(self.order()));
        }
        if self.coeffs[..k].iter().any(|c| !c.is_zero()) {
            return Err(Error::LeadingCoefficient(format!("cannot divide by z^{k}: lower terms present")));
        }
        Ok(Self { coeffs: self.coeffs[k..].to_vec() })
    }

    /// `F(z) -> F(z^m)`. Known order becomes `m*order + m - 1`, since the
    /// first unknown term of `F` lands on `z^{m(order+1)}`.
    pub fn substitute_power(&self, m: usize) -> Self {
        assert!(m >= 1, "fold order must be positive");
        let order = m * self.order() + m - 1;
        let mut coeffs = vec![S::zero(); order + 1];
        for (n, c) in self.coeffs.iter().enumerate() {
            coeffs[n * m] = c.clone();
        }
        Self { coeffs }
    }

    pub fn try_add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let coeffs = (0..=order).map(|n| self.coeffs[n].clone() + other.coeffs[n].clone()).collect();
        Self { coeffs }
    }

    pub fn try_sub(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let coeffs = (0..=order).map(|n| self.coeffs[n].clone() - other.coeffs[n].clone()).collect();
        Self { coeffs }
    }

    /// Schoolbook product truncated at `min(order_a, order_b)`. Zero
    /// coefficients are skipped, which matters for sparse m-fold series.
    pub fn try_mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut coeffs = vec![S::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self { coeffs }
    }

    /// `self / other`.
    ///
    /// When `other` has a nonzero constant term this is ordinary series
    /// division. Otherwise the common factor `z^v` (`v` the valuation of
    /// `other`) is cancelled first, which lowers the known order by `v`.
    pub fn div(&self, other: &Self) -> Result<Self> {
        let v = other
            .valuation()
            .ok_or_else(|| Error::LeadingCoefficient("division by the zero series".into()))?;
        let (num, den) = if v == 0 {
            (self.clone(), other.clone())
        } else {
            if v > self.order() {
                return Err(Error::TooShort(self.order()));
            }
            (self.shift_down(v)?, other.shift_down(v)?)
        };
        let order = num.order().min(den.order());
        let lead = den.coeffs[0].clone();
        let mut out: Vec<S> = Vec::with_capacity(order + 1);
        for n in 0..=order {
            let mut acc = num.coeffs[n].clone();
            for k in 1..=n {
                if den.coeffs[k].is_zero() {
                    continue;
                }
                acc = acc - den.coeffs[k].clone() * out[n - k].clone();
            }
            out.push(acc / lead.clone());
        }
        Ok(Self { coeffs: out })
    }

    /// `1 / self`; requires a nonzero constant term.
    pub fn recip(&self) -> Result<Self> {
        if self.coeffs[0].is_zero() {
            return Err(Error::LeadingCoefficient("reciprocal of a series with zero constant term".into()));
        }
        Self::one(self.order()).div(self)
    }

    /// Termwise derivative; the known order drops by one.
    pub fn derivative(&self) -> Result<Self> {
        if self.order() == 0 {
            return Err(Error::TooShort(0));
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| c.clone() * S::from_int(n as i64))
            .collect();
        Ok(Self { coeffs })
    }

    /// `outer(inner)` by Horner's rule in the series ring. `inner` must have
    /// zero constant term; the result is known to `min(order_outer, order_inner)`.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self> {
        if !inner.coeffs[0].is_zero() {
            return Err(Error::NonzeroInnerConstant);
        }
        let order = outer.order().min(inner.order());
        let inner = inner.truncate(order)?;
        let mut acc = Self::constant(outer.coeffs[order].clone(), order);
        for k in (0..order).rev() {
            acc = acc.try_mul(&inner).add_constant(&outer.coeffs[k]);
        }
        Ok(acc)
    }

    /// Natural logarithm of a series with constant term 1, via `a L' = a'`.
    pub fn log1(&self) -> Result<Self> {
        self.require_unit_constant("log1")?;
        let order = self.order();
        let a = &self.coeffs;
        let mut log: Vec<S> = vec![S::zero(); order + 1];
        for n in 1..=order {
            let mut acc = a[n].clone() * S::from_int(n as i64);
            for k in 1..n {
                if a[n - k].is_zero() || log[k].is_zero() {
                    continue;
                }
                acc = acc - S::from_int(k as i64) * log[k].clone() * a[n - k].clone();
            }
            log[n] = acc / S::from_int(n as i64);
        }
        Ok(Self { coeffs: log })
    }

    /// Exponential of a series with zero constant term, via `b' = a' b`.
    pub fn exp0(&self) -> Result<Self> {
        if !self.coeffs[0].is_negligible(STRUCTURAL_TOL) {
            return Err(Error::LeadingCoefficient("exp0 needs a zero constant term".into()));
        }
        let order = self.order();
        let a = &self.coeffs;
        let mut out: Vec<S> = vec![S::zero(); order + 1];
        out[0] = S::one();
        for n in 1..=order {
            let mut acc = S::zero();
            for k in 1..=n {
                if a[k].is_zero() || out[n - k].is_zero() {
                    continue;
                }
                acc = acc + S::from_int(k as i64) * a[k].clone() * out[n - k].clone();
            }
            out[n] = acc / S::from_int(n as i64);
        }
        Ok(Self { coeffs: out })
    }

    /// `self^exponent = exp(exponent * log(self))` for a series with constant
    /// term 1. Rational input and exponent give an exactly rational result.
    pub fn pow(&self, exponent: &BigRational) -> Result<Self> {
        self.require_unit_constant("pow")?;
        if exponent.is_zero() {
            return Ok(Self::one(self.order()));
        }
        if exponent.is_one() {
            return Ok(self.clone());
        }
        let factor = S::from_rational(exponent);
        self.log1()?.scale(&factor).exp0()
    }

    /// Compositional inverse of a normalized series.
    ///
    /// Solves `f(g(w)) = w` one coefficient at a time: with `b_1..b_{n-1}`
    /// fixed, `[w^n] f(g) = b_n + sum_{k>=2} a_k [w^n] g^k` and the right-hand
    /// sum only involves known coefficients. A table of `[w^n] g^k` is filled
    /// column by column, so the whole inversion costs `O(order^3)`.
    pub fn revert(&self) -> Result<Self> {
        if !self.is_normalized() {
            return Err(Error::NotNormalized);
        }
        let order = self.order();
        let a = &self.coeffs;
        // powers[k][n] = [w^n] g^k, for 1 <= k <= order
        let mut powers: Vec<Vec<S>> = vec![vec![S::zero(); order + 1]; order + 1];
        let mut b: Vec<S> = vec![S::zero(); order + 1];
        b[1] = S::one();
        powers[1][1] = S::one();
        for n in 2..=order {
            for k in 2..=n {
                let mut acc = S::zero();
                for j in 1..=(n + 1 - k) {
                    let prev = &powers[k - 1][n - j];
                    if b[j].is_zero() || prev.is_zero() {
                        continue;
                    }
                    acc = acc + b[j].clone() * prev.clone();
                }
                powers[k][n] = acc;
            }
            let mut bn = S::zero();
            for k in 2..=n {
                if a[k].is_zero() || powers[k][n].is_zero() {
                    continue;
                }
                bn = bn - a[k].clone() * powers[k][n].clone();
            }
            powers[1][n] = bn.clone();
            b[n] = bn;
        }
        Ok(Self { coeffs: b })
    }

    /// Horner evaluation of the truncated polynomial at `z`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c.to_complex64())
    }

    /// Value and derivative of the truncated polynomial at `z`.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut value = Complex64::new(0.0, 0.0);
        let mut deriv = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            deriv = deriv * z + value;
            value = value * z + c.to_complex64();
        }
        (value, deriv)
    }

    pub fn to_complex64(&self) -> TruncatedSeries<Complex64> {
        TruncatedSeries { coeffs: self.coeffs.iter().map(Scalar::to_complex64).collect() }
    }

    /// Largest coefficient magnitude difference against `other` over the common order.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| (a.clone() - b.clone()).magnitude())
            .fold(0.0, f64::max)
    }

    fn require_unit_constant(&self, op: &str) -> Result<()> {
        if (self.coeffs[0].clone() - S::one()).is_negligible(STRUCTURAL_TOL) {
            Ok(())
        } else {
            Err(Error::LeadingCoefficient(format!("{op} needs constant term 1")))
        }
    }
}

impl<S: Scalar> Add for &TruncatedSeries<S> {
    type Output = TruncatedSeries<S>;
    fn add(self, rhs: Self) -> TruncatedSeries<S> {
        self.try_add(rhs)
    }
}

impl<S: Scalar> Sub for &TruncatedSeries<S> {
    type Output = TruncatedSeries<S>;
    fn sub(self, rhs: Self) -> TruncatedSeries<S> {
        self.try_sub(rhs)
    }
}

impl<S: Scalar> Mul for &TruncatedSeries<S> {
    type Output = TruncatedSeries<S>;
    fn mul(self, rhs: Self) -> TruncatedSeries<S> {
        self.try_mul(rhs)
    }
}

impl<S: Scalar> Neg for &TruncatedSeries<S> {
    type Output = TruncatedSeries<S>;
    fn neg(self) -> TruncatedSeries<S> {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        rational(n, d)
    }

    fn qs(values: &[(i64, i64)], order: usize) -> TruncatedSeries<Q> {
        let c: Vec<Q> = values.iter().map(|&(n, d)| q(n, d)).collect();
        TruncatedSeries::from_polynomial(&c, order)
    }

    fn ints(values: &[i64], order: usize) -> TruncatedSeries<Q> {
        let c: Vec<Q> = values.iter().map(|&n| q(n, 1)).collect();
        TruncatedSeries::from_polynomial(&c, order)
    }

    // Untruncated polynomial product, independent of the series code.
    fn poly_mul(a: &[Q], b: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    #[test]
    fn products_from_the_examples() {
        let a = ints(&[1, 1], 6);
        let b = ints(&[1, -1], 6);
        assert_eq!(&a * &b, ints(&[1, 0, -1], 6));
        let z = TruncatedSeries::<Q>::identity(6);
        assert_eq!(&z * &z, ints(&[0, 0, 1], 6));
        let c = ints(&[1, 2, 2], 6);
        assert_eq!(&c * &TruncatedSeries::one(6), c);
    }

    #[test]
    fn products_truncate_at_min_order() {
        let a = ints(&[1, 1], 3);
        let b = ints(&[1, 1], 5);
        let p = &a * &b;
        assert_eq!(p.order(), 3);
        assert!(p.coeff(4).is_err());
        assert_eq!((&a + &b).order(), 3);
    }

    #[test]
    fn reading_past_order_is_an_error() {
        let s = ints(&[1, 2, 3], 2);
        assert_eq!(s.coeff(3), Err(Error::BeyondOrder { index: 3, order: 2 }));
        assert!(s.truncate(5).is_err());
    }

    #[test]
    fn geometric_series_by_division() {
        let one = TruncatedSeries::<Q>::one(8);
        let den = ints(&[1, -1], 8);
        assert_eq!(one.div(&den).unwrap(), TruncatedSeries::geometric(8));
        let z = TruncatedSeries::<Q>::identity(8);
        let r = z.div(&z).unwrap();
        assert_eq!(r, TruncatedSeries::one(7));
    }

    #[test]
    fn z_fprime_over_f_for_geometric() {
        // f = z/(1-z) = z + z^2 + ...; by the quotient rule f' = 1/(1-z)^2,
        // so z f'/f = 1/(1-z).
        let n = 10;
        let f = TruncatedSeries::<Q>::geometric(n - 1).shift_up(1);
        let zfp = f.derivative().unwrap().shift_up(1);
        let r = zfp.div(&f).unwrap();
        assert_eq!(r.order(), n - 1);
        assert_eq!(r, TruncatedSeries::geometric(n - 1));
    }

    #[test]
    fn division_errors() {
        let z = TruncatedSeries::<Q>::identity(4);
        let one = TruncatedSeries::<Q>::one(4);
        assert!(one.div(&z).is_err());
        assert!(one.div(&TruncatedSeries::zero(4)).is_err());
        assert!(z.recip().is_err());
    }

    #[test]
    fn composition_examples() {
        let f = ints(&[0, 1, 1], 6);
        let z = TruncatedSeries::<Q>::identity(6);
        assert_eq!(TruncatedSeries::compose(&f, &z).unwrap(), f);
        assert_eq!(TruncatedSeries::compose(&z, &f).unwrap(), f);

        // Oracle: expand (z+z^2) - (z+z^2)^2 as plain polynomials.
        let inner = vec![q(0, 1), q(1, 1), q(1, 1)];
        let sq = poly_mul(&inner, &inner);
        let mut expected = vec![Q::zero(); sq.len()];
        for (i, c) in inner.iter().enumerate() {
            expected[i] += c;
        }
        for (i, c) in sq.iter().enumerate() {
            expected[i] -= c;
        }
        let outer = ints(&[0, 1, -1], 6);
        let got = TruncatedSeries::compose(&outer, &f).unwrap();
        assert_eq!(got, TruncatedSeries::from_polynomial(&expected, 6));
        assert_eq!(got, ints(&[0, 1, 0, -2, -1], 6));
    }

    #[test]
    fn composition_requires_zero_inner_constant() {
        let f = ints(&[0, 1, 1], 4);
        let g = ints(&[1, 1], 4);
        assert_eq!(TruncatedSeries::compose(&f, &g), Err(Error::NonzeroInnerConstant));
    }

    #[test]
    fn derivatives() {
        let z = TruncatedSeries::<Q>::identity(5);
        assert_eq!(z.derivative().unwrap(), TruncatedSeries::one(4));
        let f = qs(&[(0, 1), (1, 1), (3, 7)], 5);
        assert_eq!(f.derivative().unwrap(), qs(&[(1, 1), (6, 7)], 4));
        // termwise rule on z/(1-z): n-th coefficient of the derivative is n+1
        let g = TruncatedSeries::<Q>::geometric(9).shift_up(1);
        let d = g.derivative().unwrap();
        for (n, c) in d.coeffs().iter().enumerate() {
            assert_eq!(*c, q(n as i64 + 1, 1));
        }
        assert_eq!(TruncatedSeries::<Q>::one(0).derivative(), Err(Error::TooShort(0)));
    }

    fn binomial(r: &Q, n: usize) -> Q {
        let mut c = Q::one();
        for i in 0..n {
            c = c * (r - Q::from_integer((i as i64).into())) / Q::from_integer(((i + 1) as i64).into());
        }
        c
    }

    #[test]
    fn powers_and_logs() {
        let a = ints(&[1, 1], 12);
        assert_eq!(a.pow(&q(1, 1)).unwrap(), a);

        let half = q(1, 2);
        let root = a.pow(&half).unwrap();
        for n in 0..=12 {
            assert_eq!(root.coeffs()[n], binomial(&half, n), "n = {n}");
        }
        assert_eq!(root.coeffs()[2], q(-1, 8));

        // -log(1-z) = sum z^n / n, obtained by integrating 1/(1-z) termwise
        let l = TruncatedSeries::<Q>::geometric(12).log1().unwrap();
        assert_eq!(l.coeffs()[0], Q::zero());
        for n in 1..=12 {
            assert_eq!(l.coeffs()[n], q(1, n as i64));
        }
    }

    #[test]
    fn exp_inverts_log() {
        let a = qs(&[(1, 1), (2, 3), (-1, 5), (0, 1), (7, 2)], 10);
        assert_eq!(a.log1().unwrap().exp0().unwrap(), a);
    }

    #[test]
    fn leading_coefficient_checks() {
        let a = ints(&[2, 1], 4);
        assert!(matches!(a.log1(), Err(Error::LeadingCoefficient(_))));
        assert!(matches!(a.pow(&q(1, 2)), Err(Error::LeadingCoefficient(_))));
        assert!(matches!(a.exp0(), Err(Error::LeadingCoefficient(_))));
    }

    #[test]
    fn reversion_examples() {
        let z = TruncatedSeries::<Q>::identity(7);
        assert_eq!(z.revert().unwrap(), z);

        // z + z^3: brute-force Lagrange coefficients b_{2k+1} = (-1)^k C(3k,k)/(2k+1)
        let f = ints(&[0, 1, 0, 1], 9);
        let g = f.revert().unwrap();
        assert_eq!(g, ints(&[0, 1, 0, -1, 0, 3, 0, -12, 0, 55], 9));

        let not_normalized = ints(&[0, 2, 1], 4);
        assert_eq!(not_normalized.revert(), Err(Error::NotNormalized));
        assert_eq!(ints(&[1, 1], 4).revert(), Err(Error::NotNormalized));
    }

    #[test]
    fn reversion_matches_the_four_term_inverse() {
        let (a2, a3, a4) = (q(2, 3), q(-5, 7), q(3, 2));
        let f = TruncatedSeries::from_polynomial(&[Q::zero(), Q::one(), a2.clone(), a3.clone(), a4.clone()], 4);
        let g = f.revert().unwrap();
        let two = q(2, 1);
        let five = q(5, 1);
        assert_eq!(g.coeffs()[2], -a2.clone());
        assert_eq!(g.coeffs()[3], &two * &a2 * &a2 - &a3);
        assert_eq!(g.coeffs()[4], -(&five * &a2 * &a2 * &a2 - &five * &a2 * &a3 + &a4));
    }

    #[test]
    fn float_evaluation() {
        let s = TruncatedSeries::<Complex64>::from_polynomial(&[Complex64::new(1.0, 0.0); 3], 2);
        assert_eq!(s.eval(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
        let z = TruncatedSeries::<Complex64>::identity(3);
        assert_eq!(z.eval(Complex64::new(0.0, 0.5)), Complex64::new(0.0, 0.5));
        let geo = TruncatedSeries::<Complex64>::geometric(30);
        let v = geo.eval(Complex64::new(0.5, 0.0));
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn value_and_derivative_agree_with_series_derivative() {
        let s = TruncatedSeries::<Complex64>::from_polynomial(
            &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.5, -0.25), Complex64::new(0.0, 2.0)],
            3,
        );
        let z = Complex64::new(0.3, -0.2);
        let (v, d) = s.eval_with_derivative(z);
        assert!((v - s.eval(z)).norm() < 1e-15);
        assert!((d - s.derivative().unwrap().eval(z)).norm() < 1e-15);
    }

    #[test]
    fn substitution_order() {
        let s = ints(&[1, 2, 3], 2);
        let t = s.substitute_power(3);
        assert_eq!(t.order(), 8);
        assert_eq!(t, ints(&[1, 0, 0, 2, 0, 0, 3], 8));
    }
}
