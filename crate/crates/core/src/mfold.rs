//! m-fold symmetric normalized functions `z + sum_k a_{mk+1} z^{mk+1}`,
//! the first three coefficients of their inverse, and the root transform
//! `h(z) = f(z^m)^{1/m}` that produces them from one-fold functions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{rational, Scalar};
use crate::series::{default_order_for_fold, TruncatedSeries, STRUCTURAL_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct MFoldFunction<S> {
    m: usize,
    /// `coeffs[k - 1] = a_{mk+1}`
    coeffs: Vec<S>,
}

/// `b_{m+1}, b_{2m+1}, b_{3m+1}` of `g = f^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseCoefficients<S> {
    pub b_m1: S,
    pub b_2m1: S,
    pub b_3m1: S,
}

impl<S: Scalar> InverseCoefficients<S> {
    pub fn as_array(&self) -> [&S; 3] {
        [&self.b_m1, &self.b_2m1, &self.b_3m1]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| ((*a).clone() - b.clone()).magnitude())
            .fold(0.0, f64::max)
    }
}

impl<S: Scalar> MFoldFunction<S> {
    pub fn new(m: usize, coeffs: Vec<S>) -> Result<Self> {
        if m == 0 {
            return Err(Error::OutOfRange("fold order m must be at least 1".into()));
        }
        Ok(Self { m, coeffs })
    }

    pub fn identity(m: usize) -> Result<Self> {
        Self::new(m, vec![S::zero(); 3])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn depth(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// `a_{mk+1}`, zero beyond the stored depth.
    pub fn a(&self, k: usize) -> S {
        assert!(k >= 1, "a_{{mk+1}} is indexed from k = 1");
        self.coeffs.get(k - 1).cloned().unwrap_or_else(S::zero)
    }

    /// Expansion up to `order`, treating coefficients past the stored depth as zero.
    pub fn to_series(&self, order: usize) -> TruncatedSeries<S> {
        let mut c = vec![S::zero(); order + 1];
        if order >= 1 {
            c[1] = S::one();
        }
        for (k, a) in self.coeffs.iter().enumerate() {
            let e = self.m * (k + 1) + 1;
            if e <= order {
                c[e] = a.clone();
            }
        }
        TruncatedSeries::new(c)
    }

    /// Reads an m-fold function off a normalized series, checking that every
    /// exponent not congruent to 1 mod m carries a zero coefficient.
    pub fn from_series(series: &TruncatedSeries<S>, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::OutOfRange("fold order m must be at least 1".into()));
        }
        if !series.is_normalized() {
            return Err(Error::NotNormalized);
        }
        check_symmetry(series, m, 1)?;
        let coeffs = (1..)
            .map(|k| m * k + 1)
            .take_while(|&e| e <= series.order())
            .map(|e| series.coeffs()[e].clone())
            .collect();
        Self::new(m, coeffs)
    }

    fn require_depth(&self) -> Result<()> {
        if self.depth() < 3 {
            return Err(Error::OutOfRange(format!(
                "inverse-coefficient checks need a_{{m+1}}, a_{{2m+1}}, a_{{3m+1}} (depth 3), got depth {}",
                self.depth()
            )));
        }
        Ok(())
    }

    /// Closed form for the first three inverse coefficients:
    ///
    /// ```text
    /// b_{m+1}  = -a_{m+1}
    /// b_{2m+1} = (m+1) a_{m+1}^2 - a_{2m+1}
    /// b_{3m+1} = -[ (m+1)(3m+2)/2 a_{m+1}^3 - (3m+2) a_{m+1} a_{2m+1} + a_{3m+1} ]
    /// ```
    pub fn inverse_closed_form(&self) -> Result<InverseCoefficients<S>> {
        self.require_depth()?;
        let m = self.m as i64;
        let (a1, a2, a3) = (self.a(1), self.a(2), self.a(3));
        let b_m1 = -a1.clone();
        let b_2m1 = S::from_int(m + 1) * a1.clone() * a1.clone() - a2.clone();
        let cubic = S::from_rational(&rational((m + 1) * (3 * m + 2), 2)) * a1.clone() * a1.clone() * a1.clone();
        let b_3m1 = -(cubic - S::from_int(3 * m + 2) * a1 * a2 + a3);
        Ok(InverseCoefficients { b_m1, b_2m1, b_3m1 })
    }

    /// The same three coefficients read off the reverted series of order `3m+2`.
    /// Fails with [`Error::SymmetryViolation`] if the reversion produces a
    /// nonzero coefficient outside the m-fold pattern.
    pub fn inverse_by_reversion(&self) -> Result<InverseCoefficients<S>> {
        self.require_depth()?;
        let g = self.inverse_series(default_order_for_fold(self.m))?;
        let m = self.m;
        Ok(InverseCoefficients {
            b_m1: g.coeffs()[m + 1].clone(),
            b_2m1: g.coeffs()[2 * m + 1].clone(),
            b_3m1: g.coeffs()[3 * m + 1].clone(),
        })
    }

    /// Reverted series to arbitrary order, symmetry-checked.
    pub fn inverse_series(&self, order: usize) -> Result<TruncatedSeries<S>> {
        let g = self.to_series(order).revert()?;
        check_symmetry(&g, self.m, 1)?;
        Ok(g)
    }
}

/// Every coefficient at an exponent not congruent to `residue` mod `m` must vanish.
pub fn check_symmetry<S: Scalar>(series: &TruncatedSeries<S>, m: usize, residue: usize) -> Result<()> {
    for (e, c) in series.coeffs().iter().enumerate() {
        if e % m != residue % m && !c.is_negligible(STRUCTURAL_TOL) {
            return Err(Error::SymmetryViolation { m, exponent: e });
        }
    }
    Ok(())
}

/// `h(z) = f(z^m)^{1/m}`, computed as `z (f(z^m)/z^m)^{1/m}` so the power is
/// taken of a series with constant term 1. A normalized `f` of order `N`
/// yields an m-fold symmetric normalized `h` of order `mN`.
pub fn root_transform<S: Scalar>(f: &TruncatedSeries<S>, m: usize) -> Result<TruncatedSeries<S>> {
    if m == 0 {
        return Err(Error::OutOfRange("fold order m must be at least 1".into()));
    }
    if !f.is_normalized() {
        return Err(Error::NotNormalized);
    }
    if m == 1 {
        return Ok(f.clone());
    }
    let quotient = f.shift_down(1)?;
    let inner = quotient.substitute_power(m);
    let exponent = BigRational::new(BigInt::one(), BigInt::from(m));
    Ok(inner.pow(&exponent)?.shift_up(1))
}

pub const CATALOG_NAMES: &[&str] = &[
    "identity",
    "geometric",
    "log",
    "atanh",
    "mfold-geometric",
    "mfold-log",
    "mfold-atanh",
    "mfold-geometric-as-printed",
    "mfold-atanh-as-printed",
];

/// A named example function expanded to a requested order.
#[derive(Debug, Clone)]
pub struct CatalogExpansion<S> {
    pub name: String,
    pub m: usize,
    pub series: TruncatedSeries<S>,
    /// Present when the expansion is normalized with the m-fold exponent pattern.
    pub mfold: Option<MFoldFunction<S>>,
}

/// One-fold base functions; exact rational coefficients.
fn base_series<S: Scalar>(name: &str, order: usize) -> Option<TruncatedSeries<S>> {
    let coeff = |n: usize| -> S {
        match name {
            "identity" => {
                if n == 1 {
                    S::one()
                } else {
                    S::zero()
                }
            }
            // z/(1-z)
            "geometric" => S::one(),
            // -log(1-z)
            "log" => S::from_rational(&rational(1, n as i64)),
            // (1/2) log((1+z)/(1-z))
            "atanh" => {
                if n % 2 == 1 {
                    S::from_rational(&rational(1, n as i64))
                } else {
                    S::zero()
                }
            }
            _ => unreachable!(),
        }
    };
    if !matches!(name, "identity" | "geometric" | "log" | "atanh") {
        return None;
    }
    let mut c = vec![S::zero(); order + 1];
    for (n, slot) in c.iter_mut().enumerate().skip(1) {
        *slot = coeff(n);
    }
    Some(TruncatedSeries::new(c))
}

/// Expands a named example function.
///
/// One-fold names (`identity`, `geometric`, `log`, `atanh`) require `m = 1`.
/// The `mfold-*` names are the root transforms `[f(z^m)]^{1/m}` of the
/// corresponding base function. The `*-as-printed` variants are
/// `(z^m/(1-z^m))^m` and `(1/2) log(((1+z^m)/(1-z^m))^{1/m})`, which are not
/// normalized for `m > 1` and therefore carry no [`MFoldFunction`].
pub fn catalog<S: Scalar>(name: &str, m: usize, order: usize) -> Result<CatalogExpansion<S>> {
    if m == 0 {
        return Err(Error::OutOfRange("fold order m must be at least 1".into()));
    }
    if order < 1 {
        return Err(Error::TooShort(order));
    }
    let series = if let Some(base) = base_series::<S>(name, order) {
        if m != 1 {
            return Err(Error::OutOfRange(format!("{name} is one-fold; use mfold-{name} for m = {m}")));
        }
        base
    } else {
        match name {
            "mfold-geometric" | "mfold-log" | "mfold-atanh" => {
                let base_name = &name["mfold-".len()..];
                let base_order = order.div_ceil(m);
                let base = base_series::<S>(base_name, base_order).expect("known base");
                root_transform(&base, m)?.truncate(order)?
            }
            "mfold-geometric-as-printed" => {
                // z^{m^2} (1 - z^m)^{-m}
                let lead = m * m;
                if lead > order {
                    TruncatedSeries::zero(order)
                } else {
                    let rest = order - lead;
                    let mut one_minus = TruncatedSeries::<S>::one(rest);
                    if m <= rest {
                        one_minus = one_minus.try_sub(&TruncatedSeries::monomial(S::one(), m, rest));
                    }
                    let neg_m = BigRational::from_integer(BigInt::from(-(m as i64)));
                    one_minus.pow(&neg_m)?.shift_up(lead)
                }
            }
            "mfold-atanh-as-printed" => {
                // (1/m) sum_k z^{m(2k+1)} / (2k+1)
                let mut c = vec![S::zero(); order + 1];
                let mut j = 1usize;
                while m * j <= order {
                    c[m * j] = S::from_rational(&rational(1, (m * j) as i64));
                    j += 2;
                }
                TruncatedSeries::new(c)
            }
            _ => return Err(Error::UnknownFunction(name.to_string())),
        }
    };
    let mfold = if series.is_normalized() { MFoldFunction::from_series(&series, m).ok() } else { None };
    Ok(CatalogExpansion { name: name.to_string(), m, series, mfold })
}

/// Checks that `h^m = f(z^m)` through the known order of `h`.
pub fn root_transform_residual<S: Scalar>(f: &TruncatedSeries<S>, h: &TruncatedSeries<S>, m: usize) -> Result<f64> {
    let mut power = h.clone();
    for _ in 1..m {
        power = power.try_mul(h);
    }
    let target = f.substitute_power(m);
    let order = power.order().min(target.order());
    let diff = power.truncate(order)?.try_sub(&target.truncate(order)?);
    Ok(diff.coeffs().iter().map(Scalar::magnitude).fold(0.0, f64::max))
}

impl<S: Scalar> Default for InverseCoefficients<S> {
    fn default() -> Self {
        Self { b_m1: S::zero(), b_2m1: S::zero(), b_3m1: S::zero() }
    }
}

/// A random m-fold function with `depth` rational coefficients, numerators in
/// `-9..=9` and denominators in `1..=9`.
pub fn random_rational_mfold<R: Rng + ?Sized>(rng: &mut R, m: usize, depth: usize) -> Result<MFoldFunction<BigRational>> {
    let coeffs = (0..depth).map(|_| rational(rng.random_range(-9..=9), rng.random_range(1..=9))).collect();
    MFoldFunction::new(m, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        rational(n, d)
    }

    fn series_of(values: &[i64], order: usize) -> TruncatedSeries<Q> {
        let c: Vec<Q> = values.iter().map(|&n| q(n, 1)).collect();
        TruncatedSeries::from_polynomial(&c, order)
    }

    #[test]
    fn to_series_examples() {
        let f = MFoldFunction::new(2, vec![q(1, 1)]).unwrap();
        assert_eq!(f.to_series(3), series_of(&[0, 1, 0, 1], 3));
        let g = MFoldFunction::new(1, vec![q(2, 1), q(3, 1), q(4, 1)]).unwrap();
        assert_eq!(g.to_series(4), series_of(&[0, 1, 2, 3, 4], 4));
        let id = MFoldFunction::<Q>::identity(3).unwrap();
        assert_eq!(id.to_series(11), TruncatedSeries::identity(11));
        assert!(MFoldFunction::<Q>::new(0, vec![]).is_err());
    }

    #[test]
    fn closed_form_at_m1_is_the_one_fold_inverse() {
        let (a2, a3, a4) = (q(3, 4), q(-2, 5), q(7, 3));
        let f = MFoldFunction::new(1, vec![a2.clone(), a3.clone(), a4.clone()]).unwrap();
        let b = f.inverse_closed_form().unwrap();
        assert_eq!(b.b_m1, -a2.clone());
        assert_eq!(b.b_2m1, q(2, 1) * &a2 * &a2 - &a3);
        assert_eq!(b.b_3m1, -(q(5, 1) * &a2 * &a2 * &a2 - q(5, 1) * &a2 * &a3 + &a4));
    }

    #[test]
    fn identity_inverts_to_zero_coefficients() {
        for m in 1..=4 {
            let f = MFoldFunction::<Q>::identity(m).unwrap();
            assert_eq!(f.inverse_closed_form().unwrap(), InverseCoefficients::default());
            assert_eq!(f.inverse_by_reversion().unwrap(), InverseCoefficients::default());
        }
    }

    #[test]
    fn m2_instances() {
        let f = MFoldFunction::new(2, vec![q(1, 2), q(1, 3), q(0, 1)]).unwrap();
        let closed = f.inverse_closed_form().unwrap();
        let rev = f.inverse_by_reversion().unwrap();
        assert_eq!(closed.b_m1, q(-1, 2));
        assert_eq!(closed.b_2m1, q(5, 12));
        // -[ (3*8/2)(1/8) - 8 (1/2)(1/3) + 0 ] = -(3/2 - 4/3) = -1/6
        assert_eq!(closed.b_3m1, q(-1, 6));
        assert_eq!(closed, rev);

        let g = MFoldFunction::new(2, vec![q(1, 1), q(0, 1), q(0, 1)]).unwrap();
        let expected = InverseCoefficients { b_m1: q(-1, 1), b_2m1: q(3, 1), b_3m1: q(-12, 1) };
        assert_eq!(g.inverse_closed_form().unwrap(), expected);
        assert_eq!(g.inverse_by_reversion().unwrap(), expected);
    }

    #[test]
    fn depth_is_required() {
        let f = MFoldFunction::new(2, vec![q(1, 1)]).unwrap();
        assert!(f.inverse_closed_form().is_err());
        assert!(f.inverse_by_reversion().is_err());
    }

    #[test]
    fn symmetry_check_flags_stray_terms() {
        let s = series_of(&[0, 1, 1, 1], 3);
        assert_eq!(check_symmetry(&s, 2, 1), Err(Error::SymmetryViolation { m: 2, exponent: 2 }));
        assert!(MFoldFunction::from_series(&s, 2).is_err());
        assert!(MFoldFunction::from_series(&s, 1).is_ok());
    }

    fn binomial(r: &Q, n: usize) -> Q {
        let mut c = Q::one();
        for i in 0..n {
            c = c * (r - Q::from_integer((i as i64).into())) / Q::from_integer(((i + 1) as i64).into());
        }
        c
    }

    #[test]
    fn root_transform_examples() {
        let z = TruncatedSeries::<Q>::identity(6);
        for m in 1..=4 {
            assert_eq!(root_transform(&z, m).unwrap().truncate(6).unwrap(), z);
        }

        let geo = TruncatedSeries::<Q>::geometric(7).shift_up(1);
        assert_eq!(root_transform(&geo, 1).unwrap(), geo);

        // z (1 - z^2)^{-1/2}: coefficient of z^{2k+1} is (-1)^k C(-1/2, k)
        let h = root_transform(&geo, 2).unwrap();
        assert_eq!(h.order(), 16);
        let neg_half = q(-1, 2);
        for k in 0..8 {
            let sign = if k % 2 == 0 { q(1, 1) } else { q(-1, 1) };
            assert_eq!(h.coeffs()[2 * k + 1], sign * binomial(&neg_half, k), "k = {k}");
            assert!(h.coeffs()[2 * k].is_zero());
        }
        assert_eq!(h.coeffs()[3], q(1, 2));
        assert_eq!(h.coeffs()[5], q(3, 8));
        assert_eq!(root_transform_residual(&geo, &h, 2).unwrap(), 0.0);
    }

    #[test]
    fn catalog_entries() {
        let geo = catalog::<Q>("geometric", 1, 6).unwrap();
        assert_eq!(geo.series, series_of(&[0, 1, 1, 1, 1, 1, 1], 6));
        assert!(geo.mfold.is_some());

        let log = catalog::<Q>("log", 1, 4).unwrap();
        assert_eq!(log.series.coeffs()[3], q(1, 3));

        let mg = catalog::<Q>("mfold-geometric", 2, 9).unwrap();
        let direct = root_transform(&TruncatedSeries::<Q>::geometric(4).shift_up(1), 2).unwrap();
        assert_eq!(mg.series, direct.truncate(9).unwrap());
        assert_eq!(mg.mfold.as_ref().unwrap().m(), 2);

        for m in 1..=4 {
            for name in ["mfold-geometric", "mfold-log", "mfold-atanh"] {
                let e = catalog::<Q>(name, m, 3 * m + 2).unwrap();
                assert!(e.mfold.is_some(), "{name} m={m}");
            }
        }

        let printed = catalog::<Q>("mfold-geometric-as-printed", 2, 10).unwrap();
        assert!(printed.mfold.is_none());
        assert_eq!(printed.series.coeffs()[4], q(1, 1));
        assert_eq!(printed.series.coeffs()[6], q(2, 1));

        assert!(matches!(catalog::<Q>("koebe", 1, 5), Err(Error::UnknownFunction(_))));
        assert!(catalog::<Q>("geometric", 2, 5).is_err());
    }
}
