//! Coefficient bounds for `|a_{m+1}|` and `|a_{2m+1}|` in the two classes,
//! their `lambda = 1` and `m = 1` reductions, and exact checks of those
//! reductions on squared quantities.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::classfun::{ClassKind, ClassSpec};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, rational_to_f64};

/// Bounds on `|a_{m+1}|` and `|a_{2m+1}|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundPair {
    pub a_m1: f64,
    pub a_2m1: f64,
}

/// Exact form: `B1^2` and `B2`, both rational for rational parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactBoundPair {
    pub a_m1_squared: BigRational,
    pub a_2m1: BigRational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Corollary {
    /// `lambda = 1`, arg type.
    Six,
    /// `lambda = 1`, real-part type.
    Seven,
    /// `lambda = 1, m = 1`, arg type.
    Ten,
    /// `lambda = 1, m = 1`, real-part type.
    Eleven,
}

impl Corollary {
    pub fn from_number(n: u32) -> Result<Self> {
        match n {
            6 => Ok(Self::Six),
            7 => Ok(Self::Seven),
            10 => Ok(Self::Ten),
            11 => Ok(Self::Eleven),
            _ => Err(Error::OutOfRange(format!("no corollary {n}; expected 6, 7, 10 or 11"))),
        }
    }

    pub fn number(self) -> u32 {
        match self {
            Self::Six => 6,
            Self::Seven => 7,
            Self::Ten => 10,
            Self::Eleven => 11,
        }
    }

    fn kind(self) -> ClassKind {
        match self {
            Self::Six | Self::Ten => ClassKind::Arg,
            Self::Seven | Self::Eleven => ClassKind::Re,
        }
    }
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::OutOfRange("m must be at least 1".into()));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::OutOfRange(format!("alpha = {alpha} must satisfy 0 < alpha <= 1")));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::OutOfRange(format!("beta = {beta} must satisfy 0 <= beta < 1")));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::OutOfRange(format!("lambda = {lambda} must satisfy 0 < lambda <= 1")));
    }
    Ok(())
}

/// `(1+lambda)[4 lambda alpha + (1+lambda)(1-alpha)] + 2 alpha (1-lambda)`
pub fn radicand_alpha(alpha: f64, lambda: f64) -> f64 {
    (1.0 + lambda) * (4.0 * lambda * alpha + (1.0 + lambda) * (1.0 - alpha)) + 2.0 * alpha * (1.0 - lambda)
}

pub fn radicand_alpha_exact(alpha: &BigRational, lambda: &BigRational) -> BigRational {
    let one = BigRational::one();
    let two = int(2);
    let four = int(4);
    (&one + lambda) * (four * lambda * alpha + (&one + lambda) * (&one - alpha)) + two * alpha * (&one - lambda)
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Bounds for the arg-type class with parameters `(m, alpha, lambda)`.
pub fn bound_alpha(m: usize, alpha: f64, lambda: f64) -> Result<BoundPair> {
    check_m(m)?;
    check_alpha(alpha)?;
    check_lambda(lambda)?;
    let mf = m as f64;
    let a_m1 = 4.0 * lambda * alpha / (mf * radicand_alpha(alpha, lambda).sqrt());
    let a_2m1 = 2.0 * lambda * alpha / (mf * (1.0 + lambda))
        + 8.0 * (mf + 1.0) * lambda * lambda * alpha * alpha / (mf * mf * (1.0 + lambda) * (1.0 + lambda));
    Ok(BoundPair { a_m1, a_2m1 })
}

/// Bounds for the real-part class with parameters `(m, beta, lambda)`.
pub fn bound_beta(m: usize, beta: f64, lambda: f64) -> Result<BoundPair> {
    check_m(m)?;
    check_beta(beta)?;
    check_lambda(lambda)?;
    let mf = m as f64;
    let c = 1.0 - beta;
    let a_m1 = 2.0 * lambda / mf * (2.0 * c / (2.0 * lambda * lambda + lambda + 1.0)).sqrt();
    let a_2m1 = 8.0 * (mf + 1.0) * lambda * lambda * c * c / (mf * mf * (1.0 + lambda) * (1.0 + lambda))
        + 2.0 * lambda * c / (mf * (1.0 + lambda));
    Ok(BoundPair { a_m1, a_2m1 })
}

pub fn bound_alpha_exact(m: usize, alpha: &BigRational, lambda: &BigRational) -> Result<ExactBoundPair> {
    check_m(m)?;
    check_alpha(rational_to_f64(alpha))?;
    check_lambda(rational_to_f64(lambda))?;
    let one = BigRational::one();
    let mq = int(m as i64);
    let a_m1_squared = int(16) * lambda * lambda * alpha * alpha / (&mq * &mq * radicand_alpha_exact(alpha, lambda));
    let lp = &one + lambda;
    let a_2m1 = int(2) * lambda * alpha / (&mq * &lp)
        + int(8) * (&mq + &one) * lambda * lambda * alpha * alpha / (&mq * &mq * &lp * &lp);
    Ok(ExactBoundPair { a_m1_squared, a_2m1 })
}

pub fn bound_beta_exact(m: usize, beta: &BigRational, lambda: &BigRational) -> Result<ExactBoundPair> {
    check_m(m)?;
    check_beta(rational_to_f64(beta))?;
    check_lambda(rational_to_f64(lambda))?;
    let one = BigRational::one();
    let mq = int(m as i64);
    let c = &one - beta;
    let lp = &one + lambda;
    let a_m1_squared =
        int(4) * lambda * lambda / (&mq * &mq) * (int(2) * &c / (int(2) * lambda * lambda + lambda + &one));
    let a_2m1 = int(8) * (&mq + &one) * lambda * lambda * &c * &c / (&mq * &mq * &lp * &lp)
        + int(2) * lambda * &c / (&mq * &lp);
    Ok(ExactBoundPair { a_m1_squared, a_2m1 })
}

/// Direct evaluation of the corollary formulas. Corollaries 10 and 11 are
/// stated for `m = 1` only.
pub fn corollary_bounds(which: Corollary, m: usize, param: f64) -> Result<BoundPair> {
    check_m(m)?;
    let mf = m as f64;
    match which {
        Corollary::Six => {
            check_alpha(param)?;
            Ok(BoundPair {
                a_m1: 2.0 * param / (mf * (param + 1.0).sqrt()),
                a_2m1: param / mf + 2.0 * (mf + 1.0) * param * param / (mf * mf),
            })
        }
        Corollary::Seven => {
            check_beta(param)?;
            let c = 1.0 - param;
            Ok(BoundPair { a_m1: (2.0 * c).sqrt() / mf, a_2m1: 2.0 * (mf + 1.0) * c * c / (mf * mf) + c / mf })
        }
        Corollary::Ten => {
            require_m1(m)?;
            check_alpha(param)?;
            Ok(BoundPair { a_m1: 2.0 * param / (param + 1.0).sqrt(), a_2m1: 4.0 * param * param + param })
        }
        Corollary::Eleven => {
            require_m1(m)?;
            check_beta(param)?;
            let c = 1.0 - param;
            Ok(BoundPair { a_m1: (2.0 * c).sqrt(), a_2m1: 4.0 * c * c + c })
        }
    }
}

fn require_m1(m: usize) -> Result<()> {
    if m != 1 {
        return Err(Error::OutOfRange(format!("corollaries 10 and 11 are one-fold (m = 1), got m = {m}")));
    }
    Ok(())
}

/// Squared first bound and second bound of a corollary, exactly.
pub fn corollary_bounds_exact(which: Corollary, m: usize, param: &BigRational) -> Result<ExactBoundPair> {
    check_m(m)?;
    let one = BigRational::one();
    let mq = int(m as i64);
    match which {
        Corollary::Six => {
            check_alpha(rational_to_f64(param))?;
            Ok(ExactBoundPair {
                a_m1_squared: int(4) * param * param / (&mq * &mq * (param + &one)),
                a_2m1: param / &mq + int(2) * (&mq + &one) * param * param / (&mq * &mq),
            })
        }
        Corollary::Seven => {
            check_beta(rational_to_f64(param))?;
            let c = &one - param;
            Ok(ExactBoundPair {
                a_m1_squared: int(2) * &c / (&mq * &mq),
                a_2m1: int(2) * (&mq + &one) * &c * &c / (&mq * &mq) + &c / &mq,
            })
        }
        Corollary::Ten => {
            require_m1(m)?;
            check_alpha(rational_to_f64(param))?;
            Ok(ExactBoundPair {
                a_m1_squared: int(4) * param * param / (param + &one),
                a_2m1: int(4) * param * param + param,
            })
        }
        Corollary::Eleven => {
            require_m1(m)?;
            check_beta(rational_to_f64(param))?;
            let c = &one - param;
            Ok(ExactBoundPair { a_m1_squared: int(2) * &c, a_2m1: int(4) * &c * &c + &c })
        }
    }
}

/// Largest `|a_{m+1}|` allowed by the linear first-coefficient relation
/// together with `|p_m| <= 2`: `4 lambda alpha / (m(1+lambda))`, with
/// `1 - beta` in place of `alpha` for the real-part class.
pub fn linear_ceiling(spec: &ClassSpec) -> f64 {
    let lambda = spec.lambda_f64();
    4.0 * lambda * spec.scale_f64() / (spec.m as f64 * (1.0 + lambda))
}

pub fn bounds_for(spec: &ClassSpec) -> Result<BoundPair> {
    match spec.kind {
        ClassKind::Arg => bound_alpha(spec.m, spec.param_f64(), spec.lambda_f64()),
        ClassKind::Re => bound_beta(spec.m, spec.param_f64(), spec.lambda_f64()),
    }
}

pub fn bounds_for_exact(spec: &ClassSpec) -> Result<ExactBoundPair> {
    match spec.kind {
        ClassKind::Arg => bound_alpha_exact(spec.m, &spec.param, &spec.lambda),
        ClassKind::Re => bound_beta_exact(spec.m, &spec.param, &spec.lambda),
    }
}

/// One comparison inside a [`BoundReport`] or reduction sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionCheck {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: ClassKind,
    pub m: usize,
    pub param: String,
    pub lambda: String,
    pub bound_a_m1: f64,
    pub bound_a_2m1: f64,
    pub reduction_checks: Vec<ReductionCheck>,
}

impl BoundReport {
    /// True when every applicable reduction check matched (vacuously for `lambda != 1`).
    pub fn corollary_match(&self) -> bool {
        self.reduction_checks.iter().all(|c| c.matches)
    }
}

/// Bound values for a spec plus, when `lambda = 1`, the corollary comparisons
/// that apply (6/7 always, 10/11 additionally at `m = 1`).
pub fn bound_report(spec: &ClassSpec) -> Result<BoundReport> {
    let pair = bounds_for(spec)?;
    let mut checks = Vec::new();
    if spec.lambda.is_one() {
        let (general, special) = match spec.kind {
            ClassKind::Arg => (Corollary::Six, Corollary::Ten),
            ClassKind::Re => (Corollary::Seven, Corollary::Eleven),
        };
        checks.extend(compare_with_corollary(spec, general)?);
        if spec.m == 1 {
            checks.extend(compare_with_corollary(spec, special)?);
        }
    }
    Ok(BoundReport {
        kind: spec.kind,
        m: spec.m,
        param: format_rational(&spec.param),
        lambda: format_rational(&spec.lambda),
        bound_a_m1: pair.a_m1,
        bound_a_2m1: pair.a_2m1,
        reduction_checks: checks,
    })
}

/// Exact comparison of `(B1^2, B2)` and a 1e-12 relative float comparison
/// of `(B1, B2)` against a corollary.
fn compare_with_corollary(spec: &ClassSpec, which: Corollary) -> Result<Vec<ReductionCheck>> {
    debug_assert_eq!(which.kind(), spec.kind);
    let exact = bounds_for_exact(spec)?;
    let cor_exact = corollary_bounds_exact(which, spec.m, &spec.param)?;
    let float = bounds_for(spec)?;
    let cor_float = corollary_bounds(which, spec.m, spec.param_f64())?;
    let n = which.number();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
    Ok(vec![
        ReductionCheck {
            name: format!("corollary{n}.a_m1_squared"),
            lhs: format_rational(&exact.a_m1_squared),
            rhs: format_rational(&cor_exact.a_m1_squared),
            matches: exact.a_m1_squared == cor_exact.a_m1_squared,
        },
        ReductionCheck {
            name: format!("corollary{n}.a_2m1"),
            lhs: format_rational(&exact.a_2m1),
            rhs: format_rational(&cor_exact.a_2m1),
            matches: exact.a_2m1 == cor_exact.a_2m1,
        },
        ReductionCheck {
            name: format!("corollary{n}.a_m1_float"),
            lhs: crate::scalar::format_f64(float.a_m1),
            rhs: crate::scalar::format_f64(cor_float.a_m1),
            matches: close(float.a_m1, cor_float.a_m1),
        },
        ReductionCheck {
            name: format!("corollary{n}.a_2m1_float"),
            lhs: crate::scalar::format_f64(float.a_2m1),
            rhs: crate::scalar::format_f64(cor_float.a_2m1),
            matches: close(float.a_2m1, cor_float.a_2m1),
        },
    ])
}

/// Summary of a reduction sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub checks: usize,
    pub mismatches: Vec<ReductionCheck>,
}

impl ReductionReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Checks every `lambda = 1` reduction on the grid `ms x alphas` and
/// `ms x betas`. Parameters outside their class range are skipped.
pub fn verify_reductions(ms: &[usize], alphas: &[BigRational], betas: &[BigRational]) -> Result<ReductionReport> {
    let one = BigRational::one();
    let mut checks = 0;
    let mut mismatches = Vec::new();
    for &m in ms {
        for alpha in alphas {
            if alpha.is_zero() || *alpha > one {
                continue;
            }
            let report = bound_report(&ClassSpec::alpha(m, alpha.clone(), one.clone())?)?;
            checks += report.reduction_checks.len();
            mismatches.extend(report.reduction_checks.into_iter().filter(|c| !c.matches));
        }
        for beta in betas {
            if *beta >= one || *beta < BigRational::zero() {
                continue;
            }
            let report = bound_report(&ClassSpec::beta(m, beta.clone(), one.clone())?)?;
            checks += report.reduction_checks.len();
            mismatches.extend(report.reduction_checks.into_iter().filter(|c| !c.matches));
        }
    }
    Ok(ReductionReport { checks, mismatches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn spot_values() {
        let a = bound_alpha(1, 1.0, 1.0).unwrap();
        assert!((a.a_m1 - SQRT2).abs() < 1e-12);
        assert!((a.a_2m1 - 5.0).abs() < 1e-12);
        let b = bound_beta(1, 0.0, 1.0).unwrap();
        assert!((b.a_m1 - SQRT2).abs() < 1e-12);
        assert!((b.a_2m1 - 5.0).abs() < 1e-12);
    }

    #[test]
    fn bounds_vanish_at_the_parameter_edge() {
        let a = bound_alpha(2, 1e-12, 0.5).unwrap();
        assert!(a.a_m1 < 1e-10 && a.a_2m1 < 1e-10);
        let b = bound_beta(2, 1.0 - 1e-12, 0.5).unwrap();
        assert!(b.a_m1 < 1e-5 && b.a_2m1 < 1e-10);
    }

    #[test]
    fn parameters_out_of_range_are_rejected() {
        assert!(bound_alpha(1, 0.0, 1.0).is_err());
        assert!(bound_alpha(1, 1.5, 1.0).is_err());
        assert!(bound_alpha(1, 0.5, 0.0).is_err());
        assert!(bound_alpha(0, 0.5, 0.5).is_err());
        assert!(bound_beta(1, 1.0, 1.0).is_err());
        assert!(bound_beta(1, -0.1, 1.0).is_err());
        assert!(bound_beta(1, 0.5, 1.1).is_err());
        assert!(bound_alpha(1, f64::NAN, 1.0).is_err());
        assert!(corollary_bounds(Corollary::Ten, 2, 0.5).is_err());
    }

    #[test]
    fn corollary_examples() {
        let c6 = corollary_bounds(Corollary::Six, 2, 1.0).unwrap();
        assert!((c6.a_m1 - 1.0 / SQRT2).abs() < 1e-15);
        let c7 = corollary_bounds(Corollary::Seven, 1, 0.5).unwrap();
        assert!((c7.a_m1 - 1.0).abs() < 1e-15);
        let c11 = corollary_bounds(Corollary::Eleven, 1, 0.0).unwrap();
        assert_eq!(c11.a_2m1, 5.0);
        assert_eq!(Corollary::from_number(10).unwrap(), Corollary::Ten);
        assert!(Corollary::from_number(8).is_err());
    }

    #[test]
    fn radicand_simplifies_at_lambda_one() {
        for i in 1..=20 {
            let alpha = rational(i, 20);
            assert_eq!(radicand_alpha_exact(&alpha, &rational(1, 1)), rational(4, 1) * (alpha + rational(1, 1)));
        }
        // lambda = 1 in the second class: 2(1-beta)/(2+1+1) = (1-beta)/2
        let lambda = 1.0;
        assert_eq!(2.0 * lambda * lambda + lambda + 1.0, 4.0);
    }

    #[test]
    fn reductions_hold_on_a_grid() {
        let ms: Vec<usize> = (1..=10).collect();
        let alphas: Vec<BigRational> = (1..=10).map(|i| rational(i, 10)).collect();
        let betas: Vec<BigRational> = (0..10).map(|i| rational(i, 10)).collect();
        let report = verify_reductions(&ms, &alphas, &betas).unwrap();
        assert!(report.passed(), "{:?}", report.mismatches);
        // 4 checks per (m, param) plus 4 more at m = 1
        assert_eq!(report.checks, 10 * 10 * 4 * 2 + 10 * 4 * 2);
    }

    #[test]
    fn report_flags_corollary_matches() {
        let spec = ClassSpec::alpha(1, rational(1, 1), rational(1, 1)).unwrap();
        let r = bound_report(&spec).unwrap();
        assert_eq!(r.reduction_checks.len(), 8);
        assert!(r.corollary_match());
        let spec = ClassSpec::beta(3, rational(1, 4), rational(1, 2)).unwrap();
        let r = bound_report(&spec).unwrap();
        assert!(r.reduction_checks.is_empty());
    }

    #[test]
    fn bounds_decrease_in_m() {
        for i in 1..=10 {
            for j in 1..=10 {
                let (x, lambda) = (i as f64 / 10.0, j as f64 / 10.0);
                for m in 1..10 {
                    let (a, b) = (bound_alpha(m, x, lambda).unwrap(), bound_alpha(m + 1, x, lambda).unwrap());
                    assert!(b.a_m1 < a.a_m1 && b.a_2m1 < a.a_2m1);
                    let beta = x - 0.1;
                    let (a, b) = (bound_beta(m, beta, lambda).unwrap(), bound_beta(m + 1, beta, lambda).unwrap());
                    assert!(b.a_m1 < a.a_m1 && b.a_2m1 < a.a_2m1);
                }
            }
        }
    }

    #[test]
    fn exact_and_float_forms_agree() {
        let (alpha, lambda) = (rational(2, 3), rational(1, 4));
        let exact = bound_alpha_exact(3, &alpha, &lambda).unwrap();
        let float = bound_alpha(3, 2.0 / 3.0, 0.25).unwrap();
        assert!((rational_to_f64(&exact.a_m1_squared).sqrt() - float.a_m1).abs() < 1e-14);
        assert!((rational_to_f64(&exact.a_2m1) - float.a_2m1).abs() < 1e-14);
        let exact = bound_beta_exact(2, &rational(1, 3), &lambda).unwrap();
        let float = bound_beta(2, 1.0 / 3.0, 0.25).unwrap();
        assert!((rational_to_f64(&exact.a_m1_squared).sqrt() - float.a_m1).abs() < 1e-14);
        assert!((rational_to_f64(&exact.a_2m1) - float.a_2m1).abs() < 1e-14);
    }
}
