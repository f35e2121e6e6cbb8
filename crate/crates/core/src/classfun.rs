//! The membership functional `Phi(f)(z) = (zf'/f + (zf'/f)^{1/lambda}) / 2`
//! and the two class conditions built from it, sampled on a polar grid for
//! `f` and for its truncated inverse `g`.

use std::f64::consts::PI;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mfold::catalog;
use crate::scalar::{format_rational, rational_to_f64, Complex64, Scalar};
use crate::series::{TruncatedSeries, DEFAULT_ORDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
pub enum ClassKind {
    /// `|arg Phi| < alpha pi / 2`
    #[serde(rename = "alpha")]
    Arg,
    /// `Re Phi > beta`
    #[serde(rename = "beta")]
    Re,
}

impl ClassKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Arg => "alpha",
            Self::Re => "beta",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "alpha" | "arg" => Ok(Self::Arg),
            "beta" | "re" => Ok(Self::Re),
            other => Err(Error::Parse(format!("unknown class kind {other:?}; expected alpha or beta"))),
        }
    }
}

/// One of the two classes with its parameters. `param` is `alpha` for
/// [`ClassKind::Arg`] and `beta` for [`ClassKind::Re`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassSpec {
    pub kind: ClassKind,
    pub m: usize,
    pub lambda: BigRational,
    pub param: BigRational,
}

impl ClassSpec {
    pub fn new(kind: ClassKind, m: usize, param: BigRational, lambda: BigRational) -> Result<Self> {
        if m == 0 {
            return Err(Error::OutOfRange("m must be at least 1".into()));
        }
        let zero = BigRational::zero();
        let one = BigRational::one();
        if lambda <= zero || lambda > one {
            return Err(Error::OutOfRange(format!("lambda = {} must satisfy 0 < lambda <= 1", format_rational(&lambda))));
        }
        match kind {
            ClassKind::Arg if param <= zero || param > one => {
                return Err(Error::OutOfRange(format!("alpha = {} must satisfy 0 < alpha <= 1", format_rational(&param))))
            }
            ClassKind::Re if param < zero || param >= one => {
                return Err(Error::OutOfRange(format!("beta = {} must satisfy 0 <= beta < 1", format_rational(&param))))
            }
            _ => {}
        }
        Ok(Self { kind, m, lambda, param })
    }

    pub fn alpha(m: usize, alpha: BigRational, lambda: BigRational) -> Result<Self> {
        Self::new(ClassKind::Arg, m, alpha, lambda)
    }

    pub fn beta(m: usize, beta: BigRational, lambda: BigRational) -> Result<Self> {
        Self::new(ClassKind::Re, m, beta, lambda)
    }

    pub fn lambda_f64(&self) -> f64 {
        rational_to_f64(&self.lambda)
    }

    pub fn param_f64(&self) -> f64 {
        rational_to_f64(&self.param)
    }

    /// Factor multiplying `p` in the coefficient equations: `alpha`, or `1 - beta`.
    pub fn scale(&self) -> BigRational {
        match self.kind {
            ClassKind::Arg => self.param.clone(),
            ClassKind::Re => BigRational::one() - &self.param,
        }
    }

    pub fn scale_f64(&self) -> f64 {
        rational_to_f64(&self.scale())
    }

    /// Condition margin at a value of `Phi`; positive means satisfied.
    pub fn margin(&self, value: Complex64) -> f64 {
        match self.kind {
            ClassKind::Arg => arg_margin(value, self.param_f64()),
            ClassKind::Re => re_margin(value, self.param_f64()),
        }
    }
}

/// `alpha pi / 2 - |arg value|` with the principal argument; `-inf` at zero,
/// where the argument is undefined.
pub fn arg_margin(value: Complex64, alpha: f64) -> f64 {
    if value.norm() == 0.0 {
        return f64::NEG_INFINITY;
    }
    alpha * PI / 2.0 - value.arg().abs()
}

/// `Re value - beta`.
pub fn re_margin(value: Complex64, beta: f64) -> f64 {
    value.re - beta
}

/// `z f'(z) / f(z)` as a series; one order shorter than `f`.
pub fn log_derivative<S: Scalar>(f: &TruncatedSeries<S>) -> Result<TruncatedSeries<S>> {
    if !f.is_normalized() {
        return Err(Error::NotNormalized);
    }
    f.derivative()?.shift_up(1).div(f)
}

/// Series of `Phi(f) = (zf'/f + (zf'/f)^{1/lambda}) / 2`, known to `order(f) - 1`.
pub fn phi<S: Scalar>(f: &TruncatedSeries<S>, lambda: &BigRational) -> Result<TruncatedSeries<S>> {
    if *lambda <= BigRational::zero() {
        return Err(Error::OutOfRange("lambda must be positive".into()));
    }
    let s = log_derivative(f)?;
    if lambda.is_one() {
        return Ok(s);
    }
    let powered = s.pow(&lambda.recip())?;
    let half = S::from_rational(&BigRational::new(1.into(), 2.into()));
    Ok(s.try_add(&powered).scale(&half))
}

/// Pointwise `Phi` from a value `s` of `zf'/f`, principal branch.
pub fn phi_value(s: Complex64, lambda: f64) -> Complex64 {
    if lambda == 1.0 {
        return s;
    }
    if s.norm() == 0.0 {
        return 0.5 * s;
    }
    0.5 * (s + (s.ln() / lambda).exp())
}

/// `|dPhi/ds|` at `s`; converts an error in `zf'/f` into an error in `Phi`.
fn phi_sensitivity(s: Complex64, lambda: f64) -> f64 {
    if lambda == 1.0 {
        return 1.0;
    }
    if s.norm() == 0.0 {
        return f64::INFINITY;
    }
    let inner = ((1.0 / lambda - 1.0) * s.ln()).exp() / lambda;
    0.5 * (Complex64::new(1.0, 0.0) + inner).norm()
}

/// A function whose membership is being sampled.
#[derive(Debug, Clone)]
pub enum FunctionHandle {
    /// A normalized polynomial `f`, known exactly.
    Polynomial(TruncatedSeries<Complex64>),
    /// A catalog entry evaluated in closed form.
    Catalog { name: String, m: usize },
}

impl FunctionHandle {
    /// `z f'(z) / f(z)` at a point of the disk.
    fn log_derivative_at(&self, z: Complex64) -> Complex64 {
        match self {
            Self::Polynomial(f) => {
                let (v, d) = f.eval_with_derivative(z);
                z * d / v
            }
            Self::Catalog { name, m } => {
                let base = name.strip_prefix("mfold-").unwrap_or(name);
                let w = z.powu(*m as u32);
                closed_form_log_derivative(base, w)
            }
        }
    }

    /// Expansion of `f` used to build the truncated inverse.
    fn series(&self, order: usize) -> Result<TruncatedSeries<Complex64>> {
        match self {
            Self::Polynomial(f) => Ok(TruncatedSeries::from_polynomial(f.coeffs(), order)),
            Self::Catalog { name, m } => Ok(catalog::<Complex64>(name, *m, order)?.series),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Polynomial(f) => {
                if !f.is_normalized() {
                    return Err(Error::NotNormalized);
                }
            }
            Self::Catalog { name, m } => {
                let e = catalog::<Complex64>(name, *m, 3)?;
                if e.mfold.is_none() || name.ends_with("-as-printed") {
                    return Err(Error::NotNormalized);
                }
            }
        }
        Ok(())
    }
}

/// `w F'(w)/F(w)` of the one-fold base functions. For the m-fold root
/// transform `h(z) = F(z^m)^{1/m}` one has `z h'/h = (w F'/F)(z^m)`.
fn closed_form_log_derivative(base: &str, w: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    match base {
        "identity" => one,
        // F = w/(1-w): wF'/F = 1/(1-w)
        "geometric" => one / (one - w),
        // F = -log(1-w): wF'/F = w / ((1-w)(-log(1-w)))
        "log" => {
            if w.norm() < 1e-300 {
                one
            } else {
                w / ((one - w) * -(one - w).ln())
            }
        }
        // F = atanh(w): wF'/F = w / ((1-w^2) atanh(w))
        "atanh" => {
            if w.norm() < 1e-300 {
                one
            } else {
                w / ((one - w * w) * w.atanh())
            }
        }
        _ => Complex64::new(f64::NAN, f64::NAN),
    }
}

/// Radii and angle count for the sampling grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipGrid {
    pub radii_f: Vec<f64>,
    pub radii_g: Vec<f64>,
    pub angles: usize,
}

/// Largest radius at which the truncated inverse is sampled.
pub const INVERSE_RADIUS_CAP: f64 = 0.7;

impl Default for MembershipGrid {
    fn default() -> Self {
        let mut radii_f: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        radii_f.push(0.95);
        let radii_g = radii_f.iter().copied().filter(|&r| r <= INVERSE_RADIUS_CAP + 1e-12).collect();
        Self { radii_f, radii_g, angles: 720 }
    }
}

impl MembershipGrid {
    pub fn with_max_radius(r_max: f64, angles: usize) -> Self {
        let mut g = Self::default();
        g.radii_f.retain(|&r| r <= r_max + 1e-12);
        g.radii_g.retain(|&r| r <= r_max.min(INVERSE_RADIUS_CAP) + 1e-12);
        g.angles = angles;
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Inconclusive => "inconclusive",
        }
    }

    fn combine(self, other: Self) -> Self {
        match (self, other) {
            (Self::Fail, _) | (_, Self::Fail) => Self::Fail,
            (Self::Inconclusive, _) | (_, Self::Inconclusive) => Self::Inconclusive,
            _ => Self::Pass,
        }
    }
}

/// Result of sampling one side (`f` or `g`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideReport {
    pub radii: Vec<f64>,
    pub points: usize,
    /// Minimum margin over the grid.
    pub worst_margin: f64,
    /// Grid point attaining the minimum margin, as `(re, im)`.
    pub witness: Option<(f64, f64)>,
    /// Truncation-error estimate of the margin at the witness (0 for exact evaluation).
    pub tail_at_witness: f64,
    /// Points where `Re(zf'/f) <= 0`, so the principal power branch is in play.
    pub branch_flags: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub kind: ClassKind,
    pub m: usize,
    pub param: String,
    pub lambda: String,
    pub f_side: SideReport,
    pub g_side: SideReport,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy)]
struct PointEval {
    index: usize,
    z: Complex64,
    margin: f64,
    tail: f64,
    flagged: bool,
}

/// Truncation order used for the inverse series in membership checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipOptions {
    pub order: usize,
    pub grid: MembershipGrid,
}

impl Default for MembershipOptions {
    fn default() -> Self {
        Self { order: DEFAULT_ORDER, grid: MembershipGrid::default() }
    }
}

/// Samples both class conditions on the grid.
///
/// `f` is evaluated exactly. The inverse `g` is only available as a truncated
/// reversion, so its `wg'/g` series carries a tail estimate; wherever the
/// margin does not exceed that estimate the `g` side is `inconclusive`.
pub fn check_membership(f: &FunctionHandle, spec: &ClassSpec, options: &MembershipOptions) -> Result<MembershipReport> {
    f.validate()?;
    let lambda = spec.lambda_f64();
    let grid = &options.grid;

    let points_f = polar_points(&grid.radii_f, grid.angles);
    let evals_f: Vec<PointEval> = points_f
        .par_iter()
        .enumerate()
        .map(|(index, &z)| {
            let s = f.log_derivative_at(z);
            let margin = finite_or_neg_inf(spec.margin(phi_value(s, lambda)));
            PointEval { index, z, margin, tail: 0.0, flagged: s.re.is_nan() || s.re <= 0.0 }
        })
        .collect();
    let f_side = summarize(&grid.radii_f, &evals_f);

    let g = f.series(options.order)?.revert()?;
    let s_g = log_derivative(&g)?;
    let tail_model = TailModel::fit(&s_g);
    let points_g = polar_points(&grid.radii_g, grid.angles);
    let evals_g: Vec<PointEval> = points_g
        .par_iter()
        .enumerate()
        .map(|(index, &w)| {
            let s = s_g.eval(w);
            let value = phi_value(s, lambda);
            let delta = tail_model.estimate(w.norm());
            let value_error = phi_sensitivity(s, lambda) * delta;
            let tail = match spec.kind {
                ClassKind::Re => value_error,
                ClassKind::Arg => {
                    let reach = value.norm() - value_error;
                    if reach > 0.0 {
                        (value_error / reach).min(PI)
                    } else {
                        f64::INFINITY
                    }
                }
            };
            let margin = finite_or_neg_inf(spec.margin(value));
            PointEval { index, z: w, margin, tail, flagged: s.re.is_nan() || s.re <= 0.0 }
        })
        .collect();
    let g_side = summarize(&grid.radii_g, &evals_g);

    Ok(MembershipReport {
        kind: spec.kind,
        m: spec.m,
        param: format_rational(&spec.param),
        lambda: format_rational(&spec.lambda),
        verdict: f_side.verdict.combine(g_side.verdict),
        f_side,
        g_side,
    })
}

fn finite_or_neg_inf(x: f64) -> f64 {
    if x.is_nan() {
        f64::NEG_INFINITY
    } else {
        x
    }
}

fn polar_points(radii: &[f64], angles: usize) -> Vec<Complex64> {
    radii
        .iter()
        .flat_map(|&r| (0..angles).map(move |k| Complex64::from_polar(r, 2.0 * PI * k as f64 / angles as f64)))
        .collect()
}

/// Reduces point evaluations to a side verdict.
///
/// A point is a certain violation when `margin < -tail`, certain
/// satisfaction when `margin > tail`, and uncertain otherwise. Any certain
/// violation fails (the worst one is the witness); otherwise any uncertain
/// point makes the side inconclusive.
fn summarize(radii: &[f64], evals: &[PointEval]) -> SideReport {
    let by_margin = |a: &&PointEval, b: &&PointEval| a.margin.total_cmp(&b.margin).then(a.index.cmp(&b.index));
    let worst = evals.iter().min_by(by_margin);
    let worst_violation = evals.iter().filter(|e| e.margin < -e.tail).min_by(by_margin);
    let uncertain = evals.iter().filter(|e| e.margin.abs() <= e.tail || e.tail.is_nan()).min_by(by_margin);
    let (verdict, witness) = match (worst_violation, uncertain) {
        (Some(v), _) => (Verdict::Fail, Some(v)),
        (None, Some(u)) => (Verdict::Inconclusive, Some(u)),
        (None, None) => (if evals.is_empty() { Verdict::Inconclusive } else { Verdict::Pass }, worst),
    };
    SideReport {
        radii: radii.to_vec(),
        points: evals.len(),
        worst_margin: worst.map_or(f64::NAN, |e| e.margin),
        witness: witness.map(|e| (e.z.re, e.z.im)),
        tail_at_witness: witness.map_or(0.0, |e| e.tail),
        branch_flags: evals.iter().filter(|e| e.flagged).count(),
        verdict,
    }
}

/// Geometric extrapolation of the trailing coefficients of a truncated series:
/// `|c_n| ~ A rho^n`, fitted on the last few nonzero coefficients, so the
/// omitted tail at radius `r` is about `A (rho r)^{N+1} / (1 - rho r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    pub amplitude: f64,
    pub rho: f64,
    pub order: usize,
}

const TAIL_FIT_POINTS: usize = 4;

impl TailModel {
    pub fn fit<S: Scalar>(series: &TruncatedSeries<S>) -> Self {
        let order = series.order();
        let trailing: Vec<(usize, f64)> = series
            .coeffs()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| (n, c.magnitude()))
            .filter(|&(_, a)| a > 0.0)
            .collect();
        let tail: Vec<(usize, f64)> = trailing.iter().rev().take(TAIL_FIT_POINTS).rev().copied().collect();
        if tail.is_empty() {
            return Self { amplitude: 0.0, rho: 0.0, order };
        }
        let mut rho: f64 = 0.0;
        for pair in tail.windows(2) {
            let ((n0, a0), (n1, a1)) = (pair[0], pair[1]);
            rho = rho.max((a1 / a0).powf(1.0 / (n1 - n0) as f64));
        }
        // root test as a floor when only one coefficient is available or ratios shrink
        for &(n, a) in &tail {
            rho = rho.max(a.powf(1.0 / n as f64));
        }
        let amplitude = tail.iter().map(|&(n, a)| a / rho.powi(n as i32)).fold(0.0, f64::max);
        Self { amplitude, rho, order }
    }

    pub fn estimate(&self, r: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let q = self.rho * r;
        if q >= 1.0 {
            return f64::INFINITY;
        }
        self.amplitude * q.powi(self.order as i32 + 1) / (1.0 - q)
    }
}
