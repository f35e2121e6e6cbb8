//! Replays the coefficient argument behind the bounds: from positive-real-part
//! data `(p, q)` solve for `a_{m+1}`, `a_{2m+1}`, record the residual of every
//! relation used along the way, and check the result forward by expanding
//! `Phi(f)` and `Phi(g)` for the truncated `f` and its inverse.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{bounds_for, BoundPair};
use crate::caratheodory::{from_leading_coefficients, CaratheodoryFunction, CircleScalar, FLOAT_TOL};
use crate::classfun::{phi, ClassKind, ClassSpec};
use crate::error::{Error, Result};
use crate::scalar::{rational_to_f64, Complex64, Scalar};
use crate::series::TruncatedSeries;

/// Slack allowed on bound ratios.
pub const RATIO_TOL: f64 = 1e-10;

/// Addition-relation residual up to which a float sample counts as realizable.
pub const REALIZABILITY_THRESHOLD: f64 = 1e-8;

/// Rational constants of the coefficient relations for one class spec.
#[derive(Debug, Clone)]
struct Constants {
    /// `m(1+lambda)/(2 lambda)`: coefficient of `a_{m+1}` in `Phi(f)`.
    c: BigRational,
    /// `m^2 (1-lambda)/(4 lambda^2)`: extra `a_{m+1}^2` term at order `2m`.
    d: BigRational,
    /// `alpha`, or `1 - beta`.
    scale: BigRational,
    /// `alpha(alpha-1)/2`, or 0 for the real-part class.
    square_term: BigRational,
}

impl Constants {
    fn new(spec: &ClassSpec) -> Self {
        let m = BigRational::from_integer(spec.m.into());
        let one = BigRational::one();
        let two = BigRational::from_integer(2.into());
        let lambda = &spec.lambda;
        let c = &m * (&one + lambda) / (&two * lambda);
        let d = &m * &m * (&one - lambda) / (&two * &two * lambda * lambda);
        let scale = spec.scale();
        let square_term = match spec.kind {
            ClassKind::Arg => &spec.param * (&spec.param - &one) / &two,
            ClassKind::Re => BigRational::zero(),
        };
        Self { c, d, scale, square_term }
    }

    /// `m^2(1+lambda)/lambda + m^2(1-lambda)/(2 lambda^2)`, i.e. `2mc + 2d`.
    fn addition_factor(&self, m: usize) -> BigRational {
        let two = BigRational::from_integer(2.into());
        &two * BigRational::from_integer(m.into()) * &self.c + &two * &self.d
    }
}

/// Residuals (left minus right) of every relation of the coefficient argument.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals<S> {
    /// `c a_{m+1} - scale p_m`.
    pub first_order_f: S,
    /// `-c a_{m+1} - scale q_m`.
    pub first_order_g: S,
    /// Order-`2m` coefficient relation for `f`.
    pub second_order_f: S,
    /// Order-`2m` coefficient relation for the inverse `g`.
    pub second_order_g: S,
    /// Difference of the two second-order relations.
    pub subtraction: S,
    /// Sum of the two second-order relations; the realizability score.
    pub addition: S,
    /// `p_m^2 - q_m^2`; vanishes under the pair constraint.
    pub square_difference: S,
    /// `2c^2 a_{m+1}^2 - scale^2 (p_m^2 + q_m^2)`.
    pub sum_of_squares: S,
    /// `a_{m+1}^2` minus its closed form in `p_{2m} + q_{2m}`.
    pub closed_form_square: S,
}

impl<S: Scalar> Residuals<S> {
    fn entries(&self) -> [(&'static str, &S); 9] {
        [
            ("first_order_f", &self.first_order_f),
            ("first_order_g", &self.first_order_g),
            ("second_order_f", &self.second_order_f),
            ("second_order_g", &self.second_order_g),
            ("subtraction", &self.subtraction),
            ("addition", &self.addition),
            ("square_difference", &self.square_difference),
            ("sum_of_squares", &self.sum_of_squares),
            ("closed_form_square", &self.closed_form_square),
        ]
    }

    /// `(name, |residual|)` for every relation.
    pub fn magnitudes(&self) -> Vec<(&'static str, f64)> {
        self.entries().iter().map(|(n, v)| (*n, v.magnitude())).collect()
    }

    /// Whether the relations the solver enforces hold: both first-order
    /// relations, the subtraction step, the vanishing square difference and
    /// the sum of squares. Exact zero on the exact backend.
    pub fn construction_holds(&self, tol: f64) -> bool {
        [
            &self.first_order_f,
            &self.first_order_g,
            &self.subtraction,
            &self.square_difference,
            &self.sum_of_squares,
        ]
        .iter()
        .all(|r| r.is_negligible(tol))
    }

    /// `|addition residual|`.
    pub fn realizability_score(&self) -> f64 {
        self.addition.magnitude()
    }
}

/// Solved `a_{m+1}`, `a_{2m+1}` with the data they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSolution<S> {
    pub spec: ClassSpec,
    pub a_m1: S,
    pub a_2m1: S,
    pub p_m: S,
    pub p_2m: S,
    pub q_m: S,
    pub q_2m: S,
    pub residuals: Residuals<S>,
}

/// Solves from a pair of positive-real-part functions.
pub fn solve<S: CircleScalar>(
    spec: &ClassSpec,
    p: &CaratheodoryFunction<S>,
    q: &CaratheodoryFunction<S>,
) -> Result<CoefficientSolution<S>> {
    if p.m() != spec.m || q.m() != spec.m {
        return Err(Error::OutOfRange(format!(
            "pair has fold {} / {} but the class has m = {}",
            p.m(),
            q.m(),
            spec.m
        )));
    }
    let (p_m, p_2m) = p.leading();
    let (q_m, q_2m) = q.leading();
    solve_coefficients(spec, p_m, p_2m, q_m, q_2m)
}

/// Solves from the four leading coefficients directly.
///
/// `a_{m+1}` is read off the linear first-order relation and `a_{2m+1}` off
/// the subtraction of the second-order relations; everything else is
/// recorded as a residual. Fails only when `p_m + q_m` is nonzero (exactly,
/// or beyond `1e-12` for floats).
pub fn solve_coefficients<S: Scalar>(spec: &ClassSpec, p_m: S, p_2m: S, q_m: S, q_2m: S) -> Result<CoefficientSolution<S>> {
    let gap = p_m.clone() + q_m.clone();
    if !gap.is_negligible(FLOAT_TOL) {
        return Err(Error::Constraint(gap.magnitude()));
    }
    let k = Constants::new(spec);
    let c = S::from_rational(&k.c);
    let d = S::from_rational(&k.d);
    let scale = S::from_rational(&k.scale);
    let sq = S::from_rational(&k.square_term);
    let two = S::from_int(2);
    let mf = S::from_int(spec.m as i64);
    let one = S::one();

    let a_m1 = scale.clone() * p_m.clone() / c.clone();
    let a2 = a_m1.clone() * a_m1.clone();
    let diff_rhs = scale.clone() * (p_2m.clone() - q_2m.clone())
        + sq.clone() * (p_m.clone() * p_m.clone() - q_m.clone() * q_m.clone());
    let a_2m1 = diff_rhs / (S::from_int(4) * c.clone()) + (mf.clone() + one.clone()) / two.clone() * a2.clone();

    let rhs_f = scale.clone() * p_2m.clone() + sq.clone() * p_m.clone() * p_m.clone();
    let rhs_g = scale.clone() * q_2m.clone() + sq.clone() * q_m.clone() * q_m.clone();
    let lhs_f = c.clone() * (two.clone() * a_2m1.clone() - a2.clone()) + d.clone() * a2.clone();
    let lhs_g = c.clone() * ((two.clone() * mf.clone() + one.clone()) * a2.clone() - two.clone() * a_2m1.clone())
        + d.clone() * a2.clone();
    let second_order_f = lhs_f - rhs_f;
    let second_order_g = lhs_g - rhs_g;

    let closed_form = closed_form_square(spec, &p_2m, &q_2m);
    let residuals = Residuals {
        first_order_f: c.clone() * a_m1.clone() - scale.clone() * p_m.clone(),
        first_order_g: -(c.clone() * a_m1.clone()) - scale.clone() * q_m.clone(),
        subtraction: second_order_f.clone() - second_order_g.clone(),
        addition: second_order_f.clone() + second_order_g.clone(),
        second_order_f,
        second_order_g,
        square_difference: p_m.clone() * p_m.clone() - q_m.clone() * q_m.clone(),
        sum_of_squares: two * c.clone() * c * a2.clone()
            - scale.clone() * scale * (p_m.clone() * p_m.clone() + q_m.clone() * q_m.clone()),
        closed_form_square: a2 - closed_form,
    };
    Ok(CoefficientSolution { spec: spec.clone(), a_m1, a_2m1, p_m, p_2m, q_m, q_2m, residuals })
}

/// `a_{m+1}^2` as a multiple of `p_{2m} + q_{2m}`, obtained by eliminating
/// `p_m^2 + q_m^2` from the addition relation.
pub fn closed_form_square<S: Scalar>(spec: &ClassSpec, p_2m: &S, q_2m: &S) -> S {
    let m2 = BigRational::from_integer((spec.m * spec.m).into());
    let lambda = &spec.lambda;
    let one = BigRational::one();
    let factor = match spec.kind {
        ClassKind::Arg => {
            let alpha = &spec.param;
            let radicand = crate::bounds::radicand_alpha_exact(alpha, lambda);
            BigRational::from_integer(4.into()) * lambda * lambda * alpha * alpha / (m2 * radicand)
        }
        ClassKind::Re => {
            let two = BigRational::from_integer(2.into());
            let beta = &spec.param;
            &two * lambda * lambda * (&one - beta) / (m2 * (&two * lambda * lambda + lambda + &one))
        }
    };
    S::from_rational(&factor) * (p_2m.clone() + q_2m.clone())
}

/// Per-coefficient comparison of `Phi(f)`, `Phi(g)` with their targets.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardReport<S> {
    /// `Phi(f)_k - target(p)_k` for `k = 0..=2m`.
    pub f_residuals: Vec<S>,
    /// `Phi(g)_k - target(q)_k` for `k = 0..=2m`.
    pub g_residuals: Vec<S>,
}

impl<S: Scalar> ForwardReport<S> {
    pub fn max_residual(&self) -> f64 {
        self.f_residuals.iter().chain(&self.g_residuals).map(|r| r.magnitude()).fold(0.0, f64::max)
    }

    pub fn is_exact_zero(&self) -> bool {
        self.f_residuals.iter().chain(&self.g_residuals).all(|r| r.is_zero())
    }
}

/// Builds `f = z + a_{m+1} z^{m+1} + a_{2m+1} z^{2m+1}` (order `2m+1`), its
/// inverse by reversion, and compares `Phi` of both with `p^alpha`, `q^alpha`
/// (or `beta + (1-beta) p`, `beta + (1-beta) q`) up to order `2m`.
pub fn forward_verify<S: CircleScalar>(
    solution: &CoefficientSolution<S>,
    p: &CaratheodoryFunction<S>,
    q: &CaratheodoryFunction<S>,
) -> Result<ForwardReport<S>> {
    let spec = &solution.spec;
    let m = spec.m;
    let order = 2 * m + 1;
    let mut coeffs = vec![S::zero(); order + 1];
    coeffs[1] = S::one();
    coeffs[m + 1] = solution.a_m1.clone();
    coeffs[2 * m + 1] = solution.a_2m1.clone();
    let f = TruncatedSeries::new(coeffs);
    let g = f.revert()?;
    let phi_f = phi(&f, &spec.lambda)?;
    let phi_g = phi(&g, &spec.lambda)?;
    let target_f = target_series(spec, p, 2 * m)?;
    let target_g = target_series(spec, q, 2 * m)?;
    let diff = |a: &TruncatedSeries<S>, b: &TruncatedSeries<S>| -> Vec<S> {
        a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x.clone() - y.clone()).collect()
    };
    Ok(ForwardReport { f_residuals: diff(&phi_f, &target_f), g_residuals: diff(&phi_g, &target_g) })
}

fn target_series<S: CircleScalar>(spec: &ClassSpec, p: &CaratheodoryFunction<S>, order: usize) -> Result<TruncatedSeries<S>> {
    let series = p.expand(order);
    match spec.kind {
        ClassKind::Arg => series.pow(&spec.param),
        ClassKind::Re => {
            let beta = S::from_rational(&spec.param);
            let scale = S::from_rational(&spec.scale());
            Ok(series.scale(&scale).add_constant(&beta))
        }
    }
}

/// Solved coefficients measured against the theorem bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundConsistency {
    pub abs_a_m1: f64,
    pub abs_a_2m1: f64,
    pub bounds: BoundPair,
    pub ratio_a_m1: f64,
    pub ratio_a_2m1: f64,
}

impl BoundConsistency {
    pub fn within_bounds(&self) -> bool {
        self.ratio_a_m1 <= 1.0 + RATIO_TOL && self.ratio_a_2m1 <= 1.0 + RATIO_TOL
    }
}

pub fn bound_consistency<S: Scalar>(solution: &CoefficientSolution<S>) -> Result<BoundConsistency> {
    let bounds = bounds_for(&solution.spec)?;
    let abs_a_m1 = solution.a_m1.magnitude();
    let abs_a_2m1 = solution.a_2m1.magnitude();
    Ok(BoundConsistency {
        abs_a_m1,
        abs_a_2m1,
        ratio_a_m1: ratio(abs_a_m1, bounds.a_m1),
        ratio_a_2m1: ratio(abs_a_2m1, bounds.a_2m1),
        bounds,
    })
}

fn ratio(value: f64, bound: f64) -> f64 {
    if value == 0.0 {
        0.0
    } else {
        value / bound
    }
}

/// Draws a float pair whose solution satisfies the addition relation.
///
/// `p` is sampled freely, `q_m = -p_m`, and `q_{2m}` is chosen so that the
/// addition relation holds; `q` is then built from those two coefficients.
/// Draws for which no such `q` has positive real part are rejected, up to
/// `retries` times.
pub fn realizable_pair(
    spec: &ClassSpec,
    seed: u64,
    retries: usize,
) -> Result<Option<(CaratheodoryFunction<Complex64>, CaratheodoryFunction<Complex64>)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..retries {
        let count = rng.random_range(1..=4);
        let p = CaratheodoryFunction::<Complex64>::sample_with(&mut rng, count, spec.m)?;
        let chord = rng.random::<f64>() * std::f64::consts::TAU;
        if let Some(q) = realizable_partner(spec, &p, chord) {
            return Ok(Some((p, q)));
        }
    }
    Ok(None)
}

/// The `q` completing `p` to a realizable pair, if one exists.
pub fn realizable_partner(
    spec: &ClassSpec,
    p: &CaratheodoryFunction<Complex64>,
    chord_angle: f64,
) -> Option<CaratheodoryFunction<Complex64>> {
    let (p_m, p_2m) = p.leading();
    let q_m = -p_m;
    let q_2m = partner_second_coefficient(spec, p_m, p_2m);
    from_leading_coefficients(q_m, q_2m, spec.m, chord_angle)
}

/// `q_{2m}` making the addition relation hold for `q_m = -p_m`.
fn partner_second_coefficient(spec: &ClassSpec, p_m: Complex64, p_2m: Complex64) -> Complex64 {
    let k = Constants::new(spec);
    let c = rational_to_f64(&k.c);
    let scale = rational_to_f64(&k.scale);
    let a = scale * p_m / c;
    let total = rational_to_f64(&k.addition_factor(spec.m)) * a * a;
    let squares = 2.0 * rational_to_f64(&k.square_term) * p_m * p_m;
    (total - squares) / scale - p_2m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::bound_alpha;
    use crate::caratheodory::{constrained_pair, PairStrategy};
    use crate::scalar::{rational, ComplexRational};

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        rational(n, d)
    }

    fn cq(re: Q) -> ComplexRational {
        ComplexRational::new(re, Q::zero())
    }

    #[test]
    fn degenerate_zero_data() {
        let spec = ClassSpec::beta(2, q(1, 4), q(1, 2)).unwrap();
        let z = || cq(q(0, 1));
        let s = solve_coefficients(&spec, z(), z(), z(), z()).unwrap();
        assert!(s.a_m1.is_zero() && s.a_2m1.is_zero());
        assert!(s.residuals.entries().iter().all(|(_, r)| r.is_zero()));
        let b = bound_consistency(&s).unwrap();
        assert_eq!((b.ratio_a_m1, b.ratio_a_2m1), (0.0, 0.0));
    }

    #[test]
    fn symmetric_pair_with_vanishing_first_coefficient() {
        // p = q with p_m = 0 satisfies the constraint and gives a = 0.
        let spec = ClassSpec::alpha(1, q(1, 1), q(1, 1)).unwrap();
        let s = solve_coefficients(&spec, cq(q(0, 1)), cq(q(2, 1)), cq(q(0, 1)), cq(q(2, 1))).unwrap();
        assert!(s.a_m1.is_zero());
        // a_3 = 0 from the subtraction step, but the addition relation and the
        // closed form for a_2^2 both flag the data as unrealizable
        assert!(s.a_2m1.is_zero());
        assert_eq!(s.residuals.addition, cq(q(-4, 1)));
        assert_eq!(s.residuals.closed_form_square, cq(q(-2, 1)));
    }

    #[test]
    fn mobius_pair_is_flagged_unrealizable() {
        // p = (1+z)/(1-z), q = (1-z)/(1+z)
        let spec = ClassSpec::alpha(1, q(1, 1), q(1, 1)).unwrap();
        let p = CaratheodoryFunction::single(cq(q(1, 1)), 1).unwrap();
        let qq = p.reflect();
        let s = solve(&spec, &p, &qq).unwrap();
        assert_eq!(s.a_m1, cq(q(2, 1)));
        assert_eq!(s.a_2m1, cq(q(4, 1)));
        assert_eq!(s.residuals.second_order_f, cq(q(2, 1)));
        assert_eq!(s.residuals.second_order_g, cq(q(2, 1)));
        assert_eq!(s.residuals.addition, cq(q(4, 1)));
        assert!(s.residuals.construction_holds(0.0));
    }

    #[test]
    fn constraint_violation() {
        let spec = ClassSpec::beta(1, q(0, 1), q(1, 1)).unwrap();
        let p = CaratheodoryFunction::single(cq(q(1, 1)), 1).unwrap();
        assert!(matches!(solve(&spec, &p, &p), Err(Error::Constraint(_))));
    }

    #[test]
    fn exact_pairs_hold_exactly_and_verify_forward() {
        for (spec, seed) in [
            (ClassSpec::beta(2, q(1, 4), q(1, 2)).unwrap(), 7),
            (ClassSpec::alpha(3, q(1, 2), q(1, 4)).unwrap(), 11),
            (ClassSpec::alpha(1, q(1, 1), q(1, 1)).unwrap(), 3),
        ] {
            for strategy in [PairStrategy::Reflect, PairStrategy::Corrective] {
                let (p, qq) = constrained_pair::<ComplexRational>(seed, spec.m, strategy).unwrap();
                let s = solve(&spec, &p, &qq).unwrap();
                assert!(s.residuals.construction_holds(0.0), "{:?}", s.residuals);
                let fwd = forward_verify(&s, &p, &qq).unwrap();
                let m = spec.m;
                for k in 0..=m {
                    assert!(fwd.f_residuals[k].is_zero() && fwd.g_residuals[k].is_zero());
                }
                // at order 2m forward residuals are the second-order relation residuals
                assert_eq!(fwd.f_residuals[2 * m], s.residuals.second_order_f);
                assert_eq!(fwd.g_residuals[2 * m], s.residuals.second_order_g);
            }
        }
    }

    #[test]
    fn corrupted_second_coefficient_shifts_phi() {
        let spec = ClassSpec::beta(2, q(1, 4), q(1, 2)).unwrap();
        let (p, qq) = constrained_pair::<ComplexRational>(5, 2, PairStrategy::Reflect).unwrap();
        let mut s = solve(&spec, &p, &qq).unwrap();
        let clean = forward_verify(&s, &p, &qq).unwrap();
        s.a_2m1 = s.a_2m1.clone() + cq(q(1, 1));
        let bad = forward_verify(&s, &p, &qq).unwrap();
        // m(1+lambda)/lambda = 2 * 3/2 / (1/2) = 6
        assert_eq!(bad.f_residuals[4].clone() - clean.f_residuals[4].clone(), cq(q(6, 1)));
    }

    #[test]
    fn float_solution_matches_exact() {
        let spec = ClassSpec::alpha(2, q(1, 2), q(1, 2)).unwrap();
        let (p, qq) = constrained_pair::<ComplexRational>(9, 2, PairStrategy::Corrective).unwrap();
        let exact = solve(&spec, &p, &qq).unwrap();
        let float = solve(&spec, &p.to_complex64(), &qq.to_complex64()).unwrap();
        assert!((exact.a_m1.to_complex64() - float.a_m1).norm() < 1e-12);
        assert!((exact.a_2m1.to_complex64() - float.a_2m1).norm() < 1e-12);
    }

    #[test]
    fn realizable_pairs_satisfy_every_relation() {
        for spec in [
            ClassSpec::alpha(1, q(1, 1), q(1, 1)).unwrap(),
            ClassSpec::alpha(2, q(1, 2), q(1, 4)).unwrap(),
            ClassSpec::beta(3, q(1, 2), q(1, 2)).unwrap(),
        ] {
            let mut found = 0;
            for seed in 0..200 {
                let Some((p, qq)) = realizable_pair(&spec, seed, 32).unwrap() else { continue };
                found += 1;
                let s = solve(&spec, &p, &qq).unwrap();
                assert!(s.residuals.realizability_score() < 1e-9, "{:?}", s.residuals);
                assert!(s.residuals.closed_form_square.norm() < 1e-9);
                assert!(bound_consistency(&s).unwrap().within_bounds());
                let fwd = forward_verify(&s, &p, &qq).unwrap();
                assert!(fwd.max_residual() < 1e-9);
            }
            assert!(found > 150, "{found}");
        }
    }

    #[test]
    fn extremal_realizable_pair_attains_first_bound() {
        // |p_m|^2 = 4(1+lambda)^2/D with p_2m = q_2m = 2 e^{2 i theta}
        let (m, alpha, lambda) = (2usize, 0.5, 0.5);
        let spec = ClassSpec::alpha(m, q(1, 2), q(1, 2)).unwrap();
        let b = bound_alpha(m, alpha, lambda).unwrap();
        let d = crate::bounds::radicand_alpha(alpha, lambda);
        let pm = 2.0 * (1.0 + lambda) / d.sqrt();
        let s = solve_coefficients(
            &spec,
            Complex64::new(pm, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(-pm, 0.0),
            Complex64::new(2.0, 0.0),
        )
        .unwrap();
        assert!(s.residuals.realizability_score() < 1e-12);
        assert!((s.a_m1.norm() - b.a_m1).abs() < 1e-12);
    }
}
