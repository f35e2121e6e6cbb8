//! Ensembles and local search over sampled pairs: largest observed
//! `|a_{m+1}|`, `|a_{2m+1}|` per parameter cell against the theorem bounds.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{bounds_for, linear_ceiling};
use crate::caratheodory::{constrained_pair, CaratheodoryFunction, PairStrategy};
use crate::classfun::{ClassKind, ClassSpec};
use crate::derivation::{realizable_partner, realizable_pair, solve, RATIO_TOL, REALIZABILITY_THRESHOLD};
use crate::error::Result;
use crate::scalar::{format_rational, Complex64};

/// Retries per sample when drawing a realizable pair.
pub const REALIZABLE_RETRIES: usize = 64;

/// How pairs are drawn in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// Constrained pairs from the corrective strategy; almost none satisfy the
    /// addition relation, so the filtered maxima are usually empty.
    Free,
    /// `p` free and `q` completed so that the addition relation holds.
    #[default]
    Realizable,
}

impl SampleMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Free => "free",
            Self::Realizable => "realizable",
        }
    }
}

/// One solved sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleEval {
    pub seed: u64,
    pub abs_a_m1: f64,
    pub abs_a_2m1: f64,
    pub realizability: f64,
}

/// Draws and solves the sample with the given seed; `None` when no pair
/// could be drawn.
pub fn evaluate_sample(spec: &ClassSpec, seed: u64, mode: SampleMode) -> Result<Option<SampleEval>> {
    let pair = match mode {
        SampleMode::Free => Some(constrained_pair::<Complex64>(seed, spec.m, PairStrategy::Corrective)?),
        SampleMode::Realizable => realizable_pair(spec, seed, REALIZABLE_RETRIES)?,
    };
    let Some((p, q)) = pair else { return Ok(None) };
    let s = solve(spec, &p, &q)?;
    Ok(Some(SampleEval {
        seed,
        abs_a_m1: s.a_m1.norm(),
        abs_a_2m1: s.a_2m1.norm(),
        realizability: s.residuals.realizability_score(),
    }))
}

/// Maxima of one parameter cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchRecord {
    pub kind: ClassKind,
    pub m: usize,
    pub param: String,
    pub lambda: String,
    pub mode: SampleMode,
    /// Samples attempted.
    pub samples: usize,
    /// Samples for which a pair was drawn and solved.
    pub evaluated: usize,
    /// Evaluated samples within the realizability threshold.
    pub accepted: usize,
    pub max_a_m1: Option<f64>,
    pub max_a_2m1: Option<f64>,
    pub argmax_seed_a_m1: Option<u64>,
    pub argmax_seed_a_2m1: Option<u64>,
    pub unfiltered_max_a_m1: Option<f64>,
    pub unfiltered_max_a_2m1: Option<f64>,
    pub bound_a_m1: f64,
    pub bound_a_2m1: f64,
    pub ratio_a_m1: Option<f64>,
    pub ratio_a_2m1: Option<f64>,
    /// `4 lambda scale / (m(1+lambda))`, the largest `|a_{m+1}|` any pair can give.
    pub ceiling_a_m1: f64,
}

impl SearchRecord {
    /// Filtered ratios within `1 + 1e-10` of the bounds.
    pub fn within_bounds(&self) -> bool {
        self.ratio_a_m1.is_none_or(|r| r <= 1.0 + RATIO_TOL) && self.ratio_a_2m1.is_none_or(|r| r <= 1.0 + RATIO_TOL)
    }

    /// Unfiltered `|a_{m+1}|` maximum within the linear ceiling.
    pub fn within_ceiling(&self) -> bool {
        self.unfiltered_max_a_m1.is_none_or(|a| a <= self.ceiling_a_m1 * (1.0 + RATIO_TOL))
    }
}

/// Largest value, ties broken towards the lowest seed.
fn argmax(evals: &[SampleEval], value: impl Fn(&SampleEval) -> f64) -> Option<(f64, u64)> {
    evals
        .iter()
        .map(|e| (value(e), e.seed))
        .reduce(|best, next| match next.0.total_cmp(&best.0) {
            std::cmp::Ordering::Greater => next,
            std::cmp::Ordering::Equal if next.1 < best.1 => next,
            _ => best,
        })
}

/// Seed of sample `index` in a sweep started from `seed`.
pub fn sample_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

/// Aggregates solved samples of one cell into a record.
pub fn aggregate(spec: &ClassSpec, mode: SampleMode, samples: usize, evals: &[SampleEval]) -> Result<SearchRecord> {
    let bounds = bounds_for(spec)?;
    let accepted: Vec<SampleEval> = evals.iter().copied().filter(|e| e.realizability <= REALIZABILITY_THRESHOLD).collect();
    let best_m1 = argmax(&accepted, |e| e.abs_a_m1);
    let best_2m1 = argmax(&accepted, |e| e.abs_a_2m1);
    let ratio = |v: f64, b: f64| if v == 0.0 { 0.0 } else { v / b };
    Ok(SearchRecord {
        kind: spec.kind,
        m: spec.m,
        param: format_rational(&spec.param),
        lambda: format_rational(&spec.lambda),
        mode,
        samples,
        evaluated: evals.len(),
        accepted: accepted.len(),
        max_a_m1: best_m1.map(|b| b.0),
        max_a_2m1: best_2m1.map(|b| b.0),
        argmax_seed_a_m1: best_m1.map(|b| b.1),
        argmax_seed_a_2m1: best_2m1.map(|b| b.1),
        unfiltered_max_a_m1: argmax(evals, |e| e.abs_a_m1).map(|b| b.0),
        unfiltered_max_a_2m1: argmax(evals, |e| e.abs_a_2m1).map(|b| b.0),
        bound_a_m1: bounds.a_m1,
        bound_a_2m1: bounds.a_2m1,
        ratio_a_m1: best_m1.map(|b| ratio(b.0, bounds.a_m1)),
        ratio_a_2m1: best_2m1.map(|b| ratio(b.0, bounds.a_2m1)),
        ceiling_a_m1: linear_ceiling(spec),
    })
}

/// Runs `samples` seeded draws in every cell. Samples run in parallel;
/// records come back in grid order and depend only on the arguments.
pub fn sweep(grid: &[ClassSpec], samples: usize, seed: u64, mode: SampleMode) -> Result<Vec<SearchRecord>> {
    grid.iter()
        .map(|spec| {
            let evals: Vec<Option<SampleEval>> = (0..samples)
                .into_par_iter()
                .map(|i| evaluate_sample(spec, sample_seed(seed, i), mode))
                .collect::<Result<_>>()?;
            let evals: Vec<SampleEval> = evals.into_iter().flatten().collect();
            aggregate(spec, mode, samples, &evals)
        })
        .collect()
}

/// Where a hill climb starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ClimbStart {
    /// Two antipodal atoms of equal weight: `p_m = 0`.
    #[default]
    Zero,
    /// A single atom: `|p_m| = 2`.
    Extremal,
    /// Three atoms drawn from the seed.
    Random,
}

/// Atom angles and log-weights of the climbing `p`.
#[derive(Debug, Clone, PartialEq)]
struct ClimbState {
    angles: Vec<f64>,
    log_weights: Vec<f64>,
}

impl ClimbState {
    fn start(kind: ClimbStart, rng: &mut ChaCha8Rng) -> Self {
        match kind {
            ClimbStart::Zero => Self { angles: vec![0.0, std::f64::consts::PI], log_weights: vec![0.0, 0.0] },
            ClimbStart::Extremal => Self { angles: vec![0.0], log_weights: vec![0.0] },
            ClimbStart::Random => Self {
                angles: (0..3).map(|_| rng.random::<f64>() * TAU).collect(),
                log_weights: (0..3).map(|_| rng.random::<f64>() - 0.5).collect(),
            },
        }
    }

    fn to_function(&self, m: usize) -> Result<CaratheodoryFunction<Complex64>> {
        let top = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let raw: Vec<f64> = self.log_weights.iter().map(|w| (w - top).exp()).collect();
        let total: f64 = raw.iter().sum();
        let atoms = raw
            .iter()
            .zip(&self.angles)
            .map(|(w, &t)| (Complex64::new(w / total, 0.0), Complex64::from_polar(1.0, t)))
            .collect();
        CaratheodoryFunction::from_atoms(atoms, m)
    }

    fn perturb(&self, rng: &mut ChaCha8Rng, step: f64) -> Self {
        let mut next = self.clone();
        let j = rng.random_range(0..self.angles.len());
        let delta = (2.0 * rng.random::<f64>() - 1.0) * step;
        if self.angles.len() == 1 || rng.random::<bool>() {
            next.angles[j] = (next.angles[j] + delta).rem_euclid(TAU);
        } else {
            next.log_weights[j] += delta;
        }
        next
    }
}

/// Outcome of a hill climb.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClimbRecord {
    pub kind: ClassKind,
    pub m: usize,
    pub param: String,
    pub lambda: String,
    pub mode: SampleMode,
    pub seed: u64,
    pub iterations: usize,
    pub accepted_moves: usize,
    pub start_a_m1: f64,
    pub best_a_m1: f64,
    /// `|a_{2m+1}|` at the best point.
    pub a_2m1_at_best: f64,
    pub ceiling_a_m1: f64,
    pub bound_a_m1: f64,
    pub ratio_to_ceiling: f64,
    pub ratio_to_bound: f64,
}

/// Largest step of a coordinate move (radians or log-weight).
pub const CLIMB_STEP: f64 = 0.5;

/// Relative gain below which a move is round-off, not an improvement.
const IMPROVEMENT_TOL: f64 = 1e-12;

/// Coordinate-wise random search over atom angles and weights of `p`,
/// accepting moves that increase `|a_{m+1}|`.
///
/// In free mode `q` is the reflection of `p`; in realizable mode `q` is the
/// partner completing the addition relation and moves without one are
/// rejected. Deterministic in `seed`.
pub fn hill_climb(spec: &ClassSpec, seed: u64, iterations: usize, start: ClimbStart, mode: SampleMode) -> Result<ClimbRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = ClimbState::start(start, &mut rng);
    let evaluate = |state: &ClimbState| -> Result<Option<(f64, f64)>> {
        let p = state.to_function(spec.m)?;
        let q = match mode {
            SampleMode::Free => p.reflect(),
            SampleMode::Realizable => match realizable_partner(spec, &p, 0.0) {
                Some(q) => q,
                None => return Ok(None),
            },
        };
        let s = solve(spec, &p, &q)?;
        Ok(Some((s.a_m1.norm(), s.a_2m1.norm())))
    };
    let mut best = evaluate(&state)?;
    let start_a_m1 = best.map_or(0.0, |b| b.0);
    let mut accepted_moves = 0;
    for _ in 0..iterations {
        let candidate = state.perturb(&mut rng, CLIMB_STEP);
        let Some(value) = evaluate(&candidate)? else { continue };
        if best.is_none_or(|b| value.0 > b.0 + IMPROVEMENT_TOL * b.0.max(1.0)) {
            state = candidate;
            best = Some(value);
            accepted_moves += 1;
        }
    }
    let (best_a_m1, a_2m1_at_best) = best.unwrap_or((0.0, 0.0));
    let ceiling = linear_ceiling(spec);
    let bound = bounds_for(spec)?.a_m1;
    Ok(ClimbRecord {
        kind: spec.kind,
        m: spec.m,
        param: format_rational(&spec.param),
        lambda: format_rational(&spec.lambda),
        mode,
        seed,
        iterations,
        accepted_moves,
        start_a_m1,
        best_a_m1,
        a_2m1_at_best,
        ceiling_a_m1: ceiling,
        bound_a_m1: bound,
        ratio_to_ceiling: best_a_m1 / ceiling,
        ratio_to_bound: best_a_m1 / bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    fn cell(kind: ClassKind, m: usize, param: (i64, i64), lambda: (i64, i64)) -> ClassSpec {
        ClassSpec::new(kind, m, rational(param.0, param.1), rational(lambda.0, lambda.1)).unwrap()
    }

    #[test]
    fn argmax_breaks_ties_on_lowest_seed() {
        let e = |seed, a| SampleEval { seed, abs_a_m1: a, abs_a_2m1: 0.0, realizability: 0.0 };
        let evals = [e(9, 1.0), e(4, 2.0), e(7, 2.0), e(3, 0.5)];
        assert_eq!(argmax(&evals, |x| x.abs_a_m1), Some((2.0, 4)));
    }

    #[test]
    fn sweep_respects_bounds_and_is_reproducible() {
        let grid = [cell(ClassKind::Arg, 1, (1, 1), (1, 1)), cell(ClassKind::Re, 2, (1, 2), (1, 4))];
        let a = sweep(&grid, 300, 42, SampleMode::Realizable).unwrap();
        let b = sweep(&grid, 300, 42, SampleMode::Realizable).unwrap();
        assert_eq!(a, b);
        for r in &a {
            assert!(r.accepted > 200, "{r:?}");
            assert!(r.within_bounds() && r.within_ceiling(), "{r:?}");
        }
        // at m = 1, lambda = 1, alpha = 1 the first bound is sqrt 2
        assert!(a[0].max_a_m1.unwrap() <= 2f64.sqrt() + 1e-10);
    }

    #[test]
    fn argmax_seed_reproduces_maximum() {
        let spec = cell(ClassKind::Arg, 2, (1, 2), (1, 2));
        let r = &sweep(std::slice::from_ref(&spec), 200, 5, SampleMode::Realizable).unwrap()[0];
        let again = evaluate_sample(&spec, r.argmax_seed_a_m1.unwrap(), SampleMode::Realizable).unwrap().unwrap();
        assert_eq!(Some(again.abs_a_m1), r.max_a_m1);
    }

    #[test]
    fn free_mode_reports_unfiltered_maxima() {
        let spec = cell(ClassKind::Arg, 1, (1, 2), (1, 2));
        let r = &sweep(std::slice::from_ref(&spec), 200, 1, SampleMode::Free).unwrap()[0];
        assert_eq!(r.evaluated, 200);
        assert!(r.unfiltered_max_a_m1.is_some());
        assert!(r.within_ceiling());
    }

    #[test]
    fn zero_sample_cell() {
        let spec = cell(ClassKind::Re, 1, (0, 1), (1, 1));
        let r = aggregate(&spec, SampleMode::Free, 0, &[]).unwrap();
        assert_eq!((r.max_a_m1, r.ratio_a_m1), (None, None));
        let zero = SampleEval { seed: 0, abs_a_m1: 0.0, abs_a_2m1: 0.0, realizability: 0.0 };
        let r = aggregate(&spec, SampleMode::Free, 1, &[zero]).unwrap();
        assert_eq!((r.ratio_a_m1, r.ratio_a_2m1), (Some(0.0), Some(0.0)));
    }

    #[test]
    fn hill_climb_from_zero_approaches_ceiling() {
        for spec in [cell(ClassKind::Arg, 1, (1, 1), (1, 1)), cell(ClassKind::Re, 3, (1, 4), (1, 2))] {
            let r = hill_climb(&spec, 17, 500, ClimbStart::Zero, SampleMode::Free).unwrap();
            assert!(r.start_a_m1 < 1e-15);
            assert!(r.ratio_to_ceiling > 0.9, "{r:?}");
            assert!(r.ratio_to_ceiling <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn extremal_start_cannot_improve() {
        let spec = cell(ClassKind::Arg, 2, (1, 2), (1, 4));
        let r = hill_climb(&spec, 3, 200, ClimbStart::Extremal, SampleMode::Free).unwrap();
        assert_eq!(r.accepted_moves, 0);
        assert!((r.ratio_to_ceiling - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_iterations_returns_start() {
        let spec = cell(ClassKind::Re, 1, (0, 1), (1, 1));
        let r = hill_climb(&spec, 8, 0, ClimbStart::Random, SampleMode::Free).unwrap();
        assert_eq!(r.best_a_m1, r.start_a_m1);
        assert_eq!(r.accepted_moves, 0);
    }

    #[test]
    fn realizable_climb_stays_within_bound() {
        let spec = cell(ClassKind::Arg, 1, (1, 2), (1, 2));
        let r = hill_climb(&spec, 2, 400, ClimbStart::Random, SampleMode::Realizable).unwrap();
        assert!(r.ratio_to_bound <= 1.0 + RATIO_TOL, "{r:?}");
    }
}
