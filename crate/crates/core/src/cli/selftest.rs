use num_traits::Zero;
use rayon::prelude::*;

use super::commands::{check_inversion, inversion_sample, Output};
use super::output::Table;
use super::{CliResult, SelftestArgs};
use crate::bounds::verify_reductions;
use crate::caratheodory::{constrained_pair, CaratheodoryFunction, PairStrategy};
use crate::classfun::{check_membership, ClassKind, ClassSpec, FunctionHandle, MembershipGrid, MembershipOptions, Verdict};
use crate::derivation::{bound_consistency, forward_verify, realizable_pair, solve};
use crate::explore::{sample_seed, sweep, SampleMode};
use crate::scalar::{rational, Complex64, ComplexRational};
use crate::series::TruncatedSeries;

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Description of the first failing case, with its seed.
    pub first_failure: Option<String>,
}

impl SuiteResult {
    fn from_cases(name: &'static str, outcomes: Vec<Option<String>>) -> Self {
        let failures = outcomes.iter().filter(|o| o.is_some()).count();
        Self { name, cases: outcomes.len(), failures, first_failure: outcomes.into_iter().flatten().next() }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Sizes {
    inversions_per_m: usize,
    reduction_ms: usize,
    lemma_samples: usize,
    pairs_per_cell: usize,
    sweep_samples: usize,
    membership_angles: usize,
}

fn cells() -> Vec<(usize, (i64, i64))> {
    let mut c = Vec::new();
    for m in 1..=3 {
        for lambda in [(1, 4), (1, 2), (1, 1)] {
            c.push((m, lambda));
        }
    }
    c
}

fn cell_specs() -> Vec<ClassSpec> {
    let mut specs = Vec::new();
    for (m, (ln, ld)) in cells() {
        specs.push(ClassSpec::alpha(m, rational(1, 2), rational(ln, ld)).expect("valid cell"));
        specs.push(ClassSpec::beta(m, rational(1, 2), rational(ln, ld)).expect("valid cell"));
    }
    specs
}

fn inverse_suite(seed: u64, per_m: usize, fault: bool) -> CliResult<SuiteResult> {
    let jobs: Vec<(usize, usize)> = (1..=6).flat_map(|m| (0..per_m).map(move |i| (m, i))).collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(m, i)| {
            let check = check_inversion(&inversion_sample(seed, m, i)?, fault)?;
            Ok((!(check.closed_form_matches && check.identity_matches)).then(|| {
                format!(
                    "m={m} seed={} closed_form={} identity={}",
                    sample_seed(seed, i),
                    check.closed_form_matches,
                    check.identity_matches
                )
            }))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(SuiteResult::from_cases("inverse-coefficients", outcomes))
}

fn reduction_suite(ms: usize) -> CliResult<SuiteResult> {
    let ms: Vec<usize> = (1..=ms).collect();
    let alphas: Vec<_> = (1..=10).map(|k| rational(k, 10)).collect();
    let betas: Vec<_> = (0..10).map(|k| rational(k, 10)).collect();
    let report = verify_reductions(&ms, &alphas, &betas)?;
    let mut outcomes: Vec<Option<String>> = report
        .mismatches
        .iter()
        .map(|c| Some(format!("{}: {} vs {}", c.name, c.lhs, c.rhs)))
        .collect();
    outcomes.resize(report.checks.max(outcomes.len()), None);
    Ok(SuiteResult::from_cases("reduction-identities", outcomes))
}

fn lemma_suite(seed: u64, samples: usize) -> CliResult<SuiteResult> {
    let outcomes = (0..samples)
        .into_par_iter()
        .map(|i| {
            let s = sample_seed(seed, i);
            let m = 1 + i % 4;
            let atoms = 1 + (i / 4) % 6;
            let p = CaratheodoryFunction::<Complex64>::sample(s, atoms, m)?;
            let report = p.check_lemma1(4)?;
            let equality = atoms != 1 || (p.coefficient(1).norm() - 2.0).abs() <= 1e-12;
            Ok((!(report.passed() && equality)).then(|| format!("seed={s} m={m} atoms={atoms}")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(SuiteResult::from_cases("coefficient-lemma", outcomes))
}

fn forward_suite(seed: u64, per_cell: usize) -> CliResult<SuiteResult> {
    let jobs: Vec<(ClassSpec, usize)> =
        cell_specs().into_iter().flat_map(|s| (0..per_cell).map(move |i| (s.clone(), i))).collect();
    let outcomes = jobs
        .par_iter()
        .map(|(spec, i)| -> CliResult<Option<String>> {
            let s = sample_seed(seed, *i);
            let label = || format!("{} m={} lambda={} seed={s}", spec.kind.name(), spec.m, spec.lambda);
            let (p, q) = constrained_pair::<ComplexRational>(s, spec.m, PairStrategy::Corrective)?;
            let sol = solve(spec, &p, &q)?;
            if !sol.residuals.construction_holds(0.0) {
                return Ok(Some(format!("{}: construction residual", label())));
            }
            let fwd = forward_verify(&sol, &p, &q)?;
            let m = spec.m;
            let low_orders = (0..=m).all(|k| fwd.f_residuals[k].is_zero() && fwd.g_residuals[k].is_zero());
            if !low_orders
                || fwd.f_residuals[2 * m] != sol.residuals.second_order_f
                || fwd.g_residuals[2 * m] != sol.residuals.second_order_g
            {
                return Ok(Some(format!("{}: forward expansion", label())));
            }
            if let Some((p, q)) = realizable_pair(spec, s, 64)? {
                let sol = solve(spec, &p, &q)?;
                let fwd = forward_verify(&sol, &p, &q)?;
                if fwd.max_residual() > 1e-9 || !bound_consistency(&sol)?.within_bounds() {
                    return Ok(Some(format!("{}: realizable pair", label())));
                }
            }
            Ok(None)
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(SuiteResult::from_cases("forward-verification", outcomes))
}

fn sweep_suite(seed: u64, samples: usize) -> CliResult<SuiteResult> {
    let specs = cell_specs();
    let records = sweep(&specs, samples, seed, SampleMode::Realizable)?;
    let outcomes = records
        .iter()
        .map(|r| {
            (!(r.within_bounds() && r.within_ceiling() && r.accepted > 0))
                .then(|| format!("{} m={} lambda={} seed={seed}", r.kind.name(), r.m, r.lambda))
        })
        .collect();
    Ok(SuiteResult::from_cases("bound-sweep", outcomes))
}

fn membership_suite(angles: usize) -> CliResult<SuiteResult> {
    let options = MembershipOptions { grid: MembershipGrid { angles, ..Default::default() }, ..Default::default() };
    let identity = FunctionHandle::Polynomial(TruncatedSeries::identity(3));
    let mut outcomes = Vec::new();
    for (kind, m, param, lambda) in [
        (ClassKind::Arg, 1, (1, 2), (1, 1)),
        (ClassKind::Arg, 3, (1, 10), (1, 4)),
        (ClassKind::Re, 2, (0, 1), (1, 2)),
        (ClassKind::Re, 4, (9, 10), (1, 3)),
    ] {
        let spec = ClassSpec::new(kind, m, rational(param.0, param.1), rational(lambda.0, lambda.1))?;
        let r = check_membership(&identity, &spec, &options)?;
        outcomes.push((r.verdict != Verdict::Pass).then(|| format!("identity fails {} m={m}", kind.name())));
    }
    let geometric = FunctionHandle::Catalog { name: "geometric".into(), m: 1 };
    for (beta, expected) in [((2, 5), Verdict::Pass), ((3, 5), Verdict::Fail)] {
        let spec = ClassSpec::beta(1, rational(beta.0, beta.1), rational(1, 1))?;
        let r = check_membership(&geometric, &spec, &options)?;
        outcomes.push((r.verdict != expected).then(|| format!("z/(1-z) at beta={}/{}", beta.0, beta.1)));
    }
    Ok(SuiteResult::from_cases("membership", outcomes))
}

/// Runs every suite. `fault` corrupts the closed-form inverse.
pub fn run_suites(seed: u64, quick: bool, fault: bool) -> CliResult<Vec<SuiteResult>> {
    let sizes = if quick {
        Sizes {
            inversions_per_m: 20,
            reduction_ms: 3,
            lemma_samples: 1_000,
            pairs_per_cell: 2,
            sweep_samples: 200,
            membership_angles: 180,
        }
    } else {
        Sizes {
            inversions_per_m: 100,
            reduction_ms: 10,
            lemma_samples: 10_000,
            pairs_per_cell: 20,
            sweep_samples: 2_000,
            membership_angles: 720,
        }
    };
    Ok(vec![
        inverse_suite(seed, sizes.inversions_per_m, fault)?,
        reduction_suite(sizes.reduction_ms)?,
        lemma_suite(seed, sizes.lemma_samples)?,
        forward_suite(seed, sizes.pairs_per_cell)?,
        sweep_suite(seed, sizes.sweep_samples)?,
        membership_suite(sizes.membership_angles)?,
    ])
}

pub fn selftest(args: &SelftestArgs) -> CliResult<Output> {
    let results = run_suites(args.seed.unwrap_or(0), args.quick, args.inject_fault)?;
    let mut table = Table::new(&["suite", "cases", "failures", "passed", "first_failure"]);
    let mut ok = true;
    for r in &results {
        ok &= r.passed();
        if let Some(case) = &r.first_failure {
            eprintln!("suite {} failed: {case}", r.name);
        }
        table.push(vec![
            r.name.into(),
            r.cases.into(),
            r.failures.into(),
            r.passed().into(),
            r.first_failure.clone().into(),
        ]);
    }
    Ok((vec![("selftest", table)], ok))
}
