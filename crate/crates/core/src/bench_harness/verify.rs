use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{AlgorithmId, ExperimentConfig, HeterogeneityBlock};
use super::reduction::compare_reduction_with;
use super::rows::rows_to_csv;
use super::runner::{build_operator, prepare_run, run_experiment_with, run_plan, RunOptions};
use crate::error::Result;
use crate::fed_algos::inner_prox_path;
use crate::gap_metrics::{check_eg_cocoercivity, exact_prox_point};
use crate::linalg;
use crate::prox_mirror::{prox, reg_value, RegularizerSpec};
use crate::vi_core::{verify_properties, OracleSpec, RngStream};
use crate::Vector;

/// Rounds used by the trajectory-level checks.
const CHECK_ROUNDS: usize = 5;
const PAIRS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

/// A short single-point, single-seed copy of the config for trajectory checks.
fn shortened(cfg: &ExperimentConfig) -> ExperimentConfig {
    let mut c = cfg.clone();
    let point = cfg.sweep_points()[0];
    c.federation.clients = point.clients;
    c.federation.local_steps = point.local_steps;
    c.federation.rounds = point.rounds.min(CHECK_ROUNDS);
    c.noise.sigma = point.sigma;
    c.sweep = Default::default();
    c.seeds.truncate(1);
    c.output = None;
    c.timing = false;
    c
}

fn with_algorithm(cfg: &ExperimentConfig, id: AlgorithmId) -> ExperimentConfig {
    let mut c = cfg.clone();
    c.algorithm.id = id;
    c.algorithm.regularizer = RegularizerSpec::Zero;
    c.algorithm.heterogeneity = None;
    c.algorithm.delta = None;
    if id.uses_inner_loop() && c.algorithm.inner_steps.is_none() {
        c.algorithm.inner_steps = Some(4);
    }
    c
}

/// Run the property and invariant suite for the configured problem.
pub fn verify(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let mut report = VerifyReport { checks: Vec::new() };
    let op = build_operator(cfg)?;
    let radius = 10.0 * cfg.gap.radius;
    let seed = cfg.seeds[0];

    let props = verify_properties(&op, PAIRS, radius, seed)?;
    report.push(
        "monotone",
        props.monotone_violations == 0,
        format!(
            "{} violations in {} pairs",
            props.monotone_violations, props.pairs_tested
        ),
    );
    let l = op.constants().lipschitz;
    report.push(
        "lipschitz",
        !l.is_finite() || props.measured_lipschitz <= l * (1.0 + 1e-9) + 1e-12,
        format!("measured {} against declared {l}", props.measured_lipschitz),
    );

    if op.is_affine() && l > 0.0 && l.is_finite() {
        let eg = check_eg_cocoercivity(&op, 1.0 / l, PAIRS, seed)?;
        report.push(
            "eg-cocoercivity",
            eg.violations == 0,
            format!("{} violations, worst {:e}", eg.violations, eg.max_violation),
        );

        let eta = 1.0 / l;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = linalg::uniform_in_ball(&mut rng, &Vector::zeros(op.dim()), radius);
        let star = exact_prox_point(&op, &z, eta)?;
        let gamma = crate::fed_algos::step_size::inner_step(eta, l);
        let factor = (1.0 - 1.0 / (eta * l + 1.0).powi(2)).sqrt();
        let path = inner_prox_path(
            &OracleSpec::exact(op.clone()),
            &z,
            eta,
            gamma,
            30,
            &RngStream::root(seed),
        )?;
        let worst = path
            .windows(2)
            .map(|w| (&w[1] - &star).norm() - factor * (&w[0] - &star).norm())
            .fold(f64::NEG_INFINITY, f64::max);
        report.push(
            "inner-contraction",
            worst <= 1e-9,
            format!("worst excess {worst:e} over 30 steps"),
        );
    }

    if !cfg.algorithm.regularizer.is_zero() {
        let reg = &cfg.algorithm.regularizer;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let origin = Vector::zeros(op.dim());
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..200 {
            let u = linalg::uniform_in_ball(&mut rng, &origin, radius);
            let w = 0.5;
            let p = prox(reg, &u, w)?;
            let obj = |q: &Vector| reg_value(reg, q) + (q - &u).norm_squared() / (2.0 * w);
            let fp = obj(&p);
            for _ in 0..10 {
                let cand = linalg::uniform_in_ball(&mut rng, &p, 0.1);
                let fq = obj(&cand);
                if fq.is_finite() {
                    worst = worst.max(fp - fq);
                }
            }
        }
        report.push(
            "prox-optimality",
            worst <= 1e-12,
            format!("worst improvement {worst:e}"),
        );
    }

    let short = shortened(cfg);
    let opts = RunOptions::default();
    let reductions = [
        (
            "reduction-lda",
            with_algorithm(&short, AlgorithmId::Lda),
            with_algorithm(&short, AlgorithmId::Lesgd),
        ),
        (
            "reduction-slippax",
            ExperimentConfig {
                algorithm: super::config::AlgorithmBlock {
                    delta: Some(0.0),
                    ..with_algorithm(&short, AlgorithmId::Slippax).algorithm
                },
                ..short.clone()
            },
            with_algorithm(&short, AlgorithmId::Lippax),
        ),
        (
            "reduction-hetero",
            ExperimentConfig {
                algorithm: super::config::AlgorithmBlock {
                    heterogeneity: Some(HeterogeneityBlock {
                        spread: 0.0,
                        seed: 0,
                        xi: Some(0.0),
                    }),
                    ..with_algorithm(&short, AlgorithmId::LesgdHetero).algorithm
                },
                ..short.clone()
            },
            with_algorithm(&short, AlgorithmId::Lesgd),
        ),
    ];
    for (name, a, b) in reductions {
        // The schedule differs across algorithms, so pin η from the planned run.
        let (a, b) = pin_eta(&a, &b)?;
        let r = compare_reduction_with(&a, &b, &opts)?;
        report.push(
            name,
            r.identical,
            format!("max deviation {:e} over {} steps", r.max_deviation, r.steps_compared),
        );
    }

    let one = run_experiment_with(
        &short,
        &RunOptions {
            workers: Some(1),
            ..opts
        },
    )?;
    let many = run_experiment_with(
        &short,
        &RunOptions {
            workers: Some(4),
            ..opts
        },
    )?;
    report.push(
        "determinism",
        rows_to_csv(&one.rows) == rows_to_csv(&many.rows),
        format!("{} rows compared across 1 and 4 workers", one.rows.len()),
    );
    Ok(report)
}

fn pin_eta(a: &ExperimentConfig, b: &ExperimentConfig) -> Result<(ExperimentConfig, ExperimentConfig)> {
    let mut a = a.clone();
    let mut b = b.clone();
    if b.algorithm.eta.is_none() {
        let base = build_operator(&b)?;
        let (point, seed) = run_plan(&b, &RunOptions::default())[0];
        let prep = prepare_run(&b, &base, point, seed)?;
        for c in [&mut a, &mut b] {
            c.algorithm.eta = Some(prep.run.eta);
            if c.algorithm.id.uses_inner_loop() && c.algorithm.gamma.is_none() {
                c.algorithm.gamma = prep.run.gamma;
            }
            c.algorithm.theorem = None;
            c.algorithm.branch = None;
        }
    }
    a.algorithm.theorem = b.algorithm.theorem;
    a.algorithm.branch = b.algorithm.branch;
    a.algorithm.eta = b.algorithm.eta;
    a.algorithm.gamma = b.algorithm.gamma;
    Ok((a, b))
}
