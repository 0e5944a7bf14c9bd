use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{AlgorithmId, ExperimentConfig, SweepPoint};
use super::rows::{write_csv, ResultRow};
use crate::error::{Error, Result};
use crate::fed_algos::{
    estimate_heterogeneity, mean_operator, simulate, step_size_with, Method, Observer, ProblemConstants, RunConfig,
    Shape, StepSizeOptions, Trajectory,
};
use crate::gap_metrics::{composite_gap_with, restricted_gap_with, GapOptions};
use crate::linalg;
use crate::vi_core::matrix_io::load_affine;
use crate::vi_core::{make_test_problem, DrawPath, OperatorSpec, OracleSpec, RngStream};
use crate::Vector;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads for the sweep (default: all cores).
    pub workers: Option<usize>,
    /// Replace the seed list by this single seed.
    pub seed_override: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub warnings: Vec<String>,
}

/// A fully resolved run: oracles, step sizes and the gap setup.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub algo: AlgorithmId,
    pub point: SweepPoint,
    pub seed: u64,
    pub theorem_id: String,
    pub oracles: Vec<OracleSpec>,
    /// Operator the gap is measured on (the client mean when heterogeneous).
    pub gap_operator: Arc<OperatorSpec>,
    pub center: Vector,
    pub run: RunConfig,
    pub warnings: Vec<String>,
}

/// Build the problem operator described by the config (independent of seeds
/// and sweep points).
pub fn build_operator(cfg: &ExperimentConfig) -> Result<Arc<OperatorSpec>> {
    let p = &cfg.problem;
    let op = match &p.matrix_file {
        Some(path) => {
            let op = load_affine(path).map_err(|e| Error::config("problem.matrix_file", e.to_string()))?;
            if op.dim() != p.dim {
                return Err(Error::config(
                    "problem.dim",
                    format!("matrix file has dimension {}", op.dim()),
                ));
            }
            op
        }
        None => {
            make_test_problem(p.kind, p.dim, &p.params, p.seed).map_err(|e| Error::config("problem", e.to_string()))?
        }
    };
    let c = &p.constants;
    let mut constants = *op.constants();
    if let Some(v) = c.lipschitz {
        constants.lipschitz = v;
    }
    if let Some(v) = c.bound {
        constants.bound = v;
    }
    if let Some(v) = c.cocoercivity {
        constants.cocoercivity = v;
    }
    if let Some(v) = c.second_order {
        constants.second_order = v;
    }
    if let Some(f) = c.bound_ball_factor {
        constants.bound = op.bound_on_ball(&gap_center(cfg), f * cfg.gap.radius);
    }
    Ok(Arc::new(op.with_constants(constants)))
}

fn initial_point(cfg: &ExperimentConfig) -> Vector {
    match &cfg.algorithm.init {
        Some(v) => Vector::from_column_slice(v),
        None => Vector::zeros(cfg.problem.dim),
    }
}

fn gap_center(cfg: &ExperimentConfig) -> Vector {
    match &cfg.gap.center {
        Some(v) => Vector::from_column_slice(v),
        None => initial_point(cfg),
    }
}

/// Zero-mean client shifts with per-coordinate scale `spread/√d`.
fn client_shifts(spread: f64, seed: u64, clients: usize, dim: usize) -> Vec<Vector> {
    let root = RngStream::root(seed);
    let raw: Vec<Vector> = (0..clients)
        .map(|m| {
            let mut rng = root.at(DrawPath::new(m, 0, 0, 0)).rng();
            linalg::gaussian_vector(&mut rng, dim) * (spread / (dim as f64).sqrt())
        })
        .collect();
    let mean = linalg::mean(&raw);
    raw.into_iter().map(|s| s - &mean).collect()
}

pub fn prepare_run(
    cfg: &ExperimentConfig,
    base: &Arc<OperatorSpec>,
    point: SweepPoint,
    seed: u64,
) -> Result<PreparedRun> {
    let a = &cfg.algorithm;
    let dim = cfg.problem.dim;
    let center = gap_center(cfg);
    let radius = cfg.gap.radius;
    let mut warnings = Vec::new();

    let (client_ops, gap_operator, xi) = match (&a.heterogeneity, a.id) {
        (Some(h), AlgorithmId::LesgdHetero) => {
            let ops: Vec<Arc<OperatorSpec>> = client_shifts(h.spread, h.seed, point.clients, dim)
                .into_iter()
                .map(|s| OperatorSpec::shifted(base.clone(), s).map(Arc::new))
                .collect::<Result<_>>()?;
            let mean = Arc::new(mean_operator(&ops)?);
            let xi = match h.xi {
                Some(x) => x,
                None => estimate_heterogeneity(&ops, &mean, &center, radius, h.seed)?,
            };
            (ops, mean, Some(xi))
        }
        _ => (vec![base.clone()], base.clone(), None),
    };

    let oracles: Vec<OracleSpec> = client_ops
        .iter()
        .map(|op| OracleSpec::new(op.clone(), cfg.noise.model, point.sigma))
        .collect::<Result<_>>()?;

    let consts = base.constants();
    let plan = match a.theorem {
        Some(theorem) => {
            let pc = ProblemConstants {
                lipschitz: consts.lipschitz,
                bound: consts.bound,
                cocoercivity: consts.cocoercivity,
                second_order: consts.second_order,
                dim,
                heterogeneity: xi,
            };
            let shape = Shape {
                clients: point.clients,
                local_steps: point.local_steps,
                rounds: point.rounds,
                sigma: point.sigma,
                radius,
            };
            let opts = StepSizeOptions {
                delta_rule: a.delta_rule,
                forced_branch: a.branch,
            };
            Some(step_size_with(theorem, &pc, &shape, opts)?)
        }
        None => None,
    };

    let eta = a.eta.or(plan.as_ref().map(|p| p.eta)).expect("validated");
    let gamma = a.gamma.or(plan.as_ref().and_then(|p| p.gamma));
    let delta = match a.id {
        AlgorithmId::Slippax => a.delta.or(plan.as_ref().and_then(|p| p.delta)).unwrap_or(0.0),
        _ => a.delta.unwrap_or(0.0),
    };
    if a.id != AlgorithmId::Slippax && delta != 0.0 {
        warnings.push(format!("delta ignored by {}", a.id.as_str()));
    }
    let run = RunConfig {
        clients: point.clients,
        local_steps: point.local_steps,
        rounds: point.rounds,
        inner_steps: a.inner_steps,
        eta,
        gamma,
        delta,
        radius,
        master_seed: seed,
        log_every: cfg.log_every,
        init: Some(initial_point(cfg)),
    };
    let theorem_id = match (&plan, a.eta) {
        (Some(p), None) => p.theorem.as_str().to_string(),
        _ => "manual".to_string(),
    };
    Ok(PreparedRun {
        algo: a.id,
        point,
        seed,
        theorem_id,
        oracles,
        gap_operator,
        center,
        run,
        warnings,
    })
}

pub fn execute_run(cfg: &ExperimentConfig, prep: &PreparedRun, observer: Option<Observer<'_>>) -> Result<Trajectory> {
    let method = match prep.algo {
        AlgorithmId::Lesgd | AlgorithmId::LesgdHetero => Method::Lesgd,
        AlgorithmId::Lippax => Method::Lippax,
        AlgorithmId::Slippax => Method::Slippax,
        AlgorithmId::Lsgd => Method::Lsgd,
        AlgorithmId::Lda => Method::Lda(&cfg.algorithm.regularizer),
    };
    simulate(&prep.oracles, method, &prep.run, observer)
}

fn rows_for(
    cfg: &ExperimentConfig,
    prep: &PreparedRun,
    traj: &Trajectory,
    wall_ms: Option<f64>,
) -> Result<Vec<ResultRow>> {
    let opts = GapOptions::with_method(cfg.gap.method);
    let op = &prep.gap_operator;
    let uses_inner = prep.algo.uses_inner_loop();
    let solution = op.solution();
    traj.records
        .iter()
        .map(|rec| {
            let x_o = &rec.running_output;
            let gap = match prep.algo {
                AlgorithmId::Lda => composite_gap_with(
                    op,
                    &cfg.algorithm.regularizer,
                    x_o,
                    &prep.center,
                    prep.run.radius,
                    &opts,
                )?,
                _ => restricted_gap_with(op, x_o, &prep.center, prep.run.radius, &opts)?,
            };
            Ok(ResultRow {
                algo: prep.algo.as_str().to_string(),
                theorem_id: prep.theorem_id.clone(),
                d: op.dim(),
                clients: prep.point.clients,
                local_steps: prep.point.local_steps,
                rounds: prep.point.rounds,
                sigma: prep.point.sigma,
                eta: prep.run.eta,
                gamma: uses_inner.then(|| prep.run.gamma_for(op.constants().lipschitz)),
                delta: prep.run.delta,
                inner_steps: uses_inner.then(|| prep.run.inner_steps_or_default()),
                seed: prep.seed,
                round: rec.round,
                gap_value: gap.value,
                gap_certified: gap.certified,
                drift_z: rec.drift_z,
                dist_to_solution: solution.map(|s| (x_o - s).norm()),
                wall_ms,
            })
        })
        .collect()
}

/// All (sweep point, seed) pairs in run order.
pub fn run_plan(cfg: &ExperimentConfig, opts: &RunOptions) -> Vec<(SweepPoint, u64)> {
    let seeds = match opts.seed_override {
        Some(s) => vec![s],
        None => cfg.seeds.clone(),
    };
    cfg.sweep_points()
        .into_iter()
        .flat_map(|p| seeds.iter().map(move |&s| (p, s)))
        .collect()
}

/// Run every sweep point and seed, writing the CSV when `output` is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let out = run_experiment_with(cfg, &RunOptions::default())?;
    Ok(out.rows)
}

pub fn run_experiment_with(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let base = build_operator(cfg)?;
    let plan = run_plan(cfg, opts);
    let work = || -> Result<Vec<(Vec<ResultRow>, Vec<String>)>> {
        plan.par_iter()
            .map(|&(point, seed)| {
                let start = Instant::now();
                let prep = prepare_run(cfg, &base, point, seed)?;
                let traj = execute_run(cfg, &prep, None)?;
                let wall = cfg.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
                let mut warnings = prep.warnings.clone();
                warnings.extend(traj.warnings.iter().cloned());
                Ok((rows_for(cfg, &prep, &traj, wall)?, warnings))
            })
            .collect()
    };
    let results = match opts.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::param("workers", e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (r, w) in results {
        rows.extend(r);
        for msg in w {
            if !warnings.contains(&msg) {
                warnings.push(msg);
            }
        }
    }
    if let Some(path) = &cfg.output {
        write_csv(&rows, std::fs::File::create(path)?)?;
    }
    Ok(ExperimentOutput { rows, warnings })
}
