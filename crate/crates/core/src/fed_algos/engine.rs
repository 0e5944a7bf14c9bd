use rayon::prelude::*;

use super::config::RunConfig;
use super::inner::inner_loop;
use crate::error::{Error, Result};
use crate::linalg;
use crate::prox_mirror::{mirror_map, MirrorState, RegularizerSpec};
use crate::vi_core::{DrawPath, OracleSpec, RngStream};
use crate::Vector;

/// Which update rule the engine runs.
#[derive(Debug, Clone, Copy)]
pub enum Method<'a> {
    Lesgd,
    Lippax,
    Slippax,
    Lsgd,
    Lda(&'a RegularizerSpec),
}

impl Method<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Lesgd => "lesgd",
            Method::Lippax => "lippax",
            Method::Slippax => "slippax",
            Method::Lsgd => "lsgd",
            Method::Lda(_) => "lda",
        }
    }

    fn averages_x(&self) -> bool {
        matches!(self, Method::Lesgd | Method::Lsgd | Method::Lda(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    /// Global step index `t = round · K`.
    pub step: usize,
    /// Client mean of `x_t^m` after synchronization.
    pub mean_iterate: Vector,
    /// Client mean of `z_t^m` after synchronization.
    pub mean_anchor: Vector,
    /// Running output: mean of every output point so far.
    pub running_output: Vector,
    /// Mean squared deviation of the `z` candidates just before averaging.
    pub drift_z: f64,
    /// Same for the `x` candidates.
    pub drift_x: f64,
    /// Filled by the harness when it evaluates the gap.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub method: &'static str,
    pub records: Vec<RoundRecord>,
    /// `x_o`, the mean of all `M·T` output points (`v_t^m` for LDA).
    pub final_output: Vector,
    /// Client mean of the anchors at the end of the run.
    pub final_anchor: Vector,
    pub warnings: Vec<String>,
}

/// Snapshot passed to an observer after every step.
#[derive(Debug)]
pub struct StepView<'a> {
    pub step: usize,
    pub synced: bool,
    /// Client `z` values before averaging.
    pub z_candidates: &'a [Vector],
    /// Client `x` values before averaging.
    pub x_candidates: &'a [Vector],
    /// Client `z` values after this step (averaged when `synced`).
    pub anchors: &'a [Vector],
    /// Client `x` values after this step.
    pub iterates: &'a [Vector],
    /// Points that entered the running output this step.
    pub outputs: &'a [Vector],
}

pub type Observer<'o> = &'o mut dyn FnMut(&StepView<'_>);

/// Below this amount of per-step work clients run serially.
const PARALLEL_WORK: usize = 1 << 12;

fn per_client<F>(clients: usize, parallel: bool, f: F) -> Vec<Vector>
where
    F: Fn(usize) -> Vector + Sync + Send,
{
    if parallel {
        (0..clients).into_par_iter().map(f).collect()
    } else {
        (0..clients).map(f).collect()
    }
}

/// Simulate a federated run. `oracles` holds either one shared oracle or one
/// per client.
pub fn simulate(
    oracles: &[OracleSpec],
    method: Method<'_>,
    cfg: &RunConfig,
    observer: Option<Observer<'_>>,
) -> Result<Trajectory> {
    let first = oracles
        .first()
        .ok_or_else(|| Error::param("oracles", "need at least one oracle"))?;
    let dim = first.dim();
    if oracles.len() != 1 && oracles.len() != cfg.clients {
        return Err(Error::param(
            "oracles",
            format!("expected 1 or {} oracles, got {}", cfg.clients, oracles.len()),
        ));
    }
    for o in oracles {
        Error::check_dim(dim, o.dim())?;
    }
    cfg.validate(dim)?;
    if let Method::Lda(reg) = method {
        reg.validate(dim)?;
    }

    let mut warnings = Vec::new();
    let constants = *first.base.constants();
    match method {
        Method::Lsgd if !constants.cocoercivity.is_finite() => {
            warnings.push("lsgd on an operator without finite co-coercivity: no convergence guarantee".to_string())
        }
        Method::Lda(_) if !constants.bound.is_finite() => {
            warnings.push("lda on an operator without a finite bound G: no convergence guarantee".to_string())
        }
        _ => {}
    }

    let m_count = cfg.clients;
    let k = cfg.local_steps;
    let eta = cfg.eta;
    let inner_steps = cfg.inner_steps_or_default();
    let lip = oracles.iter().map(|o| o.base.constants().lipschitz).fold(0.0, f64::max);
    let gamma = cfg.gamma_for(lip);
    let oracle_of = |m: usize| if oracles.len() == 1 { &oracles[0] } else { &oracles[m] };
    let smoothed: Vec<OracleSpec> = match method {
        Method::Slippax => oracles.iter().map(|o| o.with_smoothing(cfg.delta)).collect(),
        _ => Vec::new(),
    };
    let smoothed_of = |m: usize| {
        if smoothed.len() == 1 {
            &smoothed[0]
        } else {
            &smoothed[m]
        }
    };
    let root = RngStream::root(cfg.master_seed);
    let stream = |m: usize, t: usize, counter: u64| root.at(DrawPath::new(m, t, 0, counter));

    let work = m_count
        * dim.max(1)
        * match method {
            Method::Lippax | Method::Slippax => inner_steps + 1,
            _ => 2,
        };
    let parallel = m_count > 1 && work >= PARALLEL_WORK;

    let start = cfg.init.clone().unwrap_or_else(|| Vector::zeros(dim));
    let mut z: Vec<Vector> = vec![start.clone(); m_count];
    let mut x: Vec<Vector> = vec![start; m_count];
    let mut output_sum = Vector::zeros(dim);
    let mut output_count = 0usize;
    let mut records = Vec::new();
    let log_every = cfg.log_every_or_default();
    let mut observer = observer;

    for t in 1..=cfg.total_steps() {
        let synced = t % k == 0;

        let x_cand = per_client(m_count, parallel, |m| {
            let o = oracle_of(m);
            match method {
                Method::Lesgd => {
                    let v = o.sample_unchecked(&z[m], &stream(m, t, 0));
                    &z[m] - v * eta
                }
                Method::Lda(reg) => {
                    let u = mirror_map(MirrorState::new(t - 1, eta), reg, &z[m]);
                    let v = o.sample_unchecked(&u, &stream(m, t, 0));
                    &z[m] - v * eta
                }
                Method::Lippax => inner_loop(o, &z[m], eta, gamma, inner_steps, &stream(m, t, 0), |_| {}),
                Method::Slippax => inner_loop(smoothed_of(m), &z[m], eta, gamma, inner_steps, &stream(m, t, 0), |_| {}),
                Method::Lsgd => {
                    let v = o.sample_unchecked(&x[m], &stream(m, t, 0));
                    &x[m] - v * eta
                }
            }
        });
        x = if synced && method.averages_x() {
            vec![linalg::mean(&x_cand); m_count]
        } else {
            x_cand.clone()
        };

        let outputs: Vec<Vector> = match method {
            Method::Lda(reg) => {
                let ms = MirrorState::new(t, eta);
                x.iter().map(|xi| mirror_map(ms, reg, xi)).collect()
            }
            _ => x.clone(),
        };

        let z_cand = match method {
            Method::Lsgd => x.clone(),
            _ => per_client(m_count, parallel, |m| {
                let query = match method {
                    Method::Lda(_) => &outputs[m],
                    _ => &x[m],
                };
                let v = oracle_of(m).sample_unchecked(query, &stream(m, t, 1));
                &z[m] - v * eta
            }),
        };
        z = if synced {
            vec![linalg::mean(&z_cand); m_count]
        } else {
            z_cand.clone()
        };

        for p in &outputs {
            output_sum += p;
        }
        output_count += outputs.len();

        if let Some(obs) = observer.as_mut() {
            obs(&StepView {
                step: t,
                synced,
                z_candidates: &z_cand,
                x_candidates: &x_cand,
                anchors: &z,
                iterates: &x,
                outputs: &outputs,
            });
        }

        if synced {
            let round = t / k;
            if round.is_multiple_of(log_every) || round == cfg.rounds {
                records.push(RoundRecord {
                    round,
                    step: t,
                    mean_iterate: linalg::mean(&x),
                    mean_anchor: linalg::mean(&z),
                    running_output: &output_sum / output_count as f64,
                    drift_z: linalg::mean_sq_deviation(&z_cand),
                    drift_x: linalg::mean_sq_deviation(&x_cand),
                    gap: None,
                });
            }
        }
    }

    Ok(Trajectory {
        method: method.name(),
        records,
        final_output: output_sum / output_count as f64,
        final_anchor: linalg::mean(&z),
        warnings,
    })
}
