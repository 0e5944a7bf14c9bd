use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fed_algos::{DeltaRule, TheoremId};
use crate::gap_metrics::GapMethod;
use crate::prox_mirror::RegularizerSpec;
use crate::vi_core::{NoiseModel, ProblemKind, ProblemParams};

pub const DEFAULT_MAX_RUNS: usize = 4096;

/// One experiment: a problem, an algorithm, a federation shape, a noise
/// level, the gap evaluation and an optional sweep, repeated over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemBlock,
    pub algorithm: AlgorithmBlock,
    pub federation: FederationBlock,
    #[serde(default)]
    pub noise: NoiseBlock,
    #[serde(default)]
    pub gap: GapBlock,
    #[serde(default)]
    pub sweep: SweepBlock,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Rounds between logged rows (default `max(1, R/20)`); the final round
    /// is always logged.
    #[serde(default)]
    pub log_every: Option<usize>,
    #[serde(default = "default_max_runs")]
    pub max_runs: usize,
    /// Fill the `wall_ms` column. Off by default so output stays byte-stable.
    #[serde(default)]
    pub timing: bool,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_max_runs() -> usize {
    DEFAULT_MAX_RUNS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    pub kind: ProblemKind,
    pub dim: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: ProblemParams,
    /// Load an affine operator from a matrix file instead of the zoo.
    #[serde(default)]
    pub matrix_file: Option<PathBuf>,
    #[serde(default)]
    pub constants: ConstantsBlock,
}

/// Overrides for the declared constants.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsBlock {
    pub lipschitz: Option<f64>,
    pub bound: Option<f64>,
    pub cocoercivity: Option<f64>,
    pub second_order: Option<f64>,
    /// Replace G by `sup ‖V‖` over the ball of radius `factor · D` around
    /// the gap center (useful for affine operators, unbounded globally).
    pub bound_ball_factor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmId {
    Lesgd,
    Lippax,
    Slippax,
    Lsgd,
    Lda,
    LesgdHetero,
}

impl AlgorithmId {
    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmId::Lesgd => "lesgd",
            AlgorithmId::Lippax => "lippax",
            AlgorithmId::Slippax => "slippax",
            AlgorithmId::Lsgd => "lsgd",
            AlgorithmId::Lda => "lda",
            AlgorithmId::LesgdHetero => "lesgd-hetero",
        }
    }

    pub fn uses_inner_loop(self) -> bool {
        matches!(self, AlgorithmId::Lippax | AlgorithmId::Slippax)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmBlock {
    pub id: AlgorithmId,
    /// Step-size schedule. Explicit `eta`, `gamma`, `delta` override it.
    #[serde(default)]
    pub theorem: Option<TheoremId>,
    /// Force one branch of the schedule instead of the minimum.
    #[serde(default)]
    pub branch: Option<usize>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub inner_steps: Option<usize>,
    #[serde(default)]
    pub delta_rule: DeltaRule,
    #[serde(default)]
    pub regularizer: RegularizerSpec,
    #[serde(default)]
    pub heterogeneity: Option<HeterogeneityBlock>,
    /// Common initial point (origin by default).
    #[serde(default)]
    pub init: Option<Vec<f64>>,
}

/// Client operators `V_m = V + s_m` with zero-mean random shifts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeterogeneityBlock {
    /// Norm scale of the shifts before centering.
    pub spread: f64,
    #[serde(default)]
    pub seed: u64,
    /// Declared ξ; estimated from samples when absent.
    #[serde(default)]
    pub xi: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FederationBlock {
    pub clients: usize,
    pub local_steps: usize,
    pub rounds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseBlock {
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub model: NoiseModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapBlock {
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Ball center; defaults to the initial averaged iterate.
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    #[serde(default)]
    pub method: GapMethod,
}

fn default_radius() -> f64 {
    1.0
}

impl Default for GapBlock {
    fn default() -> Self {
        Self {
            radius: default_radius(),
            center: None,
            method: GapMethod::Auto,
        }
    }
}

/// Lists of values to sweep; an empty list keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    pub clients: Vec<usize>,
    pub local_steps: Vec<usize>,
    pub rounds: Vec<usize>,
    pub sigma: Vec<f64>,
}

impl SweepBlock {
    pub fn is_empty(&self) -> bool {
        self.clients.is_empty() && self.local_steps.is_empty() && self.rounds.is_empty() && self.sigma.is_empty()
    }
}

/// One point of the sweep cross-product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub clients: usize,
    pub local_steps: usize,
    pub rounds: usize,
    pub sigma: f64,
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(path, format!("must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load from a file; a relative `matrix_file` is resolved against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_json(&text)?;
        if let (Some(file), Some(dir)) = (&cfg.problem.matrix_file, path.parent()) {
            if file.is_relative() {
                cfg.problem.matrix_file = Some(dir.join(file));
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Sweep points in run order: clients, then local steps, rounds and σ.
    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        let or = |v: &Vec<usize>, base: usize| if v.is_empty() { vec![base] } else { v.clone() };
        let ms = or(&self.sweep.clients, self.federation.clients);
        let ks = or(&self.sweep.local_steps, self.federation.local_steps);
        let rs = or(&self.sweep.rounds, self.federation.rounds);
        let sigmas = if self.sweep.sigma.is_empty() {
            vec![self.noise.sigma]
        } else {
            self.sweep.sigma.clone()
        };
        let mut out = Vec::new();
        for &clients in &ms {
            for &local_steps in &ks {
                for &rounds in &rs {
                    for &sigma in &sigmas {
                        out.push(SweepPoint {
                            clients,
                            local_steps,
                            rounds,
                            sigma,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn run_count(&self) -> usize {
        let len = |n: usize| n.max(1);
        len(self.sweep.clients.len())
            * len(self.sweep.local_steps.len())
            * len(self.sweep.rounds.len())
            * len(self.sweep.sigma.len())
            * self.seeds.len()
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.problem;
        if p.dim == 0 {
            return Err(Error::config("problem.dim", "must be at least 1"));
        }
        let c = &p.constants;
        for (name, v) in [
            ("problem.constants.lipschitz", c.lipschitz),
            ("problem.constants.bound", c.bound),
            ("problem.constants.cocoercivity", c.cocoercivity),
            ("problem.constants.second_order", c.second_order),
        ] {
            if let Some(v) = v {
                if !(v >= 0.0) {
                    return Err(Error::config(name, "must be nonnegative"));
                }
            }
        }
        if let Some(f) = c.bound_ball_factor {
            positive("problem.constants.bound_ball_factor", f)?;
            if c.bound.is_some() {
                return Err(Error::config(
                    "problem.constants.bound_ball_factor",
                    "conflicts with an explicit `bound`",
                ));
            }
        }

        let a = &self.algorithm;
        if a.theorem.is_none() && a.eta.is_none() {
            return Err(Error::config(
                "algorithm",
                "need a `theorem` schedule or an explicit `eta`",
            ));
        }
        if a.branch.is_some() && a.theorem.is_none() {
            return Err(Error::config("algorithm.branch", "only meaningful with a `theorem`"));
        }
        if let Some(eta) = a.eta {
            positive("algorithm.eta", eta)?;
        }
        if let Some(g) = a.gamma {
            positive("algorithm.gamma", g)?;
        }
        if let Some(d) = a.delta {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::config("algorithm.delta", "must be finite and nonnegative"));
            }
        }
        if a.inner_steps == Some(0) {
            return Err(Error::config("algorithm.inner_steps", "must be at least 1"));
        }
        a.regularizer
            .validate(p.dim)
            .map_err(|e| Error::config("algorithm.regularizer", e.to_string()))?;
        if !a.regularizer.is_zero() && a.id != AlgorithmId::Lda {
            return Err(Error::config(
                "algorithm.regularizer",
                "only `lda` accepts a regularizer",
            ));
        }
        match (&a.heterogeneity, a.id) {
            (Some(h), AlgorithmId::LesgdHetero) => {
                if !(h.spread >= 0.0 && h.spread.is_finite()) {
                    return Err(Error::config(
                        "algorithm.heterogeneity.spread",
                        "must be finite and nonnegative",
                    ));
                }
            }
            (None, AlgorithmId::LesgdHetero) => {
                return Err(Error::config("algorithm.heterogeneity", "required for `lesgd-hetero`"));
            }
            (Some(_), _) => {
                return Err(Error::config(
                    "algorithm.heterogeneity",
                    "only `lesgd-hetero` accepts it",
                ));
            }
            _ => {}
        }
        if let Some(init) = &a.init {
            if init.len() != p.dim {
                return Err(Error::config("algorithm.init", format!("expected {} values", p.dim)));
            }
        }

        let f = &self.federation;
        for (name, v) in [
            ("federation.clients", f.clients),
            ("federation.local_steps", f.local_steps),
            ("federation.rounds", f.rounds),
        ] {
            if v == 0 {
                return Err(Error::config(name, "must be at least 1"));
            }
        }
        if !(self.noise.sigma >= 0.0 && self.noise.sigma.is_finite()) {
            return Err(Error::config("noise.sigma", "must be finite and nonnegative"));
        }
        positive("gap.radius", self.gap.radius)?;
        if let Some(center) = &self.gap.center {
            if center.len() != p.dim {
                return Err(Error::config("gap.center", format!("expected {} values", p.dim)));
            }
        }
        let s = &self.sweep;
        if s.clients.iter().chain(&s.local_steps).chain(&s.rounds).any(|&v| v == 0) {
            return Err(Error::config("sweep", "counts must be at least 1"));
        }
        if s.sigma.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::config("sweep.sigma", "must be finite and nonnegative"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "need at least one seed"));
        }
        if self.log_every == Some(0) {
            return Err(Error::config("log_every", "must be at least 1"));
        }
        let runs = self.run_count();
        if runs > self.max_runs {
            return Err(Error::config(
                "sweep",
                format!("{runs} runs exceed the cap of {}", self.max_runs),
            ));
        }
        Ok(())
    }
}
