use serde_json::Value;

use super::config::ExperimentConfig;
use super::runner::{build_operator, execute_run, prepare_run, run_plan, RunOptions};
use crate::error::{Error, Result};
use crate::fed_algos::StepView;
use crate::Vector;

/// Fields along which a reduction pair may differ.
const AXIS_FIELDS: [&str; 4] = ["id", "regularizer", "delta", "heterogeneity"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionReport {
    /// Every logged iterate agrees bit for bit.
    pub identical: bool,
    /// Largest absolute coordinate difference seen.
    pub max_deviation: f64,
    /// Number of (run, step) pairs compared.
    pub steps_compared: usize,
}

fn neutralized(cfg: &ExperimentConfig) -> Result<Value> {
    let mut v = serde_json::to_value(cfg)?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("output");
        obj.remove("timing");
    }
    if let Some(alg) = v.get_mut("algorithm").and_then(Value::as_object_mut) {
        for f in AXIS_FIELDS {
            alg.remove(f);
        }
    }
    Ok(v)
}

fn first_difference(a: &Value, b: &Value, path: &str) -> Option<String> {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let keys: std::collections::BTreeSet<_> = x.keys().chain(y.keys()).collect();
            keys.into_iter().find_map(|k| {
                let p = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                match (x.get(k), y.get(k)) {
                    (Some(l), Some(r)) => first_difference(l, r, &p),
                    _ => Some(p),
                }
            })
        }
        _ if a == b => None,
        _ => Some(path.to_string()),
    }
}

/// Flattened record of every client vector each step shows the observer.
fn collect(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<Vec<Vector>>> {
    let base = build_operator(cfg)?;
    let mut steps = Vec::new();
    for (point, seed) in run_plan(cfg, opts) {
        let prep = prepare_run(cfg, &base, point, seed)?;
        let mut obs = |v: &StepView<'_>| {
            let mut all: Vec<Vector> = Vec::new();
            all.extend_from_slice(v.anchors);
            all.extend_from_slice(v.iterates);
            all.extend_from_slice(v.outputs);
            steps.push(all);
        };
        let traj = execute_run(cfg, &prep, Some(&mut obs))?;
        steps.push(vec![traj.final_output, traj.final_anchor]);
    }
    Ok(steps)
}

/// Run two configs that differ only in the algorithm id, regularizer,
/// smoothing radius or heterogeneity block, and compare their trajectories.
pub fn compare_reduction(a: &ExperimentConfig, b: &ExperimentConfig) -> Result<ReductionReport> {
    compare_reduction_with(a, b, &RunOptions::default())
}

pub fn compare_reduction_with(
    a: &ExperimentConfig,
    b: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<ReductionReport> {
    a.validate()?;
    b.validate()?;
    if let Some(path) = first_difference(&neutralized(a)?, &neutralized(b)?, "") {
        return Err(Error::config(path, "reduction pair differs outside the reduction axis"));
    }
    let sa = collect(a, opts)?;
    let sb = collect(b, opts)?;
    let mut report = ReductionReport {
        identical: sa.len() == sb.len(),
        max_deviation: 0.0,
        steps_compared: sa.len().min(sb.len()),
    };
    for (va, vb) in sa.iter().zip(&sb) {
        if va.len() != vb.len() {
            report.identical = false;
            report.max_deviation = f64::INFINITY;
            continue;
        }
        for (x, y) in va.iter().zip(vb) {
            for (p, q) in x.iter().zip(y.iter()) {
                if p.to_bits() != q.to_bits() && !(*p == 0.0 && *q == 0.0) {
                    report.identical = false;
                    let dev = (p - q).abs();
                    report.max_deviation = report.max_deviation.max(if dev.is_nan() { f64::INFINITY } else { dev });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox_mirror::RegularizerSpec;

    fn base(id: &str, extra: &str) -> ExperimentConfig {
        let text = format!(
            r#"{{
                "problem": {{"kind": "bilinear-saddle", "dim": 4, "seed": 3}},
                "algorithm": {{"id": "{id}", "eta": 0.1, "inner_steps": 4 {extra}}},
                "federation": {{"clients": 3, "local_steps": 4, "rounds": 5}},
                "noise": {{"sigma": 0.5}},
                "seeds": [0, 1]
            }}"#
        );
        ExperimentConfig::from_json(&text).unwrap()
    }

    #[test]
    fn lda_without_regularizer_matches_lesgd() {
        let r = compare_reduction(&base("lda", ""), &base("lesgd", "")).unwrap();
        assert!(r.identical);
        assert_eq!(r.max_deviation, 0.0);
        assert!(r.steps_compared > 0);
    }

    #[test]
    fn slippax_without_smoothing_matches_lippax() {
        let r = compare_reduction(&base("slippax", r#", "delta": 0.0"#), &base("lippax", "")).unwrap();
        assert!(r.identical);
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn identical_clients_match_lesgd() {
        let hetero = base("lesgd-hetero", r#", "heterogeneity": {"spread": 0.0}"#);
        let r = compare_reduction(&hetero, &base("lesgd", "")).unwrap();
        assert!(r.identical, "{r:?}");
    }

    #[test]
    fn l1_regularizer_breaks_the_reduction() {
        let mut lda = base("lda", "");
        lda.algorithm.regularizer = RegularizerSpec::L1 { lambda: 0.3 };
        let r = compare_reduction(&lda, &base("lesgd", "")).unwrap();
        assert!(!r.identical);
        assert!(r.max_deviation > 0.0);
    }

    #[test]
    fn pairs_differing_elsewhere_are_rejected() {
        let mut b = base("lesgd", "");
        b.federation.rounds = 6;
        match compare_reduction(&base("lda", ""), &b) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "federation.rounds"),
            other => panic!("{other:?}"),
        }
    }
}
