use std::collections::BTreeMap;

use serde::Serialize;

use super::rows::ResultRow;
use crate::error::{Error, Result};

/// Minimum number of distinct x values for a fit.
pub const MIN_FIT_POINTS: usize = 4;

/// Log-log least-squares fit `log gap = intercept + slope · log x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    /// Group key as `(column, value)` pairs.
    pub group: Vec<(String, String)>,
    pub x_name: String,
    pub pairs: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub warnings: Vec<String>,
}

/// Fit `y = a · x^slope` on positive pairs.
pub fn fit_power_law(pairs: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if pairs.len() < MIN_FIT_POINTS {
        return Err(Error::param(
            "pairs",
            format!("need at least {MIN_FIT_POINTS} points, got {}", pairs.len()),
        ));
    }
    if let Some(&(x, y)) = pairs
        .iter()
        .find(|&&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::param("pairs", format!("nonpositive point ({x}, {y})")));
    }
    let n = pairs.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = pairs.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::param("pairs", "x values are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    if !slope.is_finite() {
        return Err(Error::param("pairs", "slope is not finite"));
    }
    Ok((slope, intercept, r_squared))
}

/// Fit the gap against `x_name` within each group.
///
/// Rows at their final logged round are used unless `x_name` is `round`.
/// Seeds at the same x are averaged first. Nonpositive gaps are dropped with
/// a warning.
pub fn fit_rate(rows: &[ResultRow], group_by: &[&str], x_name: &str) -> Result<Vec<RateFit>> {
    let probe = rows.first();
    for name in group_by {
        if probe.is_some_and(|r| r.column(name).is_none()) {
            return Err(Error::param("group_by", format!("unknown column `{name}`")));
        }
    }
    if probe.is_some_and(|r| r.numeric(x_name).is_none()) {
        return Err(Error::param("x_name", format!("`{x_name}` is not a numeric column")));
    }
    let by_round = x_name == "round";

    type Key = Vec<(String, String)>;
    type Sums = BTreeMap<u64, (f64, f64, usize)>;
    let mut groups: BTreeMap<Key, (Sums, Vec<String>)> = BTreeMap::new();
    for row in rows {
        if !by_round && row.round != row.rounds {
            continue;
        }
        let key: Key = group_by
            .iter()
            .map(|n| (n.to_string(), row.column(n).unwrap_or_default()))
            .collect();
        let entry = groups.entry(key).or_default();
        let Some(x) = row.numeric(x_name) else { continue };
        if !(row.gap_value > 0.0) {
            entry.1.push(format!(
                "excluded nonpositive gap {} at {x_name}={x} seed={}",
                row.gap_value, row.seed
            ));
            continue;
        }
        let slot = entry.0.entry(x.to_bits()).or_insert((x, 0.0, 0));
        slot.1 += row.gap_value;
        slot.2 += 1;
    }

    let mut fits = Vec::new();
    for (group, (points, warnings)) in groups {
        let mut pairs: Vec<(f64, f64)> = points.values().map(|&(x, s, n)| (x, s / n as f64)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (slope, intercept, r_squared) =
            fit_power_law(&pairs).map_err(|e| Error::param("rows", format!("group {group:?}: {e}")))?;
        fits.push(RateFit {
            group,
            x_name: x_name.to_string(),
            pairs,
            slope,
            intercept,
            r_squared,
            warnings,
        });
    }
    Ok(fits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(algo: &str, rounds: usize, seed: u64, gap: f64) -> ResultRow {
        ResultRow {
            algo: algo.into(),
            theorem_id: "manual".into(),
            d: 2,
            clients: 1,
            local_steps: 1,
            rounds,
            sigma: 0.0,
            eta: 0.1,
            gamma: None,
            delta: 0.0,
            inner_steps: None,
            seed,
            round: rounds,
            gap_value: gap,
            gap_certified: true,
            drift_z: 0.0,
            dist_to_solution: None,
            wall_ms: None,
        }
    }

    #[test]
    fn exact_inverse_law() {
        let rows: Vec<_> = [50, 100, 200, 400]
            .iter()
            .map(|&r| row("a", r, 0, 100.0 / r as f64))
            .collect();
        let fits = fit_rate(&rows, &["algo"], "R").unwrap();
        assert_eq!(fits.len(), 1);
        assert!((fits[0].slope + 1.0).abs() < 1e-9);
        assert!((fits[0].r_squared - 1.0).abs() < 1e-12);
        assert!((fits[0].intercept - 100f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn inverse_sqrt_law() {
        let rows: Vec<_> = [50, 100, 200, 400]
            .iter()
            .map(|&r| row("a", r, 0, 3.0 / (r as f64).sqrt()))
            .collect();
        let fit = &fit_rate(&rows, &[], "R").unwrap()[0];
        assert!((fit.slope + 0.5).abs() < 1e-9);
    }

    #[test]
    fn groups_split_and_seeds_average() {
        let mut rows = Vec::new();
        for r in [10, 20, 40, 80] {
            rows.push(row("a", r, 0, 1.0 / r as f64));
            rows.push(row("a", r, 1, 3.0 / r as f64));
            rows.push(row("b", r, 0, 1.0 / (r * r) as f64));
        }
        let fits = fit_rate(&rows, &["algo"], "R").unwrap();
        assert_eq!(fits.len(), 2);
        assert!((fits[0].slope + 1.0).abs() < 1e-9);
        assert!((fits[0].pairs[0].1 - 0.2).abs() < 1e-15);
        assert!((fits[1].slope + 2.0).abs() < 1e-9);
    }

    #[test]
    fn nonpositive_gap_is_excluded_with_warning() {
        let mut rows: Vec<_> = [10, 20, 40, 80]
            .iter()
            .map(|&r| row("a", r, 0, 1.0 / r as f64))
            .collect();
        rows.push(row("a", 160, 0, 0.0));
        let fit = &fit_rate(&rows, &[], "R").unwrap()[0];
        assert_eq!(fit.pairs.len(), 4);
        assert_eq!(fit.warnings.len(), 1);
    }

    #[test]
    fn too_few_points_rejected() {
        let rows: Vec<_> = [10, 20, 40].iter().map(|&r| row("a", r, 0, 1.0)).collect();
        assert!(fit_rate(&rows, &[], "R").is_err());
        assert!(fit_rate(&rows, &["bogus"], "R").is_err());
        assert!(fit_rate(&rows, &[], "algo").is_err());
    }

    #[test]
    fn non_final_rows_ignored_unless_fitting_round() {
        let mut rows = Vec::new();
        for t in 1..=8 {
            rows.push(ResultRow {
                round: t,
                ..row("a", 8, 0, 1.0 / t as f64)
            });
        }
        let fit = &fit_rate(&rows, &[], "round").unwrap()[0];
        assert!((fit.slope + 1.0).abs() < 1e-9);
        assert!(fit_rate(&rows, &[], "R").is_err());
    }

    mod props {
        use super::super::fit_power_law;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn planted_power_law_recovered(slope in -3.0f64..3.0, scale in 1e-3f64..1e3) {
                let pairs: Vec<_> = [3.0, 7.0, 20.0, 55.0, 130.0]
                    .iter()
                    .map(|&x: &f64| (x, scale * x.powf(slope)))
                    .collect();
                let (s, i, r2) = fit_power_law(&pairs).unwrap();
                prop_assert!((s - slope).abs() < 1e-9);
                prop_assert!((i - scale.ln()).abs() < 1e-8);
                prop_assert!(r2 > 1.0 - 1e-9);
            }
        }
    }
}
