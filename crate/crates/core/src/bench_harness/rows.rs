use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Fixed CSV column order.
pub const CSV_COLUMNS: [&str; 18] = [
    "algo",
    "theorem_id",
    "d",
    "M",
    "K",
    "R",
    "sigma",
    "eta",
    "gamma",
    "delta",
    "H",
    "seed",
    "round",
    "gap_value",
    "gap_certified",
    "drift_z",
    "dist_to_solution",
    "wall_ms",
];

/// One logged round of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub algo: String,
    /// Schedule id, or `manual` for explicit step sizes.
    pub theorem_id: String,
    pub d: usize,
    #[serde(rename = "M")]
    pub clients: usize,
    #[serde(rename = "K")]
    pub local_steps: usize,
    #[serde(rename = "R")]
    pub rounds: usize,
    pub sigma: f64,
    pub eta: f64,
    pub gamma: Option<f64>,
    pub delta: f64,
    #[serde(rename = "H")]
    pub inner_steps: Option<usize>,
    pub seed: u64,
    pub round: usize,
    pub gap_value: f64,
    pub gap_certified: bool,
    pub drift_z: f64,
    pub dist_to_solution: Option<f64>,
    pub wall_ms: Option<f64>,
}

impl ResultRow {
    /// Column value rendered as text, by CSV column name.
    pub fn column(&self, name: &str) -> Option<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        Some(match name {
            "algo" => self.algo.clone(),
            "theorem_id" => self.theorem_id.clone(),
            "d" => self.d.to_string(),
            "M" => self.clients.to_string(),
            "K" => self.local_steps.to_string(),
            "R" => self.rounds.to_string(),
            "sigma" => self.sigma.to_string(),
            "eta" => self.eta.to_string(),
            "gamma" => opt(self.gamma),
            "delta" => self.delta.to_string(),
            "H" => self.inner_steps.map(|h| h.to_string()).unwrap_or_default(),
            "seed" => self.seed.to_string(),
            "round" => self.round.to_string(),
            "gap_value" => self.gap_value.to_string(),
            "gap_certified" => self.gap_certified.to_string(),
            "drift_z" => self.drift_z.to_string(),
            "dist_to_solution" => opt(self.dist_to_solution),
            "wall_ms" => opt(self.wall_ms),
            _ => return None,
        })
    }

    /// Numeric column value, by CSV column name.
    pub fn numeric(&self, name: &str) -> Option<f64> {
        match name {
            "d" => Some(self.d as f64),
            "M" => Some(self.clients as f64),
            "K" => Some(self.local_steps as f64),
            "R" => Some(self.rounds as f64),
            "sigma" => Some(self.sigma),
            "eta" => Some(self.eta),
            "gamma" => self.gamma,
            "delta" => Some(self.delta),
            "H" => self.inner_steps.map(|h| h as f64),
            "seed" => Some(self.seed as f64),
            "round" => Some(self.round as f64),
            "gap_value" => Some(self.gap_value),
            "drift_z" => Some(self.drift_z),
            "dist_to_solution" => self.dist_to_solution,
            "wall_ms" => self.wall_ms,
            // total work MKR
            "MKR" => Some((self.clients * self.local_steps * self.rounds) as f64),
            _ => None,
        }
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

pub fn read_csv_file(path: &Path) -> Result<Vec<ResultRow>> {
    read_csv(std::fs::File::open(path)?)
}
