//! Plain-text affine problem format: a first line holding `d`, then `d` rows
//! of `d` whitespace-separated decimals for `A`, then one row of `d` values
//! for `b`. Blank lines are ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::operator::OperatorSpec;
use crate::error::{Error, Result};
use crate::{Matrix, Vector};

fn parse_row(line: &str, expected: usize, lineno: usize) -> Result<Vec<f64>> {
    let values: std::result::Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
    let values = values.map_err(|e| Error::Parse(format!("line {lineno}: {e}")))?;
    if values.len() != expected {
        return Err(Error::Parse(format!(
            "line {lineno}: expected {expected} values, found {}",
            values.len()
        )));
    }
    Ok(values)
}

pub fn parse_affine(text: &str) -> Result<(Matrix, Vector)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (lineno, header) = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let dim: usize = header
        .parse()
        .map_err(|e| Error::Parse(format!("line {lineno}: bad dimension: {e}")))?;
    if dim == 0 {
        return Err(Error::Parse("dimension must be positive".into()));
    }
    let mut a = Matrix::zeros(dim, dim);
    for i in 0..dim {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing row {} of A", i + 1)))?;
        for (j, v) in parse_row(line, dim, lineno)?.into_iter().enumerate() {
            a[(i, j)] = v;
        }
    }
    let (lineno, line) = lines.next().ok_or_else(|| Error::Parse("missing row for b".into()))?;
    let b = Vector::from_vec(parse_row(line, dim, lineno)?);
    if let Some((lineno, _)) = lines.next() {
        return Err(Error::Parse(format!("line {lineno}: trailing content")));
    }
    Ok((a, b))
}

/// Load an affine operator; the matrix must have a positive semidefinite
/// symmetric part.
pub fn load_affine(path: &Path) -> Result<OperatorSpec> {
    let text = std::fs::read_to_string(path)?;
    let (a, b) = parse_affine(&text)?;
    OperatorSpec::affine(a, b)
}

pub fn format_affine(a: &Matrix, b: &Vector) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", a.nrows());
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|j| format!("{}", a[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    let row: Vec<String> = b.iter().map(|v| format!("{v}")).collect();
    let _ = writeln!(out, "{}", row.join(" "));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_example() {
        let (a, b) = parse_affine("2\n1 0.5\n-0.5 2\n\n0.1 -3\n").unwrap();
        assert_eq!(a, Matrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 2.0]));
        assert_eq!(b, Vector::from_column_slice(&[0.1, -3.0]));
    }

    #[test]
    fn format_round_trips_exactly() {
        let a = Matrix::from_row_slice(2, 2, &[0.1, 1.0 / 3.0, -1.0 / 3.0, 1e-17]);
        let b = Vector::from_column_slice(&[-0.0, 2.5e300]);
        let (a2, b2) = parse_affine(&format_affine(&a, &b)).unwrap();
        assert_eq!(a, a2);
        assert_eq!(b, b2);
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_affine("").is_err());
        assert!(parse_affine("2\n1 0\n0 1\n").is_err());
        assert!(parse_affine("2\n1 0 3\n0 1\n0 0\n").is_err());
        assert!(parse_affine("1\nx\n0\n").is_err());
        assert!(parse_affine("1\n1\n0\n5\n").is_err());
    }

    #[test]
    fn load_rejects_non_monotone() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        std::fs::write(&path, "1\n-1\n0\n").unwrap();
        assert!(load_affine(&path).is_err());
        std::fs::write(&path, "1\n2\n1\n").unwrap();
        let op = load_affine(&path).unwrap();
        assert_eq!(op.apply(&Vector::from_column_slice(&[1.0]))[0], 3.0);
    }
}
