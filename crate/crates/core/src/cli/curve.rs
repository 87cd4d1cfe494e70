//! `x,u` curve files.
//!
//! One header line `x,u`, then one row per sample with both columns written
//! to 17 significant digits so every `f64` survives a round trip.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::CliError;
use crate::grid::{Grid1D, NodalFunction};

pub const HEADER: &str = "x,u";

pub fn to_csv(x: &[f64], u: &[f64]) -> String {
    let mut out = String::with_capacity(48 * x.len() + 4);
    out.push_str(HEADER);
    out.push('\n');
    for (a, b) in x.iter().zip(u) {
        let _ = writeln!(out, "{a:.16e},{b:.16e}");
    }
    out
}

pub fn write_curve(path: &Path, x: &[f64], u: &[f64]) -> Result<(), CliError> {
    fs::write(path, to_csv(x, u)).map_err(|e| CliError::io(path, e))
}

pub fn write_function(path: &Path, u: &NodalFunction) -> Result<(), CliError> {
    write_curve(path, &u.grid().nodes(), u.values())
}

/// Parses a curve file, checking the header and that `x` increases strictly from 0 to 1.
pub fn parse_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == HEADER => {}
        other => {
            return Err(CliError::Spec(format!(
                "curve file must start with `{HEADER}`, found {other:?}"
            )))
        }
    }
    let mut xs = Vec::new();
    let mut us = Vec::new();
    for (row, line) in lines.enumerate() {
        let mut cols = line.split(',');
        let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(CliError::Spec(format!("row {}: expected two columns", row + 1)));
        };
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Spec(format!("row {}: bad number `{s}`", row + 1)))
        };
        xs.push(parse(a)?);
        us.push(parse(b)?);
    }
    if xs.len() < 2 || xs[0] != 0.0 || *xs.last().unwrap() != 1.0 {
        return Err(CliError::Spec("x column must run from 0 to 1".into()));
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Spec("x column must be strictly increasing".into()));
    }
    Ok((xs, us))
}

/// Reads a curve sampled on a uniform grid into a nodal function whose end
/// values are pinned to the file's first and last samples.
pub fn read_function(path: &Path) -> Result<NodalFunction, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let (xs, us) = parse_csv(&text)?;
    let grid = Grid1D::uniform(xs.len() - 1).map_err(|e| CliError::Spec(e.to_string()))?;
    for (i, &x) in xs.iter().enumerate() {
        if (x - grid.node(i)).abs() > 1e-12 {
            return Err(CliError::Spec(format!(
                "{}: x = {x} is not on the uniform grid with {} cells",
                path.display(),
                grid.cells()
            )));
        }
    }
    NodalFunction::new(grid, us, None, None)
        .map(NodalFunction::pinned)
        .map_err(|e| CliError::Spec(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_malformed_files() {
        assert!(parse_csv("t,u\n0,0\n1,1\n").is_err());
        assert!(parse_csv("x,u\n0,0\n").is_err());
        assert!(parse_csv("x,u\n0,0\n0.7,1,3\n1,1\n").is_err());
        assert!(parse_csv("x,u\n0,0\n0.6,1\n0.5,1\n1,1\n").is_err());
        assert!(parse_csv("x,u\n0,0\n0.5,abc\n1,1\n").is_err());
        assert!(parse_csv("x,u\n0.1,0\n1,1\n").is_err());
    }

    #[test]
    fn writes_seventeen_significant_digits() {
        let csv = to_csv(&[0.0, 1.0], &[0.1, 1.0 / 3.0]);
        assert_eq!(
            csv,
            "x,u\n0.0000000000000000e0,1.0000000000000001e-1\n1.0000000000000000e0,3.3333333333333331e-1\n"
        );
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(values in proptest::collection::vec(-1e6f64..1e6, 3..60)) {
            let n = values.len() - 1;
            let grid = Grid1D::uniform(n).unwrap();
            let (xs, us) = parse_csv(&to_csv(&grid.nodes(), &values)).unwrap();
            prop_assert_eq!(xs, grid.nodes());
            prop_assert_eq!(us, values);
        }
    }
}
