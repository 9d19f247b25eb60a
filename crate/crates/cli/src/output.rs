//! CSV writers shared by the commands.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use annealed_walk::diagnostics::{tv_distance, write_report, ReportRow};
use annealed_walk::governing::GridPoint;
use annealed_walk::grid_walk::GridLandscape;
use annealed_walk::math::normalize_log_weights;

use crate::CliError;

/// Lattices up to this size get a full histogram with exact probabilities.
pub const EXACT_HISTOGRAM_CAP: usize = 200_000;

pub fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

pub fn coord_header(prefix: &str, d: usize) -> String {
    let mut h = prefix.to_string();
    for i in 0..d {
        if !h.is_empty() {
            h.push(',');
        }
        h.push_str(&format!("coord_{i}"));
    }
    h
}

fn join(coords: &[usize]) -> String {
    coords.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// `replica,coord_0,...`
pub fn write_points(out: &mut dyn Write, d: usize, points: &[GridPoint]) -> Result<(), CliError> {
    writeln!(out, "{}", coord_header("replica", d))?;
    for (r, p) in points.iter().enumerate() {
        writeln!(out, "{r},{}", join(p.coords()))?;
    }
    Ok(())
}

/// Endpoint counts against `pi ∝ f^K`; returns the TV distance when the
/// lattice is small enough to enumerate.
pub fn write_histogram(
    out: &mut dyn Write,
    landscape: &GridLandscape,
    exponent: f64,
    points: &[GridPoint],
) -> Result<Option<f64>, CliError> {
    let lattice = landscape.lattice();
    let d = lattice.d;
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for p in points {
        *counts.entry(lattice.index(p.coords())).or_default() += 1;
    }
    let total = points.len().max(1) as f64;
    writeln!(out, "{}", coord_header("", d) + ",count,frequency,exact")?;
    match lattice.len().filter(|&l| l <= EXACT_HISTOGRAM_CAP) {
        Some(len) => {
            let inside: Vec<usize> = (0..len)
                .filter(|&i| landscape.log_f_at(&lattice.coords(i)).is_finite())
                .collect();
            let logs: Vec<f64> = inside
                .iter()
                .map(|&i| exponent * landscape.log_f_at(&lattice.coords(i)))
                .collect();
            let pi = normalize_log_weights(&logs);
            let mut empirical = Vec::with_capacity(inside.len());
            for (&i, &p) in inside.iter().zip(&pi) {
                let c = counts.get(&i).copied().unwrap_or(0);
                empirical.push(c as f64 / total);
                writeln!(out, "{},{c},{},{p}", join(&lattice.coords(i)), c as f64 / total)?;
            }
            if points.is_empty() {
                return Ok(None);
            }
            Ok(Some(tv_distance(&empirical, &pi)?))
        }
        None => {
            for (&i, &c) in &counts {
                writeln!(out, "{},{c},{},", join(&lattice.coords(i)), c as f64 / total)?;
            }
            Ok(None)
        }
    }
}

/// Writes the report and turns any failed row into [`CliError::CheckFailed`].
pub fn finish_report(out: &mut dyn Write, rows: &[ReportRow]) -> Result<(), CliError> {
    write_report(&mut *out, rows)?;
    out.flush()?;
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{} ({})", r.quantity, r.instance))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("failed checks: {}", failed.join("; "))))
    }
}
