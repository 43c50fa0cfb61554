//! `results.csv`, per-run trajectory tables and the SVG panels.

use std::fs;
use std::path::{Path, PathBuf};

use mdsense_core::optim::Trajectory;

use crate::config::{AlgorithmName, ExperimentConfig};
use crate::svg::{LineChart, Series};
use crate::sweep::{ResultRow, GROUND_TRUTH, NUCMIN};
use crate::AppError;

pub const RESULTS_HEADER: [&str; 8] = [
    "alpha",
    "algorithm",
    "final_risk",
    "nuclear_norm",
    "effective_rank",
    "recon_error",
    "iters_run",
    "wall_ms",
];

/// 17 significant digits, so every `f64` survives a round trip.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<(), AppError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RESULTS_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_float(r.alpha),
            r.algorithm.clone(),
            fmt_float(r.final_risk),
            fmt_float(r.nuclear_norm),
            fmt_float(r.effective_rank),
            fmt_float(r.recon_error),
            r.iters_run.to_string(),
            fmt_float(r.wall_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>, AppError> {
    let mut rdr = csv::Reader::from_path(path)?;
    if rdr.headers()?.iter().ne(RESULTS_HEADER) {
        return Err(AppError::Config(format!("{}: unexpected header", path.display())));
    }
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

/// One line per logged iteration. Missing diagnostics are left empty.
pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<(), AppError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iter", "risk", "nuclear_norm", "effective_rank", "recon_error", "bregman_to_final"])?;
    let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
    for r in &traj.records {
        w.write_record([
            r.iter.to_string(),
            fmt_float(r.risk),
            fmt_float(r.nuclear_norm),
            fmt_float(r.effective_rank),
            opt(r.recon_error),
            opt(r.bregman_to_final),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `results.csv` and, when `cfg.emit_svg`, the three α panels.
/// Returns the paths written.
pub fn emit_outputs(rows: &[ResultRow], cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, AppError> {
    if rows.is_empty() {
        return Err(AppError::Io(std::io::Error::new(std::io::ErrorKind::InvalidInput, "no rows to write")));
    }
    fs::create_dir_all(&cfg.output_dir)?;
    let csv_path = cfg.output_dir.join("results.csv");
    write_results(&csv_path, rows)?;
    let mut written = vec![csv_path];
    if cfg.emit_svg {
        for (file, chart) in alpha_panels(rows) {
            let path = cfg.output_dir.join(file);
            fs::write(&path, chart.render())?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Writes one trajectory table per algorithm of a single run.
pub fn emit_trajectories(trajectories: &[(AlgorithmName, Trajectory)], dir: &Path) -> Result<Vec<PathBuf>, AppError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, traj) in trajectories {
        let path = dir.join(format!("trajectory_{}.csv", name.label()));
        write_trajectory(&path, traj)?;
        written.push(path);
    }
    Ok(written)
}

fn alpha_panels(rows: &[ResultRow]) -> Vec<(&'static str, LineChart)> {
    let panel = |title: &str, y_label: &str, log_y: bool, value: fn(&ResultRow) -> f64| {
        let mut series: Vec<Series> = Vec::new();
        for r in rows.iter().filter(|r| !r.is_reference()) {
            let point = (r.alpha.log10(), value(r));
            match series.iter_mut().find(|s| s.name == r.algorithm) {
                Some(s) => s.points.push(point),
                None => series.push(Series {
                    name: r.algorithm.clone(),
                    points: vec![point],
                }),
            }
        }
        for s in &mut series {
            s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        let references = [GROUND_TRUTH, NUCMIN]
            .iter()
            .filter_map(|name| rows.iter().find(|r| r.algorithm == *name))
            .map(|r| (r.algorithm.clone(), value(r)))
            .collect();
        LineChart {
            title: title.into(),
            x_label: "log10 alpha".into(),
            y_label: y_label.into(),
            log_y,
            series,
            references,
        }
    };
    vec![
        ("nuclear_norm.svg", panel("Nuclear norm", "nuclear norm", false, |r| r.nuclear_norm)),
        ("effective_rank.svg", panel("Effective rank", "effective rank", false, |r| r.effective_rank)),
        ("recon_error.svg", panel("Reconstruction error", "recon error", true, |r| r.recon_error)),
    ]
}
