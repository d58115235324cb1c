//! CSV persistence of periodic solutions and continuation runs.
//!
//! A solution file starts with `#`-prefixed TOML metadata followed by a `t,u` table.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::continuation::ContinuationRun;
use super::grid::{max_abs, SpectralGrid};
use super::newton::{extract_diagnostics, residual, PeriodicSolution};
use crate::error::{Error, Result};
use crate::model::OVParams;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionMeta {
    pub beta: f64,
    pub c: f64,
    pub period: f64,
    pub circuit_length: f64,
    pub n_points: usize,
    pub residual_inf: f64,
    pub eta_hat: f64,
    pub t_star_hat: f64,
    pub mean_target: f64,
    pub model: OVParams,
}

impl SolutionMeta {
    pub fn of(sol: &PeriodicSolution) -> Self {
        Self {
            beta: sol.beta,
            c: sol.c,
            period: sol.period(),
            circuit_length: sol.circuit_length(),
            n_points: sol.u.len(),
            residual_inf: sol.residual_inf,
            eta_hat: sol.eta_hat,
            t_star_hat: sol.t_star_hat,
            mean_target: sol.mean_target,
            model: sol.params,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    t: f64,
    u: f64,
}

fn format_err(path: &Path, reason: impl ToString) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

pub fn write_solution(path: &Path, sol: &PeriodicSolution) -> Result<()> {
    let meta = toml::to_string(&SolutionMeta::of(sol)).map_err(|e| format_err(path, e))?;
    let mut out = Vec::new();
    for line in meta.lines() {
        writeln!(out, "# {line}")?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for (t, u) in sol.grid.points().into_iter().zip(&sol.u) {
            w.serialize(Row { t, u: *u }).map_err(|e| format_err(path, e))?;
        }
        w.flush()?;
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a solution back and recomputes its residual from the stored samples.
pub fn read_solution(path: &Path) -> Result<PeriodicSolution> {
    let text = fs::read_to_string(path)?;
    let header: String = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| format!("{}\n", l.trim_start_matches('#').trim_start()))
        .collect();
    let meta: SolutionMeta = toml::from_str(&header).map_err(|e| format_err(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut u = Vec::new();
    for row in rdr.deserialize::<Row>() {
        u.push(row.map_err(|e| format_err(path, e))?.u);
    }
    if u.len() != meta.n_points {
        return Err(format_err(path, format!("expected {} samples, found {}", meta.n_points, u.len())));
    }
    let grid = SpectralGrid::new(meta.period, u.len())?;
    let params = meta.model;
    let r = residual(&params, &grid, &u, meta.c);
    let (eta_hat, t_star_hat) = extract_diagnostics(&grid, &u, params.l());
    Ok(PeriodicSolution {
        grid,
        params,
        c: meta.c,
        beta: params.beta(),
        residual_inf: max_abs(&r),
        mean_target: meta.mean_target,
        phase_residual: 0.0,
        eta_hat,
        t_star_hat,
        iterations: 0,
        u,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunRow {
    pub beta: f64,
    pub c: f64,
    pub eta_hat: f64,
    pub t_star_hat: f64,
    pub residual_inf: f64,
    pub n_points: usize,
    pub iterations: usize,
}

pub fn write_run(path: &Path, run: &ContinuationRun) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| format_err(path, e))?;
    for s in &run.solutions {
        w.serialize(RunRow {
            beta: s.beta,
            c: s.c,
            eta_hat: s.eta_hat,
            t_star_hat: s.t_star_hat,
            residual_inf: s.residual_inf,
            n_points: s.u.len(),
            iterations: s.iterations,
        })
        .map_err(|e| format_err(path, e))?;
    }
    w.flush()?;
    Ok(())
}
