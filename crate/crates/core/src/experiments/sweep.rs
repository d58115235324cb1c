use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{CaseConfig, EtaMode, ExperimentConfig, SeedPolicy};
use crate::composite::{Composite, CompositeSpec};
use crate::error::{Error, Result};
use crate::limit::eta_star;
use crate::model::OVParams;
use crate::profile::Profile;
use crate::ring::{estimate_wave_speed, extract_profile, simulate, RingState, SimulationOptions};
use crate::spectral::{
    continue_in_beta, default_points, io, log_ladder, newton_solve_periodic, ContinuationOptions, ContinuationRun,
    PeriodicSolution, SpectralGrid,
};

/// Single-mode perturbation used to ignite one wave around the circuit.
pub const SEED_PERTURBATION: f64 = 0.5;

/// Steepness at which the composite seed is solved before continuing downward.
pub const COMPOSITE_SEED_BETA: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq)]
pub enum SeedSource {
    Simulator { c: f64, wave_number: usize },
    Composite { beta: f64 },
}

fn simulator_seed(p: &OVParams, n: usize, length: f64, opts: &ContinuationOptions) -> Result<(PeriodicSolution, SeedSource)> {
    let init = RingState::perturbed(p, n, length, SEED_PERTURBATION, 1);
    let t_end = 75.0 * n as f64;
    let (series, _) = simulate(
        p,
        &init,
        &SimulationOptions {
            t_end,
            dt: 0.02,
            sample_every: 5,
            keep_from: 0.8 * t_end,
        },
    )?;
    let w = estimate_wave_speed(&series)?;
    if w.wave_number != 1 || w.c <= 0.0 {
        return Err(Error::Verification(format!(
            "simulation settled into {} waves with speed {:.4}",
            w.wave_number, w.c
        )));
    }
    let period = n as f64;
    let bins = default_points(period, p.beta());
    let prof = extract_profile(&series, w.c, period, bins)?;
    let grid = SpectralGrid::new(period, bins)?;
    let sol = newton_solve_periodic(p, &grid, &prof.u, w.c, length / period, &prof.u, &opts.newton)?;
    Ok((
        sol,
        SeedSource::Simulator {
            c: w.c,
            wave_number: w.wave_number,
        },
    ))
}

fn composite_seed(p: &OVParams, n: usize, length: f64, opts: &ContinuationOptions) -> Result<(PeriodicSolution, SeedSource)> {
    let d = eta_star(p);
    let period = n as f64;
    let ts = crate::composite::t_star_from_mean(p.l(), d.eta_star, length / period, period);
    let gap = ts.min(period - ts);
    let r = (gap / 5.0).clamp(1.0, 4.0);
    let top = COMPOSITE_SEED_BETA.max(p.beta());
    let hp = p.with_beta(top)?;
    let comp = Composite::new(&hp, CompositeSpec::periodic(0.0, ts, period, r))?;
    let grid = SpectralGrid::new(period, default_points(period, top))?;
    let u0: Vec<f64> = grid.points().iter().map(|&t| comp.value(t)).collect();
    let sol = newton_solve_periodic(&hp, &grid, &u0, d.c_star, length / period, &u0, &opts.newton)?;
    if top == p.beta() {
        return Ok((sol, SeedSource::Composite { beta: top }));
    }
    let down = log_ladder(top, p.beta(), 8);
    let run = continue_in_beta(sol, &down[1..], opts)?;
    let last = run.solutions.into_iter().last().expect("nonempty run");
    Ok((last, SeedSource::Composite { beta: top }))
}

/// Converged solution at `p.beta()` for `n` vehicles on a circuit of length `length`.
pub fn seed_solution(
    p: &OVParams,
    n: usize,
    length: f64,
    policy: SeedPolicy,
    opts: &ContinuationOptions,
) -> Result<(PeriodicSolution, SeedSource)> {
    match policy {
        SeedPolicy::Simulator => simulator_seed(p, n, length, opts).or_else(|_| composite_seed(p, n, length, opts)),
        SeedPolicy::Composite => composite_seed(p, n, length, opts),
    }
}

/// `max_j |u(t_j) - u0(t_j - t_up)|` with `t_up` the upcrossing of `l`.
pub fn composite_error(sol: &PeriodicSolution, comp: &Composite) -> Result<f64> {
    let l = sol.params.l();
    let t_up = sol
        .grid
        .upcrossing(&sol.u, l)
        .ok_or_else(|| Error::Verification(format!("solution at beta = {} never crosses l", sol.beta)))?;
    Ok(sol
        .grid
        .points()
        .iter()
        .zip(&sol.u)
        .map(|(&t, &u)| (u - comp.value(t - t_up)).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub r: f64,
    pub beta: f64,
    pub error_inf: f64,
    pub c: f64,
    pub eta_hat: f64,
    pub t_star_hat: f64,
    pub n_points: usize,
    /// Solution file, relative to the case directory.
    pub solution: String,
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub name: String,
    pub case: CaseConfig,
    pub seed: SeedSource,
    pub run: ContinuationRun,
    pub records: Vec<ErrorRecord>,
    /// Steepness and reason at which the continuation stopped early, if it did.
    pub partial: Option<(f64, String)>,
}

impl CaseResult {
    /// `(β, error)` pairs for one cutoff width.
    pub fn curve(&self, r: f64) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .filter(|x| x.r == r)
            .map(|x| (x.beta, x.error_inf))
            .collect()
    }
}

fn solution_name(k: usize) -> String {
    format!("solution_{k:02}.csv")
}

/// Seeds, continues and measures one case.
pub fn run_case(cfg: &ExperimentConfig, name: &str, case: &CaseConfig) -> Result<CaseResult> {
    let ladder = cfg.beta_ladder();
    let opts = cfg.continuation_options();
    let p = cfg.model.with_beta(ladder[0])?;
    let (seed_sol, seed) = seed_solution(&p, case.n, case.length, cfg.experiment.seed, &opts)?;
    let (run, partial) = match continue_in_beta(seed_sol, &ladder[1..], &opts) {
        Ok(run) => (run, None),
        Err(Error::ContinuationAborted { beta, reason, partial }) => (*partial, Some((beta, reason))),
        Err(e) => return Err(e),
    };
    let d = eta_star(&cfg.model);
    let mut records = Vec::new();
    for (k, sol) in run.solutions.iter().enumerate() {
        if !ladder.iter().any(|&b| (b - sol.beta).abs() <= 1e-12 * b) {
            continue;
        }
        for &r in &case.r {
            let mut spec = cfg.composite_for(case, r);
            if cfg.experiment.eta_mode == EtaMode::EtaHat {
                spec.eta = sol.eta_hat - d.eta_star;
            }
            let comp = Composite::new(&sol.params, spec)?;
            records.push(ErrorRecord {
                r,
                beta: sol.beta,
                error_inf: composite_error(sol, &comp)?,
                c: sol.c,
                eta_hat: sol.eta_hat,
                t_star_hat: sol.t_star_hat,
                n_points: sol.u.len(),
                solution: solution_name(k),
            });
        }
    }
    Ok(CaseResult {
        name: name.to_string(),
        case: case.clone(),
        seed,
        run,
        records,
        partial,
    })
}

/// Runs every configured case, concurrently.
pub fn error_sweep(cfg: &ExperimentConfig) -> Result<Vec<CaseResult>> {
    cfg.validate()?;
    let cases: Vec<(&String, &CaseConfig)> = cfg.case.iter().collect();
    cases.par_iter().map(|(name, case)| run_case(cfg, name, case)).collect()
}

/// Writes `<dir>/<name>/errors.csv`, `run.csv`, one file per accepted solution and
/// `overlay.csv` comparing the first ladder solution with its composite.
pub fn write_case(cfg: &ExperimentConfig, dir: &Path, res: &CaseResult) -> Result<PathBuf> {
    let case_dir = dir.join(&res.name);
    std::fs::create_dir_all(&case_dir)?;
    if let (Some(sol), Some(&r)) = (res.run.solutions.first(), res.case.r.first()) {
        let comp = Composite::new(&sol.params, cfg.composite_for(&res.case, r))?;
        write_overlay(&case_dir.join("overlay.csv"), sol, &comp)?;
    }
    for (k, sol) in res.run.solutions.iter().enumerate() {
        io::write_solution(&case_dir.join(solution_name(k)), sol)?;
    }
    io::write_run(&case_dir.join("run.csv"), &res.run)?;
    let path = case_dir.join("errors.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Format {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    for r in &res.records {
        w.serialize(r).map_err(|e| Error::Format {
            path: path.clone(),
            reason: e.to_string(),
        })?;
    }
    w.flush()?;
    Ok(path)
}

#[derive(Serialize)]
struct OverlayRow {
    t: f64,
    u: f64,
    u0: f64,
}

/// `t, u, u0` on the solution grid with the composite aligned at the upcrossing of `l`.
pub fn write_overlay(path: &Path, sol: &PeriodicSolution, comp: &Composite) -> Result<()> {
    let fmt = |e: csv::Error| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let t_up = sol.grid.upcrossing(&sol.u, sol.params.l()).unwrap_or(0.0);
    let mut w = csv::Writer::from_path(path).map_err(fmt)?;
    for (&t, &u) in sol.grid.points().iter().zip(&sol.u) {
        w.serialize(OverlayRow {
            t,
            u,
            u0: comp.value(t - t_up),
        })
        .map_err(fmt)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ErrorRecord>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    rdr.deserialize()
        .map(|r| {
            r.map_err(|e| Error::Format {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })
        })
        .collect()
}
