use super::grid::{max_abs, SpectralGrid};
use super::newton::{newton_solve_periodic, NewtonOptions, PeriodicSolution};
use crate::error::{Error, Result};

/// Threshold above which the grid is doubled.
pub const FINE_GRID_BETA: f64 = 1500.0;

/// Default sample count: 32 per unit phase up to `β = 1500`, 64 beyond, rounded up to even.
pub fn default_points(period: f64, beta: f64) -> usize {
    let per = if beta <= FINE_GRID_BETA { 32.0 } else { 64.0 };
    let n = (period * per).ceil() as usize;
    (n + n % 2).max(64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    /// Keep the seed grid throughout.
    Fixed,
    /// Switch grids according to [`default_points`].
    Adaptive,
}

#[derive(Debug, Clone, Copy)]
pub struct ContinuationOptions {
    pub newton: NewtonOptions,
    /// Smallest admissible step in `log β`.
    pub min_log_step: f64,
    pub resolution: Resolution,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            min_log_step: 1e-4,
            resolution: Resolution::Adaptive,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub beta_from: f64,
    pub beta_to: f64,
    pub accepted: bool,
    pub iterations: usize,
    pub note: String,
}

/// Accepted solutions in continuation order plus every attempted step.
#[derive(Debug, Clone, Default)]
pub struct ContinuationRun {
    pub solutions: Vec<PeriodicSolution>,
    pub log: Vec<StepRecord>,
}

impl ContinuationRun {
    pub fn betas(&self) -> Vec<f64> {
        self.solutions.iter().map(|s| s.beta).collect()
    }

    /// Solution at `beta`, if that value was accepted.
    pub fn at(&self, beta: f64) -> Option<&PeriodicSolution> {
        self.solutions.iter().find(|s| (s.beta - beta).abs() <= 1e-12 * beta)
    }

    /// Largest max-norm change between consecutive accepted profiles.
    pub fn max_consecutive_change(&self) -> f64 {
        self.solutions
            .windows(2)
            .map(|w| {
                let b = on_grid(&w[0], &w[1].grid);
                max_abs(&b.iter().zip(&w[1].u).map(|(x, y)| x - y).collect::<Vec<_>>())
            })
            .fold(0.0, f64::max)
    }
}

fn on_grid(sol: &PeriodicSolution, grid: &SpectralGrid) -> Vec<f64> {
    if sol.grid.n_points() == grid.n_points() {
        sol.u.clone()
    } else {
        sol.grid.resample(&sol.u, grid.n_points()).expect("valid grid")
    }
}

fn grid_for(seed_grid: &SpectralGrid, beta: f64, opts: &ContinuationOptions) -> Result<SpectralGrid> {
    match opts.resolution {
        Resolution::Fixed => Ok(seed_grid.clone()),
        Resolution::Adaptive => {
            let n = default_points(seed_grid.period(), beta);
            if n == seed_grid.n_points() {
                Ok(seed_grid.clone())
            } else {
                SpectralGrid::new(seed_grid.period(), n)
            }
        }
    }
}

/// Secant predictor in `log β` from the last two accepted solutions.
fn predict(run: &ContinuationRun, grid: &SpectralGrid, beta: f64) -> (Vec<f64>, f64) {
    let last = run.solutions.last().expect("seeded run");
    let u1 = on_grid(last, grid);
    if run.solutions.len() < 2 {
        return (u1, last.c);
    }
    let prev = &run.solutions[run.solutions.len() - 2];
    let u0 = on_grid(prev, grid);
    let s = (beta / last.beta).ln() / (last.beta / prev.beta).ln();
    let u = u1.iter().zip(&u0).map(|(a, b)| a + s * (a - b)).collect();
    (u, last.c + s * (last.c - prev.c))
}

/// Follows the branch through `beta_targets`, halving the `log β` step on corrector failure.
pub fn continue_in_beta(
    seed: PeriodicSolution,
    beta_targets: &[f64],
    opts: &ContinuationOptions,
) -> Result<ContinuationRun> {
    let mut run = ContinuationRun {
        solutions: vec![seed],
        log: Vec::new(),
    };
    let dir = match beta_targets.first() {
        None => return Ok(run),
        Some(&b) => (b - run.solutions[0].beta).signum(),
    };
    let mut prev = run.solutions[0].beta;
    for &b in beta_targets {
        if (b - prev) * dir <= 0.0 {
            return Err(Error::Config(format!("beta targets must move monotonically away from the seed (got {b} after {prev})")));
        }
        prev = b;
    }

    let seed_grid = run.solutions[0].grid.clone();
    for &target in beta_targets {
        let mut beta_try = target;
        loop {
            let last = run.solutions.last().expect("nonempty");
            let from = last.beta;
            let params = last.params.with_beta(beta_try)?;
            let grid = grid_for(&seed_grid, beta_try, opts)?;
            let (u, c) = predict(&run, &grid, beta_try);
            let reference = on_grid(last, &grid);
            let mean_tgt = last.mean_target;
            match newton_solve_periodic(&params, &grid, &u, c, mean_tgt, &reference, &opts.newton) {
                Ok(sol) => {
                    run.log.push(StepRecord {
                        beta_from: from,
                        beta_to: beta_try,
                        accepted: true,
                        iterations: sol.iterations,
                        note: String::new(),
                    });
                    run.solutions.push(sol);
                    if beta_try == target {
                        break;
                    }
                    beta_try = target;
                }
                Err(e) => {
                    run.log.push(StepRecord {
                        beta_from: from,
                        beta_to: beta_try,
                        accepted: false,
                        iterations: 0,
                        note: e.to_string(),
                    });
                    let mid = (from * beta_try).sqrt();
                    if (mid / from).ln().abs() < opts.min_log_step {
                        return Err(Error::ContinuationAborted {
                            beta: beta_try,
                            reason: format!("step underflow after: {e}"),
                            partial: Box::new(run),
                        });
                    }
                    beta_try = mid;
                }
            }
        }
    }
    Ok(run)
}

/// `count` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_ladder(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}
