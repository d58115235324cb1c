use faer::linalg::solvers::Solve;
use faer::Mat;

use super::grid::{max_abs, mean, SpectralGrid};
use crate::error::{Error, Result};
use crate::model::{OVParams, OvKind};

/// Below this size of `∂F/∂c` the profile is treated as flat.
const FLAT_PROFILE: f64 = 1e-12;

/// `c² u'' + a c u' - a (V(u(t+1)) - V(u(t)))`.
pub fn residual(p: &OVParams, grid: &SpectralGrid, u: &[f64], c: f64) -> Vec<f64> {
    residual_kind(p, OvKind::Tanh, grid, u, c)
}

pub fn residual_kind(p: &OVParams, kind: OvKind, grid: &SpectralGrid, u: &[f64], c: f64) -> Vec<f64> {
    let d1 = grid.derivative(u, 1).expect("order 1");
    let d2 = grid.derivative(u, 2).expect("order 2");
    let nl = grid.nonlinear_term_kind(p, kind, u);
    (0..u.len())
        .map(|j| c * c * d2[j] + p.a() * c * d1[j] - nl[j])
        .collect()
}

/// Residual with the mean-feedback term `(I0/N)(mean(u) - u*)` added to every sample.
pub fn residual_modified(
    p: &OVParams,
    grid: &SpectralGrid,
    u: &[f64],
    c: f64,
    i0: f64,
    u_star: f64,
) -> Result<Vec<f64>> {
    if !(i0 > 0.0) {
        return Err(Error::InvalidParameter {
            name: "I0",
            value: i0,
            reason: "feedback gain must be positive",
        });
    }
    let f = i0 / grid.period() * (mean(u) - u_star);
    Ok(residual(p, grid, u, c).into_iter().map(|r| r + f).collect())
}

/// How the mean constraint enters the Newton system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanConstraint {
    /// Residual projected off its zero mode plus an explicit mean row.
    Bordered,
    /// Mean-feedback term with gain `I0`.
    Feedback(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol_update: f64,
    pub tol_residual: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    pub kind: OvKind,
    pub mean: MeanConstraint,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol_update: 1e-10,
            tol_residual: 1e-9,
            max_iter: 50,
            max_halvings: 6,
            kind: OvKind::Tanh,
            mean: MeanConstraint::Bordered,
        }
    }
}

/// A converged periodic traveling wave.
#[derive(Debug, Clone)]
pub struct PeriodicSolution {
    pub grid: SpectralGrid,
    pub params: OVParams,
    pub u: Vec<f64>,
    pub c: f64,
    pub beta: f64,
    pub residual_inf: f64,
    pub mean_target: f64,
    pub phase_residual: f64,
    pub eta_hat: f64,
    pub t_star_hat: f64,
    pub iterations: usize,
}

impl PeriodicSolution {
    pub fn mean(&self) -> f64 {
        mean(&self.u)
    }

    pub fn period(&self) -> f64 {
        self.grid.period()
    }

    /// Circuit length `L = N · mean(u)`.
    pub fn circuit_length(&self) -> f64 {
        self.grid.period() * self.mean()
    }
}

/// `(eta_hat, t_star_hat)`: half the peak-to-peak amplitude and the time spent above `l`.
pub fn extract_diagnostics(grid: &SpectralGrid, u: &[f64], l: f64) -> (f64, f64) {
    let (lo, hi) = u
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let above = u.iter().filter(|&&x| x >= l).count();
    (0.5 * (hi - lo), grid.spacing() * above as f64)
}

/// Jacobian of the unbordered residual with respect to `u`.
pub(crate) fn residual_jacobian(p: &OVParams, kind: OvKind, grid: &SpectralGrid, u: &[f64], c: f64) -> Mat<f64> {
    let n = grid.n_points();
    let mut e0 = vec![0.0; n];
    e0[0] = 1.0;
    let d1 = grid.derivative(&e0, 1).expect("order 1");
    let d2 = grid.derivative(&e0, 2).expect("order 2");
    let lin: Vec<f64> = (0..n).map(|i| c * c * d2[i] + p.a() * c * d1[i]).collect();

    let su = grid.shift_by_one(u);
    let w1: Vec<f64> = grid.pad(&su).into_iter().map(|x| p.slope(kind, x)).collect();
    let w0: Vec<f64> = grid.pad(u).into_iter().map(|x| p.slope(kind, x)).collect();
    let q0 = grid.pad(&e0);
    let q1 = grid.pad(&grid.shift_by_one(&e0));
    let n2 = 2 * n;

    let mut jac = Mat::<f64>::zeros(n, n);
    let mut g = vec![0.0; n2];
    for j in 0..n {
        // Columns are rotations of the first one on both grids.
        for (i, gi) in g.iter_mut().enumerate() {
            let k = (i + n2 - 2 * j) % n2;
            *gi = w1[i] * q1[k] - w0[i] * q0[k];
        }
        let nl = grid.trunc(&g);
        let col = jac.col_as_slice_mut(j);
        for i in 0..n {
            col[i] = lin[(i + n - j) % n] - p.a() * nl[i];
        }
    }
    jac
}

struct Eval {
    f: Vec<f64>,
    r: Vec<f64>,
}

fn evaluate(
    p: &OVParams,
    grid: &SpectralGrid,
    opts: &NewtonOptions,
    u: &[f64],
    c: f64,
    mean_tgt: f64,
    dref: &[f64],
) -> Eval {
    let n = u.len();
    let r = residual_kind(p, opts.kind, grid, u, c);
    let mu = mean(u);
    let mut f = Vec::with_capacity(n + 1);
    match opts.mean {
        MeanConstraint::Bordered => {
            let mr = mean(&r);
            f.extend(r.iter().map(|x| x - mr + (mu - mean_tgt)));
        }
        MeanConstraint::Feedback(i0) => {
            let fb = i0 / grid.period() * (mu - mean_tgt);
            f.extend(r.iter().map(|x| x + fb));
        }
    }
    f.push(phase_integral(grid, u, dref));
    Eval { f, r }
}

fn phase_integral(grid: &SpectralGrid, u: &[f64], dref: &[f64]) -> f64 {
    grid.spacing() * u.iter().zip(dref).map(|(a, b)| a * b).sum::<f64>()
}

fn bordered_matrix(
    p: &OVParams,
    grid: &SpectralGrid,
    opts: &NewtonOptions,
    u: &[f64],
    c: f64,
    dref: &[f64],
) -> Mat<f64> {
    let n = u.len();
    let j = residual_jacobian(p, opts.kind, grid, u, c);
    let mut big = Mat::<f64>::zeros(n + 1, n + 1);
    for k in 0..n {
        let src = j.col_as_slice(k);
        let dst = big.col_as_slice_mut(k);
        match opts.mean {
            MeanConstraint::Bordered => {
                let m = mean(src);
                for i in 0..n {
                    dst[i] = src[i] - m + 1.0 / n as f64;
                }
            }
            MeanConstraint::Feedback(i0) => {
                let fb = i0 / grid.period() / n as f64;
                for i in 0..n {
                    dst[i] = src[i] + fb;
                }
            }
        }
        dst[n] = grid.spacing() * dref[k];
    }
    let d1 = grid.derivative(u, 1).expect("order 1");
    let d2 = grid.derivative(u, 2).expect("order 2");
    let dc: Vec<f64> = (0..n).map(|i| 2.0 * c * d2[i] + p.a() * d1[i]).collect();
    let mdc = match opts.mean {
        MeanConstraint::Bordered => mean(&dc),
        MeanConstraint::Feedback(_) => 0.0,
    };
    let col = big.col_as_slice_mut(n);
    for i in 0..n {
        col[i] = dc[i] - mdc;
    }
    col[n] = 0.0;
    if max_abs(&col[..n]) < FLAT_PROFILE {
        // A flat profile travels at any speed; hold c fixed instead.
        col[n] = 1.0;
    }
    big
}

fn solve_dense(a: Mat<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    let lu = a.partial_piv_lu();
    let diag = lu.U().diagonal();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..rhs.len() {
        let d = diag[i].abs();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond < 1e15) {
        return Err(Error::SingularJacobian { condition_estimate: cond });
    }
    let mut b = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
    lu.solve_in_place(b.as_mut());
    let x: Vec<f64> = (0..rhs.len()).map(|i| b[(i, 0)]).collect();
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::SingularJacobian { condition_estimate: cond })
    }
}

/// Newton iteration for `(u, c)` on the bordered system: residual, mean constraint and
/// the integral phase condition `∫ u · phase_ref' dt = 0`.
#[allow(clippy::too_many_arguments)]
pub fn newton_solve_periodic(
    p: &OVParams,
    grid: &SpectralGrid,
    u_init: &[f64],
    c_init: f64,
    mean_tgt: f64,
    phase_ref: &[f64],
    opts: &NewtonOptions,
) -> Result<PeriodicSolution> {
    let n = grid.n_points();
    if u_init.len() != n || phase_ref.len() != n {
        return Err(Error::Construction(format!(
            "expected {n} samples, got u_init = {}, phase_ref = {}",
            u_init.len(),
            phase_ref.len()
        )));
    }
    let dref = grid.derivative(phase_ref, 1)?;
    let mut u = u_init.to_vec();
    let mut c = c_init;
    let mut ev = evaluate(p, grid, opts, &u, c, mean_tgt, &dref);
    let mut trace = Vec::new();
    let mut last_update = f64::INFINITY;

    for it in 1..=opts.max_iter {
        let jac = bordered_matrix(p, grid, opts, &u, c, &dref);
        let rhs: Vec<f64> = ev.f.iter().map(|x| -x).collect();
        let d = solve_dense(jac, &rhs)?;
        let f0 = max_abs(&ev.f);
        let mut lambda = 1.0;
        let mut accepted = None;
        let mut min_seen = f64::INFINITY;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = u.iter().zip(&d).map(|(x, dx)| x + lambda * dx).collect();
            let tmin = trial.iter().cloned().fold(f64::INFINITY, f64::min);
            min_seen = min_seen.min(tmin);
            if tmin > 0.0 {
                let tc = c + lambda * d[n];
                let tev = evaluate(p, grid, opts, &trial, tc, mean_tgt, &dref);
                let f1 = max_abs(&tev.f);
                // Full steps are always taken near the solution, where rounding dominates.
                if f1 <= f0 || lambda == 1.0 && f1 < 1e-8 {
                    accepted = Some((trial, tc, tev));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((nu, nc, nev)) = accepted else {
            if min_seen <= 0.0 {
                return Err(Error::LostPositivity { min: min_seen });
            }
            return Err(Error::NonConvergence {
                iterations: it,
                last_update,
                last_residual: max_abs(&ev.r),
                trace,
            });
        };
        last_update = lambda * max_abs(&d);
        u = nu;
        c = nc;
        ev = nev;
        let res = max_abs(&ev.r);
        trace.push((last_update, res));
        if last_update < opts.tol_update && res < opts.tol_residual {
            let (eta_hat, t_star_hat) = extract_diagnostics(grid, &u, p.l());
            return Ok(PeriodicSolution {
                grid: grid.clone(),
                params: *p,
                phase_residual: phase_integral(grid, &u, &dref),
                u,
                c,
                beta: p.beta(),
                residual_inf: res,
                mean_target: mean_tgt,
                eta_hat,
                t_star_hat,
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        last_update,
        last_residual: max_abs(&ev.r),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn profile(g: &SpectralGrid) -> Vec<f64> {
        let w = 2.0 * PI / g.period();
        g.points()
            .iter()
            .map(|&t| 0.025 + 0.012 * (w * t).sin() + 0.003 * (2.0 * w * t + 0.4).cos())
            .collect()
    }

    #[test]
    fn residual_of_constants_vanishes() {
        let p = OVParams::reference();
        let g = SpectralGrid::new(40.0, 256).unwrap();
        let u = vec![0.031; 256];
        assert!(max_abs(&residual(&p, &g, &u, 0.7)) < 1e-15);
    }

    #[test]
    fn residual_has_zero_mean_and_modified_form_adds_constant() {
        let p = OVParams::reference();
        let g = SpectralGrid::new(40.0, 256).unwrap();
        let u = profile(&g);
        let r = residual(&p, &g, &u, 0.9);
        assert!(mean(&r).abs() < 1e-14);
        let m = mean(&u);
        let rm = residual_modified(&p, &g, &u, 0.9, 2.0, m).unwrap();
        assert!(r.iter().zip(&rm).all(|(a, b)| (a - b).abs() < 1e-17));
        let flat = vec![0.03; 256];
        let rf = residual_modified(&p, &g, &flat, 0.9, 2.0, 0.029).unwrap();
        assert!(rf.iter().all(|x| (x - 2.0 / 40.0 * 0.001).abs() < 1e-15));
        assert!(residual_modified(&p, &g, &flat, 0.9, 0.0, 0.029).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = OVParams::reference();
        let g = SpectralGrid::new(20.0, 128).unwrap();
        let u = profile(&g);
        let c = 0.95;
        let jac = residual_jacobian(&p, OvKind::Tanh, &g, &u, c);
        let r0 = residual(&p, &g, &u, c);
        for s in 0..10 {
            let v: Vec<f64> = (0..128).map(|i| ((i * (s + 3) * 7919) % 101) as f64 / 101.0 - 0.5).collect();
            let eps = 1e-7;
            let up: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + eps * b).collect();
            let um: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - eps * b).collect();
            let fd: Vec<f64> = residual(&p, &g, &up, c)
                .iter()
                .zip(residual(&p, &g, &um, c))
                .map(|(a, b)| (a - b) / (2.0 * eps))
                .collect();
            let jv: Vec<f64> = (0..128).map(|i| (0..128).map(|k| jac[(i, k)] * v[k]).sum()).collect();
            let err = max_abs(&jv.iter().zip(&fd).map(|(a, b)| a - b).collect::<Vec<_>>());
            assert!(err / max_abs(&fd) < 1e-5, "direction {s}: {err}");
        }
        let _ = r0;
    }

    #[test]
    fn constant_solution_with_flat_velocity() {
        let p = OVParams::reference().with_beta(5000.0).unwrap();
        let g = SpectralGrid::new(20.0, 128).unwrap();
        let u = vec![0.045; 128];
        let w = 2.0 * PI / 20.0;
        let r: Vec<f64> = g.points().iter().map(|t| (w * t).sin()).collect();
        let sol = newton_solve_periodic(&p, &g, &u, 1.0, 0.045, &r, &NewtonOptions::default()).unwrap();
        assert!(sol.iterations <= 2);
        assert!(sol.u.iter().all(|x| (x - 0.045).abs() < 1e-14));
        assert_eq!(sol.eta_hat, 0.0);
    }

    #[test]
    fn diagnostics_of_symmetric_square_wave() {
        let g = SpectralGrid::new(40.0, 400).unwrap();
        let u: Vec<f64> = g.points().iter().map(|&t| if t < 20.0 { 0.04 } else { 0.01 }).collect();
        let (e, ts) = extract_diagnostics(&g, &u, 0.025);
        assert!((e - 0.015).abs() < 1e-15);
        assert!((ts - 20.0).abs() < 1e-12);
    }
}
