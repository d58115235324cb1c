//! Truncated-domain solver for the increasing front at finite steepness.
//!
//! Second-order finite differences on `[-T, T]` with `h = 1/m`, so the advance
//! `u(t + 1)` is an index shift by `m`. Boundary rows: zero slope at `-T` and the
//! plateau value `l + η` at `T`; beyond `T` the profile is clamped to `l + η`.
//! The translation freedom is removed by pinning `u(0) = l`, with `c` as the extra
//! unknown. `c` is carried as a copy per node linked by `c_{j+1} = c_j`, which keeps
//! the whole Newton matrix banded.

use super::banded::Banded;
use crate::error::{Error, Result};
use crate::limit::LimitContext;
use crate::model::{OVParams, OvKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeteroclinicOptions {
    /// Half-width `T`.
    pub half_width: f64,
    /// Grid points per unit phase.
    pub per_unit: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub kind: OvKind,
}

impl Default for HeteroclinicOptions {
    fn default() -> Self {
        Self {
            half_width: 15.0,
            per_unit: 64,
            tol: 1e-12,
            max_iter: 50,
            kind: OvKind::Tanh,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HeteroclinicSolution {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub c: f64,
    pub eta: f64,
    pub iterations: usize,
}

impl HeteroclinicSolution {
    /// `max_j |u_j - u_i(t_j)|` against the closed-form front.
    pub fn max_deviation(&self, front: &LimitContext) -> f64 {
        self.t
            .iter()
            .zip(&self.u)
            .map(|(&t, &u)| (u - front.u_i(t)).abs())
            .fold(0.0, f64::max)
    }
}

/// `V` at node `k` with its partial derivatives in `(u_{k-1}, u_k, u_{k+1})`.
///
/// The step limit is averaged over the cell around the node using the local linear
/// interpolant, which locates the crossing to second order.
fn node_velocity(p: &OVParams, kind: OvKind, um: f64, u0: f64, up: f64) -> (f64, [f64; 3]) {
    match kind {
        OvKind::Tanh => (p.ov_value(u0), [0.0, p.ov_slope(u0), 0.0]),
        OvKind::Step => {
            let l = p.l();
            let g = 0.5 * (up - um);
            if g == 0.0 {
                return (p.ov_step_limit(u0), [0.0; 3]);
            }
            let ag = g.abs();
            let s = 0.5 + (u0 - l) / ag;
            if s <= 0.0 {
                return (p.v1(), [0.0; 3]);
            }
            if s >= 1.0 {
                return (p.v0() + p.v1(), [0.0; 3]);
            }
            let dg = -(u0 - l) * g.signum() / (g * g);
            let v0 = p.v0();
            (p.v1() + v0 * s, [-0.5 * v0 * dg, v0 / ag, 0.5 * v0 * dg])
        }
    }
}

pub fn solve_heteroclinic_truncated(p: &OVParams, eta: f64, opts: &HeteroclinicOptions) -> Result<HeteroclinicSolution> {
    let front = LimitContext::new(p, eta)?;
    let t_half = opts.half_width;
    if t_half < 20.0 / front.kappa {
        return Err(Error::InvalidParameter {
            name: "half_width",
            value: t_half,
            reason: "must be at least 20/κ so the plateaus are flat",
        });
    }
    if opts.per_unit < 5 {
        return Err(Error::InvalidParameter {
            name: "per_unit",
            value: opts.per_unit as f64,
            reason: "need at least 5 points per unit phase",
        });
    }
    let m = opts.per_unit;
    let h = 1.0 / m as f64;
    let j0 = (t_half * m as f64).round() as usize;
    let n = 2 * j0;
    let t: Vec<f64> = (0..=n).map(|j| (j as f64 - j0 as f64) * h).collect();
    let mut u: Vec<f64> = t.iter().map(|&s| front.u_i(s)).collect();
    let mut c = front.c0;
    let top = p.l() + eta;
    let a = p.a();
    let size = 2 * (n + 1);
    let (kl, ku) = (2, 2 * m + 2);

    let ext = |u: &[f64], k: isize| -> f64 {
        if k > n as isize {
            top
        } else {
            u[k.max(0) as usize]
        }
    };

    let mut last_update = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let mut jm = Banded::zeros(size, kl, ku);
        let mut f = vec![0.0; size];
        let (cu, cc) = (|j: usize| 2 * j, |j: usize| 2 * j + 1);

        f[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
        jm.add(0, cu(0), -1.5 / h);
        jm.add(0, cu(1), 2.0 / h);
        jm.add(0, cu(2), -0.5 / h);

        for j in 1..n {
            let row = 2 * j;
            let d2 = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (h * h);
            let d1 = (u[j + 1] - u[j - 1]) / (2.0 * h);
            let k = (j + m) as isize;
            let (va, dva) = node_velocity(p, opts.kind, ext(&u, k - 1), ext(&u, k), ext(&u, k + 1));
            let (vh, dvh) = node_velocity(p, opts.kind, u[j - 1], u[j], u[j + 1]);
            f[row] = c * c * d2 + a * c * d1 - a * (va - vh);
            jm.add(row, cu(j - 1), c * c / (h * h) - a * c / (2.0 * h) + a * dvh[0]);
            jm.add(row, cu(j), -2.0 * c * c / (h * h) + a * dvh[1]);
            jm.add(row, cu(j + 1), c * c / (h * h) + a * c / (2.0 * h) + a * dvh[2]);
            for (o, d) in dva.iter().enumerate() {
                let col = j + m + o - 1;
                if *d != 0.0 && col <= n {
                    jm.add(row, cu(col), -a * d);
                }
            }
            jm.add(row, cc(j), 2.0 * c * d2 + a * d1);
        }

        f[2 * n] = u[n] - top;
        jm.add(2 * n, cu(n), 1.0);

        for j in 0..=n {
            let row = 2 * j + 1;
            if j < j0 {
                f[row] = 0.0;
                jm.add(row, cc(j + 1), 1.0);
                jm.add(row, cc(j), -1.0);
            } else if j == j0 {
                f[row] = u[j0] - p.l();
                jm.add(row, cu(j0), 1.0);
            } else {
                f[row] = 0.0;
                jm.add(row, cc(j), 1.0);
                jm.add(row, cc(j - 1), -1.0);
            }
        }

        let lu = jm.factor().ok_or(Error::SingularJacobian {
            condition_estimate: f64::INFINITY,
        })?;
        let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        let d = lu.solve(&rhs);
        if d.iter().any(|x| !x.is_finite()) {
            return Err(Error::SingularJacobian {
                condition_estimate: lu.pivot_ratio(),
            });
        }
        for j in 0..=n {
            u[j] += d[cu(j)];
        }
        c += d[cc(j0)];
        last_update = d.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        if last_update < opts.tol {
            return Ok(HeteroclinicSolution {
                t,
                u,
                c,
                eta,
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        last_update,
        last_residual: f64::NAN,
        trace: Vec::new(),
    })
}
