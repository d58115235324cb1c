//! Vehicle trajectories generated by a periodic traveling wave `(u, c)`.
//!
//! The lead vehicle's velocity solves `v' + a v = a V(u(cτ))`, taking the unique
//! initial value that makes `v` periodic with period `ω = N/c`. Positions of the other
//! vehicles follow from summing headways along the profile.

use crate::error::{Error, Result};
use crate::model::OVParams;
use crate::profile::Profile;

use super::sim::RingState;

/// Minimum number of quadrature intervals per period.
pub const MIN_QUADRATURE_INTERVALS: usize = 1 << 14;

pub struct Reconstruction<'a> {
    params: OVParams,
    profile: &'a dyn Profile,
    c: f64,
    n: usize,
    x0: f64,
    omega: f64,
    h: f64,
    /// `v` and `∫_0^s V(u(c r)) dr · a` at the quadrature nodes.
    v_nodes: Vec<f64>,
    p_int: Vec<f64>,
}

impl<'a> Reconstruction<'a> {
    /// `profile` must be periodic; its period is taken as the vehicle count `N`.
    pub fn new(p: &OVParams, profile: &'a dyn Profile, c: f64, x0: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter {
                name: "c",
                value: c,
                reason: "wave speed must be positive",
            });
        }
        let period = profile
            .period()
            .ok_or_else(|| Error::Construction("trajectory reconstruction needs a periodic profile".into()))?;
        let n = period.round() as usize;
        if (period - n as f64).abs() > 1e-9 || n == 0 {
            return Err(Error::Construction(format!("profile period {period} is not a vehicle count")));
        }
        let omega = period / c;
        let m = MIN_QUADRATURE_INTERVALS.max(64 * n);
        let h = omega / m as f64;
        let a = p.a();
        let forcing = |s: f64| a * p.ov_value(profile.value(c * s));

        // Per-interval Simpson for both the variation-of-constants update and ∫p.
        let mut f = Vec::with_capacity(2 * m + 1);
        for i in 0..=2 * m {
            f.push(forcing(0.5 * h * i as f64));
        }
        let decay = (-a * h).exp();
        let half = (-0.5 * a * h).exp();
        let mut step = Vec::with_capacity(m);
        let mut p_int = vec![0.0; m + 1];
        for i in 0..m {
            let (f0, f1, f2) = (f[2 * i], f[2 * i + 1], f[2 * i + 2]);
            step.push(h / 6.0 * (decay * f0 + 4.0 * half * f1 + f2));
            p_int[i + 1] = p_int[i] + h / 6.0 * (f0 + 4.0 * f1 + f2);
        }
        // v(ω) = e^{-aω} v(0) + Σ e^{-a(ω - s_{i+1})} step_i, and periodicity gives v(0).
        let mut acc = 0.0;
        for s in &step {
            acc = decay * acc + s;
        }
        let v0 = acc / (1.0 - (-a * omega).exp());
        let mut v_nodes = Vec::with_capacity(m + 1);
        v_nodes.push(v0);
        for s in &step {
            let last = *v_nodes.last().expect("nonempty");
            v_nodes.push(decay * last + s);
        }
        if v_nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::Verification("quadrature produced non-finite velocities".into()));
        }
        Ok(Self {
            params: *p,
            profile,
            c,
            n,
            x0,
            omega,
            h,
            v_nodes,
            p_int,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn n_vehicles(&self) -> usize {
        self.n
    }

    /// `|v(ω) - v(0)|` from the quadrature recursion.
    pub fn periodicity_defect(&self) -> f64 {
        (self.v_nodes[self.v_nodes.len() - 1] - self.v_nodes[0]).abs()
    }

    fn forcing(&self, s: f64) -> f64 {
        self.params.a() * self.params.ov_value(self.profile.value(self.c * s))
    }

    /// `(v(τ), ∫_0^τ a V(u(c s)) ds)`.
    fn lead(&self, tau: f64) -> (f64, f64) {
        let a = self.params.a();
        let k = (tau / self.omega).floor();
        let r = tau - k * self.omega;
        let i = ((r / self.h).floor() as usize).min(self.v_nodes.len() - 2);
        let s0 = i as f64 * self.h;
        let d = r - s0;
        let (f0, f1, f2) = (self.forcing(s0), self.forcing(s0 + 0.5 * d), self.forcing(r));
        let v = (-a * d).exp() * self.v_nodes[i]
            + d / 6.0 * ((-a * d).exp() * f0 + 4.0 * (-0.5 * a * d).exp() * f1 + f2);
        let pi = k * self.p_int[self.p_int.len() - 1] + self.p_int[i] + d / 6.0 * (f0 + 4.0 * f1 + f2);
        (v, pi)
    }

    /// Lead vehicle position and velocity.
    pub fn lead_state(&self, tau: f64) -> (f64, f64) {
        let (v, pi) = self.lead(tau);
        let x1 = self.x0 + (pi - (v - self.v_nodes[0])) / self.params.a();
        (x1, v)
    }

    /// Positions `x_1 … x_{N+1}` at time `τ`.
    pub fn positions(&self, tau: f64) -> Vec<f64> {
        let (x1, _) = self.lead_state(tau);
        let mut out = Vec::with_capacity(self.n + 1);
        out.push(x1);
        let mut acc = x1;
        for k in 0..self.n {
            acc += self.profile.value(self.c * tau + k as f64);
            out.push(acc);
        }
        out
    }

    /// Velocities `ẋ_1 … ẋ_{N+1}` at time `τ`.
    pub fn velocities(&self, tau: f64) -> Vec<f64> {
        let (_, v) = self.lead_state(tau);
        let mut out = Vec::with_capacity(self.n + 1);
        out.push(v);
        let mut acc = v;
        for k in 0..self.n {
            acc += self.c * self.profile.jet(self.c * tau + k as f64).d1;
            out.push(acc);
        }
        out
    }

    /// Ring state of the first `N` vehicles at time `τ`.
    pub fn state(&self, tau: f64) -> RingState {
        let mut x = self.positions(tau);
        let mut v = self.velocities(tau);
        let last = x.pop().expect("N+1 positions");
        v.pop();
        RingState {
            length: last - x[0],
            x,
            v,
            time: tau,
        }
    }

    /// Positions sampled at `taus`.
    pub fn sample(&self, taus: &[f64]) -> Trajectories {
        Trajectories {
            tau: taus.to_vec(),
            x: taus.iter().map(|&t| self.positions(t)).collect(),
            v: taus.iter().map(|&t| self.velocities(t)).collect(),
        }
    }
}

/// Sampled vehicle trajectories; rows are times, columns vehicles `1 … N+1`.
#[derive(Debug, Clone)]
pub struct Trajectories {
    pub tau: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

/// `max |ẍ_n - a (V(Δx_n) - ẋ_n)|` using fourth-order central differences on a uniform
/// time grid with spacing `dt`.
pub fn ov_residual_check(p: &OVParams, traj: &Trajectories, dt: f64) -> f64 {
    let rows = traj.x.len();
    if rows < 5 {
        return 0.0;
    }
    let nv = traj.x[0].len() - 1;
    let mut worst = 0.0f64;
    for k in 2..rows - 2 {
        let xs = |j: usize, o: isize| traj.x[(k as isize + o) as usize][j];
        let d1 = |j: usize| (-xs(j, 2) + 8.0 * xs(j, 1) - 8.0 * xs(j, -1) + xs(j, -2)) / (12.0 * dt);
        let d2 = |j: usize| {
            (-xs(j, 2) + 16.0 * xs(j, 1) - 30.0 * xs(j, 0) + 16.0 * xs(j, -1) - xs(j, -2)) / (12.0 * dt * dt)
        };
        for j in 0..nv {
            let gap = xs(j + 1, 0) - xs(j, 0);
            let r = d2(j) - p.a() * (p.ov_value(gap) - d1(j));
            worst = worst.max(r.abs());
        }
    }
    worst
}
