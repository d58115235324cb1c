use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::OVParams;

/// Positions (unwrapped) and velocities of `N` vehicles on a circuit of length `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct RingState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub length: f64,
    pub time: f64,
}

impl RingState {
    /// Equally spaced vehicles moving at `V(L/N)`.
    pub fn uniform(p: &OVParams, n: usize, length: f64) -> Self {
        Self::from_headways(p, &vec![length / n as f64; n], length)
    }

    /// Uniform flow with headways `h (1 + amp sin(2π k j / N))`, velocities `V(headway)`.
    pub fn perturbed(p: &OVParams, n: usize, length: f64, amp: f64, mode: usize) -> Self {
        let h = length / n as f64;
        let d: Vec<f64> = (0..n)
            .map(|j| h * (1.0 + amp * (2.0 * PI * (mode * j) as f64 / n as f64).sin()))
            .collect();
        Self::from_headways(p, &d, length)
    }

    fn from_headways(p: &OVParams, d: &[f64], length: f64) -> Self {
        let mut x = Vec::with_capacity(d.len());
        let mut acc = 0.0;
        for h in d {
            x.push(acc);
            acc += h;
        }
        Self {
            v: d.iter().map(|&h| p.ov_value(h)).collect(),
            x,
            length,
            time: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// `Δx_j = x_{j+1} - x_j` with `x_{N+1} = x_1 + L`.
    pub fn headways(&self) -> Vec<f64> {
        headways_of(&self.x, self.length)
    }
}

fn headways_of(x: &[f64], length: f64) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|j| if j + 1 < n { x[j + 1] - x[j] } else { x[0] + length - x[j] })
        .collect()
}

fn accel(p: &OVParams, x: &[f64], v: &[f64], length: f64) -> Vec<f64> {
    headways_of(x, length)
        .iter()
        .zip(v)
        .map(|(&d, &vj)| p.a() * (p.ov_value(d) - vj))
        .collect()
}

/// One classical Runge-Kutta step of `x' = v`, `v' = a (V(Δx) - v)`.
pub fn step_rk4(p: &OVParams, s: &RingState, dt: f64) -> Result<RingState> {
    if !(dt > 0.0 && dt <= 0.1 / p.a()) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "must lie in (0, 0.1/a]",
        });
    }
    let n = s.n();
    let l = s.length;
    let axpy = |y: &[f64], k: &[f64], h: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    let k1x = s.v.clone();
    let k1v = accel(p, &s.x, &s.v, l);
    let (x2, v2) = (axpy(&s.x, &k1x, 0.5 * dt), axpy(&s.v, &k1v, 0.5 * dt));
    let k2v = accel(p, &x2, &v2, l);
    let (x3, v3) = (axpy(&s.x, &v2, 0.5 * dt), axpy(&s.v, &k2v, 0.5 * dt));
    let k3v = accel(p, &x3, &v3, l);
    let (x4, v4) = (axpy(&s.x, &v3, dt), axpy(&s.v, &k3v, dt));
    let k4v = accel(p, &x4, &v4, l);
    let mut x = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for j in 0..n {
        x.push(s.x[j] + dt / 6.0 * (k1x[j] + 2.0 * v2[j] + 2.0 * v3[j] + v4[j]));
        v.push(s.v[j] + dt / 6.0 * (k1v[j] + 2.0 * k2v[j] + 2.0 * k3v[j] + k4v[j]));
    }
    let out = RingState {
        x,
        v,
        length: l,
        time: s.time + dt,
    };
    if let Some((index, &headway)) = out
        .headways()
        .iter()
        .enumerate()
        .find(|(_, &d)| d <= 0.0)
    {
        return Err(Error::Collision {
            index,
            time: out.time,
            headway,
        });
    }
    Ok(out)
}

/// Headways sampled at a fixed cadence.
#[derive(Debug, Clone)]
pub struct HeadwaySeries {
    pub times: Vec<f64>,
    /// `headways[k][j]` is `Δx_j` at `times[k]`.
    pub headways: Vec<Vec<f64>>,
    pub dt_sample: f64,
    pub length: f64,
}

impl HeadwaySeries {
    pub fn n_vehicles(&self) -> usize {
        self.headways.first().map_or(0, |h| h.len())
    }

    /// Samples with `time >= t0`.
    pub fn tail(&self, t0: f64) -> HeadwaySeries {
        let k0 = self.times.iter().position(|&t| t >= t0).unwrap_or(self.times.len());
        HeadwaySeries {
            times: self.times[k0..].to_vec(),
            headways: self.headways[k0..].to_vec(),
            dt_sample: self.dt_sample,
            length: self.length,
        }
    }

    /// `max - min` of the headways at each sample.
    pub fn amplitudes(&self) -> Vec<f64> {
        self.headways
            .iter()
            .map(|h| {
                let (lo, hi) = h.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
                hi - lo
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    pub t_end: f64,
    pub dt: f64,
    /// Steps between stored samples.
    pub sample_every: usize,
    /// Samples before this time are discarded.
    pub keep_from: f64,
}

pub fn simulate(p: &OVParams, init: &RingState, opts: &SimulationOptions) -> Result<(HeadwaySeries, RingState)> {
    let steps = (opts.t_end / opts.dt).round() as usize;
    let every = opts.sample_every.max(1);
    let mut s = init.clone();
    let mut series = HeadwaySeries {
        times: Vec::new(),
        headways: Vec::new(),
        dt_sample: opts.dt * every as f64,
        length: init.length,
    };
    for k in 0..=steps {
        if k % every == 0 && s.time >= opts.keep_from - 1e-12 {
            series.times.push(s.time);
            series.headways.push(s.headways());
        }
        if k < steps {
            s = step_rk4(p, &s, opts.dt)?;
        }
    }
    Ok((series, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_flow_is_a_fixed_point() {
        let p = OVParams::reference();
        let s0 = RingState::uniform(&p, 40, 1.0);
        let (series, end) = simulate(
            &p,
            &s0,
            &SimulationOptions {
                t_end: 20.0,
                dt: 0.01,
                sample_every: 100,
                keep_from: 0.0,
            },
        )
        .unwrap();
        for h in &series.headways {
            assert!(h.iter().all(|d| (d - 0.025).abs() < 1e-14));
        }
        let v = p.ov_value(0.025);
        let dv = end.v.iter().map(|x| (x - v).abs()).fold(0.0, f64::max);
        assert!(dv < 1e-13, "{dv}");
    }

    #[test]
    fn headway_sum_is_conserved() {
        let p = OVParams::reference();
        let mut s = RingState::perturbed(&p, 40, 1.0, 0.3, 1);
        for _ in 0..100_000 {
            s = step_rk4(&p, &s, 0.02).unwrap();
        }
        let sum: f64 = s.headways().iter().sum();
        assert!((sum - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let p = OVParams::reference();
        let s0 = RingState::perturbed(&p, 20, 0.5, 0.2, 1);
        let run = |dt: f64| {
            let mut s = s0.clone();
            let steps = (20.0 / dt).round() as usize;
            for _ in 0..steps {
                s = step_rk4(&p, &s, dt).unwrap();
            }
            s.headways()
        };
        let reference = run(0.1 / 8.0);
        let err = |h: Vec<f64>| h.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let e1 = err(run(0.1 / 2.0));
        let e2 = err(run(0.1 / 4.0));
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn rejects_large_steps_and_reports_collisions() {
        let p = OVParams::reference();
        let s = RingState::uniform(&p, 10, 0.25);
        assert!(step_rk4(&p, &s, 0.1).is_err());
        let mut bad = s.clone();
        bad.v[0] = 100.0;
        assert!(matches!(step_rk4(&p, &bad, 0.01), Err(Error::Collision { index: 0, .. })));
    }
}
