use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::fft::Plans;
use crate::error::{Error, Result};
use crate::model::{OVParams, OvKind};
use crate::profile::TrigInterpolant;

/// Equispaced periodic grid `t_j = j N / n` with cached transform plans.
#[derive(Clone, Debug)]
pub struct SpectralGrid {
    period: f64,
    n: usize,
    plans: Plans,
    plans2: Plans,
    k: Vec<f64>,
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.period == other.period && self.n == other.n
    }
}

impl SpectralGrid {
    pub fn new(period: f64, n_points: usize) -> Result<Self> {
        if !(period.is_finite() && period > 1.0) {
            return Err(Error::InvalidParameter {
                name: "period",
                value: period,
                reason: "must be finite and exceed 1",
            });
        }
        if n_points < 64 || n_points % 2 != 0 {
            return Err(Error::InvalidParameter {
                name: "n_points",
                value: n_points as f64,
                reason: "must be even and at least 64",
            });
        }
        let w = 2.0 * PI / period;
        let k = (0..n_points)
            .map(|i| {
                let m = if i < n_points / 2 { i as f64 } else { i as f64 - n_points as f64 };
                w * m
            })
            .collect();
        Ok(Self {
            period,
            n: n_points,
            plans: Plans::new(n_points),
            plans2: Plans::new(2 * n_points),
            k,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| j as f64 * self.spacing()).collect()
    }

    /// Wavenumbers in transform order; the Nyquist entry is `-π n / N`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    /// Samples per unit phase when that is an integer, so a unit shift is a rotation.
    pub fn samples_per_unit(&self) -> Option<usize> {
        let m = self.n as f64 / self.period;
        (m.fract() == 0.0).then_some(m as usize)
    }

    fn nyq(&self) -> usize {
        self.n / 2
    }

    fn apply(&self, u: &[f64], mult: impl Fn(usize, f64) -> Complex64) -> Vec<f64> {
        let mut s = self.plans.forward(u);
        for (i, z) in s.iter_mut().enumerate() {
            *z *= mult(i, self.k[i]);
        }
        self.plans.inverse_real(s)
    }

    /// Samples of `t ↦ u(t + s)`.
    pub fn shift(&self, u: &[f64], s: f64) -> Vec<f64> {
        let nyq = self.nyq();
        self.apply(u, |i, k| {
            if i == nyq {
                Complex64::new((k * s).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, k * s)
            }
        })
    }

    pub fn shift_by_one(&self, u: &[f64]) -> Vec<f64> {
        match self.samples_per_unit() {
            Some(m) => {
                let mut out = u.to_vec();
                out.rotate_left(m % self.n);
                out
            }
            None => self.shift(u, 1.0),
        }
    }

    /// Fourier derivative of order 1 or 2.
    pub fn derivative(&self, u: &[f64], order: u32) -> Result<Vec<f64>> {
        let nyq = self.nyq();
        match order {
            1 => Ok(self.apply(u, |i, k| if i == nyq { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, k) })),
            2 => Ok(self.apply(u, |_, k| Complex64::new(-k * k, 0.0))),
            o => Err(Error::UnsupportedOrder(o)),
        }
    }

    /// Zero-pads the spectrum to `2n` points, splitting the Nyquist coefficient.
    pub fn pad(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n;
        let s = self.plans.forward(u);
        let mut g = vec![Complex64::new(0.0, 0.0); 2 * n];
        let h = n / 2;
        for i in 0..h {
            g[i] = s[i];
        }
        for i in 1..h {
            g[2 * n - i] = s[n - i];
        }
        let half = Complex64::new(0.5 * s[h].re, 0.0);
        g[h] = half;
        g[2 * n - h] = half;
        self.plans2.inverse_real(g)
    }

    /// Projects `2n` samples back onto the `n`-point band; left inverse of [`Self::pad`].
    pub fn trunc(&self, g: &[f64]) -> Vec<f64> {
        let n = self.n;
        let s = self.plans2.forward(g);
        let h = n / 2;
        let mut u = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..h {
            u[i] = s[i];
        }
        for i in 1..h {
            u[n - i] = s[2 * n - i];
        }
        u[h] = Complex64::new(s[h].re + s[2 * n - h].re, 0.0);
        self.plans.inverse_real(u)
    }

    /// `trunc(V(pad(u)))`.
    pub fn dealiased(&self, p: &OVParams, kind: OvKind, u: &[f64]) -> Vec<f64> {
        let g: Vec<f64> = self.pad(u).into_iter().map(|x| p.eval(kind, x)).collect();
        self.trunc(&g)
    }

    /// `a (V(u(t + 1)) - V(u(t)))` with nonlinearities evaluated on the doubled grid.
    pub fn nonlinear_term(&self, p: &OVParams, u: &[f64]) -> Vec<f64> {
        self.nonlinear_term_kind(p, OvKind::Tanh, u)
    }

    pub fn nonlinear_term_kind(&self, p: &OVParams, kind: OvKind, u: &[f64]) -> Vec<f64> {
        let ahead = self.dealiased(p, kind, &self.shift_by_one(u));
        let here = self.dealiased(p, kind, u);
        ahead.iter().zip(&here).map(|(x, y)| p.a() * (x - y)).collect()
    }

    /// Trigonometric interpolation onto `n_new` points.
    pub fn resample(&self, u: &[f64], n_new: usize) -> Result<Vec<f64>> {
        let target = SpectralGrid::new(self.period, n_new)?;
        let s = self.plans.forward(u);
        let n = self.n;
        let mut g = vec![Complex64::new(0.0, 0.0); n_new];
        let h = n.min(n_new) / 2;
        for i in 0..h {
            g[i] = s[i];
        }
        for i in 1..h {
            g[n_new - i] = s[n - i];
        }
        if n_new > n {
            let half = Complex64::new(0.5 * s[n / 2].re, 0.0);
            g[h] = half;
            g[n_new - h] = half;
        } else {
            g[h] = Complex64::new(s[h].re + s[n - h].re, 0.0);
            if n_new == n {
                g[h] = s[h];
            }
        }
        Ok(target.plans.inverse_real(g))
    }

    pub fn interpolant(&self, u: &[f64]) -> TrigInterpolant {
        TrigInterpolant::new(self.period, u)
    }

    /// First phase where the interpolant crosses `level` upward, refined by Newton.
    pub fn upcrossing(&self, u: &[f64], level: f64) -> Option<f64> {
        use crate::profile::Profile;
        let n = self.n;
        let j = (0..n).find(|&j| u[j] < level && u[(j + 1) % n] >= level)?;
        let h = self.spacing();
        let (lo, hi) = (j as f64 * h, (j + 1) as f64 * h);
        let ip = self.interpolant(u);
        let mut t = lo + (level - u[j]) / (u[(j + 1) % n] - u[j]) * h;
        for _ in 0..30 {
            let jt = ip.jet(t);
            if jt.d1 <= 0.0 {
                break;
            }
            let next = (t - (jt.v - level) / jt.d1).clamp(lo - h, hi + h);
            let done = (next - t).abs() < 1e-15 * self.period;
            t = next;
            if done {
                break;
            }
        }
        Some(t.rem_euclid(self.period))
    }
}

pub fn mean(u: &[f64]) -> f64 {
    u.iter().sum::<f64>() / u.len() as f64
}

pub fn max_abs(u: &[f64]) -> f64 {
    u.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smooth(t: f64, n: f64) -> f64 {
        let w = 2.0 * PI / n;
        0.025 + 0.01 * (w * t).sin() + 0.004 * (3.0 * w * t + 0.3).cos() + 0.001 * (7.0 * w * t).sin()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SpectralGrid::new(40.0, 63).is_err());
        assert!(SpectralGrid::new(40.0, 32).is_err());
        assert!(SpectralGrid::new(0.5, 128).is_err());
    }

    #[test]
    fn shift_examples() {
        let g = SpectralGrid::new(40.0, 256).unwrap();
        let ones = vec![1.0; 256];
        assert!(g.shift_by_one(&ones).iter().all(|x| (x - 1.0).abs() < 1e-15));
        let w = 2.0 * PI / 40.0;
        let u: Vec<f64> = g.points().iter().map(|t| (w * t).cos()).collect();
        let s = g.shift(&u, 1.0);
        for (t, v) in g.points().iter().zip(&s) {
            assert!((v - (w * (t + 1.0)).cos()).abs() < 1e-12);
        }
        let twice = g.shift(&g.shift(&u, 1.0), 1.0);
        let direct = g.shift(&u, 2.0);
        assert!(twice.iter().zip(&direct).all(|(a, b)| (a - b).abs() < 1e-13));
    }

    #[test]
    fn rotation_matches_fourier_shift() {
        let g = SpectralGrid::new(40.0, 40 * 16).unwrap();
        let u: Vec<f64> = g.points().iter().map(|&t| smooth(t, 40.0)).collect();
        let a = g.shift_by_one(&u);
        let b = g.shift(&u, 1.0);
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-14));
        let g = SpectralGrid::new(13.5, 128).unwrap();
        assert!(g.samples_per_unit().is_none());
    }

    #[test]
    fn derivative_examples() {
        let g = SpectralGrid::new(40.0, 128).unwrap();
        let c = vec![3.0; 128];
        assert!(max_abs(&g.derivative(&c, 1).unwrap()) < 1e-15);
        let w = 2.0 * PI / 40.0;
        let u: Vec<f64> = g.points().iter().map(|t| (w * t).sin()).collect();
        let d = g.derivative(&u, 1).unwrap();
        let d2 = g.derivative(&u, 2).unwrap();
        for ((t, a), b) in g.points().iter().zip(&d).zip(&d2) {
            assert!((a - w * (w * t).cos()).abs() < 1e-10);
            assert!((b + w * w * (w * t).sin()).abs() < 1e-10);
        }
        assert!(matches!(g.derivative(&u, 3), Err(Error::UnsupportedOrder(3))));
    }

    #[test]
    fn pad_then_trunc_is_identity() {
        let g = SpectralGrid::new(20.0, 64).unwrap();
        let u: Vec<f64> = (0..64).map(|j| ((j * 37 % 11) as f64).sin()).collect();
        let back = g.trunc(&g.pad(&u));
        assert!(u.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-14));
        let p = g.pad(&u);
        for j in 0..64 {
            assert!((p[2 * j] - u[j]).abs() < 1e-13);
        }
    }

    #[test]
    fn nonlinear_term_against_oversampled_oracle() {
        let p = OVParams::reference();
        let n = 40.0;
        let g = SpectralGrid::new(n, 512).unwrap();
        let u: Vec<f64> = g.points().iter().map(|&t| smooth(t, n)).collect();
        let nl = g.nonlinear_term(&p, &u);
        let fine = 4 * 512;
        let h = n / fine as f64;
        let direct: Vec<f64> = (0..fine)
            .map(|j| {
                let t = j as f64 * h;
                p.a() * (p.ov_value(smooth(t + 1.0, n)) - p.ov_value(smooth(t, n)))
            })
            .collect();
        let gf = SpectralGrid::new(n, fine).unwrap();
        let proj = gf.resample(&direct, 512).unwrap();
        assert!(nl.iter().zip(&proj).all(|(a, b)| (a - b).abs() < 1e-8));
        assert!(mean(&nl).abs() < 1e-12);
        assert!(max_abs(&g.nonlinear_term(&p, &vec![0.03; 512])) < 1e-15);
    }

    #[test]
    fn resample_round_trip_and_upcrossing() {
        let n = 40.0;
        let g = SpectralGrid::new(n, 256).unwrap();
        let u: Vec<f64> = g.points().iter().map(|&t| smooth(t, n)).collect();
        let up = g.resample(&u, 1024).unwrap();
        let down = SpectralGrid::new(n, 1024).unwrap().resample(&up, 256).unwrap();
        assert!(u.iter().zip(&down).all(|(a, b)| (a - b).abs() < 1e-15));
        let w = 2.0 * PI / n;
        let v: Vec<f64> = g.points().iter().map(|&t| 0.025 + 0.01 * (w * (t - 7.3)).sin()).collect();
        let t = g.upcrossing(&v, 0.025).unwrap();
        assert!((t - 7.3).abs() < 1e-12);
    }
}
