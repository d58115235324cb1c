//! Cutoff functions and glued approximate profiles.
//!
//! The homoclinic and periodic approximations splice the closed-form fronts of
//! [`crate::limit`] onto constant plateaus with smooth partitions of unity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::limit::{eta_star, DistinguishedConstants, LimitContext};
use crate::model::{OVParams, OvKind};
use crate::profile::{Profile, ProfileKind, ProfileMeta};

fn bump_jet(x: f64) -> Jet {
    // s(x) = exp(-1/x) for x > 0; underflows to exactly zero near the origin.
    if x <= 0.0 {
        return Jet::constant(0.0);
    }
    let s = (-1.0 / x).exp();
    if s == 0.0 {
        return Jet::constant(0.0);
    }
    let x2 = x * x;
    Jet::new(s, s / x2, s * (1.0 / (x2 * x2) - 2.0 / (x2 * x)))
}

/// Smooth step `ξ(x) = s(x) / (s(x) + s(1 - x))`, `0` for `x ≤ 0` and `1` for `x ≥ 1`.
pub fn cutoff_xi_jet(x: f64) -> Jet {
    if x <= 0.0 {
        return Jet::constant(0.0);
    }
    if x >= 1.0 {
        return Jet::constant(1.0);
    }
    let p = bump_jet(x);
    let q = bump_jet(1.0 - x);
    // d/dx s(1 - x) flips the sign of the first derivative.
    let q = Jet::new(q.v, -q.d1, q.d2);
    p / (p + q)
}

pub fn cutoff_xi(x: f64) -> f64 {
    cutoff_xi_jet(x).v
}

/// `χ(x) = ξ(x + 2)(1 - ξ(x - 1))`: one on `|x| ≤ 1`, zero on `|x| ≥ 2`.
pub fn cutoff_chi_jet(x: f64) -> Jet {
    cutoff_xi_jet(x + 2.0) * (1.0 - cutoff_xi_jet(x - 1.0))
}

pub fn cutoff_chi(x: f64) -> f64 {
    cutoff_chi_jet(x).v
}

/// `ξ_R(t) = ξ(t/R)` as a jet in `t`.
fn xi_r(t: f64, r: f64) -> Jet {
    cutoff_xi_jet(t / r).chain_scale(1.0 / r)
}

fn chi_r(t: f64, r: f64) -> Jet {
    cutoff_chi_jet(t / r).chain_scale(1.0 / r)
}

trait ChainScale {
    fn chain_scale(self, k: f64) -> Self;
}

impl ChainScale for Jet {
    /// Rescales derivatives for an inner map `t ↦ k t`.
    fn chain_scale(self, k: f64) -> Self {
        Jet::new(self.v, self.d1 * k, self.d2 * k * k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositeKind {
    HeteroclinicInc,
    HeteroclinicDec,
    Homoclinic,
    Periodic,
}

/// Shape of a glued profile.
///
/// `eta` is the amplitude offset: fronts are built with amplitude `η* + eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeSpec {
    pub kind: CompositeKind,
    pub eta: f64,
    pub t_star: f64,
    /// Period, used by [`CompositeKind::Periodic`] only.
    pub period: f64,
    /// Matching half-width `R`.
    pub r: f64,
    /// Admissible fraction band `(t1, t2)` of `t_star / N`.
    #[serde(default = "default_band")]
    pub band: (f64, f64),
}

fn default_band() -> (f64, f64) {
    (0.05, 0.95)
}

impl CompositeSpec {
    pub fn periodic(eta: f64, t_star: f64, period: f64, r: f64) -> Self {
        Self {
            kind: CompositeKind::Periodic,
            eta,
            t_star,
            period,
            r,
            band: default_band(),
        }
    }

    pub fn homoclinic(eta: f64, t_star: f64, r: f64) -> Self {
        Self {
            kind: CompositeKind::Homoclinic,
            eta,
            t_star,
            period: f64::INFINITY,
            r,
            band: default_band(),
        }
    }

    pub fn validate(&self, p: &OVParams) -> Result<()> {
        let fail = |msg: String| Err(Error::Construction(msg));
        if !(self.r >= 1.0) {
            return fail(format!("R = {} must be at least 1", self.r));
        }
        let amp = eta_star(p).eta_star + self.eta;
        if !(amp > 0.0 && amp < p.v0() / p.a()) {
            return fail(format!("amplitude η* + η = {amp} outside (0, V0/a)"));
        }
        match self.kind {
            CompositeKind::HeteroclinicInc | CompositeKind::HeteroclinicDec => Ok(()),
            CompositeKind::Homoclinic => {
                if self.t_star > 4.0 * self.r {
                    Ok(())
                } else {
                    fail(format!("homoclinic needs t_star > 4R (t_star = {}, R = {})", self.t_star, self.r))
                }
            }
            CompositeKind::Periodic => {
                let n = self.period;
                let (t1, t2) = self.band;
                if !(n.is_finite() && self.t_star > 0.0 && self.t_star < n) {
                    return fail(format!("need 0 < t_star < N (t_star = {}, N = {n})", self.t_star));
                }
                if !(0.0 < t1 && t1 < t2 && t2 < 1.0) || self.t_star < n * t1 || self.t_star > n * t2 {
                    return fail(format!("t_star = {} outside [{}, {}]", self.t_star, n * t1, n * t2));
                }
                let gap = self.t_star.min(n - self.t_star);
                if 2.0 * self.r >= gap {
                    return fail(format!("need 2R < min(t_star, N - t_star) (R = {}, gap = {gap})", self.r));
                }
                Ok(())
            }
        }
    }
}

/// A validated composite profile.
#[derive(Debug, Clone)]
pub struct Composite {
    spec: CompositeSpec,
    consts: DistinguishedConstants,
    front: LimitContext,
    front_star: LimitContext,
    correction: Option<f64>,
}

impl Composite {
    pub fn new(p: &OVParams, spec: CompositeSpec) -> Result<Self> {
        spec.validate(p)?;
        let consts = eta_star(p);
        Ok(Self {
            spec,
            consts,
            front: LimitContext::new(p, consts.eta_star + spec.eta)?,
            front_star: LimitContext::new(p, consts.eta_star)?,
            correction: None,
        })
    }

    /// Adds the first-order front corrections for a speed offset `dc = c - c*`.
    pub fn with_correction(mut self, dc: f64) -> Self {
        self.correction = Some(dc);
        self
    }

    pub fn spec(&self) -> &CompositeSpec {
        &self.spec
    }

    pub fn constants(&self) -> &DistinguishedConstants {
        &self.consts
    }

    pub fn l(&self) -> f64 {
        self.front.l()
    }

    /// Plateau values `(u1, u2)`.
    pub fn plateaus(&self) -> (f64, f64) {
        let e = self.consts.eta_star + self.spec.eta;
        (self.l() - e, self.l() + e)
    }

    fn phi_scale(&self) -> Option<(f64, f64)> {
        self.correction.map(|dc| {
            let d = dc - self.consts.c_eta * self.spec.eta;
            (d, -d)
        })
    }

    fn homoclinic(&self, t: f64) -> Jet {
        let r = self.spec.r;
        let ts = self.spec.t_star;
        let u2 = self.l() + self.consts.eta_star;
        if t <= ts - 2.0 * r {
            let w = xi_r(t - r, r);
            let mut out = self.front_star.u_i_jet(Jet::var(t)) * (1.0 - w) + w * u2;
            if let Some(dc) = self.correction {
                out = out + self.front_star.phi0_jet(Jet::var(t)).scale(dc) * (1.0 - w);
            }
            out
        } else {
            let s = t - ts;
            let w = xi_r(s + 2.0 * r, r);
            let mut out = self.front.u_d_jet(Jet::var(s)) * w + (1.0 - w) * u2;
            if let Some((_, kd)) = self.phi_scale() {
                out = out + self.front_star.phi0_jet(Jet::var(s)).scale(kd) * w;
            }
            out
        }
    }

    fn periodic(&self, t: f64) -> Jet {
        let r = self.spec.r;
        let n = self.spec.period;
        let ts = self.spec.t_star;
        let (u1, u2) = self.plateaus();
        // Seams sit mid-plateau, where both pieces are flat to exponential accuracy.
        let lo = 0.5 * (ts + n) - n;
        let tau = (t - lo).rem_euclid(n) + lo;
        let (x, inc) = if tau < 0.5 * ts { (tau, true) } else { (tau - ts, false) };
        let chi = chi_r(x, r);
        let left = 1.0 - xi_r(x + 2.0 * r, r);
        let right = xi_r(x - r, r);
        let (front, lo_val, hi_val) = if inc {
            (self.front.u_i_jet(Jet::var(x)), u1, u2)
        } else {
            (self.front.u_d_jet(Jet::var(x)), u2, u1)
        };
        let mut out = front * chi + left * lo_val + right * hi_val;
        if let Some((ki, kd)) = self.phi_scale() {
            let k = if inc { ki } else { kd };
            out = out + self.front_star.phi0_jet(Jet::var(x)).scale(k) * chi;
        }
        out
    }
}

impl Profile for Composite {
    fn jet(&self, t: f64) -> Jet {
        match self.spec.kind {
            CompositeKind::HeteroclinicInc => self.front.u_i_jet(Jet::var(t)),
            CompositeKind::HeteroclinicDec => self.front.u_d_jet(Jet::var(t)),
            CompositeKind::Homoclinic => self.homoclinic(t),
            CompositeKind::Periodic => self.periodic(t),
        }
    }

    fn meta(&self) -> ProfileMeta {
        let (kind, period, layers) = match self.spec.kind {
            CompositeKind::HeteroclinicInc => (ProfileKind::HeteroclinicInc, None, vec![0.0]),
            CompositeKind::HeteroclinicDec => (ProfileKind::HeteroclinicDec, None, vec![0.0]),
            CompositeKind::Homoclinic => (ProfileKind::Homoclinic, None, vec![0.0, self.spec.t_star]),
            CompositeKind::Periodic => (
                ProfileKind::Periodic,
                Some(self.spec.period),
                vec![0.0, self.spec.t_star],
            ),
        };
        ProfileMeta { kind, period, layers }
    }
}

/// `u* = (l + η) t*/N + (l - η)(1 - t*/N)`.
pub fn mean_target(l: f64, eta: f64, t_star: f64, n: f64) -> f64 {
    let f = t_star / n;
    (l + eta) * f + (l - eta) * (1.0 - f)
}

/// `L = (l + η) t* + (l - η)(N - t*)`.
pub fn circuit_length(l: f64, eta: f64, t_star: f64, n: f64) -> f64 {
    (l + eta) * t_star + (l - eta) * (n - t_star)
}

/// Layer separation consistent with mean headway `u_star`: inverse of [`mean_target`] in `t*`.
pub fn t_star_from_mean(l: f64, eta: f64, u_star: f64, n: f64) -> f64 {
    n * (u_star - l + eta) / (2.0 * eta)
}

/// `c² u'' + a c u' - a (V(u(t+1)) - V(u(t)))` at each phase in `ts`.
pub fn profile_residual(p: &OVParams, kind: OvKind, u: &dyn Profile, c: f64, ts: &[f64]) -> Vec<f64> {
    ts.iter()
        .map(|&t| {
            let j = u.jet(t);
            let ahead = u.value(t + 1.0);
            c * c * j.d2 + p.a() * c * j.d1 - p.a() * (p.eval(kind, ahead) - p.eval(kind, j.v))
        })
        .collect()
}
