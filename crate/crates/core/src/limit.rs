//! Closed-form transition layers of the step-function limit.
//!
//! For `0 < η < V0/a` the limit equation
//! `c² u'' + a c u' = a V0 (H(u(t+1) - l) - H(u(t) - l))` has the monotone front `u_i`
//! rising from `u_i(-∞) < l` through `u_i(0) = l` to `l + η`, with speed
//! `c0(η) = -a / log(1 - aη/V0)`. The decreasing front is its reflection `u_d = 2l - u_i`.

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::model::OVParams;
use crate::profile::{Profile, ProfileKind, ProfileMeta};

/// Residual tolerance of the `2X = -log(1 - X)` root.
pub const ETA_STAR_TOL: f64 = 1e-14;

/// `c0(η) = -a / log(1 - aη/V0)`.
pub fn wave_speed_c0(p: &OVParams, eta: f64) -> Result<f64> {
    let hi = p.v0() / p.a();
    if !(eta > 0.0 && eta < hi) {
        return Err(Error::Domain {
            what: "eta",
            value: eta,
            lo: 0.0,
            hi,
        });
    }
    Ok(-p.a() / (-p.a() * eta / p.v0()).ln_1p())
}

/// Unique root of `2X + log(1 - X) = 0` in `(0, 1)`.
pub fn amplitude_root() -> f64 {
    let f = |x: f64| 2.0 * x + (-x).ln_1p();
    // f > 0 near 0 and f -> -inf as X -> 1.
    let (mut lo, mut hi) = (0.5, 1.0 - 1e-12);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..4 {
        let fp = 2.0 - 1.0 / (1.0 - x);
        let next = x - f(x) / fp;
        if !(lo..=hi).contains(&next) {
            break;
        }
        x = next;
    }
    x
}

/// Amplitude at which an increasing and a decreasing layer can be matched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistinguishedConstants {
    /// Root `X` of `2X = -log(1 - X)`.
    pub x_root: f64,
    pub eta_star: f64,
    pub c_star: f64,
    pub kappa_star: f64,
    /// `∂c0/∂η` at `η*`.
    pub c_eta: f64,
}

pub fn eta_star(p: &OVParams) -> DistinguishedConstants {
    let x = amplitude_root();
    let eta_star = p.v0() / p.a() * x;
    let c_star = wave_speed_c0(p, eta_star).expect("η* lies inside (0, V0/a)");
    let kappa_star = p.a() / c_star;
    let c_eta = -(c_star * c_star / p.v0()) * kappa_star.exp();
    DistinguishedConstants {
        x_root: x,
        eta_star,
        c_star,
        kappa_star,
        c_eta,
    }
}

impl DistinguishedConstants {
    /// `2(a/V0)η* + log(1 - (a/V0)η*)`.
    pub fn residual(&self) -> f64 {
        2.0 * self.x_root + (-self.x_root).ln_1p()
    }
}

/// A fixed amplitude `η` with its derived speed and decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitContext {
    pub eta: f64,
    pub c0: f64,
    pub kappa: f64,
    pub u_minus_inf: f64,
    params: OVParams,
}

impl LimitContext {
    pub fn new(p: &OVParams, eta: f64) -> Result<Self> {
        let c0 = wave_speed_c0(p, eta)?;
        let u_minus_inf = p.l() + eta + p.v0() / p.a() * (-p.a() * eta / p.v0()).ln_1p();
        Ok(Self {
            eta,
            c0,
            kappa: p.a() / c0,
            u_minus_inf,
            params: *p,
        })
    }

    pub fn params(&self) -> &OVParams {
        &self.params
    }

    pub fn l(&self) -> f64 {
        self.params.l()
    }

    /// `u_i(+∞) = l + η`.
    pub fn u_plus_inf(&self) -> f64 {
        self.params.l() + self.eta
    }

    pub fn u_i_jet(&self, t: Jet) -> Jet {
        let (a, v0, l) = (self.params.a(), self.params.v0(), self.params.l());
        let (eta, c0, k) = (self.eta, self.c0, self.kappa);
        if t.v < -1.0 {
            Jet::constant(self.u_minus_inf)
        } else if t.v < 0.0 {
            let e = t.scale(-k).exp();
            let inner = (v0 / a) * (1.0 - e) - t.scale(v0 / c0) + e.scale(eta);
            (l + eta) - inner
        } else {
            let e = t.scale(-k).exp();
            // Written so that u_i(0) = l holds exactly.
            l + (1.0 - e).scale(eta)
        }
    }

    pub fn u_i(&self, t: f64) -> f64 {
        self.u_i_jet(Jet::var(t)).v
    }

    pub fn u_d_jet(&self, t: Jet) -> Jet {
        2.0 * self.params.l() - self.u_i_jet(t)
    }

    pub fn u_d(&self, t: f64) -> f64 {
        2.0 * self.params.l() - self.u_i(t)
    }

    pub fn u_d_plus_inf(&self) -> f64 {
        self.params.l() - self.eta
    }

    pub fn u_d_minus_inf(&self) -> f64 {
        2.0 * self.params.l() - self.u_minus_inf
    }

    /// First-order correction of the front per unit change in wave speed.
    ///
    /// Continuous everywhere; its derivative jumps by [`Self::zeta0`] at the crossing
    /// `t = 0` and is continuous at `t = -1`.
    pub fn phi0_jet(&self, t: Jet) -> Jet {
        let (a, v0) = (self.params.a(), self.params.v0());
        let (eta, c0, k) = (self.eta, self.c0, self.kappa);
        let c2 = c0 * c0;
        if t.v < -1.0 {
            Jet::constant(eta * a / c2)
        } else if t.v < 0.0 {
            let e = t.scale(-k).exp();
            let bracket = (t + 1.0) * e - 1.0;
            t.scale(-v0 / c2) + bracket.scale((v0 - a * eta) / c2)
        } else {
            let e = t.scale(-k).exp();
            (t * e).scale(-eta * a / c2)
        }
    }

    pub fn phi0(&self, t: f64) -> f64 {
        self.phi0_jet(Jet::var(t)).v
    }

    /// `ζ0 = (a V0 / c0³) e^{-κ}`.
    pub fn zeta0(&self) -> f64 {
        let (a, v0) = (self.params.a(), self.params.v0());
        a * v0 / self.c0.powi(3) * (-self.kappa).exp()
    }

    /// Residual of the step-limit equation for `u_i` at a point off `{-1, 0}`.
    pub fn step_limit_residual(&self, t: f64) -> f64 {
        let p = &self.params;
        let u = self.u_i_jet(Jet::var(t));
        let ahead = self.u_i(t + 1.0);
        let rhs = p.a() * (p.ov_step_limit(ahead) - p.ov_step_limit(u.v));
        self.c0 * self.c0 * u.d2 + p.a() * self.c0 * u.d1 - rhs
    }
}

/// Increasing front `u_i` as an evaluable profile.
#[derive(Debug, Clone, Copy)]
pub struct IncreasingFront(pub LimitContext);

/// Decreasing front `u_d = 2l - u_i` as an evaluable profile.
#[derive(Debug, Clone, Copy)]
pub struct DecreasingFront(pub LimitContext);

impl Profile for IncreasingFront {
    fn jet(&self, t: f64) -> Jet {
        self.0.u_i_jet(Jet::var(t))
    }
    fn meta(&self) -> ProfileMeta {
        ProfileMeta {
            kind: ProfileKind::HeteroclinicInc,
            period: None,
            layers: vec![0.0],
        }
    }
}

impl Profile for DecreasingFront {
    fn jet(&self, t: f64) -> Jet {
        self.0.u_d_jet(Jet::var(t))
    }
    fn meta(&self) -> ProfileMeta {
        ProfileMeta {
            kind: ProfileKind::HeteroclinicDec,
            period: None,
            layers: vec![0.0],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> OVParams {
        OVParams::reference()
    }

    fn bisect_root() -> f64 {
        let (mut lo, mut hi) = (0.1f64, 0.99f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 2.0 * mid + (1.0 - mid).ln() > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn one_sided(f: impl Fn(f64) -> f64, t: f64) -> (f64, f64) {
        let h = 1e-8;
        ((f(t) - f(t - h)) / h, (f(t + h) - f(t)) / h)
    }

    #[test]
    fn c0_equals_a_when_log_term_is_minus_one() {
        let p = p();
        let eta = p.v0() / p.a() * (1.0 - (-1.0f64).exp());
        assert!((wave_speed_c0(&p, eta).unwrap() - p.a()).abs() < 1e-13);
    }

    #[test]
    fn c0_blows_up_for_small_eta_and_rejects_out_of_range() {
        let p = p();
        let s = p.v0() / p.a();
        assert!(wave_speed_c0(&p, 1e-6 * s).unwrap() > 1e4 * wave_speed_c0(&p, 0.5 * s).unwrap());
        assert!(matches!(wave_speed_c0(&p, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(wave_speed_c0(&p, s), Err(Error::Domain { .. })));
        assert!(wave_speed_c0(&p, -1.0).is_err());
    }

    #[test]
    fn c0_monotone_decreasing() {
        let p = p();
        let s = p.v0() / p.a();
        let cs: Vec<f64> = (1..=50).map(|i| wave_speed_c0(&p, s * i as f64 / 51.0).unwrap()).collect();
        assert!(cs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn eta_star_against_bisection_oracle() {
        let p = p();
        let d = eta_star(&p);
        let x = bisect_root();
        assert!(d.residual().abs() < ETA_STAR_TOL);
        assert!((d.x_root - 0.797).abs() < 5e-4);
        assert!((d.x_root - x).abs() < 1e-12);
        assert!((d.eta_star - 0.021 * x).abs() < 1e-15);
        assert!((d.eta_star - 0.01673).abs() < 1e-5);
        assert!((d.c_star - p.a() / (2.0 * x)).abs() < 1e-12);
        assert!((d.c_star - 1.004).abs() < 1e-3);
    }

    #[test]
    fn c_eta_matches_finite_difference() {
        let p = p();
        let d = eta_star(&p);
        let h = 1e-6 * d.eta_star;
        let fd = (wave_speed_c0(&p, d.eta_star + h).unwrap() - wave_speed_c0(&p, d.eta_star - h).unwrap()) / (2.0 * h);
        assert!(((fd - d.c_eta) / d.c_eta).abs() < 1e-5);
    }

    #[test]
    fn u_i_anchor_and_plateaus() {
        let ctx = LimitContext::new(&p(), 0.01).unwrap();
        let l = ctx.l();
        assert_eq!(ctx.u_i(0.0), l);
        let expected = l + 0.01 + 0.0336 / 1.6 * (1.0 - 1.6 * 0.01 / 0.0336f64).ln();
        assert!((ctx.u_i(-5.0) - expected).abs() < 1e-16);
        assert!(ctx.u_minus_inf < l);
        assert!((ctx.u_i(60.0 / ctx.kappa) - ctx.u_plus_inf()).abs() < 1e-15);
        assert!((ctx.kappa * ctx.c0 - 1.6).abs() < 1e-15);
    }

    #[test]
    fn u_i_is_c1_at_breakpoints() {
        let ctx = LimitContext::new(&p(), 0.012).unwrap();
        let (l0, r0) = one_sided(|t| ctx.u_i(t), 0.0);
        assert!((l0 - r0).abs() < 1e-6);
        assert!((r0 - ctx.eta * ctx.kappa).abs() < 1e-6);
        let (lm, rm) = one_sided(|t| ctx.u_i(t), -1.0);
        assert!(lm.abs() < 1e-6 && rm.abs() < 1e-6);
        // analytic one-sided derivatives
        let d = |t: f64| ctx.u_i_jet(Jet::var(t)).d1;
        assert!((d(-1.0) - 0.0).abs() < 1e-15);
        assert!((d(0.0) - ctx.eta * ctx.kappa).abs() < 1e-15);
        assert!((d(-1e-15) - ctx.eta * ctx.kappa).abs() < 1e-12);
    }

    #[test]
    fn u_i_monotone_nondecreasing() {
        let ctx = LimitContext::new(&p(), 0.015).unwrap();
        let vals: Vec<f64> = (0..2000).map(|i| ctx.u_i(-3.0 + i as f64 * 0.01)).collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-17));
    }

    #[test]
    fn u_i_solves_step_limit_equation_off_breakpoints() {
        for &eta in &[0.005, 0.012, eta_star(&p()).eta_star, 0.02] {
            let ctx = LimitContext::new(&p(), eta).unwrap();
            for i in 0..1000 {
                let t = -4.0 + 10.0 * i as f64 / 999.0 + 1e-3;
                if (t + 1.0).abs() < 1e-9 || t.abs() < 1e-9 {
                    continue;
                }
                assert!(ctx.step_limit_residual(t).abs() < 1e-10, "eta={eta} t={t}");
            }
        }
    }

    #[test]
    fn u_d_is_reflection() {
        let ctx = LimitContext::new(&p(), 0.014).unwrap();
        let l = ctx.l();
        assert_eq!(ctx.u_d(0.0), l);
        for i in 0..100 {
            let t = -5.0 + 0.1 * i as f64;
            assert!((ctx.u_i(t) + ctx.u_d(t) - 2.0 * l).abs() < 1e-17);
            let step = |x: f64| if x >= l { 1.0 } else { 0.0 };
            let hi = step(ctx.u_i(t + 1.0)) - step(ctx.u_i(t));
            let hd = step(2.0 * l - ctx.u_d(t + 1.0)) - step(2.0 * l - ctx.u_d(t));
            assert_eq!(hi, hd);
        }
        assert!((ctx.u_d(50.0 / ctx.kappa) - (l - ctx.eta)).abs() < 1e-14);
    }

    #[test]
    fn homoclinic_matching_identity_at_eta_star() {
        let p = p();
        let d = eta_star(&p);
        let ctx = LimitContext::new(&p, d.eta_star).unwrap();
        assert!((ctx.u_minus_inf - (p.l() - d.eta_star)).abs() < 1e-12);
        assert!((ctx.u_d_minus_inf() - ctx.u_plus_inf()).abs() < 1e-12);
    }

    #[test]
    fn phi0_branch_values_and_continuity() {
        let ctx = LimitContext::new(&p(), 0.013).unwrap();
        let a = 1.6;
        assert!((ctx.phi0(-2.0) - ctx.eta * a / ctx.c0.powi(2)).abs() < 1e-16);
        assert_eq!(ctx.phi0(0.0), 0.0);
        assert!(ctx.phi0(-1e-14).abs() < 1e-12);
        assert!((ctx.phi0(-1.0) - ctx.phi0(-1.0 - 1e-14)).abs() < 1e-12);
        let far = ctx.phi0(40.0 / ctx.kappa);
        assert!(far.abs() < 1e-12);
    }

    #[test]
    fn phi0_kink_sits_at_crossing_with_jump_zeta0() {
        for &eta in &[0.006, 0.013, 0.019] {
            let ctx = LimitContext::new(&p(), eta).unwrap();
            let (l0, r0) = one_sided(|t| ctx.phi0(t), 0.0);
            assert!(((r0 - l0) - ctx.zeta0()).abs() < 1e-6, "eta={eta}");
            let exact = ctx.phi0_jet(Jet::var(0.0)).d1 - ctx.phi0_jet(Jet::var(-1e-300)).d1;
            assert!((exact - ctx.zeta0()).abs() < 1e-12);
            // At t = -1 the one-sided slopes agree.
            let (lm, rm) = one_sided(|t| ctx.phi0(t), -1.0);
            assert!((rm - lm).abs() < 1e-6);
        }
    }

    #[test]
    fn zeta0_substitution_and_positivity() {
        let p = p();
        let eta = p.v0() / p.a() * (1.0 - (-1.0f64).exp());
        let ctx = LimitContext::new(&p, eta).unwrap();
        let expected = p.v0() / (p.a() * p.a()) * (-1.0f64).exp();
        assert!((ctx.zeta0() - expected).abs() < 1e-15);
        for i in 1..=20 {
            let eta = p.v0() / p.a() * (i as f64 * 0.047);
            assert!(LimitContext::new(&p, eta).unwrap().zeta0() > 0.0);
        }
    }
}
