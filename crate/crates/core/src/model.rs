//! Model parameters and the optimal-velocity function.
//!
//! The smooth family is `V(x) = V0/2 (tanh(β(x - l)) + M)`. As `β → ∞` it tends to the
//! step `V0 H(x - l) + V1` with `V1 = V0 (M - 1)/2` and the convention `H(0) = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Decay rate constant `α` of the exponential envelope around the step limit.
pub const ENVELOPE_ALPHA: f64 = 2.0;

/// Which velocity function a solver evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OvKind {
    Tanh,
    Step,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct RawParams {
    a: f64,
    v0: f64,
    beta: f64,
    l: f64,
    m: f64,
}

/// Physical constants of the OV model. Immutable once constructed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct OVParams {
    a: f64,
    v0: f64,
    beta: f64,
    l: f64,
    m: f64,
}

impl TryFrom<RawParams> for OVParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        OVParams::new(r.a, r.v0, r.beta, r.l, r.m)
    }
}

impl From<OVParams> for RawParams {
    fn from(p: OVParams) -> Self {
        RawParams {
            a: p.a,
            v0: p.v0,
            beta: p.beta,
            l: p.l,
            m: p.m,
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and positive",
        })
    }
}

impl OVParams {
    pub fn new(a: f64, v0: f64, beta: f64, l: f64, m: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::InvalidParameter {
                name: "m",
                value: m,
                reason: "must be finite",
            });
        }
        Ok(Self {
            a: positive("a", a)?,
            v0: positive("v0", v0)?,
            beta: positive("beta", beta)?,
            l: positive("l", l)?,
            m,
        })
    }

    /// Parameter set used for the traffic experiments: `a = 1.6`, `V0 = 0.0336`,
    /// `β = 2/0.0223`, `l = 0.025`, `M = 0.913`.
    pub fn reference() -> Self {
        Self::new(1.6, 0.0336, 2.0 / 0.0223, 0.025, 0.913).expect("reference parameters are valid")
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.a, self.v0, beta, self.l, self.m)
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn v0(&self) -> f64 {
        self.v0
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn l(&self) -> f64 {
        self.l
    }
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Lower asymptote `V1 = V0 (M - 1)/2` of the velocity function.
    pub fn v1(&self) -> f64 {
        self.v0 * (self.m - 1.0) / 2.0
    }

    /// `(tanh s, sech² s)` for `s = β(x - l)`, accurate in the far tails.
    fn tanh_sech2(&self, x: f64) -> (f64, f64) {
        let s = self.beta * (x - self.l);
        let e = (-2.0 * s.abs()).exp();
        let th = (1.0 - e) / (1.0 + e);
        let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
        (th.copysign(s), sech2)
    }

    /// `V(x) = V0/2 (tanh(β(x - l)) + M)`.
    pub fn ov_value(&self, x: f64) -> f64 {
        let (th, _) = self.tanh_sech2(x);
        0.5 * self.v0 * (th + self.m)
    }

    /// `V0 H(x - l) + V1` with `H(0) = 1`.
    pub fn ov_step_limit(&self, x: f64) -> f64 {
        if x >= self.l {
            self.v0 + self.v1()
        } else {
            self.v1()
        }
    }

    /// Analytic first or second derivative of [`Self::ov_value`].
    pub fn ov_deriv(&self, x: f64, order: u32) -> Result<f64> {
        let (th, sech2) = self.tanh_sech2(x);
        match order {
            1 => Ok(0.5 * self.v0 * self.beta * sech2),
            2 => Ok(-self.v0 * self.beta * self.beta * sech2 * th),
            other => Err(Error::UnsupportedOrder(other)),
        }
    }

    /// `V'(x)`, infallible shortcut used in Jacobian assembly.
    pub fn ov_slope(&self, x: f64) -> f64 {
        let (_, sech2) = self.tanh_sech2(x);
        0.5 * self.v0 * self.beta * sech2
    }

    pub fn eval(&self, kind: OvKind, x: f64) -> f64 {
        match kind {
            OvKind::Tanh => self.ov_value(x),
            OvKind::Step => self.ov_step_limit(x),
        }
    }

    /// Slope of the chosen velocity function; the step has zero slope away from `l`.
    pub fn slope(&self, kind: OvKind, x: f64) -> f64 {
        match kind {
            OvKind::Tanh => self.ov_slope(x),
            OvKind::Step => 0.0,
        }
    }

    /// Envelope constant `C0` for the tanh family.
    ///
    /// With `s = β|x - l|` the three gaps are bounded by `V0 e^{-2s}`, `2 V0 β e^{-2s}`
    /// and `4 V0 β² e^{-2s}`, so `C0 = 4 V0` covers all of them with `α = 2`.
    pub fn envelope_c0(&self) -> f64 {
        4.0 * self.v0
    }

    /// Signed gap `V(x) - (V0 H(x - l) + V1)`, computed without cancellation.
    pub fn step_gap(&self, x: f64) -> f64 {
        let s = self.beta * (x - self.l);
        let e = (-2.0 * s.abs()).exp();
        let g = self.v0 * e / (1.0 + e);
        if s >= 0.0 {
            -g
        } else {
            g
        }
    }

    /// Checks the exponential envelope around the step limit at every `x`.
    pub fn a1_envelope_report(&self, xs: &[f64]) -> Result<Vec<EnvelopeCheck>> {
        if xs.is_empty() {
            return Err(Error::Construction("envelope report needs at least one point".into()));
        }
        let c0 = self.envelope_c0();
        let b = self.beta;
        Ok(xs
            .iter()
            .map(|&x| {
                let env = (-ENVELOPE_ALPHA * b * (x - self.l).abs()).exp();
                let gap = self.step_gap(x).abs();
                let d1 = self.ov_slope(x).abs();
                let d2 = self.ov_deriv(x, 2).map(f64::abs).unwrap_or(f64::INFINITY);
                EnvelopeCheck {
                    x,
                    value_ok: gap <= c0 * env,
                    d1_ok: d1 <= c0 * b * env,
                    d2_ok: d2 <= c0 * b * b * env,
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeCheck {
    pub x: f64,
    pub value_ok: bool,
    pub d1_ok: bool,
    pub d2_ok: bool,
}

impl EnvelopeCheck {
    pub fn all(&self) -> bool {
        self.value_ok && self.d1_ok && self.d2_ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> OVParams {
        OVParams::reference()
    }

    #[test]
    fn value_at_inflection_and_limits() {
        let p = p();
        assert!((p.ov_value(p.l()) - p.v0() * p.m() / 2.0).abs() < 1e-18);
        assert!((p.ov_value(1e3) - p.v0() * (p.m() + 1.0) / 2.0).abs() < 1e-18);
        assert!((p.ov_value(-1e3) - p.v0() * (p.m() - 1.0) / 2.0).abs() < 1e-18);
    }

    #[test]
    fn value_matches_high_precision_reference() {
        // 40-digit evaluation of V0/2 (tanh(β(0.03 - l)) + M) at the reference parameters.
        let expected = 0.022_404_614_651_867_233_868_273_798_767_33;
        assert!((p().ov_value(0.03) - expected).abs() < 1e-14);
        let direct = 0.5 * 0.0336 * ((2.0 / 0.0223 * (0.03 - 0.025f64)).tanh() + 0.913);
        assert!((p().ov_value(0.03) - direct).abs() < 1e-15);
    }

    #[test]
    fn step_limit_uses_right_continuous_heaviside() {
        let p = p();
        assert_eq!(p.ov_step_limit(p.l()), p.v0() + p.v1());
        assert_eq!(p.ov_step_limit(p.l() - 1e-12), p.v1());
        assert_eq!(p.ov_step_limit(p.l() + 5.0), p.v0() + p.v1());
        assert!((p.v1() - 0.0336 * (0.913 - 1.0) / 2.0).abs() < 1e-18);
    }

    #[test]
    fn derivatives_at_inflection() {
        let p = p();
        assert!((p.ov_deriv(p.l(), 1).unwrap() - p.v0() * p.beta() / 2.0).abs() < 1e-14);
        assert_eq!(p.ov_deriv(p.l(), 2).unwrap(), 0.0);
        assert!(matches!(p.ov_deriv(p.l(), 3), Err(Error::UnsupportedOrder(3))));
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(OVParams::new(0.0, 0.0336, 10.0, 0.025, 0.9).is_err());
        assert!(OVParams::new(1.6, -1.0, 10.0, 0.025, 0.9).is_err());
        assert!(OVParams::new(1.6, 0.0336, 0.0, 0.025, 0.9).is_err());
        assert!(OVParams::new(1.6, 0.0336, 10.0, 0.0, 0.9).is_err());
        assert!(OVParams::new(1.6, 0.0336, 10.0, 0.025, f64::NAN).is_err());
        assert!(OVParams::new(1.6, 0.0336, 10.0, 0.025, -3.0).is_ok());
    }

    #[test]
    fn deserializes_from_model_section() {
        let p: OVParams = toml::from_str("a = 1.6\nv0 = 0.0336\nbeta = 500.0\nl = 0.025\nm = 0.913\n").unwrap();
        assert_eq!(p.beta(), 500.0);
        let bad: std::result::Result<OVParams, _> = toml::from_str("a = -1.0\nv0 = 0.0336\nbeta = 500.0\nl = 0.025\nm = 0.913\n");
        assert!(bad.is_err());
    }

    #[test]
    fn envelope_holds_on_grid_at_beta_500() {
        let p = p().with_beta(500.0).unwrap();
        let xs: Vec<f64> = (0..=400).map(|i| p.l() - 0.1 + 0.2 * i as f64 / 400.0).collect();
        let report = p.a1_envelope_report(&xs).unwrap();
        assert!(report.iter().all(EnvelopeCheck::all));
        let at_l = p.a1_envelope_report(&[p.l()]).unwrap();
        assert!(at_l[0].all());
        assert!(p.a1_envelope_report(&[]).is_err());
    }

    #[test]
    fn tanh_tail_bound_oracle() {
        // |tanh(s) - sgn(s)| <= 2 e^{-2|s|}, evaluated directly with std tanh.
        for i in 1..200 {
            let s = i as f64 * 0.1;
            assert!((1.0 - s.tanh()).abs() <= 2.0 * (-2.0 * s).exp() + f64::EPSILON);
        }
    }

    #[test]
    fn doubling_beta_shrinks_gap_by_exponential_factor() {
        let p = p().with_beta(200.0).unwrap();
        let q = p.with_beta(400.0).unwrap();
        for &x in &[0.02, 0.024, 0.026, 0.03, 0.035] {
            let s = p.beta() * (x - p.l()).abs();
            let ratio = q.step_gap(x).abs() / p.step_gap(x).abs();
            let factor = (-2.0 * s).exp();
            assert!(ratio >= factor * (1.0 - 1e-12) && ratio <= 2.0 * factor, "x={x} ratio={ratio} factor={factor}");
        }
    }

    #[test]
    fn limit_consistency_over_beta_ladder() {
        let base = p();
        for &x in &[0.015, 0.02, 0.03, 0.04] {
            let mut prev = f64::INFINITY;
            for k in 0..8 {
                let q = base.with_beta(50.0 * 2f64.powi(k)).unwrap();
                let gap = (q.ov_value(x) - q.ov_step_limit(x)).abs();
                assert!(gap <= prev);
                prev = gap;
            }
            assert!(prev < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn strictly_increasing(x in 0.0f64..0.05, dx in 1e-6f64..1e-2) {
            let p = p();
            prop_assert!(p.ov_value(x + dx) > p.ov_value(x));
            prop_assert!(p.ov_slope(x) > 0.0);
        }

        #[test]
        fn derivatives_match_finite_differences(x in 0.0f64..0.05) {
            let p = p();
            let h = 1e-7;
            let fd1 = (p.ov_value(x + h) - p.ov_value(x - h)) / (2.0 * h);
            let d1 = p.ov_deriv(x, 1).unwrap();
            prop_assert!((fd1 - d1).abs() <= 1e-6 * d1.abs().max(1e-6));
            let hd = 1e-6;
            let fd2 = (p.ov_slope(x + hd) - p.ov_slope(x - hd)) / (2.0 * hd);
            let d2 = p.ov_deriv(x, 2).unwrap();
            prop_assert!((fd2 - d2).abs() <= 1e-6 * d2.abs().max(1e-3));
        }
    }
}
