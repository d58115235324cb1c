//! Evaluable headway profiles `t ↦ u(t)`.

use serde::{Deserialize, Serialize};

use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    HeteroclinicInc,
    HeteroclinicDec,
    Homoclinic,
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileMeta {
    pub kind: ProfileKind,
    /// `Some(N)` for periodic profiles.
    pub period: Option<f64>,
    /// Phases where the profile crosses `l` (transition layer centres).
    pub layers: Vec<f64>,
}

/// A headway profile with value, first and second derivative at every phase.
pub trait Profile: Send + Sync {
    fn jet(&self, t: f64) -> Jet;

    fn meta(&self) -> ProfileMeta;

    fn value(&self, t: f64) -> f64 {
        self.jet(t).v
    }

    fn period(&self) -> Option<f64> {
        self.meta().period
    }
}

/// Constant headway `u ≡ h`.
#[derive(Debug, Clone, Copy)]
pub struct Uniform(pub f64);

impl Profile for Uniform {
    fn jet(&self, _t: f64) -> Jet {
        Jet::constant(self.0)
    }
    fn meta(&self) -> ProfileMeta {
        ProfileMeta {
            kind: ProfileKind::Periodic,
            period: Some(1.0),
            layers: Vec::new(),
        }
    }
}

/// Trigonometric interpolant of equispaced samples `u_j = u(j N / n)` on one period.
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    period: f64,
    mean: f64,
    /// `(k, a_k, b_k)` with `u(t) = mean + Σ a_k cos(kωt) + b_k sin(kωt)`.
    modes: Vec<(f64, f64, f64)>,
    layers: Vec<f64>,
}

impl TrigInterpolant {
    pub fn new(period: f64, samples: &[f64]) -> Self {
        let n = samples.len();
        let spec = crate::spectral::fft::forward(samples);
        let w = 2.0 * std::f64::consts::PI / period;
        let mut modes = Vec::with_capacity(n / 2);
        for m in 1..=n / 2 {
            let c = spec[m];
            // Nyquist coefficient carries half weight on each side.
            let f = if 2 * m == n { 1.0 } else { 2.0 };
            let ak = f * c.re;
            let bk = if 2 * m == n { 0.0 } else { -f * c.im };
            if ak != 0.0 || bk != 0.0 {
                modes.push((w * m as f64, ak, bk));
            }
        }
        Self {
            period,
            mean: spec[0].re,
            modes,
            layers: Vec::new(),
        }
    }

    pub fn with_layers(mut self, layers: Vec<f64>) -> Self {
        self.layers = layers;
        self
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }
}

impl Profile for TrigInterpolant {
    fn jet(&self, t: f64) -> Jet {
        let (mut v, mut d1, mut d2) = (self.mean, 0.0, 0.0);
        for &(k, a, b) in &self.modes {
            let (s, c) = (k * t).sin_cos();
            let f = a * c + b * s;
            v += f;
            d1 += k * (b * c - a * s);
            d2 -= k * k * f;
        }
        Jet::new(v, d1, d2)
    }

    fn meta(&self) -> ProfileMeta {
        ProfileMeta {
            kind: ProfileKind::Periodic,
            period: Some(self.period),
            layers: self.layers.clone(),
        }
    }
}
