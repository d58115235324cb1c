//! Thin wrappers over `rustfft` with normalized forward coefficients.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward transform `U_k = (1/n) Σ u_j e^{-2πi jk/n}`.
pub fn forward(u: &[f64]) -> Vec<Complex64> {
    Plans::new(u.len()).forward(u)
}

/// Forward and inverse plans for one transform length.
#[derive(Clone)]
pub struct Plans {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Plans {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Plans").field("n", &self.n).finish()
    }
}

impl Plans {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, u: &[f64]) -> Vec<Complex64> {
        assert_eq!(u.len(), self.n);
        let mut buf: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|z| *z *= s);
        buf
    }

    /// Inverse of [`Self::forward`], keeping the real part.
    pub fn inverse_real(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        assert_eq!(spec.len(), self.n);
        self.inv.process(&mut spec);
        spec.into_iter().map(|z| z.re).collect()
    }
}
