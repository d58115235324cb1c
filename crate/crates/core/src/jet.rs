//! Second-order forward-mode differentiation.
//!
//! A [`Jet`] carries a value together with its first and second derivative with
//! respect to a single scalar variable. Closed-form profiles are written once in
//! terms of jets, so `u`, `u'` and `u''` always come from the same expression.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn new(v: f64, d1: f64, d2: f64) -> Self {
        Self { v, d1, d2 }
    }

    pub const fn constant(v: f64) -> Self {
        Self::new(v, 0.0, 0.0)
    }

    /// The independent variable itself.
    pub const fn var(t: f64) -> Self {
        Self::new(t, 1.0, 0.0)
    }

    /// Chain rule for a scalar function with known `f`, `f'`, `f''` at `self.v`.
    pub fn compose(self, f: f64, fp: f64, fpp: f64) -> Self {
        Self::new(f, fp * self.d1, fpp * self.d1 * self.d1 + fp * self.d2)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.compose(e, e, e)
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(k * self.v, k * self.d1, k * self.d2)
    }

    /// Derivative of the given order (0, 1 or 2).
    pub fn order(&self, order: u32) -> f64 {
        match order {
            0 => self.v,
            1 => self.d1,
            _ => self.d2,
        }
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        )
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let inv = o.v.recip();
        let r = self.v * inv;
        let d1 = (self.d1 - r * o.d1) * inv;
        let d2 = (self.d2 - 2.0 * d1 * o.d1 - r * o.d2) * inv;
        Jet::new(r, d1, d2)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d1, -self.d2)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, k: f64) -> Jet {
        Jet::new(self.v + k, self.d1, self.d2)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, k: f64) -> Jet {
        Jet::new(self.v - k, self.d1, self.d2)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, k: f64) -> Jet {
        self.scale(k)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, j: Jet) -> Jet {
        j + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, j: Jet) -> Jet {
        -j + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        j.scale(self)
    }
}
