//! Third-order jets of holomorphic functions.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::mat2::{C64, ONE, ZERO};

/// Value and first three complex derivatives of a holomorphic function at `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub z: C64,
    pub d: [C64; 4],
}

impl Jet {
    pub fn constant(z: C64, c: C64) -> Self {
        Jet {
            z,
            d: [c, ZERO, ZERO, ZERO],
        }
    }

    /// The identity function `z ↦ z`.
    pub fn variable(z: C64) -> Self {
        Jet {
            z,
            d: [z, ONE, ZERO, ZERO],
        }
    }

    pub fn d0(&self) -> C64 {
        self.d[0]
    }
    pub fn d1(&self) -> C64 {
        self.d[1]
    }
    pub fn d2(&self) -> C64 {
        self.d[2]
    }
    pub fn d3(&self) -> C64 {
        self.d[3]
    }

    /// Composes an outer function with derivatives `phi = [φ, φ', φ'', φ''']`
    /// evaluated at `self.d0()` (Faà di Bruno to third order).
    pub fn compose(&self, phi: [C64; 4]) -> Jet {
        let [_, g1, g2, g3] = self.d;
        Jet {
            z: self.z,
            d: [
                phi[0],
                phi[1] * g1,
                phi[2] * g1 * g1 + phi[1] * g2,
                phi[3] * g1 * g1 * g1 + 3.0 * phi[2] * g1 * g2 + phi[1] * g3,
            ],
        }
    }

    pub fn exp(&self) -> Jet {
        let e = self.d[0].exp();
        self.compose([e; 4])
    }

    /// Multiplicative inverse; fails at a zero of the function.
    pub fn recip(&self) -> Result<Jet> {
        let v = self.d[0];
        if v.norm() < f64::MIN_POSITIVE || !v.is_finite() {
            return Err(Error::eval(self.z, "division by zero (pole)"));
        }
        let r = v.inv();
        let r2 = r * r;
        Ok(self.compose([r, -r2, 2.0 * r2 * r, -6.0 * r2 * r2]))
    }

    /// `(α'/α)' - ½(α'/α)²` written as `α''/α - (3/2)(α'/α)²`.
    pub fn schwarzian(&self) -> Result<C64> {
        if self.d[0] == ZERO {
            return Err(Error::eval(self.z, "Schwarzian of a function vanishing at z"));
        }
        let q1 = self.d[1] / self.d[0];
        let q2 = self.d[2] / self.d[0];
        Ok(q2 - 1.5 * q1 * q1)
    }
}

/// Free-function form of [`Jet::schwarzian`].
pub fn schwarzian(j: &Jet) -> Result<C64> {
    j.schwarzian()
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            z: self.z,
            d: [
                self.d[0] + o.d[0],
                self.d[1] + o.d[1],
                self.d[2] + o.d[2],
                self.d[3] + o.d[3],
            ],
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            z: self.z,
            d: self.d.map(|c| -c),
        }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let [a0, a1, a2, a3] = self.d;
        let [b0, b1, b2, b3] = o.d;
        Jet {
            z: self.z,
            d: [
                a0 * b0,
                a1 * b0 + a0 * b1,
                a2 * b0 + 2.0 * a1 * b1 + a0 * b2,
                a3 * b0 + 3.0 * a2 * b1 + 3.0 * a1 * b2 + a0 * b3,
            ],
        }
    }
}

impl Mul<C64> for Jet {
    type Output = Jet;
    fn mul(self, c: C64) -> Jet {
        Jet {
            z: self.z,
            d: self.d.map(|x| x * c),
        }
    }
}

impl Div for Jet {
    type Output = Result<Jet>;
    fn div(self, o: Jet) -> Result<Jet> {
        Ok(self * o.recip()?)
    }
}
