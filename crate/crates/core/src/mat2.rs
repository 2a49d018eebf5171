//! Plain 2×2 complex matrices.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// A 2×2 complex matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct M2 {
    pub m: [[C64; 2]; 2],
}

impl M2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        M2 { m: [[a, b], [c, d]] }
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        M2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub const fn zero() -> Self {
        M2::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        M2::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(a: C64, d: C64) -> Self {
        M2::new(a, ZERO, ZERO, d)
    }

    pub fn off_diag(b: C64, c: C64) -> Self {
        M2::new(ZERO, b, c, ZERO)
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        M2::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn conj(&self) -> Self {
        M2::new(
            self.m[0][0].conj(),
            self.m[0][1].conj(),
            self.m[1][0].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        let inv = det.inv();
        Some(M2::new(
            self.m[1][1] * inv,
            -self.m[0][1] * inv,
            -self.m[1][0] * inv,
            self.m[0][0] * inv,
        ))
    }

    pub fn scale(&self, s: C64) -> Self {
        M2::new(
            self.m[0][0] * s,
            self.m[0][1] * s,
            self.m[1][0] * s,
            self.m[1][1] * s,
        )
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.entries().map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn entries(&self) -> impl Iterator<Item = C64> + '_ {
        self.m.iter().flat_map(|r| r.iter().copied())
    }

    pub fn is_finite(&self) -> bool {
        self.entries().all(|e| e.is_finite())
    }

    /// Max modulus of `self - self^*`.
    pub fn hermitian_defect(&self) -> f64 {
        (*self - self.adjoint()).max_norm()
    }

    /// Projects onto the Hermitian part `(M + M^*)/2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale_re(0.5)
    }
}

impl Add for M2 {
    type Output = M2;
    fn add(self, o: M2) -> M2 {
        M2::new(
            self.m[0][0] + o.m[0][0],
            self.m[0][1] + o.m[0][1],
            self.m[1][0] + o.m[1][0],
            self.m[1][1] + o.m[1][1],
        )
    }
}

impl AddAssign for M2 {
    fn add_assign(&mut self, o: M2) {
        *self = *self + o;
    }
}

impl Sub for M2 {
    type Output = M2;
    fn sub(self, o: M2) -> M2 {
        M2::new(
            self.m[0][0] - o.m[0][0],
            self.m[0][1] - o.m[0][1],
            self.m[1][0] - o.m[1][0],
            self.m[1][1] - o.m[1][1],
        )
    }
}

impl Neg for M2 {
    type Output = M2;
    fn neg(self) -> M2 {
        self.scale_re(-1.0)
    }
}

impl Mul for M2 {
    type Output = M2;
    fn mul(self, o: M2) -> M2 {
        let a = &self.m;
        let b = &o.m;
        M2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<C64> for M2 {
    type Output = M2;
    fn mul(self, s: C64) -> M2 {
        self.scale(s)
    }
}

impl Mul<M2> for C64 {
    type Output = M2;
    fn mul(self, m: M2) -> M2 {
        m.scale(self)
    }
}

impl Mul<f64> for M2 {
    type Output = M2;
    fn mul(self, s: f64) -> M2 {
        self.scale_re(s)
    }
}

impl Mul<M2> for f64 {
    type Output = M2;
    fn mul(self, m: M2) -> M2 {
        m.scale_re(self)
    }
}
