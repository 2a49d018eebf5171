//! The flat front `f = AA*`, its dual `g = A e3 A*`, their closed-form
//! derivatives, the identifier `λ` and the singular and null directions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::data::{AlphaBeta, WeierstrassData};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::lorentz::{inner_m, HermVector, Tag, E3};
use crate::mat2::{C64, I, M2};

/// Which of the two dual surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Surface {
    /// `f` in hyperbolic space.
    H,
    /// `g` in de Sitter space.
    S,
}

impl Surface {
    pub fn dual(self) -> Surface {
        match self {
            Surface::H => Surface::S,
            Surface::S => Surface::H,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Surface::H => "h",
            Surface::S => "d",
        }
    }
}

/// `A^{(n)} = A L_n` for `n ≤ 3`.
fn ell(ab: &AlphaBeta) -> [M2; 4] {
    let [a, a1, a2, _] = ab.alpha.d;
    let [b, b1, b2, _] = ab.beta.d;
    [
        M2::identity(),
        M2::off_diag(a, b),
        M2::new(a * b, a1, b1, a * b),
        M2::new(
            a1 * b + 2.0 * a * b1,
            a2 + a * a * b,
            b2 + a * b * b,
            2.0 * a1 * b + a * b1,
        ),
    ]
}

/// Point and mixed partials `∂_z^j ∂_z̄^k` (`j + k ≤ 3`) of `f` or `g` at one point.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceJet {
    pub z: C64,
    pub which: Surface,
    pub p: HermVector,
    pub p_inv: M2,
    d: [[M2; 4]; 4],
}

impl SurfaceJet {
    /// `∂_z^j ∂_z̄^k` of the surface.
    pub fn m(&self, j: usize, k: usize) -> M2 {
        assert!(j + k <= 3, "partials are available up to total order 3");
        self.d[j][k]
    }

    pub fn vec(&self, j: usize, k: usize) -> HermVector {
        HermVector::complex(self.m(j, k))
    }

    pub fn fu(&self) -> M2 {
        self.d[1][0] + self.d[0][1]
    }

    pub fn fv(&self) -> M2 {
        (self.d[1][0] - self.d[0][1]).scale(I)
    }

    /// `ζ k = ζ k' + ζ̄ k_z̄`.
    pub fn dir(&self, zeta: C64) -> M2 {
        self.d[1][0].scale(zeta) + self.d[0][1].scale(zeta.conj())
    }

    /// `η(η k)` for a field `η` with holomorphic derivative `η'` (`η_z̄ = 0`).
    pub fn dir2(&self, eta: C64, eta_z: C64) -> M2 {
        let ec = eta.conj();
        self.d[2][0].scale(eta * eta)
            + self.d[1][1].scale_re(2.0 * eta.norm_sqr())
            + self.d[0][2].scale(ec * ec)
            + self.d[1][0].scale(eta * eta_z)
            + self.d[0][1].scale(ec * eta_z.conj())
    }

    /// Tangential part at the surface point.
    pub fn tangential(&self, v: M2) -> M2 {
        let p = self.p.m;
        match self.which {
            Surface::H => v + p.scale(inner_m(&v, &p)),
            Surface::S => v - p.scale(inner_m(&v, &p)),
        }
    }
}

/// Assembles `f` or `g` and its partials from a frame.
pub fn surface_jet(frame: &Frame, data: &WeierstrassData, which: Surface) -> Result<SurfaceJet> {
    let ab = data.jets(frame.z)?;
    jet_from_parts(frame.z, &frame.a, &ab, which)
}

/// Both surfaces at once.
pub fn surface_jets(frame: &Frame, data: &WeierstrassData) -> Result<(SurfaceJet, SurfaceJet)> {
    let ab = data.jets(frame.z)?;
    Ok((
        jet_from_parts(frame.z, &frame.a, &ab, Surface::H)?,
        jet_from_parts(frame.z, &frame.a, &ab, Surface::S)?,
    ))
}

pub(crate) fn jet_from_parts(z: C64, a: &M2, ab: &AlphaBeta, which: Surface) -> Result<SurfaceJet> {
    let l = ell(ab);
    let ast = a.adjoint();
    let mut d = [[M2::zero(); 4]; 4];
    for j in 0..4 {
        for k in 0..4 - j {
            let mid = match which {
                Surface::H => l[j] * l[k].adjoint(),
                Surface::S => l[j] * E3 * l[k].adjoint(),
            };
            d[j][k] = *a * mid * ast;
        }
    }
    let pm = d[0][0].hermitian_part();
    let p = match which {
        Surface::H => HermVector::point_h3(pm)?,
        Surface::S => HermVector::point_s31(pm)?,
    };
    let p_inv = pm.inverse().ok_or(Error::SingularPoint { det: pm.det() })?;
    d[0][0] = pm;
    Ok(SurfaceJet {
        z,
        which,
        p,
        p_inv,
        d,
    })
}

/// `λ = |α|² - |β|²` with `λ' = α'ᾱ - β'β̄` and `λ_z̄ = conj(λ')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaJet {
    pub z: C64,
    pub lambda: f64,
    pub lambda_z: C64,
    pub lambda_zbar: C64,
}

impl LambdaJet {
    pub fn from_jets(z: C64, ab: &AlphaBeta) -> Self {
        let (a, b) = (ab.alpha.d0(), ab.beta.d0());
        let lz = ab.alpha.d1() * a.conj() - ab.beta.d1() * b.conj();
        LambdaJet {
            z,
            lambda: a.norm_sqr() - b.norm_sqr(),
            lambda_z: lz,
            lambda_zbar: lz.conj(),
        }
    }

    /// Real gradient `(λ_u, λ_v) = (2 Re λ', -2 Im λ')`.
    pub fn gradient(&self) -> (f64, f64) {
        (2.0 * self.lambda_z.re, -2.0 * self.lambda_z.im)
    }

    /// `dλ(ζ) = 2 Re(λ' ζ)`.
    pub fn directional(&self, zeta: C64) -> f64 {
        2.0 * (self.lambda_z * zeta).re
    }
}

pub fn lambda_jet(data: &WeierstrassData, z: C64) -> Result<LambdaJet> {
    Ok(LambdaJet::from_jets(z, &data.jets(z)?))
}

/// Largest phase change of `√(αβ)` accepted between consecutive samples.
/// Above this the choice between the two roots becomes unreliable.
pub const MAX_BRANCH_JUMP: f64 = 0.45 * PI;

/// A choice of `√(αβ)`, stored with its continuously tracked argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub sqrt_ab: C64,
    pub phase: f64,
}

impl Branch {
    pub fn principal(ab: C64) -> Self {
        let phase = 0.5 * ab.arg();
        Branch {
            sqrt_ab: C64::from_polar(ab.norm().sqrt(), phase),
            phase,
        }
    }

    /// The root of `ab` whose argument is closest to `prev`.
    pub fn track(ab: C64, prev: f64, z: C64) -> Result<Self> {
        let base = 0.5 * ab.arg();
        let k = ((prev - base) / PI).round();
        let phase = base + k * PI;
        let jump = (phase - prev).abs();
        if jump > MAX_BRANCH_JUMP {
            return Err(Error::BranchJump { z, jump });
        }
        Ok(Branch {
            sqrt_ab: C64::from_polar(ab.norm().sqrt(), phase),
            phase,
        })
    }

    /// The other root.
    pub fn flipped(&self) -> Self {
        Branch {
            sqrt_ab: -self.sqrt_ab,
            phase: self.phase + PI,
        }
    }

    pub fn eta_d(&self) -> C64 {
        self.sqrt_ab.inv()
    }

    pub fn eta_h(&self) -> C64 {
        I * self.eta_d()
    }

    /// Null direction of `f` (H) or `g` (S).
    pub fn eta(&self, which: Surface) -> C64 {
        match which {
            Surface::H => self.eta_h(),
            Surface::S => self.eta_d(),
        }
    }
}

/// Singular direction and null directions at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub z: C64,
    /// `ξ = -i λ_z̄`.
    pub xi: C64,
    pub eta_h: C64,
    pub eta_d: C64,
    pub branch: Branch,
}

impl FieldSample {
    pub fn branch_phase(&self) -> f64 {
        self.branch.phase
    }

    pub fn eta(&self, which: Surface) -> C64 {
        match which {
            Surface::H => self.eta_h,
            Surface::S => self.eta_d,
        }
    }

    pub fn from_parts(lj: &LambdaJet, ab: C64, prev: Option<&FieldSample>) -> Result<Self> {
        if ab.norm() == 0.0 || !ab.is_finite() {
            return Err(Error::eval(lj.z, "alpha*beta vanishes"));
        }
        let branch = match prev {
            None => Branch::principal(ab),
            Some(p) => Branch::track(ab, p.branch.phase, lj.z)?,
        };
        Ok(FieldSample {
            z: lj.z,
            xi: -I * lj.lambda_zbar,
            eta_h: branch.eta_h(),
            eta_d: branch.eta_d(),
            branch,
        })
    }
}

pub fn field_sample(
    data: &WeierstrassData,
    z: C64,
    prev: Option<&FieldSample>,
) -> Result<FieldSample> {
    let ab = data.jets(z)?;
    FieldSample::from_parts(&LambdaJet::from_jets(z, &ab), ab.ab(), prev)
}

/// `η'` for `η = c/√(αβ)`: `-½ η (α'/α + β'/β)`.
pub fn eta_derivative(ab: &AlphaBeta, eta: C64) -> C64 {
    -0.5 * eta * (ab.alpha.d1() / ab.alpha.d0() + ab.beta.d1() / ab.beta.d0())
}

/// Tags a matrix as a real tangent if it is Hermitian.
pub fn tangent(m: M2) -> HermVector {
    HermVector {
        m,
        tag: Tag::ComplexTangent,
    }
    .as_tangent()
}
