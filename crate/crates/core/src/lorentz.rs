//! Lorentz–Minkowski 4-space in the Hermitian-matrix model.
//!
//! A real 4-vector `x = (x0, x1, x2, x3)` is identified with the Hermitian
//! matrix `x0 e0 + x1 e1 + x2 e2 + x3 e3`. The metric has signature
//! `(-+++)`, and on Hermitian matrices `<X, X> = -det X`. Hyperbolic space is
//! `{det X = 1, trace X > 0}` and de Sitter space is `{det X = -1}`.
//!
//! Inner and cross products are extended complex-bilinearly to arbitrary
//! complex 2×2 matrices so that identities between holomorphic derivatives
//! such as `f' × f''` can be checked as written.

use crate::error::{Error, Result};
use crate::mat2::{C64, I, M2, ONE, ZERO};

/// Tolerance for treating a matrix as Hermitian (relative to its size).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance for `det = ±1` point membership.
pub const POINT_TOL: f64 = 1e-9;

pub const E0: M2 = M2::new(ONE, ZERO, ZERO, ONE);
pub const E1: M2 = M2::new(ZERO, ONE, ONE, ZERO);
pub const E2: M2 = M2::new(ZERO, I, C64::new(0.0, -1.0), ZERO);
pub const E3: M2 = M2::new(ONE, ZERO, ZERO, C64::new(-1.0, 0.0));

pub fn basis(k: usize) -> M2 {
    [E0, E1, E2, E3][k]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    PointH3,
    PointS31,
    RealTangent,
    ComplexTangent,
}

impl Tag {
    pub fn name(self) -> &'static str {
        match self {
            Tag::PointH3 => "point of H^3",
            Tag::PointS31 => "point of S^3_1",
            Tag::RealTangent => "real tangent",
            Tag::ComplexTangent => "complex tangent",
        }
    }

    pub fn is_point(self) -> bool {
        matches!(self, Tag::PointH3 | Tag::PointS31)
    }
}

/// A point or (possibly complexified) tangent vector of R^4_1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermVector {
    pub m: M2,
    pub tag: Tag,
}

fn hermitian_scale(m: &M2) -> f64 {
    m.max_norm().max(1.0)
}

fn check_hermitian(m: &M2) -> Result<()> {
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL * hermitian_scale(m) {
        return Err(Error::NonHermitian {
            max_asymmetry: defect,
        });
    }
    Ok(())
}

impl HermVector {
    pub fn complex(m: M2) -> Self {
        HermVector {
            m,
            tag: Tag::ComplexTangent,
        }
    }

    pub fn real_tangent(m: M2) -> Result<Self> {
        check_hermitian(&m)?;
        Ok(HermVector {
            m,
            tag: Tag::RealTangent,
        })
    }

    pub fn point_h3(m: M2) -> Result<Self> {
        check_hermitian(&m)?;
        let det = m.det().re;
        let residual = (det - 1.0).abs();
        if residual > POINT_TOL * hermitian_scale(&m) || m.trace().re <= 0.0 {
            return Err(Error::NotOnSpace {
                what: "matrix",
                space: "H^3",
                residual,
            });
        }
        Ok(HermVector {
            m,
            tag: Tag::PointH3,
        })
    }

    pub fn point_s31(m: M2) -> Result<Self> {
        check_hermitian(&m)?;
        let residual = (m.det().re + 1.0).abs();
        if residual > POINT_TOL * hermitian_scale(&m) {
            return Err(Error::NotOnSpace {
                what: "matrix",
                space: "S^3_1",
                residual,
            });
        }
        Ok(HermVector {
            m,
            tag: Tag::PointS31,
        })
    }

    pub fn zero() -> Self {
        HermVector {
            m: M2::zero(),
            tag: Tag::RealTangent,
        }
    }

    /// Same matrix, retagged as a real tangent if Hermitian, else complex.
    pub fn as_tangent(&self) -> Self {
        let tag = if self.m.hermitian_defect() <= HERMITIAN_TOL * hermitian_scale(&self.m) {
            Tag::RealTangent
        } else {
            Tag::ComplexTangent
        };
        HermVector { m: self.m, tag }
    }
}

/// `ι(x) = Σ x_k e_k`.
pub fn vec_herm(x: [f64; 4]) -> HermVector {
    let [x0, x1, x2, x3] = x;
    HermVector {
        m: M2::new(
            C64::new(x0 + x3, 0.0),
            C64::new(x1, x2),
            C64::new(x1, -x2),
            C64::new(x0 - x3, 0.0),
        ),
        tag: Tag::RealTangent,
    }
}

/// Inverse of [`vec_herm`]; rejects non-Hermitian input.
pub fn herm_vec(x: &HermVector) -> Result<[f64; 4]> {
    check_hermitian(&x.m)?;
    Ok(coords(&x.m))
}

/// Coordinates of the Hermitian part of `m` (no check).
pub fn coords(m: &M2) -> [f64; 4] {
    let m = &m.m;
    [
        0.5 * (m[0][0].re + m[1][1].re),
        0.5 * (m[0][1].re + m[1][0].re),
        0.5 * (m[0][1].im - m[1][0].im),
        0.5 * (m[0][0].re - m[1][1].re),
    ]
}

/// `<X, Y> = -1/2 trace(X e2 Y^T e2)` on raw matrices, the complex-bilinear
/// polarization of `-det`.
pub fn inner_m(x: &M2, y: &M2) -> C64 {
    // e2 Y^T e2 = [[y11, -y01], [-y10, y00]]
    let y = &y.m;
    let w = M2::new(y[1][1], -y[0][1], -y[1][0], y[0][0]);
    let p = *x * w;
    -0.5 * p.trace()
}

pub fn inner(x: &HermVector, y: &HermVector) -> C64 {
    inner_m(&x.m, &y.m)
}

/// `(i/2)(X p^{-1} Y - Y p^{-1} X)` with a precomputed `p^{-1}`.
pub fn cross_m(p_inv: &M2, x: &M2, y: &M2) -> M2 {
    (*x * *p_inv * *y - *y * *p_inv * *x).scale(C64::new(0.0, 0.5))
}

fn point_inverse(p: &HermVector) -> Result<M2> {
    if !p.tag.is_point() {
        return Err(Error::WrongTag {
            expected: "point",
            found: p.tag.name(),
        });
    }
    p.m.inverse().ok_or(Error::SingularPoint { det: p.m.det() })
}

/// Exterior product in the tangent space at `p`.
pub fn cross(p: &HermVector, x: &HermVector, y: &HermVector) -> Result<HermVector> {
    let p_inv = point_inverse(p)?;
    let m = cross_m(&p_inv, &x.m, &y.m);
    let tag = if x.tag == Tag::ComplexTangent || y.tag == Tag::ComplexTangent {
        Tag::ComplexTangent
    } else {
        Tag::RealTangent
    };
    Ok(HermVector { m, tag })
}

/// `Ω(X, Y, Z) = <X × Y, Z>` at `p`.
pub fn volume_form(p: &HermVector, x: &HermVector, y: &HermVector, z: &HermVector) -> Result<C64> {
    Ok(inner(&cross(p, x, y)?, z))
}

/// Raw-matrix volume form with a precomputed `p^{-1}`.
pub fn volume_m(p_inv: &M2, x: &M2, y: &M2, z: &M2) -> C64 {
    inner_m(&cross_m(p_inv, x, y), z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// `x ↦ (x1, x2, x3)/(1 + x0)` for points of H^3.
    PoincareBall,
    /// `y ↦ e^{atan y0} (y1, y2, y3)/sqrt(1 + y0²)` for points of S^3_1.
    HollowBall,
    /// The 4 coordinates.
    Raw,
}

/// Visualization coordinates of a point.
pub fn project(p: &HermVector, model: Model) -> Result<Vec<f64>> {
    let x = herm_vec(p)?;
    match model {
        Model::PoincareBall => {
            if p.tag != Tag::PointH3 {
                return Err(Error::WrongTag {
                    expected: Tag::PointH3.name(),
                    found: p.tag.name(),
                });
            }
            let s = 1.0 / (1.0 + x[0]);
            Ok(vec![x[1] * s, x[2] * s, x[3] * s])
        }
        Model::HollowBall => {
            if p.tag != Tag::PointS31 {
                return Err(Error::WrongTag {
                    expected: Tag::PointS31.name(),
                    found: p.tag.name(),
                });
            }
            let s = x[0].atan().exp() / (1.0 + x[0] * x[0]).sqrt();
            Ok(vec![x[1] * s, x[2] * s, x[3] * s])
        }
        Model::Raw => Ok(x.to_vec()),
    }
}
