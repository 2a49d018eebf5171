//! Weierstrass data `(α, β)` and the domains they live on.

use std::f64::consts::{PI, TAU};
use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{EvalCtx, Expr};
use crate::jet::Jet;
use crate::mat2::{C64, M2, ZERO};

/// A region of the complex plane.
///
/// Rectangles and sectors are simply connected. A full annulus is accepted for
/// pointwise work and curve tracing; frame integration inside it follows paths
/// that never cross the ray opposite to their starting point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Rectangle { u: [f64; 2], v: [f64; 2] },
    Sector { r: [f64; 2], theta: [f64; 2] },
    Annulus { r: [f64; 2] },
}

/// Shortest polyline chord angle used when following arcs.
const ARC_CHORD: f64 = 0.02;

impl Domain {
    pub fn rectangle(u0: f64, u1: f64, v0: f64, v1: f64) -> Self {
        Domain::Rectangle {
            u: [u0, u1],
            v: [v0, v1],
        }
    }

    pub fn sector(r0: f64, r1: f64, th0: f64, th1: f64) -> Self {
        Domain::Sector {
            r: [r0, r1],
            theta: [th0, th1],
        }
    }

    pub fn annulus(r0: f64, r1: f64) -> Self {
        Domain::Annulus { r: [r0, r1] }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Domain::Rectangle { u, v } => u[0] < u[1] && v[0] < v[1],
            Domain::Sector { r, theta } => {
                0.0 < r[0] && r[0] < r[1] && theta[0] < theta[1] && theta[1] - theta[0] < TAU
            }
            Domain::Annulus { r } => 0.0 < r[0] && r[0] < r[1],
        };
        let finite = match *self {
            Domain::Rectangle { u, v } => u.iter().chain(&v).all(|x| x.is_finite()),
            Domain::Sector { r, theta } => r.iter().chain(&theta).all(|x| x.is_finite()),
            Domain::Annulus { r } => r.iter().all(|x| x.is_finite()),
        };
        if ok && finite {
            Ok(())
        } else {
            Err(Error::InvalidData(format!("empty or malformed region {self}")))
        }
    }

    pub fn is_simply_connected(&self) -> bool {
        !matches!(self, Domain::Annulus { .. })
    }

    /// Angle of the mid-ray; logarithms are cut along the opposite ray.
    pub fn anchor(&self) -> f64 {
        match *self {
            Domain::Sector { theta, .. } => 0.5 * (theta[0] + theta[1]),
            _ => 0.0,
        }
    }

    /// Angle of `z` unwrapped into the sector's range (nearest representative).
    fn sector_angle(z: C64, theta: [f64; 2]) -> f64 {
        let mid = 0.5 * (theta[0] + theta[1]);
        let a = z.arg();
        a + TAU * ((mid - a) / TAU).round()
    }

    pub fn contains(&self, z: C64) -> bool {
        if !z.is_finite() {
            return false;
        }
        match *self {
            Domain::Rectangle { u, v } => {
                u[0] <= z.re && z.re <= u[1] && v[0] <= z.im && z.im <= v[1]
            }
            Domain::Sector { r, theta } => {
                let m = z.norm();
                let a = Self::sector_angle(z, theta);
                r[0] <= m && m <= r[1] && theta[0] <= a && a <= theta[1]
            }
            Domain::Annulus { r } => {
                let m = z.norm();
                r[0] <= m && m <= r[1]
            }
        }
    }

    /// Whether `inner` lies inside `self` (checked on its boundary lattice).
    pub fn contains_region(&self, inner: &Domain) -> bool {
        inner
            .lattice(17, 17)
            .iter()
            .flatten()
            .all(|&z| self.contains(z))
    }

    /// Node `(i, j)` of an `nu × nv` lattice: Cartesian for rectangles,
    /// polar `(radius, angle)` otherwise. Node `(0, 0)` is the lower-left corner.
    pub fn lattice_node(&self, i: usize, j: usize, nu: usize, nv: usize) -> C64 {
        let s = if nu > 1 { i as f64 / (nu - 1) as f64 } else { 0.0 };
        let t = if nv > 1 { j as f64 / (nv - 1) as f64 } else { 0.0 };
        match *self {
            Domain::Rectangle { u, v } => {
                C64::new(u[0] + s * (u[1] - u[0]), v[0] + t * (v[1] - v[0]))
            }
            Domain::Sector { r, theta } => C64::from_polar(
                r[0] + s * (r[1] - r[0]),
                theta[0] + t * (theta[1] - theta[0]),
            ),
            Domain::Annulus { r } => {
                // Periodic in the angle: the last column is not a repeat of the first.
                let t = if nv > 0 { j as f64 / nv as f64 } else { 0.0 };
                C64::from_polar(r[0] + s * (r[1] - r[0]), -PI + t * TAU)
            }
        }
    }

    /// Lattice rows `[j][i]`.
    pub fn lattice(&self, nu: usize, nv: usize) -> Vec<Vec<C64>> {
        (0..nv)
            .map(|j| (0..nu).map(|i| self.lattice_node(i, j, nu, nv)).collect())
            .collect()
    }

    /// Smallest distance between neighbouring lattice nodes.
    pub fn lattice_spacing(&self, nu: usize, nv: usize) -> f64 {
        let nu1 = (nu.max(2) - 1) as f64;
        let nv1 = (nv.max(2) - 1) as f64;
        match *self {
            Domain::Rectangle { u, v } => ((u[1] - u[0]) / nu1).min((v[1] - v[0]) / nv1),
            Domain::Sector { r, theta } => {
                ((r[1] - r[0]) / nu1).min(r[0] * (theta[1] - theta[0]) / nv1)
            }
            Domain::Annulus { r } => ((r[1] - r[0]) / nu1).min(r[0] * TAU / nv.max(1) as f64),
        }
    }

    /// Lower-left corner, the default base point for frames.
    pub fn base_point(&self) -> C64 {
        self.lattice_node(0, 0, 2, 2)
    }

    /// A polyline from `from` to `to` that stays in the domain.
    pub fn path(&self, from: C64, to: C64) -> Vec<C64> {
        match *self {
            Domain::Rectangle { .. } => vec![from, to],
            Domain::Sector { theta, .. } => {
                let a0 = Self::sector_angle(from, theta);
                let a1 = Self::sector_angle(to, theta);
                polar_path(from.norm(), a0, to.norm(), a1)
            }
            Domain::Annulus { .. } => {
                let a0 = from.arg();
                let mut a1 = to.arg();
                a1 += TAU * ((a0 - a1) / TAU).round();
                polar_path(from.norm(), a0, to.norm(), a1)
            }
        }
    }
}

/// Arc at the larger radius joined by radial segments.
fn polar_path(r0: f64, a0: f64, r1: f64, a1: f64) -> Vec<C64> {
    let rm = r0.max(r1);
    let mut pts = vec![C64::from_polar(r0, a0)];
    if rm > r0 {
        pts.push(C64::from_polar(rm, a0));
    }
    let n = ((a1 - a0).abs() / ARC_CHORD).ceil() as usize;
    for k in 1..=n {
        let a = a0 + (a1 - a0) * k as f64 / n as f64;
        pts.push(C64::from_polar(rm, a));
    }
    if rm > r1 {
        pts.push(C64::from_polar(r1, a1));
    }
    pts
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Rectangle { u, v } => {
                write!(f, "rectangle [{}, {}]x[{}, {}]", u[0], u[1], v[0], v[1])
            }
            Domain::Sector { r, theta } => write!(
                f,
                "sector {} < |z| < {}, {} < arg z < {}",
                r[0], r[1], theta[0], theta[1]
            ),
            Domain::Annulus { r } => write!(f, "annulus {} < |z| < {}", r[0], r[1]),
        }
    }
}

/// Holomorphic Weierstrass data `(α, β)` on a domain.
#[derive(Debug, Clone)]
pub struct WeierstrassData {
    pub alpha: Expr,
    pub beta: Expr,
    pub domain: Domain,
    pub family: Option<String>,
    pub ctx: EvalCtx,
}

/// Values and jets of `α` and `β` at one point.
#[derive(Debug, Clone, Copy)]
pub struct AlphaBeta {
    pub alpha: Jet,
    pub beta: Jet,
}

impl AlphaBeta {
    pub fn ab(&self) -> C64 {
        self.alpha.d0() * self.beta.d0()
    }

    /// `D(z) = [[0, α], [β, 0]]`.
    pub fn d(&self) -> M2 {
        M2::off_diag(self.alpha.d0(), self.beta.d0())
    }
}

impl WeierstrassData {
    pub fn new(alpha: Expr, beta: Expr, domain: Domain) -> Result<Self> {
        domain.validate()?;
        let data = Self::unchecked(alpha, beta, domain);
        data.validate()?;
        Ok(data)
    }

    /// Skips validation; for frame-only work with data whose identifier may vanish.
    pub fn unchecked(alpha: Expr, beta: Expr, domain: Domain) -> Self {
        WeierstrassData {
            alpha,
            beta,
            domain,
            family: None,
            ctx: EvalCtx {
                anchor: domain.anchor(),
                cut_margin: 1e-8,
            },
        }
    }

    pub fn parse(alpha: &str, beta: &str, domain: Domain) -> Result<Self> {
        Self::new(Expr::parse(alpha)?, Expr::parse(beta)?, domain)
    }

    fn tagged(mut self, tag: impl Into<String>) -> Self {
        self.family = Some(tag.into());
        self
    }

    /// `(e^z, 1)`.
    pub fn e1() -> Self {
        Self::parse("exp(z)", "1", Domain::rectangle(-3.0, 3.0, -8.0, 8.0))
            .expect("built-in family")
            .tagged("e1")
    }

    /// `(-1, z^{-2})`; its singular set is the unit circle.
    pub fn e2() -> Self {
        Self::parse("-1", "pow(z,-2)", Domain::annulus(0.25, 4.0))
            .expect("built-in family")
            .tagged("e2")
    }

    pub fn constants(a: C64, b: C64) -> Result<Self> {
        Ok(Self::new(Expr::Const(a), Expr::Const(b), Domain::rectangle(-12.0, 12.0, -12.0, 12.0))?
            .tagged(format!("constants({a},{b})")))
    }

    /// `(α, 1)`: data of the hyperbolic and de Sitter Schwarz maps of `u'' = α u`.
    pub fn schwarz(alpha: Expr, domain: Domain) -> Result<Self> {
        let tag = format!("schwarz({alpha})");
        Ok(Self::new(alpha, Expr::Const(C64::new(1.0, 0.0)), domain)?.tagged(tag))
    }

    /// `(e^{p(z)}, 1)` for a polynomial with coefficients `coeffs[k]` of `z^k`.
    pub fn exp_poly(coeffs: &[C64], domain: Domain) -> Result<Self> {
        let mut p = Expr::Const(ZERO);
        for (k, &c) in coeffs.iter().enumerate() {
            let mono = match k {
                0 => Expr::Const(c),
                1 => Expr::Mul(Box::new(Expr::Const(c)), Box::new(Expr::Z)),
                _ => Expr::Mul(
                    Box::new(Expr::Const(c)),
                    Box::new(Expr::Pow(Box::new(Expr::Z), C64::new(k as f64, 0.0))),
                ),
            };
            p = Expr::Add(Box::new(p), Box::new(mono));
        }
        Self::schwarz(Expr::Exp(Box::new(p)), domain)
    }

    pub fn with_domain(mut self, domain: Domain) -> Result<Self> {
        domain.validate()?;
        self.domain = domain;
        self.ctx.anchor = domain.anchor();
        self.validate()?;
        Ok(self)
    }

    /// Samples the domain: `α`, `β` must be finite and nonzero and the
    /// identifier `|α|² - |β|²` must not vanish identically.
    pub fn validate(&self) -> Result<()> {
        const N: usize = 24;
        let mut max_lambda: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for row in self.domain.lattice(N, N) {
            for z in row {
                let (a, b) = self.values(z).map_err(|e| {
                    Error::InvalidData(format!("alpha/beta cannot be evaluated at {z}: {e}"))
                })?;
                if a.norm() < 1e-12 || b.norm() < 1e-12 {
                    return Err(Error::InvalidData(format!(
                        "alpha or beta vanishes near z = {z}"
                    )));
                }
                max_lambda = max_lambda.max((a.norm_sqr() - b.norm_sqr()).abs());
                scale = scale.max(a.norm_sqr() + b.norm_sqr());
            }
        }
        if max_lambda <= 1e-12 * scale {
            return Err(Error::IdentifierVanishes);
        }
        Ok(())
    }

    pub fn values(&self, z: C64) -> Result<(C64, C64)> {
        Ok((
            self.alpha.value(z, &self.ctx)?,
            self.beta.value(z, &self.ctx)?,
        ))
    }

    pub fn jets(&self, z: C64) -> Result<AlphaBeta> {
        Ok(AlphaBeta {
            alpha: self.alpha.jet(z, &self.ctx)?,
            beta: self.beta.jet(z, &self.ctx)?,
        })
    }

    pub fn d_matrix(&self, z: C64) -> Result<M2> {
        let (a, b) = self.values(z)?;
        Ok(M2::off_diag(a, b))
    }

    /// `λ = |α|² - |β|²`.
    pub fn lambda(&self, z: C64) -> Result<f64> {
        let (a, b) = self.values(z)?;
        Ok(a.norm_sqr() - b.norm_sqr())
    }

    pub fn name(&self) -> String {
        self.family
            .clone()
            .unwrap_or_else(|| format!("({}, {})", self.alpha, self.beta))
    }
}
