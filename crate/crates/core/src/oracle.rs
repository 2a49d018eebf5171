//! Independent recomputation from integrated frames and finite differences.
//!
//! Nothing here uses the closed-form derivative tables of [`crate::front`]
//! except [`lemma_suite`], which checks identities between those tables.

use std::ops::{Add, Mul, Sub};

use crate::data::WeierstrassData;
use crate::error::{Error, Result};
use crate::frame::{integrate_fixed, integrate_frame, Frame, FrameOptions};
use crate::front::{eta_derivative, surface_jets, Branch, LambdaJet, Surface, SurfaceJet};
use crate::invariants::InvariantSet;
use crate::lorentz::{cross_m, inner_m, volume_m, HermVector, E3};
use crate::mat2::{C64, I, M2, ZERO};

/// Coefficient types of a [`Taylor2`].
pub trait Coef: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn size(&self) -> f64;
}

impl Coef for C64 {
    fn zero() -> Self {
        ZERO
    }
    fn size(&self) -> f64 {
        self.norm()
    }
}

impl Coef for M2 {
    fn zero() -> Self {
        M2::zero()
    }
    fn size(&self) -> f64 {
        self.max_norm()
    }
}

/// Partials `∂_u^i ∂_v^j` (`i + j ≤ order ≤ 3`) of a field at one point.
#[derive(Debug, Clone, Copy)]
pub struct Taylor2<T> {
    pub d: [[T; 4]; 4],
    pub err: [[f64; 4]; 4],
    pub order: usize,
}

const BINOM: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0],
    [1.0, 3.0, 3.0, 1.0],
];

impl<T: Coef> Taylor2<T> {
    pub fn value(&self) -> T {
        self.d[0][0]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        assert!(i + j <= self.order, "partial ({i},{j}) beyond order {}", self.order);
        self.d[i][j]
    }

    fn empty(order: usize) -> Self {
        Taylor2 {
            d: [[T::zero(); 4]; 4],
            err: [[0.0; 4]; 4],
            order,
        }
    }

    /// `∂_u` (`k = 0`) or `∂_v` (`k = 1`) as a field of one lower order.
    pub fn shift(&self, k: usize) -> Self {
        assert!(self.order >= 1);
        let mut out = Self::empty(self.order - 1);
        for i in 0..=out.order {
            for j in 0..=out.order - i {
                let (a, b) = if k == 0 { (i + 1, j) } else { (i, j + 1) };
                out.d[i][j] = self.d[a][b];
                out.err[i][j] = self.err[a][b];
            }
        }
        out
    }

    pub fn map<U: Coef>(&self, f: impl Fn(T) -> U) -> Taylor2<U> {
        let mut out = Taylor2::<U>::empty(self.order);
        for i in 0..=self.order {
            for j in 0..=self.order - i {
                out.d[i][j] = f(self.d[i][j]);
                out.err[i][j] = self.err[i][j];
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = Self::empty(self.order.min(o.order));
        for i in 0..=out.order {
            for j in 0..=out.order - i {
                out.d[i][j] = self.d[i][j] + o.d[i][j];
                out.err[i][j] = self.err[i][j] + o.err[i][j];
            }
        }
        out
    }
}

/// Leibniz rule for a bilinear product of two fields.
pub fn product<A: Coef, B: Coef, C: Coef>(
    x: &Taylor2<A>,
    y: &Taylor2<B>,
    mul: impl Fn(A, B) -> C,
) -> Taylor2<C> {
    let order = x.order.min(y.order);
    let mut out = Taylor2::<C>::empty(order);
    for i in 0..=order {
        for j in 0..=order - i {
            let mut acc = C::zero();
            let mut err = 0.0;
            for k in 0..=i {
                for l in 0..=j {
                    let c = BINOM[i][k] * BINOM[j][l];
                    let (a, b) = (x.d[k][l], y.d[i - k][j - l]);
                    acc = acc + mul(a, b) * c;
                    err += c * (x.err[k][l] * b.size() + a.size() * y.err[i - k][j - l]);
                }
            }
            out.d[i][j] = acc;
            out.err[i][j] = err;
        }
    }
    out
}

/// `ζ W = a W_u + b W_v` for `ζ = a + ib`.
pub fn directional(zeta: &Taylor2<C64>, w: &Taylor2<M2>) -> Taylor2<M2> {
    let a = zeta.map(|c| C64::new(c.re, 0.0));
    let b = zeta.map(|c| C64::new(c.im, 0.0));
    let wu = product(&a, &w.shift(0), |s, m| m.scale(s));
    let wv = product(&b, &w.shift(1), |s, m| m.scale(s));
    wu.add(&wv)
}

/// Tangential projection field: `W + <W,f>f` in hyperbolic space, `W - <W,g>g` in de Sitter space.
pub fn project_field(w: &Taylor2<M2>, p: &Taylor2<M2>, which: Surface) -> Taylor2<M2> {
    let ip = product(w, p, |a, b| inner_m(&a, &b));
    let corr = product(&ip, p, |s, m| m.scale(s));
    let corr = match which {
        Surface::H => corr,
        Surface::S => corr.map(|m| -m),
    };
    w.add(&corr)
}

/// Five-point weights for derivatives of order 0..=3 at unit spacing.
const W1D: [[f64; 5]; 4] = [
    [0.0, 0.0, 1.0, 0.0, 0.0],
    [0.0, -0.5, 0.0, 0.5, 0.0],
    [0.0, 1.0, -2.0, 1.0, 0.0],
    [-0.5, 1.0, 0.0, -1.0, 0.5],
];

/// Tensor-product central-difference stencils at two spacings each for low
/// (orders ≤ 2) and third-order partials.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub z: C64,
    pub h12: f64,
    pub h3: f64,
}

impl Stencil {
    pub fn new(z: C64, h12: f64, h3: f64) -> Self {
        Stencil { z, h12, h3 }
    }

    /// Spacings in storage order: `h12, h12/2, h3, h3/2`.
    fn spacings(&self, order: usize) -> Vec<f64> {
        if order <= 2 {
            vec![self.h12, self.h12 / 2.0]
        } else {
            vec![self.h12, self.h12 / 2.0, self.h3, self.h3 / 2.0]
        }
    }

    /// Offsets `δ` of the stencil points (25 per spacing).
    pub fn offsets(&self, order: usize) -> Vec<C64> {
        let mut out = Vec::new();
        for h in self.spacings(order) {
            for a in -2i32..=2 {
                for b in -2i32..=2 {
                    out.push(C64::new(a as f64 * h, b as f64 * h));
                }
            }
        }
        out
    }

    /// Richardson-extrapolated partials from values at [`Stencil::offsets`].
    pub fn partials<T: Coef>(&self, values: &[T], order: usize) -> Taylor2<T> {
        let hs = self.spacings(order);
        assert_eq!(values.len(), 25 * hs.len());
        let raw = |block: usize, i: usize, j: usize| -> T {
            let h = hs[block];
            let vals = &values[25 * block..25 * (block + 1)];
            let mut acc = T::zero();
            for a in 0..5 {
                for b in 0..5 {
                    let w = W1D[i][a] * W1D[j][b];
                    if w != 0.0 {
                        acc = acc + vals[a * 5 + b] * w;
                    }
                }
            }
            acc * h.powi(-((i + j) as i32))
        };
        let mut out = Taylor2::<T>::empty(order);
        for i in 0..=order {
            for j in 0..=order - i {
                let blk = if i + j <= 2 { 0 } else { 2 };
                let (d1, d2) = (raw(blk, i, j), raw(blk + 1, i, j));
                out.d[i][j] = (d2 * 4.0 - d1) * (1.0 / 3.0);
                out.err[i][j] = (d2 - d1).size() / 3.0;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub h12: f64,
    pub h3: f64,
    /// RK4 steps for each local transport.
    pub transport_steps: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            h12: 1e-3,
            h3: 5e-3,
            transport_steps: 8,
        }
    }
}

/// Surface values obtained only by integrating the frame ODE.
#[derive(Debug, Clone)]
pub struct Sampler {
    pub data: WeierstrassData,
    pub which: Surface,
    pub base_z: C64,
    pub base_a: M2,
    pub frame_opts: FrameOptions,
    pub opts: OracleOptions,
}

fn point_of(a: &M2, which: Surface) -> M2 {
    match which {
        Surface::H => (*a * a.adjoint()).hermitian_part(),
        Surface::S => (*a * E3 * a.adjoint()).hermitian_part(),
    }
}

impl Sampler {
    /// Base at the domain's lower-left corner with the identity frame.
    pub fn new(data: &WeierstrassData, which: Surface) -> Self {
        Self::with_base(data, which, data.domain.base_point())
    }

    pub fn with_base(data: &WeierstrassData, which: Surface, base_z: C64) -> Self {
        Sampler {
            data: data.clone(),
            which,
            base_z,
            base_a: M2::identity(),
            frame_opts: FrameOptions::default(),
            opts: OracleOptions::default(),
        }
    }

    pub fn frame(&self, z: C64) -> Result<Frame> {
        let path = self.data.domain.path(self.base_z, z);
        integrate_frame(&self.data, &path, self.base_a, &self.frame_opts)
    }

    /// The surface point at `z`.
    pub fn eval(&self, z: C64) -> Result<M2> {
        Ok(point_of(&self.frame(z)?.a, self.which))
    }

    pub fn eval_both(&self, z: C64) -> Result<(M2, M2)> {
        let a = self.frame(z)?.a;
        Ok((point_of(&a, Surface::H), point_of(&a, Surface::S)))
    }

    /// `A(z0) Φ(δ)` at each offset, `Φ` the transport from `z0` with `Φ(z0) = I`.
    /// With `normalized`, `A(z0)` is replaced by `I`: the result is then an
    /// isometric copy of the surface near `z0`.
    pub fn local_frames(&self, z0: C64, offsets: &[C64], normalized: bool) -> Result<Vec<M2>> {
        let a0 = if normalized {
            M2::identity()
        } else {
            self.frame(z0)?.start_matrix()
        };
        offsets
            .iter()
            .map(|&d| {
                if d == ZERO {
                    return Ok(a0);
                }
                let to = z0 + d;
                if !self.data.domain.contains(to) {
                    return Err(Error::OutsideDomain { z: to });
                }
                Ok(integrate_fixed(&self.data, &[z0, to], a0, self.opts.transport_steps, &self.frame_opts)?.a)
            })
            .collect()
    }

    /// `Φ(δ) - I` at each offset, integrated directly so that small
    /// deviations keep full relative precision.
    pub fn local_deviations(&self, z0: C64, offsets: &[C64]) -> Result<Vec<M2>> {
        let n = self.opts.transport_steps.max(1);
        offsets
            .iter()
            .map(|&d| {
                if d == ZERO {
                    return Ok(M2::zero());
                }
                if !self.data.domain.contains(z0 + d) {
                    return Err(Error::OutsideDomain { z: z0 + d });
                }
                let rhs = |s: f64, e: &M2| -> Result<M2> {
                    let dm = self.data.d_matrix(z0 + d * s)?.scale(d);
                    Ok(dm + *e * dm)
                };
                let h = 1.0 / n as f64;
                let mut e = M2::zero();
                for k in 0..n {
                    let s = k as f64 * h;
                    let k1 = rhs(s, &e)?;
                    let k2 = rhs(s + 0.5 * h, &(e + k1 * (0.5 * h)))?;
                    let k3 = rhs(s + 0.5 * h, &(e + k2 * (0.5 * h)))?;
                    let k4 = rhs(s + h, &(e + k3 * h))?;
                    e = e + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
                }
                Ok(e)
            })
            .collect()
    }

    fn stencil(&self, z: C64) -> Stencil {
        Stencil::new(z, self.opts.h12, self.opts.h3)
    }

    /// Partials of `f` and `g` up to `order`.
    pub fn partials(&self, z: C64, order: usize, normalized: bool) -> Result<(Taylor2<M2>, Taylor2<M2>)> {
        let st = self.stencil(z);
        if normalized {
            // f - I and g - e3 from the deviation E = A - I.
            let devs = self.local_deviations(z, &st.offsets(order))?;
            let f: Vec<M2> = devs
                .iter()
                .map(|e| (*e + e.adjoint() + *e * e.adjoint()).hermitian_part())
                .collect();
            let g: Vec<M2> = devs
                .iter()
                .map(|e| (*e * E3 + E3 * e.adjoint() + *e * E3 * e.adjoint()).hermitian_part())
                .collect();
            let (mut tf, mut tg) = (st.partials(&f, order), st.partials(&g, order));
            tf.d[0][0] = tf.d[0][0] + M2::identity();
            tg.d[0][0] = tg.d[0][0] + E3;
            return Ok((tf, tg));
        }
        let frames = self.local_frames(z, &st.offsets(order), false)?;
        let f: Vec<M2> = frames.iter().map(|a| point_of(a, Surface::H)).collect();
        let g: Vec<M2> = frames.iter().map(|a| point_of(a, Surface::S)).collect();
        Ok((st.partials(&f, order), st.partials(&g, order)))
    }

    /// Partials of a scalar function by the same stencil (orders ≤ 2).
    pub fn scalar_partials(&self, z: C64, f: impl Fn(C64) -> Result<C64>) -> Result<Taylor2<C64>> {
        let st = self.stencil(z);
        let vals: Vec<C64> = st
            .offsets(2)
            .iter()
            .map(|&d| f(z + d))
            .collect::<Result<_>>()?;
        Ok(st.partials(&vals, 2))
    }
}

/// One partial `∂_u^i ∂_v^j` of the sampler's surface at `z` (global coordinates).
pub fn numeric_partials(s: &Sampler, z: C64, index: (usize, usize), h_fd: f64) -> Result<(HermVector, f64)> {
    let (i, j) = index;
    if i + j > 3 {
        return Err(Error::InvalidArgument("partials are available up to order 3".into()));
    }
    let mut s2 = s.clone();
    if i + j <= 2 {
        s2.opts.h12 = h_fd;
    } else {
        s2.opts.h3 = h_fd;
    }
    let (f, g) = s2.partials(z, 3, false)?;
    let p = match s.which {
        Surface::H => f,
        Surface::S => g,
    };
    Ok((HermVector::complex(p.get(i, j)).as_tangent(), p.err[i][j]))
}

/// `∇_ζ w` at `z` for a vector field `w` given by its values.
pub fn covariant_derivative(
    s: &Sampler,
    z: C64,
    zeta: C64,
    w: &dyn Fn(C64) -> Result<M2>,
) -> Result<HermVector> {
    let st = s.stencil(z);
    let vals: Vec<M2> = st.offsets(2).iter().map(|&d| w(z + d)).collect::<Result<_>>()?;
    let t = st.partials(&vals, 1);
    let zw = t.get(1, 0).scale_re(zeta.re) + t.get(0, 1).scale_re(zeta.im);
    let p = s.eval(z)?;
    let out = match s.which {
        Surface::H => zw + p.scale(inner_m(&zw, &p)),
        Surface::S => zw - p.scale(inner_m(&zw, &p)),
    };
    Ok(HermVector::complex(out).as_tangent())
}

/// Oracle invariants with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleInvariants {
    pub set: InvariantSet,
    /// `dλ(η)` by finite differences.
    pub lambda_eta: f64,
    /// `<∇_η(ηk), ξk>`, zero by the lemma.
    pub eta_eta_xi: f64,
    /// `<ξk, ξk>`.
    pub xi_norm2: f64,
}

fn real_field(t: Taylor2<C64>) -> Taylor2<C64> {
    t.map(|c| C64::new(c.re, 0.0))
}

/// `κ_s, κ_t, κ_c, κ_n` from their definitions, using only frame integration
/// and finite differences. `branch` fixes `η`; `ξ = -iλ_z̄` as a field.
pub fn definition_invariants(s: &Sampler, z: C64, branch: &Branch) -> Result<OracleInvariants> {
    let which = s.which;
    let data = &s.data;
    let (f, g) = s.partials(z, 3, true)?;
    let (k, nu) = match which {
        Surface::H => (f, g),
        Surface::S => (g, f),
    };
    let xi = s.scalar_partials(z, |w| {
        let lj = crate::front::lambda_jet(data, w)?;
        Ok(-I * lj.lambda_zbar)
    })?;
    let eta = s.scalar_partials(z, |w| {
        let ab = data.jets(w)?.ab();
        let b = Branch::track(ab, branch.phase, w)?;
        Ok(b.eta(which))
    })?;
    let lam = real_field(s.scalar_partials(z, |w| Ok(C64::new(data.lambda(w)?, 0.0)))?);
    let eta0 = eta.value();
    let lambda_eta = eta0.re * lam.get(1, 0).re + eta0.im * lam.get(0, 1).re;

    let xk = directional(&xi, &k);
    let ek = directional(&eta, &k);
    let w = project_field(&directional(&eta, &ek), &k, which);
    let nxx = project_field(&directional(&xi, &xk), &k, which).value();
    let nxw = project_field(&directional(&xi, &w), &k, which).value();
    let nww = project_field(&directional(&eta, &w), &k, which).value();
    let (xk0, w0, p, n0) = (xk.value(), w.value(), k.value(), nu.value());
    let p_inv = p
        .inverse()
        .ok_or(Error::SingularPoint { det: p.det() })?;
    let omega = |a: &M2, b: &M2, c: &M2| volume_m(&p_inv, a, b, c).re;

    let xi2 = inner_m(&xk0, &xk0).re;
    if xi2 <= 1e-12 * xi.value().norm_sqr() {
        return Err(Error::Signature {
            what: "xi k",
            value: xi2,
        });
    }
    let xn = xi2.sqrt();
    let cr = cross_m(&p_inv, &xk0, &w0);
    let cr2 = inner_m(&cr, &cr).re.abs();
    // Orientation of the adapted pair enters with the sign of λ_η; this makes
    // κ_s independent of the choice of (ξ, η).
    let det_xi_eta = (xi.value().conj() * eta0).im;
    let sgn = (det_xi_eta * lambda_eta).signum();
    let kappa_s = sgn * omega(&xk0, &nxx, &n0) / xn.powi(3);
    let kappa_n = inner_m(&nxx, &n0).re / xi2;
    let kappa_t = omega(&xk0, &w0, &nxw) / cr2
        - omega(&xk0, &w0, &nxx) * inner_m(&xk0, &w0).re / (xi2 * cr2);
    let kappa_c = xn.powf(1.5) * omega(&xk0, &w0, &nww) / cr2.powf(1.25);
    Ok(OracleInvariants {
        set: InvariantSet {
            kappa_s,
            kappa_t,
            kappa_c,
            kappa_n,
            defined: true,
        },
        lambda_eta,
        eta_eta_xi: inner_m(&w0, &xk0).re,
        xi_norm2: xi2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityResiduals {
    pub orth: f64,
    pub iso1: f64,
    pub iso2: f64,
}

/// `<f,g>`, `<f, dg>` and `<g, df>` from globally integrated values.
pub fn duality_residuals(s: &Sampler, z: C64) -> Result<DualityResiduals> {
    let (f, g) = s.partials(z, 1, false)?;
    let (f0, g0) = (f.value(), g.value());
    let ip = |a: &M2, b: &M2| inner_m(a, b).norm();
    Ok(DualityResiduals {
        orth: ip(&f0, &g0),
        iso1: ip(&f0, &g.get(1, 0)).max(ip(&f0, &g.get(0, 1))),
        iso2: ip(&g0, &f.get(1, 0)).max(ip(&g0, &f.get(0, 1))),
    })
}

/// `(Ω(f_u, f_v, g), Ω(g_u, g_v, f))`, each at its own surface point.
pub fn signed_area_density(s: &Sampler, z: C64) -> Result<(f64, f64)> {
    let (f, g) = s.partials(z, 1, true)?;
    let (f0, g0) = (f.value(), g.value());
    let fi = f0.inverse().ok_or(Error::SingularPoint { det: f0.det() })?;
    let gi = g0.inverse().ok_or(Error::SingularPoint { det: g0.det() })?;
    Ok((
        volume_m(&fi, &f.get(1, 0), &f.get(0, 1), &g0).re,
        volume_m(&gi, &g.get(1, 0), &g.get(0, 1), &f0).re,
    ))
}

/// Residuals of the closed-form identities that hold on the singular set.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub z: C64,
    pub entries: Vec<(&'static str, f64)>,
}

impl LemmaReport {
    pub fn max_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.1).fold(0.0, f64::max)
    }

    pub fn worst(&self) -> Option<(&'static str, f64)> {
        self.entries
            .iter()
            .copied()
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Evaluates every product identity, third-order inner product and
/// null-direction identity at a point of the singular set. Residuals are
/// scaled by `max(1, |A|²)`.
pub fn lemma_suite(data: &WeierstrassData, frame: &Frame, branch: &Branch) -> Result<LemmaReport> {
    let z = frame.z;
    let ab = data.jets(z)?;
    let lj = LambdaJet::from_jets(z, &ab);
    if lj.lambda.abs() > 1e-8 {
        return Err(Error::NotSingular { z, lambda: lj.lambda });
    }
    let (f, g) = surface_jets(frame, data)?;
    let scale = frame.a.max_norm().powi(2).max(1.0);
    let [a, a1, ..] = ab.alpha.d;
    let [b, b1, ..] = ab.beta.d;
    let (lz, lzb) = (lj.lambda_z, lj.lambda_zbar);
    let half_i = 0.5 * I;
    let w = a * b1 - a1 * b;
    let abs_a2 = a.norm_sqr();
    let (fm, gm) = (f.p.m, g.p.m);
    let mut e: Vec<(&'static str, f64)> = Vec::new();
    let mut push = |name, m: M2| e.push((name, m.max_norm() / scale));
    let cx = |s: &SurfaceJet, x: (usize, usize), y: (usize, usize)| {
        cross_m(&s.p_inv, &s.m(x.0, x.1), &s.m(y.0, y.1))
    };
    push("f' x f_zb = 0", cx(&f, (1, 0), (0, 1)));
    push("f' x f'_zb = 0", cx(&f, (1, 0), (1, 1)));
    push("f_zb x f'_zb = 0", cx(&f, (0, 1), (1, 1)));
    push("g' x g_zb = 0", cx(&g, (1, 0), (0, 1)));
    push("g' x g'_zb = 0", cx(&g, (1, 0), (1, 1)));
    push("g_zb x g'_zb = 0", cx(&g, (0, 1), (1, 1)));
    push("f' x f''", cx(&f, (1, 0), (2, 0)) - gm.scale(half_i * w));
    push("f' x f_zbzb", cx(&f, (1, 0), (0, 2)) - gm.scale(half_i * lzb));
    push("f_zb x f''", cx(&f, (0, 1), (2, 0)) + gm.scale(half_i * lz));
    push("f_zb x f_zbzb", cx(&f, (0, 1), (0, 2)) - gm.scale(half_i * (-w).conj()));
    push("g' x g''", cx(&g, (1, 0), (2, 0)) - fm.scale(half_i * w));
    push("g' x g_zbzb", cx(&g, (1, 0), (0, 2)) + fm.scale(half_i * lzb));
    push("g_zb x g''", cx(&g, (0, 1), (2, 0)) - fm.scale(half_i * lz));
    push("g_zb x g_zbzb", cx(&g, (0, 1), (0, 2)) - fm.scale(half_i * (-w).conj()));

    let mut scalar = |name, v: C64| e.push((name, v.norm() / scale));
    let ip = |s: &SurfaceJet, j, k, other: &M2| inner_m(&s.m(j, k), other);
    let abl = a * b / (2.0 * abs_a2);
    scalar("<f''',g>", ip(&f, 3, 0, &gm) + abl * lz);
    scalar("<f''_zb,g>", ip(&f, 2, 1, &gm) - 0.5 * lz);
    scalar("<f'_zbzb,g>", ip(&f, 1, 2, &gm) - 0.5 * lzb);
    scalar("<f_zbzbzb,g>", ip(&f, 0, 3, &gm) + abl.conj() * lzb);
    scalar("<g''',f>", ip(&g, 3, 0, &fm) - abl * lz);
    scalar("<g''_zb,f>", ip(&g, 2, 1, &fm) - 0.5 * lz);
    scalar("<g'_zbzb,f>", ip(&g, 1, 2, &fm) - 0.5 * lzb);
    scalar("<g_zbzbzb,f>", ip(&g, 0, 3, &fm) - abl.conj() * lzb);

    let (eh, ed) = (branch.eta_h(), branch.eta_d());
    let xi = -I * lzb;
    let nf = f.tangential(f.dir2(eh, eta_derivative(&ab, eh)));
    let ng = g.tangential(g.dir2(ed, eta_derivative(&ab, ed)));
    let q = branch.sqrt_ab * lzb;
    let a4 = abs_a2 * abs_a2;
    let want_f = gm.scale_re(2.0 * q.im * q.im / a4);
    let want_g = fm.scale_re(-2.0 * q.re * q.re / a4);
    let mut e2 = std::mem::take(&mut e);
    e2.push(("xi f x nabla eta_h eta_h f", (cross_m(&f.p_inv, &f.dir(xi), &nf) - want_f).max_norm() / scale));
    e2.push(("xi g x nabla eta_d eta_d g", (cross_m(&g.p_inv, &g.dir(xi), &ng) - want_g).max_norm() / scale));
    e2.push(("<nabla eta_h eta_h f, xi f>", inner_m(&nf, &f.dir(xi)).norm() / scale));
    e2.push(("<nabla eta_d eta_d g, xi g>", inner_m(&ng, &g.dir(xi)).norm() / scale));
    Ok(LemmaReport { z, entries: e2 })
}
