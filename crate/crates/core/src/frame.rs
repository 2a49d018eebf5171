//! The frame ODE `A' = A D` with `D = [[0, α], [β, 0]]`.

use std::hash::{Hash, Hasher};

use rayon::prelude::*;

use crate::data::{Domain, WeierstrassData};
use crate::error::{Error, Result};
use crate::mat2::{C64, M2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOptions {
    /// Local error per accepted step (relative to `max(1, |A|)`).
    pub step_tol: f64,
    pub det_tol: f64,
    pub renormalize: bool,
    pub max_steps: usize,
}

impl Default for FrameOptions {
    fn default() -> Self {
        FrameOptions {
            step_tol: 1e-10,
            det_tol: 1e-9,
            renormalize: true,
            max_steps: 1_000_000,
        }
    }
}

/// A solution of the frame ODE at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub z: C64,
    pub a: M2,
    /// `|det A - 1|` at `z`.
    pub det_drift: f64,
    /// Largest drift seen on the way, before any renormalization.
    pub max_drift: f64,
    pub renormalizations: u32,
    /// Hash of the polyline used to reach `z`.
    pub path_id: u64,
}

impl Frame {
    /// `A` rescaled to det 1, suitable as the start of a further integration.
    pub fn start_matrix(&self) -> M2 {
        if self.det_drift > 0.0 {
            renormalize(self.a)
        } else {
            self.a
        }
    }

    pub fn new(z: C64, a: M2) -> Self {
        let drift = (a.det() - 1.0).norm();
        Frame {
            z,
            a,
            det_drift: drift,
            max_drift: drift,
            renormalizations: 0,
            path_id: 0,
        }
    }
}

fn path_hash(path: &[C64]) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for z in path {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    h.finish()
}

/// `A ↦ A det(A)^{-1/2}`.
fn renormalize(a: M2) -> M2 {
    a.scale(a.det().sqrt().inv())
}

struct Segment<'a> {
    data: &'a WeierstrassData,
    from: C64,
    delta: C64,
}

impl Segment<'_> {
    /// `dA/ds = A D(z(s)) z'(s)`.
    fn rhs(&self, s: f64, a: &M2) -> Result<M2> {
        let z = self.from + self.delta * s;
        Ok(*a * self.data.d_matrix(z)?.scale(self.delta))
    }
}

// Dormand–Prince 5(4).
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Stepper<'a> {
    opts: &'a FrameOptions,
    a: M2,
    max_drift: f64,
    renorms: u32,
    steps: usize,
}

impl Stepper<'_> {
    fn accept(&mut self, a: M2) {
        let drift = (a.det() - 1.0).norm();
        self.max_drift = self.max_drift.max(drift);
        if self.opts.renormalize && drift > self.opts.det_tol / 10.0 {
            self.a = renormalize(a);
            self.renorms += 1;
        } else {
            self.a = a;
        }
    }

    fn adaptive(&mut self, seg: &Segment) -> Result<()> {
        let mut s = 0.0;
        let scale0 = seg.data.d_matrix(seg.from)?.max_norm() * seg.delta.norm();
        let mut h = (0.1 / scale0.max(1e-12)).min(1.0);
        let mut k = [M2::zero(); 7];
        k[0] = seg.rhs(0.0, &self.a)?;
        while s < 1.0 {
            h = h.min(1.0 - s);
            if h < 1e-14 {
                return Err(Error::StepUnderflow {
                    z: seg.from + seg.delta * s,
                });
            }
            self.steps += 1;
            if self.steps > self.opts.max_steps {
                return Err(Error::StepUnderflow {
                    z: seg.from + seg.delta * s,
                });
            }
            for i in 1..7 {
                let mut y = self.a;
                for (j, kj) in k.iter().enumerate().take(i) {
                    if A[i][j] != 0.0 {
                        y += *kj * (h * A[i][j]);
                    }
                }
                k[i] = seg.rhs(s + C[i] * h, &y)?;
            }
            let mut y5 = self.a;
            let mut err = M2::zero();
            for i in 0..7 {
                if B5[i] != 0.0 {
                    y5 += k[i] * (h * B5[i]);
                }
                err += k[i] * (h * (B5[i] - B4[i]));
            }
            let ratio = err.max_norm() / (self.opts.step_tol * y5.max_norm().max(1.0));
            if !ratio.is_finite() {
                h *= 0.2;
                continue;
            }
            if ratio <= 1.0 {
                s += h;
                let renorms = self.renorms;
                self.accept(y5);
                // FSAL: k[6] is the slope at the new point unless A was rescaled.
                k[0] = if self.renorms == renorms {
                    k[6]
                } else {
                    seg.rhs(s.min(1.0), &self.a)?
                };
            }
            let factor = if ratio == 0.0 {
                5.0
            } else {
                (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        }
        Ok(())
    }

    fn rk4(&mut self, seg: &Segment, n: usize) -> Result<()> {
        let h = 1.0 / n as f64;
        for step in 0..n {
            let s = step as f64 * h;
            let a = self.a;
            let k1 = seg.rhs(s, &a)?;
            let k2 = seg.rhs(s + 0.5 * h, &(a + k1 * (0.5 * h)))?;
            let k3 = seg.rhs(s + 0.5 * h, &(a + k2 * (0.5 * h)))?;
            let k4 = seg.rhs(s + h, &(a + k3 * h))?;
            self.accept(a + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0));
        }
        Ok(())
    }
}

fn check_start(data: &WeierstrassData, path: &[C64], a0: &M2, det_tol: f64) -> Result<()> {
    if path.is_empty() {
        return Err(Error::InvalidArgument("empty integration path".into()));
    }
    // det carries roundoff of order eps·|A|².
    if (a0.det() - 1.0).norm() > det_tol * a0.max_norm().powi(2).max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "initial frame must have det 1 (det = {})",
            a0.det()
        )));
    }
    if let Some(&z) = path.iter().find(|&&z| !data.domain.contains(z)) {
        return Err(Error::OutsideDomain { z });
    }
    Ok(())
}

fn run(
    data: &WeierstrassData,
    path: &[C64],
    a0: M2,
    opts: &FrameOptions,
    fixed: Option<usize>,
) -> Result<Frame> {
    check_start(data, path, &a0, opts.det_tol)?;
    let mut st = Stepper {
        opts,
        a: a0,
        max_drift: (a0.det() - 1.0).norm(),
        renorms: 0,
        steps: 0,
    };
    for w in path.windows(2) {
        let seg = Segment {
            data,
            from: w[0],
            delta: w[1] - w[0],
        };
        if seg.delta.norm() == 0.0 {
            continue;
        }
        match fixed {
            Some(n) => st.rk4(&seg, n)?,
            None => st.adaptive(&seg)?,
        }
    }
    let z = *path.last().unwrap();
    Ok(Frame {
        z,
        a: st.a,
        det_drift: (st.a.det() - 1.0).norm(),
        max_drift: st.max_drift,
        renormalizations: st.renorms,
        path_id: path_hash(path),
    })
}

/// Integrates along a polyline with an adaptive embedded Runge–Kutta pair.
pub fn integrate_frame(
    data: &WeierstrassData,
    path: &[C64],
    a0: M2,
    opts: &FrameOptions,
) -> Result<Frame> {
    let f = run(data, path, a0, opts, None)?;
    if f.renormalizations > 0 {
        log::debug!("frame at {}: {} renormalizations", f.z, f.renormalizations);
    }
    Ok(f)
}

/// Classical RK4 with `steps` equal steps per segment.
pub fn integrate_fixed(
    data: &WeierstrassData,
    path: &[C64],
    a0: M2,
    steps: usize,
    opts: &FrameOptions,
) -> Result<Frame> {
    run(data, path, a0, opts, Some(steps.max(1)))
}

/// Frames on a lattice of a simply connected region.
#[derive(Debug, Clone)]
pub struct FrameGrid {
    pub region: Domain,
    pub base_z: C64,
    pub base_a: M2,
    pub nu: usize,
    pub nv: usize,
    pub h_grid: f64,
    /// Row-major `[j * nu + i]`.
    pub frames: Vec<Frame>,
}

impl FrameGrid {
    pub fn node(&self, i: usize, j: usize) -> &Frame {
        &self.frames[j * self.nu + i]
    }
}

/// Integrates up the base column, then along every row in parallel.
pub fn frame_grid(
    data: &WeierstrassData,
    region: &Domain,
    nu: usize,
    nv: usize,
    base_a: M2,
    opts: &FrameOptions,
) -> Result<FrameGrid> {
    region.validate()?;
    if !region.is_simply_connected() {
        return Err(Error::InvalidArgument(
            "frame grids need a simply connected region".into(),
        ));
    }
    if nu < 2 || nv < 2 {
        return Err(Error::InvalidArgument("grid resolution must be at least 2x2".into()));
    }
    if !data.domain.contains_region(region) {
        return Err(Error::InvalidArgument(format!(
            "region {region} is not inside the data domain {}",
            data.domain
        )));
    }
    let node = |i, j| region.lattice_node(i, j, nu, nv);
    let base_z = node(0, 0);
    let mut column = Vec::with_capacity(nv);
    column.push(Frame {
        path_id: path_hash(&[base_z]),
        ..Frame::new(base_z, base_a)
    });
    for j in 1..nv {
        let prev = column[j - 1];
        column.push(integrate_frame(data, &[prev.z, node(0, j)], prev.start_matrix(), opts)?);
    }
    let rows: Vec<Vec<Frame>> = column
        .par_iter()
        .enumerate()
        .map(|(j, start)| {
            let mut row = vec![*start];
            for i in 1..nu {
                let prev = row[i - 1];
                row.push(integrate_frame(data, &[prev.z, node(i, j)], prev.start_matrix(), opts)?);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(FrameGrid {
        region: *region,
        base_z,
        base_a,
        nu,
        nv,
        h_grid: region.lattice_spacing(nu, nv),
        frames: rows.into_iter().flatten().collect(),
    })
}

/// Re-integrates node `(i, j)` along the base row and then up column `i`,
/// returning the max-norm distance to the stored frame relative to `max(1, |A|)`.
pub fn path_consistency(
    data: &WeierstrassData,
    grid: &FrameGrid,
    i: usize,
    j: usize,
    opts: &FrameOptions,
) -> Result<f64> {
    let node = |i, j| grid.region.lattice_node(i, j, grid.nu, grid.nv);
    let mut a = grid.base_a;
    let mut z = grid.base_z;
    for k in 1..=i {
        let f = integrate_frame(data, &[z, node(k, 0)], a, opts)?;
        (z, a) = (f.z, f.start_matrix());
    }
    for k in 1..=j {
        let f = integrate_frame(data, &[z, node(i, k)], a, opts)?;
        (z, a) = (f.z, f.start_matrix());
    }
    let stored = grid.node(i, j).a;
    Ok((a - stored).max_norm() / stored.max_norm().max(1.0))
}
