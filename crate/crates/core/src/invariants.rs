//! C-values, classification of singular points and the closed-form
//! cuspidal-edge invariants of `f` and `g`.

use serde::{Deserialize, Serialize};

use crate::data::{AlphaBeta, WeierstrassData};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::front::{surface_jets, Branch, FieldSample, LambdaJet, Surface};
use crate::locus::{CurveSample, SingularCurve};
use crate::lorentz::volume_m;
use crate::mat2::{C64, I, M2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub class_tol: f64,
    pub nondeg_tol: f64,
    /// Largest `|λ|` accepted as a singular point.
    pub on_curve_tol: f64,
    pub lc_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            class_tol: 1e-7,
            nondeg_tol: 1e-8,
            on_curve_tol: 1e-8,
            lc_tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SingularityClass {
    CuspidalEdge,
    Swallowtail,
    NonDegenerateOther,
    Degenerate,
}

impl SingularityClass {
    pub fn name(self) -> &'static str {
        match self {
            SingularityClass::CuspidalEdge => "cuspidal_edge",
            SingularityClass::Swallowtail => "swallowtail",
            SingularityClass::NonDegenerateOther => "non_degenerate_other",
            SingularityClass::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub z: C64,
    pub c_h: f64,
    pub c_d: f64,
    pub class_f: SingularityClass,
    pub class_g: SingularityClass,
    pub swcond: f64,
    pub branch_phase: f64,
    /// `|C|` lies in `[class_tol/10, class_tol]`.
    pub ambiguous_f: bool,
    pub ambiguous_g: bool,
}

impl ClassificationRecord {
    pub fn class(&self, which: Surface) -> SingularityClass {
        match which {
            Surface::H => self.class_f,
            Surface::S => self.class_g,
        }
    }

    pub fn c(&self, which: Surface) -> f64 {
        match which {
            Surface::H => self.c_h,
            Surface::S => self.c_d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantSet {
    pub kappa_s: f64,
    pub kappa_t: f64,
    pub kappa_c: f64,
    pub kappa_n: f64,
    pub defined: bool,
}

impl InvariantSet {
    pub fn undefined() -> Self {
        InvariantSet {
            kappa_s: f64::NAN,
            kappa_t: f64::NAN,
            kappa_c: f64::NAN,
            kappa_n: f64::NAN,
            defined: false,
        }
    }
}

fn on_curve(lj: &LambdaJet, tol: f64) -> Result<()> {
    if lj.lambda.abs() > tol {
        return Err(Error::NotSingular {
            z: lj.z,
            lambda: lj.lambda,
        });
    }
    Ok(())
}

fn c_from_parts(lj: &LambdaJet, branch: &Branch) -> (f64, f64) {
    let q = lj.lambda_z / branch.sqrt_ab;
    ((I * q).re, q.re)
}

/// `(C_h, C_d) = (Re(iλ'/√(αβ)), Re(λ'/√(αβ)))` with the given root.
pub fn c_values(data: &WeierstrassData, z: C64, branch: &Branch) -> Result<(f64, f64)> {
    let ab = data.jets(z)?;
    let lj = LambdaJet::from_jets(z, &ab);
    on_curve(&lj, ClassifyOptions::default().on_curve_tol)?;
    check_branch(&ab, branch, z)?;
    Ok(c_from_parts(&lj, branch))
}

fn check_branch(ab: &AlphaBeta, branch: &Branch, z: C64) -> Result<()> {
    let r = branch.sqrt_ab * branch.sqrt_ab - ab.ab();
    if !(r.norm() <= 1e-8 * ab.ab().norm()) {
        return Err(Error::InvalidArgument(format!(
            "branch {} is not a square root of alpha*beta at z = {z}",
            branch.sqrt_ab
        )));
    }
    Ok(())
}

/// `Re((S(α) - S(β))/(αβ))`.
pub fn swallowtail_condition(ab: &AlphaBeta) -> Result<f64> {
    Ok(((ab.alpha.schwarzian()? - ab.beta.schwarzian()?) / ab.ab()).re)
}

fn classify_one(c: f64, nondeg: bool, swcond: f64, tol: f64) -> SingularityClass {
    if !nondeg {
        SingularityClass::Degenerate
    } else if c.abs() > tol {
        SingularityClass::CuspidalEdge
    } else if swcond.abs() > tol {
        SingularityClass::Swallowtail
    } else {
        SingularityClass::NonDegenerateOther
    }
}

pub fn classify(
    data: &WeierstrassData,
    z: C64,
    branch: &Branch,
    opts: &ClassifyOptions,
) -> Result<ClassificationRecord> {
    let ab = data.jets(z)?;
    let lj = LambdaJet::from_jets(z, &ab);
    on_curve(&lj, opts.on_curve_tol)?;
    check_branch(&ab, branch, z)?;
    let (c_h, c_d) = c_from_parts(&lj, branch);
    let swcond = swallowtail_condition(&ab)?;
    let nondeg = lj.lambda_z.norm() >= opts.nondeg_tol;
    let amb = |c: f64| (opts.class_tol / 10.0..=opts.class_tol).contains(&c.abs());
    Ok(ClassificationRecord {
        z,
        c_h,
        c_d,
        class_f: classify_one(c_h, nondeg, swcond, opts.class_tol),
        class_g: classify_one(c_d, nondeg, swcond, opts.class_tol),
        swcond,
        branch_phase: branch.phase,
        ambiguous_f: amb(c_h),
        ambiguous_g: amb(c_d),
    })
}

/// Closed forms of `κ_s, κ_t, κ_c` (and `κ_n = 0`) at a cuspidal edge.
pub fn closed_form_invariants(
    data: &WeierstrassData,
    z: C64,
    branch: &Branch,
    which: Surface,
    opts: &ClassifyOptions,
) -> Result<InvariantSet> {
    let rec = classify(data, z, branch, opts)?;
    if rec.class(which) != SingularityClass::CuspidalEdge {
        return Ok(InvariantSet::undefined());
    }
    let ab = data.jets(z)?;
    let lz2 = LambdaJet::from_jets(z, &ab).lambda_z.norm_sqr();
    let a = ab.alpha.d0().norm();
    let a4 = a.powi(4);
    let (ch, cd) = (rec.c_h, rec.c_d);
    let set = match which {
        Surface::H => InvariantSet {
            kappa_s: -lz2 / (4.0 * a4 * ch.abs()),
            kappa_t: torsion_from_c(which, ch, cd),
            kappa_c: 4.0 * a * ch / ch.abs().powf(1.5),
            kappa_n: 0.0,
            defined: true,
        },
        Surface::S => InvariantSet {
            kappa_s: -lz2 / (4.0 * a4 * cd.abs()),
            kappa_t: torsion_from_c(which, ch, cd),
            kappa_c: -4.0 * a * cd / cd.abs().powf(1.5),
            kappa_n: 0.0,
            defined: true,
        },
    };
    Ok(set)
}

/// A value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Cuspidal torsion from the C-values: `-C_d/C_h` for H, `-C_h/C_d` for S.
pub fn torsion_from_c(which: Surface, ch: f64, cd: f64) -> f64 {
    match which {
        Surface::H => -cd / ch,
        Surface::S => -ch / cd,
    }
}

fn kappa_t_at(data: &WeierstrassData, s: &CurveSample, which: Surface) -> Result<f64> {
    let (ch, cd) = c_values(data, s.z, &s.field.branch)?;
    Ok(torsion_from_c(which, ch, cd))
}

/// Sample at `index + k`, wrapping on closed curves, with its unwrapped `t`.
fn offset_sample(curve: &SingularCurve, index: usize, k: isize) -> Option<(f64, &CurveSample)> {
    let n = curve.samples.len() as isize;
    let j = index as isize + k;
    if (0..n).contains(&j) {
        let s = &curve.samples[j as usize];
        return Some((s.t, s));
    }
    if !curve.closed {
        return None;
    }
    let len = curve.length();
    let w = j.rem_euclid(n);
    let s = &curve.samples[w as usize];
    let shift = if j < 0 { -len } else { len };
    Some((s.t + shift, s))
}

/// Derivative of a three-point quadratic interpolant at the middle node.
fn three_point(t: [f64; 3], y: [f64; 3]) -> f64 {
    let (h1, h2) = (t[1] - t[0], t[2] - t[1]);
    -h2 / (h1 * (h1 + h2)) * y[0] + (h2 - h1) / (h1 * h2) * y[1] + h1 / (h2 * (h1 + h2)) * y[2]
}

/// `dκ_t/dt` at a sample by centered differences with one Richardson level.
pub fn torsion_derivative(
    data: &WeierstrassData,
    curve: &SingularCurve,
    index: usize,
    which: Surface,
) -> Result<Estimate> {
    let mut pts = Vec::with_capacity(5);
    for k in -2isize..=2 {
        let (t, s) = offset_sample(curve, index, k).ok_or(Error::InsufficientSamples { index })?;
        pts.push((t, kappa_t_at(data, s, which)?));
    }
    let d1 = three_point([pts[1].0, pts[2].0, pts[3].0], [pts[1].1, pts[2].1, pts[3].1]);
    let d2 = three_point([pts[0].0, pts[2].0, pts[4].0], [pts[0].1, pts[2].1, pts[4].1]);
    Ok(Estimate {
        value: (4.0 * d1 - d2) / 3.0,
        error: (d1 - d2).abs() / 3.0,
    })
}

/// Classification of every sample, using each sample's tracked branch.
pub fn classify_curve(
    data: &WeierstrassData,
    curve: &SingularCurve,
    opts: &ClassifyOptions,
) -> Result<Vec<ClassificationRecord>> {
    curve
        .samples
        .iter()
        .map(|s| classify(data, s.z, &s.field.branch, opts))
        .collect()
}

/// Maximal runs of samples that are unambiguous cuspidal edges of `which`.
pub fn cuspidal_arcs(
    data: &WeierstrassData,
    curve: &SingularCurve,
    which: Surface,
    opts: &ClassifyOptions,
) -> Result<Vec<SingularCurve>> {
    let recs = classify_curve(data, curve, opts)?;
    let good: Vec<bool> = recs
        .iter()
        .map(|r| {
            r.class(which) == SingularityClass::CuspidalEdge
                && !(match which {
                    Surface::H => r.ambiguous_f,
                    Surface::S => r.ambiguous_g,
                })
        })
        .collect();
    if good.iter().all(|&g| g) {
        return Ok(vec![curve.clone()]);
    }
    let mut arcs = Vec::new();
    let mut cur: Vec<CurveSample> = Vec::new();
    for (s, &g) in curve.samples.iter().zip(&good) {
        if g {
            cur.push(*s);
        } else if !cur.is_empty() {
            arcs.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        // A closed curve's last arc continues into its first.
        if curve.closed && good[0] && !arcs.is_empty() {
            let len = curve.length();
            let first = arcs.remove(0);
            cur.extend(first.into_iter().map(|mut s| {
                s.t += len;
                s
            }));
        }
        arcs.push(cur);
    }
    Ok(arcs
        .into_iter()
        .map(|samples| SingularCurve {
            samples,
            closed: false,
            end_reasons: curve.end_reasons,
            degenerate_at: None,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub line_of_curvature: bool,
    pub cone_like_dual: bool,
    pub max_abs_torsion: f64,
    /// Max `|Ω(ξk, ν, ξν)|` with `k` the surface and `ν` its dual.
    pub lc_residual: f64,
    /// Max `|Im(ξ/η)|/|ξ/η|` for the dual null direction.
    pub max_parallel_defect: f64,
}

/// Line-of-curvature and cone-like tests along a curve of cuspidal edges.
pub fn curve_report(
    data: &WeierstrassData,
    curve: &SingularCurve,
    which: Surface,
    opts: &ClassifyOptions,
) -> Result<CurveReport> {
    let recs = classify_curve(data, curve, opts)?;
    let bad: Vec<usize> = recs
        .iter()
        .enumerate()
        .filter(|(_, r)| r.class(which) != SingularityClass::CuspidalEdge)
        .map(|(i, _)| i)
        .collect();
    if !bad.is_empty() {
        return Err(Error::MixedClassification { indices: bad });
    }
    let mut max_t: f64 = 0.0;
    let mut max_omega: f64 = 0.0;
    let mut max_par: f64 = 0.0;
    for (s, r) in curve.samples.iter().zip(&recs) {
        let kt = torsion_from_c(which, r.c_h, r.c_d);
        max_t = max_t.max(kt.abs());
        // Ω is invariant under isometries, so the frame may be taken as I at each sample.
        let (f, g) = surface_jets(&Frame::new(s.z, M2::identity()), data)?;
        let (k, nu) = match which {
            Surface::H => (f, g),
            Surface::S => (g, f),
        };
        let xi = s.field.xi;
        let om = volume_m(&k.p_inv, &k.dir(xi), &nu.p.m, &nu.dir(xi));
        max_omega = max_omega.max(om.norm());
        let q = xi / s.field.eta(which.dual());
        max_par = max_par.max(q.im.abs() / q.norm());
    }
    let loc = max_t <= opts.lc_tol && max_omega <= opts.lc_tol;
    Ok(CurveReport {
        line_of_curvature: loc,
        cone_like_dual: loc && max_par <= 1e-6,
        max_abs_torsion: max_t,
        lc_residual: max_omega,
        max_parallel_defect: max_par,
    })
}

/// A point where `C_h` (surface H) or `C_d` (surface S) vanishes on a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialPoint {
    pub z: C64,
    pub t: f64,
    /// The surface whose C-value vanishes here.
    pub surface: Surface,
    pub record: ClassificationRecord,
}

/// Projection of `z` onto `λ = 0` along the gradient.
fn project_to_curve(data: &WeierstrassData, mut z: C64) -> Result<LambdaJet> {
    for _ in 0..30 {
        let lj = crate::front::lambda_jet(data, z)?;
        if lj.lambda.abs() <= 1e-13 || lj.lambda_z.norm() == 0.0 {
            return Ok(lj);
        }
        z -= lj.lambda / (2.0 * lj.lambda_z);
    }
    crate::front::lambda_jet(data, z)
}

/// Refines the zeros of `C_h` and `C_d` between consecutive samples and
/// classifies the refined points.
pub fn special_points(
    data: &WeierstrassData,
    curve: &SingularCurve,
    opts: &ClassifyOptions,
) -> Result<Vec<SpecialPoint>> {
    let n = curve.samples.len();
    let pairs = if curve.closed { n } else { n.saturating_sub(1) };
    let mut out = Vec::new();
    for k in 0..pairs {
        let s0 = &curve.samples[k];
        let s1 = &curve.samples[(k + 1) % n];
        let t1 = if k + 1 == n { s0.t + (s1.z - s0.z).norm() } else { s1.t };
        let c0 = c_from_parts(&s0.lambda, &s0.field.branch);
        let f1 = FieldSample::from_parts(&s1.lambda, data.jets(s1.z)?.ab(), Some(&s0.field))?;
        let c1 = c_from_parts(&s1.lambda, &f1.branch);
        for which in [Surface::H, Surface::S] {
            let pick = |c: (f64, f64)| match which {
                Surface::H => c.0,
                Surface::S => c.1,
            };
            let (a, b) = (pick(c0), pick(c1));
            if a == 0.0 || a * b >= 0.0 {
                if a == 0.0 {
                    let rec = classify(data, s0.z, &s0.field.branch, opts)?;
                    out.push(SpecialPoint { z: s0.z, t: s0.t, surface: which, record: rec });
                }
                continue;
            }
            let eval = |s: f64| -> Result<(f64, LambdaJet, FieldSample)> {
                let lj = project_to_curve(data, s0.z + (s1.z - s0.z) * s)?;
                let fs = FieldSample::from_parts(&lj, data.jets(lj.z)?.ab(), Some(&s0.field))?;
                Ok((pick(c_from_parts(&lj, &fs.branch)), lj, fs))
            };
            // Illinois variant of regula falsi.
            let (mut lo, mut hi, mut flo, mut fhi) = (0.0, 1.0, a, b);
            let mut side = 0;
            let mut best = eval(0.5)?;
            let mut best_s = 0.5;
            for _ in 0..100 {
                let s = (lo * fhi - hi * flo) / (fhi - flo);
                let r = eval(s)?;
                best = r;
                best_s = s;
                if r.0 == 0.0 || r.0.abs() < 1e-15 || hi - lo < 1e-15 {
                    break;
                }
                if r.0 * fhi < 0.0 {
                    lo = hi;
                    flo = fhi;
                    hi = s;
                    fhi = r.0;
                    side = 0;
                } else {
                    hi = s;
                    fhi = r.0;
                    if side == 1 {
                        flo *= 0.5;
                    }
                    side = 1;
                }
                if lo > hi {
                    std::mem::swap(&mut lo, &mut hi);
                    std::mem::swap(&mut flo, &mut fhi);
                }
            }
            let (_, lj, fs) = best;
            let rec = classify(data, lj.z, &fs.branch, opts)?;
            out.push(SpecialPoint {
                z: lj.z,
                t: s0.t + (t1 - s0.t) * best_s,
                surface: which,
                record: rec,
            });
        }
    }
    Ok(out)
}

/// A zero crossing of `κ_t` between two samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorsionZero {
    pub z: C64,
    pub t: f64,
    /// `dκ_t/dt` at the nearer sample.
    pub slope: Estimate,
}

/// Sign changes of `κ_t` for `which` at which `C` of `which` keeps its sign.
pub fn torsion_zeros(
    data: &WeierstrassData,
    curve: &SingularCurve,
    which: Surface,
) -> Result<Vec<TorsionZero>> {
    let kt: Vec<(f64, f64)> = curve
        .samples
        .iter()
        .map(|s| {
            let (ch, cd) = c_from_parts(&s.lambda, &s.field.branch);
            let c = if which == Surface::H { ch } else { cd };
            (torsion_from_c(which, ch, cd), c)
        })
        .collect();
    let mut out = Vec::new();
    for k in 0..kt.len().saturating_sub(1) {
        let ((a, ca), (b, cb)) = (kt[k], kt[k + 1]);
        if a * b < 0.0 && ca * cb > 0.0 {
            let w = a / (a - b);
            let (s0, s1) = (&curve.samples[k], &curve.samples[k + 1]);
            let near = if w < 0.5 { k } else { k + 1 };
            out.push(TorsionZero {
                z: s0.z + (s1.z - s0.z) * w,
                t: s0.t + (s1.t - s0.t) * w,
                slope: torsion_derivative(data, curve, near, which)?,
            });
        }
    }
    Ok(out)
}
