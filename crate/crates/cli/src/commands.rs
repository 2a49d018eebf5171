//! `trace`, `classify`, `invariants` and `mesh`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use flatfront_core::lorentz::{herm_vec, project};
use flatfront_core::*;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Job, RegionSpec};
use crate::output::{num, write_atomic, write_json, Table};
use crate::CliError;

type Res<T> = std::result::Result<T, CliError>;

pub fn curves(job: &Job) -> Res<Vec<SingularCurve>> {
    let cv = trace_all(&job.data, &job.region, job.trace.grid_n, &job.trace_options())?;
    log::info!("traced {} curve(s) in {}", cv.len(), job.region);
    Ok(cv)
}

fn uv(z: C64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

pub fn trace(job: &Job, out: &Path) -> Res<Vec<PathBuf>> {
    let cv = curves(job)?;
    let mut t = Table::new(&[
        "curve_id", "t", "u", "v", "lambda", "lambda_z_re", "lambda_z_im", "branch_phase",
    ]);
    for (id, c) in cv.iter().enumerate() {
        for s in &c.samples {
            let [u, v] = uv(s.z);
            t.row(&[
                id.to_string(),
                num(s.t),
                u,
                v,
                num(s.lambda.lambda),
                num(s.lambda.lambda_z.re),
                num(s.lambda.lambda_z.im),
                num(s.field.branch.phase),
            ]);
        }
    }
    Ok(vec![t.save(&out.join(&job.output.curves))?])
}

const CLASSIFY_HEADER: [&str; 9] = [
    "curve_id", "t", "u", "v", "C_h", "C_d", "class_f", "class_g", "swcond",
];

fn classify_fields(id: usize, s: &CurveSample, r: &ClassificationRecord) -> Vec<String> {
    let [u, v] = uv(s.z);
    vec![
        id.to_string(),
        num(s.t),
        u,
        v,
        num(r.c_h),
        num(r.c_d),
        r.class_f.name().into(),
        r.class_g.name().into(),
        num(r.swcond),
    ]
}

fn records(job: &Job, cv: &[SingularCurve]) -> Res<Vec<Vec<ClassificationRecord>>> {
    let o = job.classify_options();
    Ok(cv
        .par_iter()
        .map(|c| classify_curve(&job.data, c, &o))
        .collect::<Result<Vec<_>>>()?)
}

pub fn classify(job: &Job, out: &Path) -> Res<Vec<PathBuf>> {
    let cv = curves(job)?;
    let recs = records(job, &cv)?;
    let mut t = Table::new(&CLASSIFY_HEADER);
    for (id, (c, rs)) in cv.iter().zip(&recs).enumerate() {
        for (s, r) in c.samples.iter().zip(rs) {
            t.row(&classify_fields(id, s, r));
        }
    }
    Ok(vec![t.save(&out.join(&job.output.classify))?])
}

/// Whether samples `i-2..=i+2` exist (wrapping on loops) and are cuspidal edges of `which`.
fn stencil_cuspidal(c: &SingularCurve, rs: &[ClassificationRecord], i: usize, which: Surface) -> bool {
    let n = rs.len() as isize;
    (-2isize..=2).all(|k| {
        let j = i as isize + k;
        let j = if c.closed { j.rem_euclid(n) } else { j };
        (0..n).contains(&j) && rs[j as usize].class(which) == SingularityClass::CuspidalEdge
    })
}

#[derive(Serialize)]
#[serde(untagged)]
enum ReportOrError {
    Report(CurveReport),
    Error { error: String },
}

#[derive(Serialize)]
struct SurfaceSummary {
    /// Whole-curve report; an error when the curve is not all cuspidal edges.
    curve: ReportOrError,
    line_of_curvature: bool,
    cone_like_dual: bool,
    cuspidal_samples: usize,
    ambiguous_samples: usize,
    /// Reports for maximal cuspidal-edge arcs with at least 5 samples.
    arcs: Vec<ArcSummary>,
    torsion_zeros: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct ArcSummary {
    t_start: f64,
    t_end: f64,
    samples: usize,
    report: CurveReport,
}

#[derive(Serialize)]
struct CurveSummary {
    curve_id: usize,
    closed: bool,
    end_reasons: [&'static str; 2],
    degenerate_at: Option<[f64; 2]>,
    samples: usize,
    length: f64,
    swallowtails_f: Vec<[f64; 2]>,
    swallowtails_g: Vec<[f64; 2]>,
    h: SurfaceSummary,
    s: SurfaceSummary,
}

fn pt(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn surface_summary(
    job: &Job,
    c: &SingularCurve,
    rs: &[ClassificationRecord],
    which: Surface,
) -> Res<SurfaceSummary> {
    let o = job.classify_options();
    let curve = match curve_report(&job.data, c, which, &o) {
        Ok(r) => ReportOrError::Report(r),
        Err(Error::MixedClassification { indices }) => ReportOrError::Error {
            error: format!("{} sample(s) are not cuspidal edges", indices.len()),
        },
        Err(e) => return Err(e.into()),
    };
    let (loc, cone) = match &curve {
        ReportOrError::Report(r) => (r.line_of_curvature, r.cone_like_dual),
        ReportOrError::Error { .. } => (false, false),
    };
    let mut arcs = Vec::new();
    for a in cuspidal_arcs(&job.data, c, which, &o)? {
        if a.samples.len() >= 5 {
            arcs.push(ArcSummary {
                t_start: a.samples[0].t,
                t_end: a.samples[a.samples.len() - 1].t,
                samples: a.samples.len(),
                report: curve_report(&job.data, &a, which, &o)?,
            });
        }
    }
    let ambiguous = |r: &ClassificationRecord| match which {
        Surface::H => r.ambiguous_f,
        Surface::S => r.ambiguous_g,
    };
    Ok(SurfaceSummary {
        curve,
        line_of_curvature: loc,
        cone_like_dual: cone,
        cuspidal_samples: rs.iter().filter(|r| r.class(which) == SingularityClass::CuspidalEdge).count(),
        ambiguous_samples: rs.iter().filter(|r| ambiguous(r)).count(),
        arcs,
        torsion_zeros: torsion_zeros(&job.data, c, which)?.iter().map(|z| pt(z.z)).collect(),
    })
}

pub fn invariants(job: &Job, out: &Path) -> Res<Vec<PathBuf>> {
    let cv = curves(job)?;
    let recs = records(job, &cv)?;
    let o = job.classify_options();
    let mut header = CLASSIFY_HEADER.to_vec();
    header.extend([
        "kappa_s_h", "kappa_t_h", "kappa_c_h", "kappa_s_d", "kappa_t_d", "kappa_c_d", "dkappat_h_dt",
        "dkappat_d_dt",
    ]);
    let rows: Vec<Vec<Vec<String>>> = cv
        .par_iter()
        .zip(&recs)
        .enumerate()
        .map(|(id, (c, rs))| {
            c.samples
                .iter()
                .zip(rs)
                .enumerate()
                .map(|(i, (s, r))| {
                    let mut f = classify_fields(id, s, r);
                    let mut kt = Vec::new();
                    for which in [Surface::H, Surface::S] {
                        let k = closed_form_invariants(&job.data, s.z, &s.field.branch, which, &o)?;
                        let d = if k.defined && stencil_cuspidal(c, rs, i, which) {
                            torsion_derivative(&job.data, c, i, which)?.value
                        } else {
                            f64::NAN
                        };
                        f.extend([k.kappa_s, k.kappa_t, k.kappa_c].map(|x| num(if k.defined { x } else { f64::NAN })));
                        kt.push(num(d));
                    }
                    f.extend(kt);
                    Ok(f)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&header);
    for r in rows.iter().flatten() {
        t.row(r);
    }
    let mut files = vec![t.save(&out.join(&job.output.invariants))?];

    let summaries = cv
        .iter()
        .zip(&recs)
        .enumerate()
        .map(|(id, (c, rs))| {
            let sp = special_points(&job.data, c, &o)?;
            let sw = |f: fn(&ClassificationRecord) -> SingularityClass| {
                sp.iter()
                    .filter(|p| f(&p.record) == SingularityClass::Swallowtail)
                    .map(|p| pt(p.z))
                    .collect()
            };
            Ok(CurveSummary {
                curve_id: id,
                closed: c.closed,
                end_reasons: c.end_reasons.map(|r| r.name()),
                degenerate_at: c.degenerate_at.map(pt),
                samples: c.samples.len(),
                length: c.length(),
                swallowtails_f: sw(|r| r.class_f),
                swallowtails_g: sw(|r| r.class_g),
                h: surface_summary(job, c, rs, Surface::H)?,
                s: surface_summary(job, c, rs, Surface::S)?,
            })
        })
        .collect::<Res<Vec<_>>>()?;
    let path = out.join(&job.output.summary);
    write_json(&path, &summaries)?;
    files.push(path);
    Ok(files)
}

/// Frames on the region lattice, all integrated from the lower-left node with `A = I`.
fn lattice_frames(job: &Job, nu: usize, nv: usize) -> Res<Vec<Frame>> {
    let opts = job.frame_options();
    if job.region.is_simply_connected() {
        return Ok(frame_grid(&job.data, &job.region, nu, nv, M2::identity(), &opts)?.frames);
    }
    let base = job.region.base_point();
    let nodes: Vec<C64> = job.region.lattice(nu, nv).into_iter().flatten().collect();
    Ok(nodes
        .par_iter()
        .map(|&z| integrate_frame(&job.data, &job.region.path(base, z), M2::identity(), &opts))
        .collect::<Result<Vec<_>>>()?)
}

fn surface_point(a: &M2, which: Surface) -> Res<HermVector> {
    let m = match which {
        Surface::H => *a * a.adjoint(),
        Surface::S => *a * flatfront_core::lorentz::E3 * a.adjoint(),
    }
    .hermitian_part();
    Ok(match which {
        Surface::H => HermVector::point_h3(m)?,
        Surface::S => HermVector::point_s31(m)?,
    })
}

struct Vertex {
    xyz: Vec<f64>,
    raw: [f64; 4],
}

fn vertex(a: &M2, which: Surface) -> Res<Vertex> {
    let p = surface_point(a, which)?;
    let model = match which {
        Surface::H => Model::PoincareBall,
        Surface::S => Model::HollowBall,
    };
    Ok(Vertex {
        xyz: project(&p, model)?,
        raw: herm_vec(&p)?,
    })
}

fn push_vertex(obj: &mut String, v: &Vertex, raw: bool) {
    if raw {
        let _ = writeln!(obj, "# raw {} {} {} {}", num(v.raw[0]), num(v.raw[1]), num(v.raw[2]), num(v.raw[3]));
    }
    let _ = writeln!(obj, "v {} {} {}", num(v.xyz[0]), num(v.xyz[1]), num(v.xyz[2]));
}

#[derive(Serialize)]
struct MeshMeta {
    data: String,
    region: RegionSpec,
    resolution: [usize; 2],
    base_z: [f64; 2],
    models: [(&'static str, &'static str); 2],
    vertices: usize,
    faces: usize,
    curves: Vec<usize>,
    max_det_drift: f64,
}

pub fn mesh(job: &Job, out: &Path) -> Res<Vec<PathBuf>> {
    let [nu, nv] = job.mesh.resolution;
    let frames = lattice_frames(job, nu, nv)?;
    let cv = curves(job)?;
    let base = job.region.base_point();
    let opts = job.frame_options();
    let curve_frames: Vec<Vec<Frame>> = cv
        .par_iter()
        .map(|c| {
            c.samples
                .iter()
                .map(|s| integrate_frame(&job.data, &job.region.path(base, s.z), M2::identity(), &opts))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let max_drift = frames
        .iter()
        .chain(curve_frames.iter().flatten())
        .map(|f| f.max_drift)
        .fold(0.0, f64::max);
    let mut faces = 0;
    let mut files = Vec::new();
    for (which, name, space, file) in [
        (Surface::H, "front_h", "H^3, Poincare ball", &job.output.mesh_h),
        (Surface::S, "front_s", "S^3_1, hollow ball", &job.output.mesh_s),
    ] {
        let mut obj = String::new();
        let _ = writeln!(obj, "# {name} in {space}: {} on {}", job.data.name(), job.region);
        let _ = writeln!(obj, "o {name}");
        for f in &frames {
            push_vertex(&mut obj, &vertex(&f.a, which)?, job.mesh.raw_comments);
        }
        faces = 0;
        for j in 0..nv - 1 {
            for i in 0..nu - 1 {
                let k = |i: usize, j: usize| j * nu + i + 1;
                let _ = writeln!(obj, "f {} {} {}", k(i, j), k(i + 1, j), k(i + 1, j + 1));
                let _ = writeln!(obj, "f {} {} {}", k(i, j), k(i + 1, j + 1), k(i, j + 1));
                faces += 2;
            }
        }
        let mut next = frames.len() + 1;
        for (id, fs) in curve_frames.iter().enumerate() {
            if fs.len() < 2 {
                continue;
            }
            let _ = writeln!(obj, "o singular_curve_{id}");
            for f in fs {
                push_vertex(&mut obj, &vertex(&f.a, which)?, job.mesh.raw_comments);
            }
            let mut idx: Vec<usize> = (next..next + fs.len()).collect();
            if cv[id].closed {
                idx.push(next);
            }
            let list: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(obj, "l {}", list.join(" "));
            next += fs.len();
        }
        let path = out.join(file);
        write_atomic(&path, obj.as_bytes())?;
        files.push(path);
    }
    let meta = MeshMeta {
        data: job.data.name(),
        region: job.region.into(),
        resolution: [nu, nv],
        base_z: pt(base),
        models: [("front_h", "poincare_ball"), ("front_s", "hollow_ball")],
        vertices: frames.len(),
        faces,
        curves: curve_frames.iter().map(|f| f.len()).collect(),
        max_det_drift: max_drift,
    };
    let path = out.join(&job.output.mesh_meta);
    write_json(&path, &meta)?;
    files.push(path);
    Ok(files)
}
