//! `verify`: every property suite on the configured family, as a JSON report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use flatfront_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::curves;
use crate::config::{Job, RegionSpec};
use crate::output::write_json;
use crate::CliError;

type Res<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, max_residual: f64, tolerance: f64, samples: usize, detail: String) -> Self {
        Check {
            name,
            pass: max_residual <= tolerance,
            max_residual,
            tolerance,
            samples,
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub data: String,
    pub region: RegionSpec,
    pub seed: u64,
    pub curves: usize,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub swallowtails_f: Vec<[f64; 2]>,
    pub swallowtails_g: Vec<[f64; 2]>,
    pub torsion_zeros_h: Vec<[f64; 2]>,
    pub torsion_zeros_d: Vec<[f64; 2]>,
    pub seconds: f64,
}

impl Report {
    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect()
    }
}

fn pt(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn max(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

/// Up to `n` evenly spread samples.
fn spread<T: Clone>(v: &[T], n: usize) -> Vec<T> {
    if v.len() <= n {
        return v.to_vec();
    }
    (0..n).map(|k| v[k * v.len() / n].clone()).collect()
}

fn sampler(job: &Job, which: Surface, base: C64) -> Sampler {
    let mut s = Sampler::with_base(&job.data, which, base);
    s.frame_opts = job.frame_options();
    s.opts.h12 = job.tol.h_fd;
    s.opts.h3 = 5.0 * job.tol.h_fd;
    s
}

struct Ctx<'a> {
    job: &'a Job,
    samples: Vec<CurveSample>,
    records: Vec<ClassificationRecord>,
}

impl Ctx<'_> {
    fn cuspidal(&self, which: Surface, c_min: f64) -> Vec<CurveSample> {
        self.samples
            .iter()
            .zip(&self.records)
            .filter(|(_, r)| r.class(which) == SingularityClass::CuspidalEdge && r.c(which).abs() >= c_min)
            .map(|(s, _)| *s)
            .collect()
    }
}

fn on_curve(cx: &Ctx) -> Check {
    let lam = max(cx.samples.iter().map(|s| s.lambda.lambda.abs()));
    let weakest = cx.samples.iter().map(|s| s.lambda.lambda_z.norm()).fold(f64::INFINITY, f64::min);
    let mut c = Check::new(
        "on_curve",
        lam,
        1e-10,
        cx.samples.len(),
        format!("min |lambda'| = {weakest:.3e}"),
    );
    c.pass &= cx.samples.is_empty() || weakest >= 1e-8;
    c
}

fn oracle_agreement(cx: &Ctx) -> Res<Vec<Check>> {
    let o = cx.job.classify_options();
    let mut ratio: f64 = 0.0;
    let mut kn: f64 = 0.0;
    let mut leta: f64 = 0.0;
    let mut worst = String::new();
    let mut count = 0;
    for which in [Surface::H, Surface::S] {
        let picked = spread(&cx.cuspidal(which, 1e-2), cx.job.verify.oracle_samples);
        let Some(first) = picked.first() else { continue };
        let s = sampler(cx.job, which, first.z);
        let rows = picked
            .par_iter()
            .map(|p| {
                let br = &p.field.branch;
                let d = definition_invariants(&s, p.z, br)?;
                let k = closed_form_invariants(&cx.job.data, p.z, br, which, &o)?;
                let (ch, cd) = c_values(&cx.job.data, p.z, br)?;
                let c = if which == Surface::H { ch } else { cd };
                let tol = |v: f64| 1e-5f64.max(1e-4 * v.abs());
                let r = [
                    (d.set.kappa_s - k.kappa_s).abs() / tol(k.kappa_s),
                    (d.set.kappa_t - k.kappa_t).abs() / tol(k.kappa_t),
                    (d.set.kappa_c - k.kappa_c).abs() / tol(k.kappa_c),
                ];
                Ok((max(r), d.set.kappa_n.abs(), (d.lambda_eta - 2.0 * c).abs() / (2.0 * c).abs(), p.z))
            })
            .collect::<Result<Vec<_>>>()?;
        for (r, n, l, z) in rows {
            if r > ratio {
                ratio = r;
                worst = format!("{} at {:.4}", which.label(), z);
            }
            kn = kn.max(n);
            leta = leta.max(l);
            count += 1;
        }
    }
    Ok(vec![
        Check::new(
            "oracle_agreement",
            ratio,
            1.0,
            count,
            format!("max |closed - oracle| / max(1e-5, 1e-4 |closed|); worst {worst}"),
        ),
        Check::new("kappa_n_vanishes", kn, 1e-6, count, "max |kappa_n| from the oracle".into()),
        Check::new(
            "null_derivative_of_identifier",
            leta,
            1e-8,
            count,
            "max |d lambda(eta) - 2C| / |2C|".into(),
        ),
    ])
}

fn invariant_relations(cx: &Ctx) -> Res<Vec<Check>> {
    let o = cx.job.classify_options();
    let data = &cx.job.data;
    let mut ks: f64 = f64::NEG_INFINITY;
    let mut n_cusp = 0;
    let mut recip: f64 = 0.0;
    let mut n_both = 0;
    let mut flip: f64 = 0.0;
    for (s, r) in cx.samples.iter().zip(&cx.records) {
        let br = &s.field.branch;
        let h = closed_form_invariants(data, s.z, br, Surface::H, &o)?;
        let d = closed_form_invariants(data, s.z, br, Surface::S, &o)?;
        for k in [h, d].iter().filter(|k| k.defined) {
            ks = ks.max(k.kappa_s);
            n_cusp += 1;
        }
        for (which, k) in [(Surface::H, h), (Surface::S, d)] {
            if !k.defined {
                continue;
            }
            let f = closed_form_invariants(data, s.z, &br.flipped(), which, &o)?;
            let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
            flip = flip
                .max(rel(f.kappa_s, k.kappa_s))
                .max(rel(f.kappa_t, k.kappa_t))
                .max(rel(f.kappa_c, -k.kappa_c));
        }
        if r.c_h.abs().min(r.c_d.abs()) > o.class_tol {
            recip = recip.max((h.kappa_t * d.kappa_t - 1.0).abs());
            n_both += 1;
        }
    }
    let mut neg = Check::new(
        "kappa_s_negative",
        if n_cusp == 0 { 0.0 } else { ks },
        0.0,
        n_cusp,
        "max kappa_s over cuspidal-edge samples of both surfaces".into(),
    );
    neg.pass = n_cusp == 0 || ks < 0.0;
    Ok(vec![
        neg,
        Check::new(
            "torsion_reciprocity",
            recip,
            1e-8,
            n_both,
            "max |kappa_t^h kappa_t^d - 1| where both C-values are nonzero".into(),
        ),
        Check::new(
            "branch_flip",
            flip,
            1e-12,
            n_cusp,
            "kappa_s, kappa_t invariant and kappa_c odd under the other root".into(),
        ),
    ])
}

fn lemmas(cx: &Ctx) -> Res<Check> {
    let picked = spread(&cx.samples, cx.job.verify.lemma_samples);
    let Some(first) = picked.first() else {
        return Ok(Check::new("lemma_suite", 0.0, 1e-7, 0, "no singular points".into()));
    };
    let s = sampler(cx.job, Surface::H, first.z);
    let reps = picked
        .par_iter()
        .map(|p| lemma_suite(&cx.job.data, &s.frame(p.z)?, &p.field.branch))
        .collect::<Result<Vec<_>>>()?;
    let worst = reps
        .iter()
        .filter_map(|r| r.worst().map(|w| (w, r.z)))
        .max_by(|a, b| a.0 .1.total_cmp(&b.0 .1));
    let detail = worst.map_or(String::new(), |((name, _), z)| format!("worst `{name}` at {z:.4}"));
    Ok(Check::new(
        "lemma_suite",
        max(reps.iter().map(|r| r.max_residual())),
        1e-7,
        reps.len(),
        detail,
    ))
}

/// Random region points with `|λ| >= 1e-2`.
fn probes(job: &Job) -> Res<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(job.seed);
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < job.verify.probes && tries < 100 * job.verify.probes.max(1) {
        tries += 1;
        let z = match job.region {
            Domain::Rectangle { u, v } => C64::new(rng.gen_range(u[0]..u[1]), rng.gen_range(v[0]..v[1])),
            Domain::Sector { r, theta } => {
                C64::from_polar(rng.gen_range(r[0]..r[1]), rng.gen_range(theta[0]..theta[1]))
            }
            Domain::Annulus { r } => C64::from_polar(
                rng.gen_range(r[0]..r[1]),
                rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
            ),
        };
        if job.data.lambda(z)?.abs() >= 1e-2 {
            out.push(z);
        }
    }
    Ok(out)
}

fn singular_sets(cx: &Ctx, probes: &[C64]) -> Res<Check> {
    let s = sampler(cx.job, Surface::H, cx.job.region.base_point());
    let on = cx
        .samples
        .par_iter()
        .step_by(3)
        .map(|p| signed_area_density(&s, p.z).map(|(a, b)| a.abs().max(b.abs())))
        .collect::<Result<Vec<_>>>()?;
    let off = probes
        .par_iter()
        .map(|&z| signed_area_density(&s, z).map(|(a, b)| a.abs().min(b.abs())))
        .collect::<Result<Vec<_>>>()?;
    let min_off = off.iter().copied().fold(f64::INFINITY, f64::min);
    let mut c = Check::new(
        "singular_set_coincidence",
        max(on.iter().copied()),
        1e-7,
        on.len() + off.len(),
        format!("max |Lambda| on curves; min |Lambda| at {} probes = {min_off:.3e}", off.len()),
    );
    c.pass &= off.is_empty() || min_off > 1e-4;
    Ok(c)
}

fn duality(cx: &Ctx, probes: &[C64]) -> Res<Check> {
    let s = sampler(cx.job, Surface::H, cx.job.region.base_point());
    let res = probes
        .par_iter()
        .map(|&z| {
            let r = duality_residuals(&s, z)?;
            // Products of two surface points carry roundoff of order eps·|A|⁴.
            let scale = s.frame(z)?.a.max_norm().powi(4).max(1.0);
            Ok(r.orth.max(r.iso1).max(r.iso2) / scale)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Check::new(
        "duality",
        max(res.iter().copied()),
        1e-7,
        res.len(),
        "max of |<f,g>|, |<f,dg>|, |<g,df>| over probes (relative to |A|^4)".into(),
    ))
}

fn frames(job: &Job, probes: &[C64]) -> Res<Check> {
    let opts = job.frame_options();
    let base = job.region.base_point();
    let n = job.verify.path_checks.min(probes.len());
    let res = probes[..n]
        .par_iter()
        .enumerate()
        .map(|(k, &z)| {
            let direct = integrate_frame(&job.data, &job.region.path(base, z), M2::identity(), &opts)?;
            let path = match job.region {
                // Same ray as z, other radius: the radial leg keeps both routes homotopic.
                Domain::Annulus { r } => {
                    let rho = if z.norm() > 0.5 * (r[0] + r[1]) { r[0] } else { r[1] };
                    let m = z * (0.5 * (z.norm() + rho) / z.norm());
                    let mut p = job.region.path(base, m);
                    p.push(z);
                    p
                }
                // Detour through another probe.
                _ => {
                    let m = probes[(k + 1) % probes.len()];
                    let mut p = job.region.path(base, m);
                    p.extend(job.region.path(m, z).into_iter().skip(1));
                    p
                }
            };
            let detour = integrate_frame(&job.data, &path, M2::identity(), &opts)?;
            let scale = direct.a.max_norm().max(1.0);
            Ok(((direct.a - detour.a).max_norm() / scale, direct.max_drift.max(detour.max_drift)))
        })
        .collect::<Result<Vec<_>>>()?;
    let drift = max(res.iter().map(|r| r.1));
    let mut c = Check::new(
        "frame_path_consistency",
        max(res.iter().map(|r| r.0)),
        1e-8,
        res.len(),
        format!("two routes per node; max det drift {drift:.3e}"),
    );
    c.pass &= drift <= job.tol.det_tol;
    Ok(c)
}

struct Special {
    sw_f: Vec<C64>,
    sw_g: Vec<C64>,
    tz_h: Vec<C64>,
    tz_d: Vec<C64>,
}

fn special(job: &Job, cv: &[SingularCurve]) -> Res<Special> {
    let o = job.classify_options();
    let mut sp = Special {
        sw_f: vec![],
        sw_g: vec![],
        tz_h: vec![],
        tz_d: vec![],
    };
    let steep = |z: &TorsionZero| z.slope.value.abs() > 0.1 && z.slope.value.abs() > 10.0 * z.slope.error;
    for c in cv {
        for p in special_points(&job.data, c, &o)? {
            if p.record.class_f == SingularityClass::Swallowtail {
                sp.sw_f.push(p.z);
            }
            if p.record.class_g == SingularityClass::Swallowtail {
                sp.sw_g.push(p.z);
            }
        }
        sp.tz_h.extend(torsion_zeros(&job.data, c, Surface::H)?.iter().filter(|z| steep(z)).map(|z| z.z));
        sp.tz_d.extend(torsion_zeros(&job.data, c, Surface::S)?.iter().filter(|z| steep(z)).map(|z| z.z));
    }
    Ok(sp)
}

fn classification_duality(job: &Job, sp: &Special) -> Check {
    // Largest distance from a point of one set to the nearest point of the other.
    let gap = |a: &[C64], b: &[C64]| {
        max(a.iter().map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min)))
    };
    let r = gap(&sp.tz_h, &sp.sw_g)
        .max(gap(&sp.sw_g, &sp.tz_h))
        .max(gap(&sp.tz_d, &sp.sw_f))
        .max(gap(&sp.sw_f, &sp.tz_d));
    Check::new(
        "classification_duality",
        r,
        job.tol.trace_step,
        sp.sw_f.len() + sp.sw_g.len() + sp.tz_h.len() + sp.tz_d.len(),
        format!(
            "torsion zeros h/d: {}/{}, swallowtails g/f: {}/{}",
            sp.tz_h.len(),
            sp.tz_d.len(),
            sp.sw_g.len(),
            sp.sw_f.len()
        ),
    )
}

pub fn run(job: &Job) -> Res<Report> {
    let start = Instant::now();
    let cv = curves(job)?;
    let samples: Vec<CurveSample> = cv.iter().flat_map(|c| c.samples.iter().copied()).collect();
    let o = job.classify_options();
    let records = samples
        .par_iter()
        .map(|s| classify(&job.data, s.z, &s.field.branch, &o))
        .collect::<Result<Vec<_>>>()?;
    let cx = Ctx { job, samples, records };
    let pr = probes(job)?;
    let sp = special(job, &cv)?;
    let mut checks = vec![on_curve(&cx)];
    checks.extend(oracle_agreement(&cx)?);
    checks.extend(invariant_relations(&cx)?);
    checks.push(lemmas(&cx)?);
    checks.push(singular_sets(&cx, &pr)?);
    checks.push(duality(&cx, &pr)?);
    checks.push(frames(job, &pr)?);
    checks.push(classification_duality(job, &sp));
    for c in &checks {
        log::info!("{} {}: {:.3e} (tol {:.1e})", if c.pass { "pass" } else { "FAIL" }, c.name, c.max_residual, c.tolerance);
    }
    Ok(Report {
        data: job.data.name(),
        region: job.region.into(),
        seed: job.seed,
        curves: cv.len(),
        pass: checks.iter().all(|c| c.pass),
        checks,
        swallowtails_f: sp.sw_f.into_iter().map(pt).collect(),
        swallowtails_g: sp.sw_g.into_iter().map(pt).collect(),
        torsion_zeros_h: sp.tz_h.into_iter().map(pt).collect(),
        torsion_zeros_d: sp.tz_d.into_iter().map(pt).collect(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Writes the report; a failed check is reported as a numerical failure after the file exists.
pub fn verify(job: &Job, out: &Path) -> Res<(Vec<PathBuf>, Report)> {
    let report = run(job)?;
    let path = out.join(&job.output.report);
    write_json(&path, &report)?;
    Ok((vec![path], report))
}
