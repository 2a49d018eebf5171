//! Seeding and tracing the singular curve `λ = 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Domain, WeierstrassData};
use crate::error::{Error, Result};
use crate::front::{FieldSample, LambdaJet};
use crate::mat2::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub trace_step: f64,
    pub max_length: f64,
    pub on_curve_tol: f64,
    pub nondeg_tol: f64,
    /// Tracing stops at the boundary of this region (the data domain if unset).
    pub region: Option<Domain>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            trace_step: 1e-2,
            max_length: 50.0,
            on_curve_tol: 1e-10,
            nondeg_tol: 1e-8,
            region: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    LoopClosed,
    Boundary,
    DegeneratePoint,
    MaxLength,
}

impl EndReason {
    pub fn name(self) -> &'static str {
        match self {
            EndReason::LoopClosed => "loop_closed",
            EndReason::Boundary => "boundary",
            EndReason::DegeneratePoint => "degenerate_point",
            EndReason::MaxLength => "max_length",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub t: f64,
    pub z: C64,
    pub lambda: LambdaJet,
    pub field: FieldSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularCurve {
    pub samples: Vec<CurveSample>,
    pub closed: bool,
    /// Why each end stopped: `[start, end]` in sample order.
    pub end_reasons: [EndReason; 2],
    /// Where a degenerate point stopped the trace.
    pub degenerate_at: Option<C64>,
}

impl SingularCurve {
    /// The most informative of the two end reasons.
    pub fn endpoints_reason(&self) -> EndReason {
        use EndReason::*;
        for r in [DegeneratePoint, LoopClosed, MaxLength, Boundary] {
            if self.end_reasons.contains(&r) {
                return r;
            }
        }
        Boundary
    }

    pub fn length(&self) -> f64 {
        let n = self.samples.len();
        if n == 0 {
            return 0.0;
        }
        let open = self.samples[n - 1].t - self.samples[0].t;
        if self.closed {
            open + (self.samples[n - 1].z - self.samples[0].z).norm()
        } else {
            open
        }
    }

    /// Distance from `z` to the polyline (closing segment included for loops).
    pub fn distance_to(&self, z: C64) -> f64 {
        let n = self.samples.len();
        if n == 1 {
            return (self.samples[0].z - z).norm();
        }
        let segs = if self.closed { n } else { n - 1 };
        (0..segs)
            .map(|k| {
                let (a, b) = (self.samples[k].z, self.samples[(k + 1) % n].z);
                let d = b - a;
                let t = if d.norm_sqr() > 0.0 {
                    ((z - a) * d.conj()).re / d.norm_sqr()
                } else {
                    0.0
                };
                (a + d * t.clamp(0.0, 1.0) - z).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// One Newton step along the gradient of `λ`: `z - λ/(2λ')`.
fn newton_step(lj: &LambdaJet) -> C64 {
    lj.z - lj.lambda / (2.0 * lj.lambda_z)
}

/// Projects onto `λ = 0`; returns the converged jet or `None`.
fn project(
    data: &WeierstrassData,
    z0: C64,
    tol: f64,
    max_iter: usize,
) -> Result<Option<LambdaJet>> {
    let mut z = z0;
    for _ in 0..max_iter {
        let lj = crate::front::lambda_jet(data, z)?;
        if lj.lambda.abs() <= tol {
            return Ok(Some(lj));
        }
        if lj.lambda_z.norm() == 0.0 {
            return Ok(None);
        }
        z = newton_step(&lj);
        if !z.is_finite() || !data.domain.contains(z) {
            return Ok(None);
        }
    }
    Ok(None)
}

/// Newton-refined zeros of `λ` on lattice edges where it changes sign.
pub fn find_seeds(data: &WeierstrassData, region: &Domain, grid_n: usize) -> Result<Vec<C64>> {
    region.validate()?;
    let n = grid_n.max(2);
    let lat = region.lattice(n, n);
    let lam: Vec<Vec<f64>> = lat
        .iter()
        .map(|row| row.iter().map(|&z| data.lambda(z)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let periodic = matches!(region, Domain::Annulus { .. });
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if i + 1 < n {
                edges.push(((i, j), (i + 1, j)));
            }
            if j + 1 < n {
                edges.push(((i, j), (i, j + 1)));
            } else if periodic {
                edges.push(((i, j), (i, 0)));
            }
        }
    }
    let candidates: Vec<C64> = edges
        .par_iter()
        .filter_map(|&((i0, j0), (i1, j1))| {
            let (l0, l1) = (lam[j0][i0], lam[j1][i1]);
            if l0 == 0.0 {
                return Some(Ok(lat[j0][i0]));
            }
            if l0 * l1 >= 0.0 {
                return None;
            }
            let (z0, z1) = (lat[j0][i0], lat[j1][i1]);
            let start = z0 + (z1 - z0) * (l0 / (l0 - l1));
            match project(data, start, 1e-12, 50) {
                Ok(Some(lj)) if region.contains(lj.z) => Some(Ok(lj.z)),
                Ok(_) => {
                    log::warn!("seed near {start} discarded: Newton did not converge");
                    None
                }
                Err(e) => Some(Err(e)),
            }
        })
        .collect::<Result<_>>()?;
    let h = region.lattice_spacing(n, n);
    let mut seeds: Vec<C64> = Vec::new();
    for z in candidates {
        if seeds.iter().all(|s| (s - z).norm() > h / 2.0) {
            seeds.push(z);
        }
    }
    Ok(seeds)
}

struct HalfTrace {
    points: Vec<(LambdaJet, FieldSample)>,
    reason: EndReason,
    degenerate_at: Option<C64>,
}

fn point_segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + d * s)).norm()
}

fn unit(z: C64) -> C64 {
    z / z.norm()
}

/// Follows `sign·ξ` from the seed until a stopping condition.
fn trace_half(
    data: &WeierstrassData,
    seed: (LambdaJet, FieldSample),
    sign: f64,
    opts: &TraceOptions,
    region: &Domain,
) -> Result<HalfTrace> {
    let h0 = opts.trace_step;
    let min_step = h0 * 1e-7;
    let cos_max_turn = 30f64.to_radians().cos();
    let start = seed.0.z;
    let (mut lj, mut fs) = seed;
    let mut dir = unit(fs.xi) * sign;
    let mut points = Vec::new();
    let mut length = 0.0;
    let mut h = h0;
    loop {
        if length >= opts.max_length {
            return Ok(HalfTrace {
                points,
                reason: EndReason::MaxLength,
                degenerate_at: None,
            });
        }
        let pred = lj.z + dir * h;
        let mut accepted = None;
        if region.contains(pred) {
            if let Some(new) = project(data, pred, opts.on_curve_tol, 20)? {
                let moved = new.z - lj.z;
                let ok_len = (new.z - pred).norm() <= 0.5 * h && moved.norm() <= h0;
                if ok_len && region.contains(new.z) && new.lambda_z.norm() >= opts.nondeg_tol {
                    let nf = FieldSample::from_parts(&new, data.jets(new.z)?.ab(), Some(&fs))?;
                    // ξ never reverses along a regular curve; a reversal means λ' vanished in between.
                    let nd = unit(nf.xi) * sign;
                    let chord = unit(moved);
                    if (nd * dir.conj()).re >= cos_max_turn && (chord * dir.conj()).re >= cos_max_turn {
                        accepted = Some((new, nf, nd));
                    }
                }
            }
        } else if h <= min_step * 16.0 || !region.contains(lj.z + dir * min_step) {
            return Ok(HalfTrace {
                points,
                reason: EndReason::Boundary,
                degenerate_at: None,
            });
        }
        match accepted {
            Some((new, nf, nd)) => {
                let prev = lj.z;
                length += (new.z - prev).norm();
                lj = new;
                fs = nf;
                dir = nd;
                points.push((lj, fs));
                if points.len() >= 5 && point_segment_distance(start, prev, lj.z) < h0 / 2.0 {
                    points.pop();
                    return Ok(HalfTrace {
                        points,
                        reason: EndReason::LoopClosed,
                        degenerate_at: None,
                    });
                }
                h = (2.0 * h).min(h0);
            }
            None => {
                h *= 0.5;
                if h < min_step {
                    return Ok(HalfTrace {
                        points,
                        reason: EndReason::DegeneratePoint,
                        degenerate_at: Some(lj.z),
                    });
                }
            }
        }
    }
}

/// Traces the whole curve through `seed`: first along `+ξ`, then along `-ξ`.
/// Samples are ordered so that `t` increases along `-ξ`.
pub fn trace_curve(data: &WeierstrassData, seed: C64, opts: &TraceOptions) -> Result<SingularCurve> {
    let region = opts.region.unwrap_or(data.domain);
    let lj0 = crate::front::lambda_jet(data, seed)?;
    if lj0.lambda.abs() > 1e-10 {
        return Err(Error::NotSingular {
            z: seed,
            lambda: lj0.lambda,
        });
    }
    if lj0.lambda_z.norm() < opts.nondeg_tol {
        return Ok(SingularCurve {
            samples: vec![CurveSample {
                t: 0.0,
                z: seed,
                lambda: lj0,
                field: crate::front::field_sample(data, seed, None)?,
            }],
            closed: false,
            end_reasons: [EndReason::DegeneratePoint; 2],
            degenerate_at: Some(seed),
        });
    }
    let fs0 = crate::front::field_sample(data, seed, None)?;
    let plus = trace_half(data, (lj0, fs0), 1.0, opts, &region)?;
    let closed = plus.reason == EndReason::LoopClosed;
    let minus = if closed {
        None
    } else {
        Some(trace_half(data, (lj0, fs0), -1.0, opts, &region)?)
    };
    let mut seq: Vec<(LambdaJet, FieldSample)> = plus.points.iter().rev().copied().collect();
    seq.push((lj0, fs0));
    if let Some(m) = &minus {
        seq.extend(m.points.iter().copied());
    }
    // Phases were tracked outward from the seed; re-track along the final order.
    let mut samples: Vec<CurveSample> = Vec::with_capacity(seq.len());
    let mut t = 0.0;
    for (k, (lj, fs)) in seq.into_iter().enumerate() {
        let field = if k == 0 {
            fs
        } else {
            let prev = &samples[k - 1];
            t += (lj.z - prev.z).norm();
            FieldSample::from_parts(&lj, data.jets(lj.z)?.ab(), Some(&prev.field))?
        };
        samples.push(CurveSample {
            t,
            z: lj.z,
            lambda: lj,
            field,
        });
    }
    let end_reasons = match &minus {
        None => [EndReason::LoopClosed; 2],
        Some(m) => [plus.reason, m.reason],
    };
    Ok(SingularCurve {
        samples,
        closed,
        end_reasons,
        degenerate_at: plus.degenerate_at.or(minus.and_then(|m| m.degenerate_at)),
    })
}

/// Seeds the region and traces every distinct curve.
pub fn trace_all(
    data: &WeierstrassData,
    region: &Domain,
    grid_n: usize,
    opts: &TraceOptions,
) -> Result<Vec<SingularCurve>> {
    let seeds = find_seeds(data, region, grid_n)?;
    let opts = TraceOptions {
        region: Some(*region),
        ..*opts
    };
    let batch = rayon::current_num_threads().max(1);
    let mut curves: Vec<SingularCurve> = Vec::new();
    let near = |curves: &[SingularCurve], z: C64| {
        curves.iter().any(|c| c.distance_to(z) <= opts.trace_step)
    };
    let mut pending: &[C64] = &seeds;
    while !pending.is_empty() {
        let mut chunk = Vec::new();
        let mut used = 0;
        for &z in pending {
            used += 1;
            if !near(&curves, z) {
                chunk.push(z);
                if chunk.len() == batch {
                    break;
                }
            }
        }
        pending = &pending[used..];
        let traced: Vec<SingularCurve> = chunk
            .par_iter()
            .map(|&z| trace_curve(data, z, &opts))
            .collect::<Result<_>>()?;
        for c in traced {
            let seed = c.samples[c.samples.len() / 2].z;
            if !near(&curves, seed) && c.samples.iter().all(|s| !near(&curves, s.z)) {
                curves.push(c);
            }
        }
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat2::{ONE, ZERO};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn e1_seeds_on_imaginary_axis() {
        let data = WeierstrassData::e1();
        let seeds = find_seeds(&data, &Domain::rectangle(-1.0, 1.0, -1.0, 1.0), 101).unwrap();
        assert!(!seeds.is_empty());
        assert!(seeds.iter().all(|z| z.re.abs() <= 1e-12));
    }

    #[test]
    fn constants_have_no_seeds() {
        let data = WeierstrassData::constants(c(2.0, 0.0), ONE).unwrap();
        let seeds = find_seeds(&data, &Domain::rectangle(-1.0, 1.0, -1.0, 1.0), 101).unwrap();
        assert!(seeds.is_empty());
    }

    #[test]
    fn e2_seeds_on_circle() {
        let data = WeierstrassData::e2();
        let region = Domain::sector(0.5, 2.0, -0.75 * std::f64::consts::PI, 0.75 * std::f64::consts::PI);
        let seeds = find_seeds(&data, &region, 101).unwrap();
        assert!(seeds.len() > 10);
        assert!(seeds.iter().all(|z| (z.norm() - 1.0).abs() <= 1e-10));
    }

    #[test]
    fn e1_trace_stays_on_axis() {
        let data = WeierstrassData::e1();
        let opts = TraceOptions {
            region: Some(Domain::rectangle(-1.0, 1.0, -4.0, 4.0)),
            ..Default::default()
        };
        let curve = trace_curve(&data, c(0.0, 1.0), &opts).unwrap();
        assert_eq!(curve.endpoints_reason(), EndReason::Boundary);
        assert!(curve.samples.iter().all(|s| s.z.re.abs() <= 1e-10));
        assert!((curve.length() - 8.0).abs() < 0.02);
        // t increases along -ξ = +i.
        assert!(curve.samples[1].z.im > curve.samples[0].z.im);
        for w in curve.samples.windows(2) {
            assert!((w[1].z - w[0].z).norm() <= opts.trace_step * (1.0 + 1e-9));
        }
    }

    #[test]
    fn e2_trace_closes() {
        let data = WeierstrassData::e2();
        let curve = trace_curve(&data, ONE, &TraceOptions::default()).unwrap();
        assert!(curve.closed);
        assert_eq!(curve.endpoints_reason(), EndReason::LoopClosed);
        let len = curve.length();
        assert!((len - std::f64::consts::TAU).abs() < 0.01 * std::f64::consts::TAU, "{len}");
    }

    #[test]
    fn crossing_lines_are_degenerate() {
        let data =
            WeierstrassData::parse("exp(z^2)", "1", Domain::rectangle(-1.0, 1.0, -1.0, 1.0)).unwrap();
        let seed = c(0.5, 0.5);
        let curve = trace_curve(&data, seed, &TraceOptions::default()).unwrap();
        assert_eq!(curve.endpoints_reason(), EndReason::DegeneratePoint);
        assert!(curve.degenerate_at.unwrap().norm() < 1e-3);
        assert!(trace_curve(&data, ZERO, &TraceOptions::default()).unwrap().degenerate_at.is_some());
    }

    #[test]
    fn off_curve_seed_rejected() {
        let data = WeierstrassData::e1();
        assert!(matches!(
            trace_curve(&data, c(0.5, 0.0), &TraceOptions::default()),
            Err(Error::NotSingular { .. })
        ));
    }

    #[test]
    fn trace_all_dedups() {
        let data = WeierstrassData::e2();
        let curves = trace_all(&data, &Domain::annulus(0.5, 2.0), 41, &TraceOptions::default()).unwrap();
        assert_eq!(curves.len(), 1);
        assert!(curves[0].closed);
    }
}
