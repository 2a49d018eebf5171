#![allow(dead_code)]

use flatfront_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn disk(rng: &mut ChaCha8Rng, r: f64) -> C64 {
    C64::from_polar(r * rng.gen::<f64>().sqrt(), rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
}

/// `(e^{p(z)}, 1)` with a random cubic `p` whose zero curve `Re p = 0` passes near the origin.
pub fn random_cubic(seed: u64) -> WeierstrassData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c0 = c(rng.gen_range(-0.2..0.2), rng.gen_range(-1.0..1.0));
    let c1 = C64::from_polar(rng.gen_range(0.6..1.4), rng.gen_range(-3.14..3.14));
    let c2 = disk(&mut rng, 0.3);
    let c3 = disk(&mut rng, 0.2);
    WeierstrassData::exp_poly(&[c0, c1, c2, c3], Domain::rectangle(-1.5, 1.5, -1.5, 1.5)).unwrap()
}

/// A test family with the region in which its singular curves are traced.
pub struct Family {
    pub name: String,
    pub data: WeierstrassData,
    pub region: Domain,
}

pub fn families() -> Vec<Family> {
    let mut out = vec![
        Family {
            name: "e1".into(),
            data: WeierstrassData::e1(),
            region: Domain::rectangle(-1.0, 1.0, -7.5, 7.5),
        },
        Family {
            name: "e2".into(),
            data: WeierstrassData::e2(),
            region: Domain::annulus(0.5, 2.0),
        },
    ];
    for k in 0..5 {
        out.push(Family {
            name: format!("cubic{k}"),
            data: random_cubic(1000 + k),
            region: Domain::rectangle(-1.35, 1.35, -1.35, 1.35),
        });
    }
    out
}

pub fn curves(f: &Family) -> Vec<SingularCurve> {
    trace_all(&f.data, &f.region, 101, &TraceOptions::default()).unwrap()
}

/// Every `stride`-th sample of every curve.
pub fn samples(curves: &[SingularCurve], stride: usize) -> Vec<CurveSample> {
    curves
        .iter()
        .flat_map(|cv| cv.samples.iter().step_by(stride.max(1)).cloned())
        .collect()
}

/// Up to `n` evenly spread samples at which `which` is a cuspidal edge with `|C| >= c_min`.
pub fn cuspidal_samples(
    data: &WeierstrassData,
    curves: &[SingularCurve],
    which: Surface,
    c_min: f64,
    n: usize,
) -> Vec<CurveSample> {
    let opts = ClassifyOptions::default();
    let all: Vec<CurveSample> = samples(curves, 1)
        .into_iter()
        .filter(|s| {
            let r = classify(data, s.z, &s.field.branch, &opts).unwrap();
            r.class(which) == SingularityClass::CuspidalEdge && r.c(which).abs() >= c_min
        })
        .collect();
    if all.len() <= n {
        return all;
    }
    (0..n).map(|k| all[k * all.len() / n].clone()).collect()
}

pub fn rel_close(a: f64, b: f64, abs: f64, rel: f64) -> bool {
    (a - b).abs() <= abs.max(rel * b.abs())
}
