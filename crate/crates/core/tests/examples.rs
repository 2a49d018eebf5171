mod common;

use std::f64::consts::PI;

use common::*;
use flatfront_core::lorentz::inner_m;
use flatfront_core::*;

fn constants(a: f64, b: f64) -> WeierstrassData {
    WeierstrassData::constants(c(a, 0.0), c(b, 0.0)).unwrap()
}

/// Sample of a traced curve closest to `z`, with its index.
fn nearest(curve: &SingularCurve, z: C64) -> (usize, CurveSample) {
    let (i, s) = curve
        .samples
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1.z - z).norm().total_cmp(&(b.1.z - z).norm()))
        .unwrap();
    (i, *s)
}

fn reversed(curve: &SingularCurve) -> SingularCurve {
    let mut out = curve.clone();
    out.samples.reverse();
    for s in &mut out.samples {
        s.t = -s.t;
    }
    out
}

#[test]
fn duality_at_identity_frame() {
    let data = WeierstrassData::e1();
    let s = Sampler::with_base(&data, Surface::H, c(0.2, 0.3));
    let r = duality_residuals(&s, c(0.2, 0.3)).unwrap();
    assert_eq!(r.orth, 0.0);
    assert!(r.iso1 <= 1e-12 && r.iso2 <= 1e-12, "{r:?}");
}

#[test]
fn duality_residuals_small() {
    let data = WeierstrassData::e1();
    let s = Sampler::new(&data, Surface::H);
    for k in 0..20 {
        let z = c(-0.9 + 0.09 * k as f64, -3.0 + 0.31 * k as f64);
        let r = duality_residuals(&s, z).unwrap();
        assert!(r.orth.max(r.iso1).max(r.iso2) <= 1e-7, "{z}: {r:?}");
    }
    let k = constants(2.0, 1.0);
    let s = Sampler::with_base(&k, Surface::H, c(0.0, 0.0));
    let r = duality_residuals(&s, c(1.0, 0.0)).unwrap();
    assert!(r.orth.max(r.iso1).max(r.iso2) <= 1e-7, "{r:?}");
}

#[test]
fn numeric_fu_for_constants() {
    let data = constants(2.0, 1.0);
    let s = Sampler::with_base(&data, Surface::H, c(0.0, 0.0));
    let (fu, err) = numeric_partials(&s, c(0.0, 0.0), (1, 0), 1e-3).unwrap();
    let want = M2::real(0.0, 3.0, 3.0, 0.0);
    assert!((fu.m - want).max_norm() <= 1e-8, "{:?}", fu.m);
    assert!(err <= 1e-5, "{err}");
    let (fv, _) = numeric_partials(&s, c(0.0, 0.0), (0, 1), 1e-3).unwrap();
    let e2 = M2::new(c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0));
    assert!((fv.m - e2).max_norm() <= 1e-8, "{:?}", fv.m);
}

#[test]
fn numeric_partials_converge_with_step() {
    let data = constants(2.0, 1.0);
    let s = Sampler::with_base(&data, Surface::H, c(0.0, 0.0));
    let z = c(0.4, 0.2);
    let fr = s.frame(z).unwrap();
    let exact = surface_jet(&fr, &data, Surface::H).unwrap().fu();
    let err = |h| (numeric_partials(&s, z, (1, 0), h).unwrap().0.m - exact).max_norm();
    let (e1, e2) = (err(0.2), err(0.1));
    assert!(e1 / e2 >= 4.0, "{e1} {e2}");
}

#[test]
fn first_fundamental_form_degenerates_on_singular_set() {
    let data = WeierstrassData::e1();
    let s = Sampler::with_base(&data, Surface::H, c(0.0, 0.0));
    let gram = |z| {
        let fu = numeric_partials(&s, z, (1, 0), 1e-3).unwrap().0.m;
        let fv = numeric_partials(&s, z, (0, 1), 1e-3).unwrap().0.m;
        let (e, f, g) = (inner_m(&fu, &fu).re, inner_m(&fu, &fv).re, inner_m(&fv, &fv).re);
        e * g - f * f
    };
    let on = gram(c(0.0, 1.0));
    assert!(on.abs() <= 1e-6, "{on}");
    for z in [c(0.3, 1.0), c(-0.5, 2.0)] {
        assert!(gram(z) > 0.0);
    }
}

#[test]
fn covariant_derivative_examples() {
    let data = WeierstrassData::e1();
    let s = Sampler::with_base(&data, Surface::H, c(0.0, PI));
    let z = c(0.0, PI);
    let fixed = M2::identity();
    let d = covariant_derivative(&s, z, c(1.0, 0.0), &|_| Ok(fixed)).unwrap();
    assert_eq!(d.m.max_norm(), 0.0);

    let eta = |w: C64| -> Result<C64> {
        let ab = data.jets(w)?;
        Ok(Branch::track(ab.alpha.d[0] * ab.beta.d[0], 0.5 * PI, w)?.eta_h())
    };
    // ηf as a field: the η-directional derivative of f at each point.
    let eta_f = |w: C64| -> Result<M2> {
        let (f, _) = s.partials(w, 1, false)?;
        let e = eta(w)?;
        Ok(f.get(1, 0).scale_re(e.re) + f.get(0, 1).scale_re(e.im))
    };
    let p = s.eval(z).unwrap();
    for zeta in [c(1.0, 0.0), c(0.3, -0.7)] {
        let v = covariant_derivative(&s, z, zeta, &eta_f).unwrap();
        assert!(inner_m(&v.m, &p).norm() <= 1e-7);
    }
    let nab = covariant_derivative(&s, z, eta(z).unwrap(), &eta_f).unwrap();
    let xi = lambda_jet(&data, z).unwrap().lambda_zbar * c(0.0, -1.0);
    let (f, _) = s.partials(z, 1, false).unwrap();
    let xf = f.get(1, 0).scale_re(xi.re) + f.get(0, 1).scale_re(xi.im);
    let r = inner_m(&nab.m, &xf).norm();
    assert!(r <= 1e-6, "{r}");
}

#[test]
fn definition_invariants_examples() {
    let e1 = WeierstrassData::e1();
    let z = c(0.0, PI);
    let br = Branch::track(e1.jets(z).unwrap().alpha.d[0], 0.5 * PI, z).unwrap();
    let o = definition_invariants(&Sampler::with_base(&e1, Surface::H, z), z, &br).unwrap();
    let k = o.set;
    for (got, want) in [(k.kappa_s, -0.25), (k.kappa_n, 0.0), (k.kappa_t, 0.0), (k.kappa_c, 4.0)] {
        assert!((got - want).abs() <= 1e-5, "{k:?}");
    }

    let e2 = WeierstrassData::e2();
    let z = C64::from_polar(1.0, PI / 3.0);
    // √(αβ) = i/z.
    let root = c(0.0, 1.0) / z;
    let br = Branch { sqrt_ab: root, phase: root.arg() };
    let o = definition_invariants(&Sampler::with_base(&e2, Surface::H, z), z, &br).unwrap();
    let k = o.set;
    for (got, want) in [(k.kappa_s, -0.5), (k.kappa_n, 0.0), (k.kappa_t, 0.0), (k.kappa_c, 8f64.sqrt())] {
        assert!((got - want).abs() <= 1e-5, "{k:?}");
    }
}

#[test]
fn lemma_examples() {
    let e1 = WeierstrassData::e1();
    let z = c(0.0, PI);
    let br = Branch::track(e1.jets(z).unwrap().alpha.d[0], 0.5 * PI, z).unwrap();
    let fr = Sampler::new(&e1, Surface::H).frame(z).unwrap();
    let r = lemma_suite(&e1, &fr, &br).unwrap();
    assert!(r.max_residual() <= 1e-9, "{:?}", r.worst());
    assert!(r.entries.iter().filter(|e| e.0.ends_with("= 0")).count() >= 6);

    let e2 = WeierstrassData::e2();
    let z = c(1.0, 0.0);
    let br = Branch { sqrt_ab: c(0.0, 1.0), phase: 0.5 * PI };
    let r = lemma_suite(&e2, &Frame::new(z, M2::identity()), &br).unwrap();
    assert!(r.max_residual() <= 1e-9, "{:?}", r.worst());

    let off = lemma_suite(&e1, &Frame::new(c(0.5, 0.0), M2::identity()), &br);
    assert!(matches!(off, Err(Error::NotSingular { .. })));
}

#[test]
fn e1_torsion_derivative() {
    let data = WeierstrassData::e1();
    let cv = trace_curve(&data, c(0.0, 3.0), &TraceOptions { max_length: 2.0, ..Default::default() }).unwrap();
    let (i, s) = nearest(&cv, c(0.0, PI));
    assert!((s.z - c(0.0, PI)).norm() <= 1e-2);
    // Orient by v: torsion -cot(v/2) has slope 1/2 at v = π.
    let dv_dt = (cv.samples[i + 1].z.im - cv.samples[i - 1].z.im) / (cv.samples[i + 1].t - cv.samples[i - 1].t);
    let d = torsion_derivative(&data, &cv, i, Surface::H).unwrap();
    let want = 0.5 / (s.z.im / 2.0).sin().powi(2) * dv_dt;
    assert!((d.value - want).abs() <= 1e-4 && d.value.abs() > 0.4, "{d:?} vs {want}");
    assert!(d.error <= 1e-4);

    let r = reversed(&cv);
    let n = cv.samples.len();
    let dr = torsion_derivative(&data, &r, n - 1 - i, Surface::H).unwrap();
    assert!((dr.value + d.value).abs() <= 1e-9 * d.value.abs().max(1.0));

    assert!(torsion_derivative(&data, &cv, 0, Surface::H).is_err());
}

#[test]
fn e2_torsion_is_flat() {
    let data = WeierstrassData::e2();
    let cv = trace_curve(&data, c(1.0, 0.0), &TraceOptions::default()).unwrap();
    assert!(cv.closed);
    for i in (0..cv.samples.len()).step_by(37) {
        let d = torsion_derivative(&data, &cv, i, Surface::H).unwrap();
        assert!(d.value.abs() <= 1e-9 + 10.0 * d.error, "{d:?}");
    }
}

#[test]
fn curve_report_examples() {
    let opts = ClassifyOptions::default();
    let e2 = WeierstrassData::e2();
    let cv = trace_curve(&e2, c(1.0, 0.0), &TraceOptions::default()).unwrap();
    let r = curve_report(&e2, &cv, Surface::H, &opts).unwrap();
    assert!(r.line_of_curvature && r.cone_like_dual, "{r:?}");
    assert!(r.max_abs_torsion <= opts.lc_tol);
    // g has no cuspidal edges on the circle.
    assert!(matches!(
        curve_report(&e2, &cv, Surface::S, &opts),
        Err(Error::MixedClassification { .. })
    ));

    let e1 = WeierstrassData::e1();
    let cv = trace_curve(&e1, c(0.0, 1.0), &TraceOptions { max_length: 8.0, ..Default::default() }).unwrap();
    // The swallowtail of f at 0 lies on this curve.
    assert!(curve_report(&e1, &cv, Surface::H, &opts).is_err());
    for arc in cuspidal_arcs(&e1, &cv, Surface::H, &opts).unwrap() {
        if arc.samples.len() < 3 {
            continue;
        }
        let r = curve_report(&e1, &arc, Surface::H, &opts).unwrap();
        assert!(!r.line_of_curvature && !r.cone_like_dual);
        assert!(r.max_abs_torsion > opts.lc_tol);
    }
}
