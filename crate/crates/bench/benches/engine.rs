use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use flatfront_bench::e1_sample;
use flatfront_core::*;

fn jets(c: &mut Criterion) {
    let e = Expr::parse("exp(0.2 + z - 0.3*pow(z,2) + 0.1*i*pow(z,3))").unwrap();
    let ctx = EvalCtx::default();
    c.bench_function("eval_jet/exp_cubic", |b| {
        b.iter(|| e.jet(black_box(C64::new(0.3, -0.4)), &ctx).unwrap())
    });
}

fn frames(c: &mut Criterion) {
    let data = WeierstrassData::e1();
    let opts = FrameOptions::default();
    let path = [C64::new(0.0, 0.0), C64::new(1.0, 3.0)];
    c.bench_function("integrate_frame/e1_length_3.2", |b| {
        b.iter(|| integrate_frame(&data, black_box(&path), M2::identity(), &opts).unwrap())
    });
}

fn tracing(c: &mut Criterion) {
    let data = WeierstrassData::e2();
    c.bench_function("trace_curve/e2_circle", |b| {
        b.iter(|| trace_curve(&data, black_box(C64::new(1.0, 0.0)), &TraceOptions::default()).unwrap())
    });
}

fn invariants(c: &mut Criterion) {
    let (data, s) = e1_sample();
    let opts = ClassifyOptions::default();
    c.bench_function("closed_form_invariants/e1", |b| {
        b.iter(|| closed_form_invariants(&data, black_box(s.z), &s.field.branch, Surface::H, &opts).unwrap())
    });
    let sampler = Sampler::with_base(&data, Surface::H, s.z);
    c.bench_function("definition_invariants/e1", |b| {
        b.iter(|| definition_invariants(&sampler, black_box(s.z), &s.field.branch).unwrap())
    });
}

criterion_group!(benches, jets, frames, tracing, invariants);
criterion_main!(benches);
