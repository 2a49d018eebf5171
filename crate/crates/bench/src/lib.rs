//! Shared inputs for the benchmarks in `benches/`.

use flatfront_core::{trace_curve, CurveSample, TraceOptions, WeierstrassData, C64};

/// A cuspidal-edge sample of `(e^z, 1)` near `z = 2i` with its tracked branch.
pub fn e1_sample() -> (WeierstrassData, CurveSample) {
    let data = WeierstrassData::e1();
    let cv = trace_curve(&data, C64::new(0.0, 2.0), &TraceOptions { max_length: 0.1, ..Default::default() })
        .expect("E1 traces from 2i");
    let s = cv.samples[cv.samples.len() / 2];
    (data, s)
}

