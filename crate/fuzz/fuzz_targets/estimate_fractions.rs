#![no_main]

use esp_core::analysis::{estimate_fractions, Curve};
use esp_core::model::Gauge;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|input: (Vec<f64>, f64, f64, bool)| {
    let (values, step, min_separation, pi) = input;
    let step = if step.is_finite() && step > 0.0 {
        step
    } else {
        1.0
    };
    let deltas = (0..values.len())
        .map(|i| (i as f64 - values.len() as f64 / 2.0) * step)
        .collect();
    let curve = Curve { deltas, values };
    let gauge = if pi { Gauge::Pi } else { Gauge::Zero };
    if let Ok(report) = estimate_fractions(&curve, min_separation, gauge) {
        assert!(report.peaks[0].delta < report.peaks[1].delta);
        assert!((report.f_left + report.f_right - 1.0).abs() < 1e-9 || !report.f_left.is_finite());
    }
});
