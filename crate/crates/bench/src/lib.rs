//! Fixtures shared by the benchmarks.

use guide_core::PcmSignal;

/// A sine of `freq` Hz, `samples` long, at 44.1 kHz.
pub fn tone(freq: f64, samples: usize) -> PcmSignal {
    let step = 2.0 * std::f64::consts::PI * freq / 44_100.0;
    let s = (0..samples)
        .map(|n| (12_000.0 * (step * n as f64).sin()).round() as i16)
        .collect();
    PcmSignal::new(s, 44_100).expect("rate is positive")
}

/// Deterministic pseudo-random samples in [-1, 1).
pub fn noise(len: usize, seed: u64) -> Vec<f64> {
    let mut state = seed | 1;
    (0..len)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect()
}
