//! Deterministic text-to-speech stand-in.
//!
//! Every UTF-8 byte becomes a 100 ms sine burst at `200 + 2 * byte` Hz, so
//! the text can be read back from the audio with the peak extractor.

use std::f64::consts::PI;

use crate::audio_io::{PcmSignal, DEFAULT_SAMPLE_RATE_HZ};

/// 100 ms at 44.1 kHz.
pub const TTS_SEGMENT_SAMPLES: usize = 4410;
pub const TTS_AMPLITUDE: f64 = 16384.0;

pub fn tone_for_byte(byte: u8) -> f64 {
    200.0 + 2.0 * f64::from(byte)
}

pub fn synthesize(text: &str) -> PcmSignal {
    let rate = f64::from(DEFAULT_SAMPLE_RATE_HZ);
    let mut samples = Vec::with_capacity(text.len() * TTS_SEGMENT_SAMPLES);
    for byte in text.bytes() {
        let step = 2.0 * PI * tone_for_byte(byte) / rate;
        samples.extend(
            (0..TTS_SEGMENT_SAMPLES)
                .map(|n| (TTS_AMPLITUDE * (step * n as f64).sin()).round() as i16),
        );
    }
    PcmSignal::new(samples, DEFAULT_SAMPLE_RATE_HZ).expect("rate is positive")
}

pub trait SpeechSynthesizer {
    fn synthesize(&self, text: &str) -> PcmSignal;
}

/// The tone-per-byte synthesizer.
#[derive(Debug, Clone, Copy, Default)]
pub struct ToneSynthesizer;

impl SpeechSynthesizer for ToneSynthesizer {
    fn synthesize(&self, text: &str) -> PcmSignal {
        synthesize(text)
    }
}
