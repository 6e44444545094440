//! Radix-2 Cooley-Tukey FFT and the peak-frequency speech feature.
//!
//! The transform splits every block into its even- and odd-indexed halves,
//! computes their half-length DFTs and recombines them as
//! `X[k] = E[k] + w^k * O[k]`, `X[k + N/2] = E[k] - w^k * O[k]` with
//! `w = exp(-2*pi*i/N)`. It runs iteratively: a bit-reversal permutation
//! puts the leaves in place and the butterflies combine blocks of size
//! 2, 4, ..., N.
//!
//! Inputs are zero-padded to the next power of two and no window is applied.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::audio_io::PcmSignal;

/// Speech band searched for the peak by default, in Hz.
pub const DEFAULT_BAND_HZ: (f64, f64) = (30.0, 3400.0);

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("cannot transform an empty signal")]
    EmptySignal,
    #[error("no frequency bin lies inside [{low} Hz, {high} Hz]")]
    EmptyBand { low: f64, high: f64 },
    #[error("invalid band [{low} Hz, {high} Hz] for Nyquist {nyquist} Hz")]
    InvalidBand { low: f64, high: f64, nyquist: f64 },
}

/// Magnitudes of the non-negative frequency bins below Nyquist.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    magnitudes: Vec<f64>,
    fft_size: usize,
    sample_rate_hz: f64,
}

impl Spectrum {
    /// `|X_k|` for `k` in `[0, fft_size / 2)`.
    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn bin_width_hz(&self) -> f64 {
        self.sample_rate_hz / self.fft_size as f64
    }

    pub fn nyquist_hz(&self) -> f64 {
        self.sample_rate_hz / 2.0
    }

    /// Center frequency of bin `k`.
    pub fn bin_frequency_hz(&self, k: usize) -> f64 {
        k as f64 * self.bin_width_hz()
    }

    /// Builds a spectrum from precomputed magnitudes. `magnitudes` must hold
    /// `fft_size / 2` non-negative values.
    pub fn from_magnitudes(magnitudes: Vec<f64>, fft_size: usize, sample_rate_hz: f64) -> Self {
        assert!(
            fft_size.is_power_of_two(),
            "fft_size must be a power of two"
        );
        assert_eq!(
            magnitudes.len(),
            fft_size / 2,
            "need fft_size / 2 magnitudes"
        );
        assert!(sample_rate_hz > 0.0);
        assert!(
            magnitudes.iter().all(|m| *m >= 0.0),
            "magnitudes must be non-negative"
        );
        Self {
            magnitudes,
            fft_size,
            sample_rate_hz,
        }
    }
}

/// Peak of the magnitude spectrum inside a search band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralFeature {
    pub peak_frequency_hz: f64,
    pub peak_magnitude: f64,
    pub band_low_hz: f64,
    pub band_high_hz: f64,
}

impl SpectralFeature {
    /// A feature carrying only a known peak frequency, used when peaks come
    /// from a table rather than from audio.
    pub fn from_peak(peak_frequency_hz: f64) -> Self {
        Self {
            peak_frequency_hz,
            peak_magnitude: 0.0,
            band_low_hz: peak_frequency_hz,
            band_high_hz: peak_frequency_hz,
        }
    }
}

/// Complex DFT of `input`, zero-padded to the next power of two.
pub fn fft_complex(input: &[f64]) -> Vec<Complex64> {
    let n = input.len().next_power_of_two();
    let mut data: Vec<Complex64> = input
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(n)
        .collect();
    fft_in_place(&mut data);
    data
}

/// In-place radix-2 decimation-in-time FFT. `data.len()` must be a power of two.
pub fn fft_in_place(data: &mut [Complex64]) {
    let n = data.len();
    assert!(n.is_power_of_two(), "FFT length must be a power of two");
    if n < 2 {
        return;
    }

    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            data.swap(i, j);
        }
    }

    // Twiddles for the full length; a block of size m uses every (n/m)-th.
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect();

    let mut size = 2;
    while size <= n {
        let half = size / 2;
        let stride = n / size;
        for block in data.chunks_exact_mut(size) {
            let (even, odd) = block.split_at_mut(half);
            for k in 0..half {
                let t = twiddles[k * stride] * odd[k];
                let e = even[k];
                even[k] = e + t;
                odd[k] = e - t;
            }
        }
        size *= 2;
    }
}

/// Magnitude spectrum of real-valued samples at `sample_rate_hz`.
pub fn fft_samples(samples: &[f64], sample_rate_hz: f64) -> Result<Spectrum, SpectralError> {
    if samples.is_empty() {
        return Err(SpectralError::EmptySignal);
    }
    let full = fft_complex(samples);
    let fft_size = full.len();
    let magnitudes = full[..fft_size / 2].iter().map(|c| c.norm()).collect();
    Ok(Spectrum {
        magnitudes,
        fft_size,
        sample_rate_hz,
    })
}

/// Magnitude spectrum of a PCM signal. Samples are used at their integer
/// scale without normalization.
pub fn fft(signal: &PcmSignal) -> Result<Spectrum, SpectralError> {
    let samples: Vec<f64> = signal.samples().iter().map(|&s| f64::from(s)).collect();
    fft_samples(&samples, f64::from(signal.sample_rate_hz()))
}

/// Largest-magnitude bin whose center lies in `[band_low_hz, band_high_hz]`.
/// Ties go to the lowest frequency.
pub fn extract_peak(
    spectrum: &Spectrum,
    band_low_hz: f64,
    band_high_hz: f64,
) -> Result<SpectralFeature, SpectralError> {
    let nyquist = spectrum.nyquist_hz();
    if !(band_low_hz >= 0.0 && band_low_hz < band_high_hz && band_high_hz <= nyquist) {
        return Err(SpectralError::InvalidBand {
            low: band_low_hz,
            high: band_high_hz,
            nyquist,
        });
    }

    let width = spectrum.bin_width_hz();
    let first = (band_low_hz / width).ceil() as usize;
    let last =
        ((band_high_hz / width).floor() as usize).min(spectrum.magnitudes.len().saturating_sub(1));

    let mut best: Option<(usize, f64)> = None;
    for k in first..=last {
        if k >= spectrum.magnitudes.len() {
            break;
        }
        let freq = spectrum.bin_frequency_hz(k);
        // ceil/floor can land one bin off when the edge is an exact multiple
        if freq < band_low_hz || freq > band_high_hz {
            continue;
        }
        let mag = spectrum.magnitudes[k];
        if best.is_none_or(|(_, m)| mag > m) {
            best = Some((k, mag));
        }
    }

    let (k, peak_magnitude) = best.ok_or(SpectralError::EmptyBand {
        low: band_low_hz,
        high: band_high_hz,
    })?;
    Ok(SpectralFeature {
        peak_frequency_hz: spectrum.bin_frequency_hz(k),
        peak_magnitude,
        band_low_hz,
        band_high_hz,
    })
}

/// FFT followed by peak extraction over the band.
pub fn peak_frequency(
    signal: &PcmSignal,
    band_low_hz: f64,
    band_high_hz: f64,
) -> Result<SpectralFeature, SpectralError> {
    extract_peak(&fft(signal)?, band_low_hz, band_high_hz)
}
