//! Peak-frequency threshold classifier for adult female and male voices.
//!
//! Training takes the peak frequency of every labeled sample and places the
//! threshold at the midpoint of the two class means. Recognition labels a
//! voice female when its peak lies strictly above the threshold.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::audio_io::PcmSignal;
use crate::spectral::{self, SpectralError, SpectralFeature, DEFAULT_BAND_HZ};

#[derive(Debug, Error, PartialEq)]
pub enum GenderError {
    #[error("no {0} training samples")]
    EmptyClass(GenderLabel),
    #[error("training peak {0} Hz is not a finite positive frequency")]
    InvalidPeak(f64),
    #[error("nothing to evaluate")]
    EmptyEvaluation,
    #[error("feature extraction failed: {0}")]
    Spectral(#[from] SpectralError),
    #[error("malformed model file: {0}")]
    MalformedModelFile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenderLabel {
    Female,
    Male,
}

impl GenderLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            GenderLabel::Female => "female",
            GenderLabel::Male => "male",
        }
    }
}

impl fmt::Display for GenderLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown gender label {0:?} (expected female or male)")]
pub struct UnknownLabel(pub String);

impl FromStr for GenderLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "female" | "f" => Ok(GenderLabel::Female),
            "male" | "m" => Ok(GenderLabel::Male),
            other => Err(UnknownLabel(other.to_string())),
        }
    }
}

/// Extraction band in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub low_hz: f64,
    pub high_hz: f64,
}

impl Default for Band {
    fn default() -> Self {
        Band {
            low_hz: DEFAULT_BAND_HZ.0,
            high_hz: DEFAULT_BAND_HZ.1,
        }
    }
}

/// A trained threshold together with the peaks it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct GenderModel {
    threshold_hz: f64,
    male_peaks_hz: Vec<f64>,
    female_peaks_hz: Vec<f64>,
    band: Band,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn midpoint(male: &[f64], female: &[f64]) -> f64 {
    (mean(male) + mean(female)) / 2.0
}

impl GenderModel {
    pub fn threshold_hz(&self) -> f64 {
        self.threshold_hz
    }

    /// Threshold rounded to whole Hz, as reported to users.
    pub fn display_threshold_hz(&self) -> i64 {
        self.threshold_hz.round() as i64
    }

    pub fn male_peaks_hz(&self) -> &[f64] {
        &self.male_peaks_hz
    }

    pub fn female_peaks_hz(&self) -> &[f64] {
        &self.female_peaks_hz
    }

    pub fn male_mean_hz(&self) -> f64 {
        mean(&self.male_peaks_hz)
    }

    pub fn female_mean_hz(&self) -> f64 {
        mean(&self.female_peaks_hz)
    }

    pub fn band(&self) -> Band {
        self.band
    }

    /// True when the class means coincide or the female mean lies below the
    /// male mean, i.e. the threshold cannot separate the training classes as
    /// intended.
    pub fn is_degenerate(&self) -> bool {
        self.female_mean_hz() <= self.male_mean_hz()
    }
}

impl fmt::Display for GenderModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "threshold: {} Hz", self.display_threshold_hz())
    }
}

fn check_peaks(peaks: &[f64], label: GenderLabel) -> Result<(), GenderError> {
    if peaks.is_empty() {
        return Err(GenderError::EmptyClass(label));
    }
    match peaks.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
        Some(&bad) => Err(GenderError::InvalidPeak(bad)),
        None => Ok(()),
    }
}

/// Builds a model from already-extracted peak frequencies.
pub fn train_from_peaks(
    male_peaks_hz: &[f64],
    female_peaks_hz: &[f64],
    band: Band,
) -> Result<GenderModel, GenderError> {
    check_peaks(male_peaks_hz, GenderLabel::Male)?;
    check_peaks(female_peaks_hz, GenderLabel::Female)?;
    let model = GenderModel {
        threshold_hz: midpoint(male_peaks_hz, female_peaks_hz),
        male_peaks_hz: male_peaks_hz.to_vec(),
        female_peaks_hz: female_peaks_hz.to_vec(),
        band,
    };
    if model.is_degenerate() {
        log::warn!(
            "degenerate gender model: male mean {:.1} Hz, female mean {:.1} Hz",
            model.male_mean_hz(),
            model.female_mean_hz()
        );
    }
    Ok(model)
}

/// Extracts the peak of every recording in `band` and trains on the peaks.
pub fn train(
    male_samples: &[PcmSignal],
    female_samples: &[PcmSignal],
    band: Band,
) -> Result<GenderModel, GenderError> {
    if male_samples.is_empty() {
        return Err(GenderError::EmptyClass(GenderLabel::Male));
    }
    if female_samples.is_empty() {
        return Err(GenderError::EmptyClass(GenderLabel::Female));
    }
    let peaks = |signals: &[PcmSignal]| -> Result<Vec<f64>, GenderError> {
        signals
            .iter()
            .map(|s| Ok(extract_feature(s, band)?.peak_frequency_hz))
            .collect()
    };
    train_from_peaks(&peaks(male_samples)?, &peaks(female_samples)?, band)
}

/// Peak feature of a recording in `band`.
pub fn extract_feature(signal: &PcmSignal, band: Band) -> Result<SpectralFeature, SpectralError> {
    spectral::peak_frequency(signal, band.low_hz, band.high_hz)
}

/// Female iff the peak is strictly above the threshold.
pub fn classify(model: &GenderModel, feature: &SpectralFeature) -> GenderLabel {
    classify_frequency(model, feature.peak_frequency_hz)
}

pub fn classify_frequency(model: &GenderModel, peak_frequency_hz: f64) -> GenderLabel {
    if peak_frequency_hz > model.threshold_hz {
        GenderLabel::Female
    } else {
        GenderLabel::Male
    }
}

/// Extracts the feature with the model's band and classifies it.
pub fn identify(
    model: &GenderModel,
    signal: &PcmSignal,
) -> Result<(GenderLabel, SpectralFeature), SpectralError> {
    let feature = extract_feature(signal, model.band)?;
    Ok((classify(model, &feature), feature))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    /// `(expected, predicted)` per sample, in input order.
    pub per_sample: Vec<(GenderLabel, GenderLabel)>,
    pub accuracy_percent: f64,
}

impl EvaluationReport {
    /// Scores a list of `(expected, predicted)` outcomes:
    /// accuracy = 100 x correct / total.
    pub fn from_outcomes(per_sample: Vec<(GenderLabel, GenderLabel)>) -> Result<Self, GenderError> {
        if per_sample.is_empty() {
            return Err(GenderError::EmptyEvaluation);
        }
        let correct = per_sample.iter().filter(|(e, p)| e == p).count();
        let accuracy_percent = correct as f64 * 100.0 / per_sample.len() as f64;
        Ok(Self {
            per_sample,
            accuracy_percent,
        })
    }

    pub fn correct(&self) -> usize {
        self.per_sample.iter().filter(|(e, p)| e == p).count()
    }

    pub fn total(&self) -> usize {
        self.per_sample.len()
    }
}

pub fn evaluate(
    model: &GenderModel,
    labeled_features: &[(SpectralFeature, GenderLabel)],
) -> Result<EvaluationReport, GenderError> {
    EvaluationReport::from_outcomes(
        labeled_features
            .iter()
            .map(|(feature, expected)| (*expected, classify(model, feature)))
            .collect(),
    )
}

const KEYS: [&str; 5] = [
    "threshold_hz",
    "band_low_hz",
    "band_high_hz",
    "male_peaks_hz",
    "female_peaks_hz",
];

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Serializes the model as `key = value` lines. Floats are written in their
/// shortest round-trip form so loading restores them exactly.
pub fn save_model(model: &GenderModel) -> Vec<u8> {
    format!(
        "threshold_hz = {}\nband_low_hz = {}\nband_high_hz = {}\nmale_peaks_hz = {}\nfemale_peaks_hz = {}\n",
        model.threshold_hz,
        model.band.low_hz,
        model.band.high_hz,
        join(&model.male_peaks_hz),
        join(&model.female_peaks_hz),
    )
    .into_bytes()
}

pub fn load_model(bytes: &[u8]) -> Result<GenderModel, GenderError> {
    let bad = |msg: String| GenderError::MalformedModelFile(msg);
    let text = std::str::from_utf8(bytes).map_err(|e| bad(format!("not UTF-8: {e}")))?;

    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(bad(format!("line {}: unknown key {key:?}", lineno + 1)));
        }
        if fields.insert(key, value.trim()).is_some() {
            return Err(bad(format!("line {}: duplicate key {key:?}", lineno + 1)));
        }
    }

    let get = |key: &str| {
        fields
            .get(key)
            .copied()
            .ok_or_else(|| bad(format!("missing key {key:?}")))
    };
    let number = |key: &str| -> Result<f64, GenderError> {
        let raw = get(key)?;
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad(format!("{key}: {raw:?} is not a finite number")))
    };
    let list = |key: &str| -> Result<Vec<f64>, GenderError> {
        let raw = get(key)?;
        if raw.is_empty() {
            return Err(bad(format!("{key}: empty list")));
        }
        raw.split(',')
            .map(|item| {
                item.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("{key}: {item:?} is not a number")))
            })
            .collect()
    };

    let threshold_hz = number("threshold_hz")?;
    let band = Band {
        low_hz: number("band_low_hz")?,
        high_hz: number("band_high_hz")?,
    };
    if !(band.low_hz >= 0.0 && band.low_hz < band.high_hz) {
        return Err(bad(format!(
            "band [{}, {}] is empty",
            band.low_hz, band.high_hz
        )));
    }
    let male = list("male_peaks_hz")?;
    let female = list("female_peaks_hz")?;
    check_peaks(&male, GenderLabel::Male).map_err(|e| bad(e.to_string()))?;
    check_peaks(&female, GenderLabel::Female).map_err(|e| bad(e.to_string()))?;

    let expected = midpoint(&male, &female);
    if (threshold_hz - expected).abs() > 1e-9 * expected.abs().max(1.0) {
        return Err(bad(format!(
            "threshold {threshold_hz} Hz disagrees with the stored peaks (midpoint {expected} Hz)"
        )));
    }

    Ok(GenderModel {
        threshold_hz,
        male_peaks_hz: male,
        female_peaks_hz: female,
        band,
    })
}
