use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use guide_core::config::PipelineConfig;
use guide_core::dialogue::TransitionTable;
use guide_core::gender::{self, GenderLabel, GenderModel};
use guide_core::speech::{self, AsrClient, MockRecognizer, MockServer, WavPassthrough};
use guide_core::{parse_wav, spectral, write_wav, PcmSignal, RuleTable};

pub fn read_signal(path: &Path) -> Result<PcmSignal> {
    let bytes =
        std::fs::read(path).with_context(|| format!("audio input: reading {}", path.display()))?;
    parse_wav(&bytes).with_context(|| format!("audio input: {}", path.display()))
}

pub fn load_model(path: &Path) -> Result<GenderModel> {
    let bytes =
        std::fs::read(path).with_context(|| format!("model: reading {}", path.display()))?;
    gender::load_model(&bytes).with_context(|| format!("model: {}", path.display()))
}

pub fn load_rules(config: &PipelineConfig) -> Result<RuleTable> {
    match &config.rules_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("rules: reading {}", path.display()))?;
            RuleTable::parse(&text).with_context(|| format!("rules: {}", path.display()))
        }
        None => Ok(guide_core::default_rules()),
    }
}

/// Resolves `entry` against the directory holding `list_file`.
fn relative_to(list_file: &Path, entry: &str) -> PathBuf {
    let p = Path::new(entry);
    if p.is_absolute() {
        return p.to_path_buf();
    }
    list_file.parent().unwrap_or(Path::new("")).join(p)
}

pub fn train(
    config: &PipelineConfig,
    male: &[PathBuf],
    female: &[PathBuf],
    output: &Path,
    out: &mut impl Write,
) -> Result<()> {
    let load = |paths: &[PathBuf]| {
        paths
            .iter()
            .map(|p| read_signal(p))
            .collect::<Result<Vec<_>>>()
    };
    let model = gender::train(&load(male)?, &load(female)?, config.band)
        .context("gender identification")?;
    std::fs::write(output, gender::save_model(&model))
        .with_context(|| format!("output: writing {}", output.display()))?;
    log::info!(
        "male mean {:.1} Hz, female mean {:.1} Hz",
        model.male_mean_hz(),
        model.female_mean_hz()
    );
    writeln!(out, "{model}")?;
    Ok(())
}

pub fn identify(model: &Path, files: &[PathBuf], out: &mut impl Write) -> Result<()> {
    let model = load_model(model)?;
    for file in files {
        let signal = read_signal(file)?;
        let (label, feature) = gender::identify(&model, &signal)
            .with_context(|| format!("gender identification: {}", file.display()))?;
        log::info!(
            "{}: peak {:.2} Hz",
            file.display(),
            feature.peak_frequency_hz
        );
        if files.len() == 1 {
            writeln!(out, "{label}")?;
        } else {
            writeln!(out, "{}\t{label}", file.display())?;
        }
    }
    Ok(())
}

pub fn fft(config: &PipelineConfig, file: &Path, top: usize, out: &mut impl Write) -> Result<()> {
    let signal = read_signal(file)?;
    let spectrum = spectral::fft(&signal).context("spectral analysis")?;
    let (low, high) = (config.band.low_hz, config.band.high_hz);
    let feature = spectral::extract_peak(&spectrum, low, high).context("spectral analysis")?;
    writeln!(out, "samples: {}", signal.len())?;
    writeln!(out, "sample rate: {} Hz", signal.sample_rate_hz())?;
    writeln!(out, "fft size: {}", spectrum.fft_size())?;
    writeln!(out, "bin width: {:.4} Hz", spectrum.bin_width_hz())?;
    writeln!(out, "band: {low}-{high} Hz")?;
    writeln!(
        out,
        "peak: {:.2} Hz (magnitude {:.3})",
        feature.peak_frequency_hz, feature.peak_magnitude
    )?;
    if top > 0 {
        let mut bins: Vec<(usize, f64)> = spectrum
            .magnitudes()
            .iter()
            .copied()
            .enumerate()
            .filter(|&(k, _)| (low..=high).contains(&spectrum.bin_frequency_hz(k)))
            .collect();
        bins.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (k, mag) in bins.into_iter().take(top) {
            writeln!(out, "  {:>10.2} Hz  {mag:.3}", spectrum.bin_frequency_hz(k))?;
        }
    }
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Vec<(PathBuf, GenderLabel)>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("manifest: reading {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (file, label) = line
            .split_once('\t')
            .ok_or_else(|| anyhow!("manifest line {}: expected `path<TAB>gender`", i + 1))?;
        let label: GenderLabel = label
            .trim()
            .parse()
            .map_err(|e| anyhow!("manifest line {}: {e}", i + 1))?;
        rows.push((relative_to(path, file.trim()), label));
    }
    if rows.is_empty() {
        bail!("manifest {} lists no recordings", path.display());
    }
    Ok(rows)
}

pub fn evaluate(model: &Path, manifest: &Path, details: bool, out: &mut impl Write) -> Result<()> {
    let model = load_model(model)?;
    let rows = read_manifest(manifest)?;
    let mut labeled = Vec::with_capacity(rows.len());
    for (file, expected) in &rows {
        let signal = read_signal(file)?;
        let feature = gender::extract_feature(&signal, model.band())
            .with_context(|| format!("gender identification: {}", file.display()))?;
        labeled.push((feature, *expected));
    }
    let report = gender::evaluate(&model, &labeled).context("gender identification")?;
    if details {
        for ((file, _), (expected, predicted)) in rows.iter().zip(&report.per_sample) {
            writeln!(
                out,
                "{}\texpected {expected}\tpredicted {predicted}",
                file.display()
            )?;
        }
    }
    writeln!(out, "accuracy: {:.1}%", report.accuracy_percent)?;
    Ok(())
}

pub fn transcribe(config: &PipelineConfig, file: &Path, out: &mut impl Write) -> Result<()> {
    let signal = read_signal(file)?;
    let client = AsrClient::new(config.asr.clone());
    let transcript = client.recognize(&signal).context("recognition")?;
    writeln!(out, "language : {}", config.asr.language)?;
    writeln!(out, "recognized words : {}", transcript.text)?;
    if let Some(c) = transcript.confidence {
        writeln!(out, "confidence : {c}")?;
    }
    Ok(())
}

pub fn say(text: &str, output: &Path, out: &mut impl Write) -> Result<()> {
    let signal = speech::synthesize(text);
    std::fs::write(output, write_wav(&signal))
        .with_context(|| format!("output: writing {}", output.display()))?;
    writeln!(
        out,
        "wrote {} samples to {}",
        signal.len(),
        output.display()
    )?;
    Ok(())
}

pub fn read_primes(path: &Path) -> Result<MockRecognizer> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("primes: reading {}", path.display()))?;
    let mut rec = MockRecognizer::new([]);
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (key, transcript) = line
            .split_once('\t')
            .ok_or_else(|| anyhow!("primes line {}: expected `clip<TAB>transcript`", i + 1))?;
        let key = key.trim();
        match key.strip_prefix("sha256:") {
            Some(hex) => {
                if hex.len() != 64 || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
                    bail!("primes line {}: bad fingerprint {hex:?}", i + 1);
                }
                rec.prime_fingerprint(hex, transcript.trim());
            }
            None => {
                let signal = read_signal(&relative_to(path, key))?;
                rec.prime_fingerprint(
                    speech::clip_fingerprint(&WavPassthrough, &signal),
                    transcript.trim(),
                );
            }
        }
    }
    Ok(rec)
}

pub fn serve_mock(
    host: &str,
    port: u16,
    prime: Option<&Path>,
    pending: u32,
    out: &mut impl Write,
) -> Result<()> {
    let rec = match prime {
        Some(p) => read_primes(p)?,
        None => MockRecognizer::new([]),
    }
    .with_pending_polls(pending);
    let primed = rec.primed();
    let server = MockServer::start(rec, &format!("{host}:{port}")).context("mock server")?;
    writeln!(out, "listening on {} ({primed} primed clips)", server.url())?;
    out.flush()?;
    server.wait();
    Ok(())
}

pub fn transitions(out: &mut impl Write) -> Result<()> {
    write!(out, "{}", TransitionTable::standard().export())?;
    Ok(())
}

pub fn rules(config: &PipelineConfig, out: &mut impl Write) -> Result<()> {
    write!(out, "{}", load_rules(config)?)?;
    Ok(())
}
