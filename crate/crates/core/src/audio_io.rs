//! Mono 16-bit PCM signals and their RIFF/WAVE container.
//!
//! Only the PCM format tag, one channel and 16 bits per sample are accepted.
//! Chunks other than `fmt ` and `data` are skipped by their declared size.

use thiserror::Error;

/// Sample rate used for capture and synthesis ("44 kHz" in practice).
pub const DEFAULT_SAMPLE_RATE_HZ: u32 = 44_100;

const WAVE_FORMAT_PCM: u16 = 1;
const HEADER_LEN: usize = 44;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WavError {
    #[error("malformed RIFF/WAVE container: {0}")]
    MalformedContainer(String),
    #[error("unsupported WAV format: {0}")]
    UnsupportedFormat(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("sample rate must be positive")]
pub struct ZeroSampleRate;

/// Time-domain mono audio.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PcmSignal {
    samples: Vec<i16>,
    sample_rate_hz: u32,
}

impl PcmSignal {
    pub fn new(samples: Vec<i16>, sample_rate_hz: u32) -> Result<Self, ZeroSampleRate> {
        if sample_rate_hz == 0 {
            return Err(ZeroSampleRate);
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn empty(sample_rate_hz: u32) -> Result<Self, ZeroSampleRate> {
        Self::new(Vec::new(), sample_rate_hz)
    }

    pub fn samples(&self) -> &[i16] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    /// Always 1.
    pub fn channel_count(&self) -> u16 {
        1
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate_hz)
    }

    /// Samples in `[-1, 1)`, scaled by 1/32768.
    pub fn normalized(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|&s| f64::from(s) / 32768.0)
            .collect()
    }

    /// Sub-signal over `range` at the same rate.
    pub fn slice(&self, range: std::ops::Range<usize>) -> PcmSignal {
        PcmSignal {
            samples: self.samples[range].to_vec(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    pub fn into_samples(self) -> Vec<i16> {
        self.samples
    }
}

fn read_u16(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([bytes[at], bytes[at + 1]])
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

struct FmtChunk {
    format_tag: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

/// Parses a RIFF/WAVE PCM16 mono file.
pub fn parse_wav(bytes: &[u8]) -> Result<PcmSignal, WavError> {
    let malformed = |msg: &str| WavError::MalformedContainer(msg.to_string());

    if bytes.len() < 12 {
        return Err(malformed("file shorter than RIFF header"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(malformed("missing RIFF magic"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(malformed("missing WAVE form type"));
    }
    let riff_size = read_u32(bytes, 4) as usize;
    // The RIFF size counts everything after the 8-byte preamble.
    let riff_end = riff_size
        .checked_add(8)
        .filter(|&end| end <= bytes.len())
        .ok_or_else(|| malformed("RIFF size exceeds file length"))?;

    let mut fmt: Option<FmtChunk> = None;
    let mut pos = 12;
    while pos + 8 <= riff_end {
        let id = &bytes[pos..pos + 4];
        let size = read_u32(bytes, pos + 4) as usize;
        let body = pos + 8;
        let end = body
            .checked_add(size)
            .filter(|&end| end <= riff_end)
            .ok_or_else(|| {
                WavError::MalformedContainer(format!(
                    "chunk {:?} overruns container",
                    String::from_utf8_lossy(id)
                ))
            })?;

        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(malformed("fmt chunk shorter than 16 bytes"));
                }
                fmt = Some(FmtChunk {
                    format_tag: read_u16(bytes, body),
                    channels: read_u16(bytes, body + 2),
                    sample_rate: read_u32(bytes, body + 4),
                    bits_per_sample: read_u16(bytes, body + 14),
                });
            }
            b"data" => {
                let fmt = fmt.ok_or_else(|| malformed("data chunk before fmt chunk"))?;
                check_format(&fmt)?;
                if !size.is_multiple_of(2) {
                    return Err(malformed("odd data length for 16-bit samples"));
                }
                let samples = bytes[body..end]
                    .chunks_exact(2)
                    .map(|pair| i16::from_le_bytes([pair[0], pair[1]]))
                    .collect();
                return Ok(PcmSignal {
                    samples,
                    sample_rate_hz: fmt.sample_rate,
                });
            }
            _ => {}
        }
        // Chunks are word aligned.
        pos = end + (size & 1);
    }

    Err(malformed("no data chunk"))
}

fn check_format(fmt: &FmtChunk) -> Result<(), WavError> {
    let unsupported = |msg: String| Err(WavError::UnsupportedFormat(msg));
    if fmt.format_tag != WAVE_FORMAT_PCM {
        return unsupported(format!("format tag {} is not PCM", fmt.format_tag));
    }
    if fmt.channels != 1 {
        return unsupported(format!("{} channels, only mono is supported", fmt.channels));
    }
    if fmt.bits_per_sample != 16 {
        return unsupported(format!(
            "{} bits per sample, only 16 is supported",
            fmt.bits_per_sample
        ));
    }
    if fmt.sample_rate == 0 {
        return Err(WavError::MalformedContainer("zero sample rate".into()));
    }
    Ok(())
}

/// Encodes a signal as a canonical 44-byte-header PCM16 mono WAV.
pub fn write_wav(signal: &PcmSignal) -> Vec<u8> {
    let data_len = (signal.samples.len() * 2) as u32;
    let rate = signal.sample_rate_hz;
    let mut out = Vec::with_capacity(HEADER_LEN + data_len as usize);

    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");

    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&WAVE_FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&rate.saturating_mul(2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes());

    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in &signal.samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn header_with(format_tag: u16, channels: u16, bits: u16, data: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data.len() as u32).to_le_bytes());
        out.extend_from_slice(b"WAVE");
        out.extend_from_slice(b"fmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&format_tag.to_le_bytes());
        out.extend_from_slice(&channels.to_le_bytes());
        out.extend_from_slice(&44_100u32.to_le_bytes());
        out.extend_from_slice(&(44_100u32 * 2).to_le_bytes());
        out.extend_from_slice(&(channels * bits / 8).to_le_bytes());
        out.extend_from_slice(&bits.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        out.extend_from_slice(data);
        out
    }

    #[test]
    fn empty_payload() {
        let bytes = header_with(1, 1, 16, &[]);
        assert_eq!(bytes.len(), 44);
        let sig = parse_wav(&bytes).unwrap();
        assert!(sig.is_empty());
        assert_eq!(sig.sample_rate_hz(), 44_100);
    }

    #[test]
    fn little_endian_samples() {
        let bytes = header_with(1, 1, 16, &[0x01, 0x00, 0xFF, 0x7F]);
        assert_eq!(parse_wav(&bytes).unwrap().samples(), &[1, 32767]);
    }

    #[test]
    fn write_empty_is_44_bytes() {
        let bytes = write_wav(&PcmSignal::empty(44_100).unwrap());
        assert_eq!(bytes.len(), 44);
        assert_eq!(&bytes[40..44], &[0, 0, 0, 0]);
    }

    #[test]
    fn write_data_bytes() {
        let bytes = write_wav(&PcmSignal::new(vec![1, 32767], 44_100).unwrap());
        assert_eq!(&bytes[44..], &[0x01, 0x00, 0xFF, 0x7F]);
    }

    #[test]
    fn sine_round_trip() {
        let samples = (0..44_100)
            .map(|n| {
                let t = n as f64 / 44_100.0;
                (16_000.0 * (2.0 * std::f64::consts::PI * 440.0 * t).sin()).round() as i16
            })
            .collect();
        let sig = PcmSignal::new(samples, 44_100).unwrap();
        assert_eq!(parse_wav(&write_wav(&sig)).unwrap(), sig);
    }

    #[test]
    fn skips_list_chunk() {
        let sig = PcmSignal::new(vec![5, -5, 7], 8_000).unwrap();
        let plain = write_wav(&sig);
        let mut bytes = plain[..36].to_vec();
        // odd-sized LIST chunk followed by a pad byte
        bytes.extend_from_slice(b"LIST");
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(&[1, 2, 3, 0]);
        bytes.extend_from_slice(&plain[36..]);
        let riff = (bytes.len() - 8) as u32;
        bytes[4..8].copy_from_slice(&riff.to_le_bytes());
        assert_eq!(parse_wav(&bytes).unwrap(), sig);
    }

    #[test]
    fn rejects_bad_magic() {
        let mut bytes = write_wav(&PcmSignal::new(vec![1], 44_100).unwrap());
        bytes[0] = b'X';
        assert!(matches!(
            parse_wav(&bytes),
            Err(WavError::MalformedContainer(_))
        ));
        assert!(matches!(
            parse_wav(b"RIFF"),
            Err(WavError::MalformedContainer(_))
        ));
    }

    #[test]
    fn rejects_unsupported_formats() {
        for (tag, ch, bits) in [(3u16, 1u16, 16u16), (1, 2, 16), (1, 1, 24), (1, 1, 8)] {
            let bytes = header_with(tag, ch, bits, &[0; 12]);
            assert!(
                matches!(parse_wav(&bytes), Err(WavError::UnsupportedFormat(_))),
                "tag {tag} ch {ch} bits {bits}"
            );
        }
    }

    #[test]
    fn rejects_odd_data_length() {
        let bytes = header_with(1, 1, 16, &[1, 2, 3]);
        assert!(matches!(
            parse_wav(&bytes),
            Err(WavError::MalformedContainer(_))
        ));
    }

    #[test]
    fn rejects_truncated_data() {
        let mut bytes = write_wav(&PcmSignal::new(vec![1, 2, 3, 4], 44_100).unwrap());
        bytes.truncate(bytes.len() - 2);
        assert!(matches!(
            parse_wav(&bytes),
            Err(WavError::MalformedContainer(_))
        ));
    }

    #[test]
    fn does_not_read_past_data_chunk() {
        let sig = PcmSignal::new(vec![9, 8], 44_100).unwrap();
        let mut bytes = write_wav(&sig);
        // trailing garbage inside the RIFF body but after the data chunk
        bytes.extend_from_slice(&[0xAA, 0xBB]);
        let riff = (bytes.len() - 8) as u32;
        bytes[4..8].copy_from_slice(&riff.to_le_bytes());
        assert_eq!(parse_wav(&bytes).unwrap().samples(), &[9, 8]);
    }

    #[test]
    fn zero_rate_rejected() {
        assert_eq!(PcmSignal::new(vec![], 0), Err(ZeroSampleRate));
    }

    proptest! {
        #[test]
        fn round_trip(samples in proptest::collection::vec(any::<i16>(), 0..1000), rate in 1u32..200_000) {
            let sig = PcmSignal::new(samples, rate).unwrap();
            prop_assert_eq!(parse_wav(&write_wav(&sig)).unwrap(), sig);
        }

        #[test]
        fn garbage_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..128)) {
            let _ = parse_wav(&bytes);
        }
    }
}
