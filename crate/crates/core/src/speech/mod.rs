//! Speech services: recognition over a two-request HTTP protocol, the codec
//! applied before upload, and a deterministic synthesizer.
//!
//! Wire protocol (HTTP/1.1):
//!
//! * `POST /recognize` with the encoded payload as body and an
//!   `X-Language` header; the response body is a session id.
//! * `GET /result/<id>` answers `200` with the transcript text, `202` while
//!   recognition is pending, `404` for unknown ids. An optional
//!   `X-Confidence` header carries a confidence in `[0, 1]`.

mod client;
mod mock;
mod tts;

pub use client::{AsrClient, AsrConfig, DEFAULT_ASR_ENDPOINT, DEFAULT_LANGUAGE};
pub use mock::{
    fingerprint, MockPoll, MockRecognizer, MockServer, RecordedRequest, UnknownSession,
};
pub use tts::{
    synthesize, tone_for_byte, SpeechSynthesizer, ToneSynthesizer, TTS_AMPLITUDE,
    TTS_SEGMENT_SAMPLES,
};

use thiserror::Error;

use crate::audio_io::{write_wav, PcmSignal};

pub const LANGUAGE_HEADER: &str = "X-Language";
pub const CONFIDENCE_HEADER: &str = "X-Confidence";

#[derive(Debug, Error, PartialEq)]
pub enum SpeechError {
    #[error("cannot reach recognition endpoint: {0}")]
    TransportError(String),
    #[error("recognition still pending after {attempts} polls")]
    RecognitionPending { attempts: u32 },
    #[error("recognition server answered {status}: {body}")]
    RemoteRejection { status: u16, body: String },
    #[error("nothing to upload: encoded payload is empty")]
    EmptyPayload,
    #[error("malformed server response: {0}")]
    MalformedResponse(String),
}

/// Recognized words.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub text: String,
    pub confidence: Option<f64>,
}

impl Transcript {
    pub fn new(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            confidence: None,
        }
    }

    /// The fallback for audio the recognizer knows nothing about.
    pub fn unrecognized() -> Self {
        Self {
            text: String::new(),
            confidence: Some(0.0),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.text.trim().is_empty()
    }
}

/// Encoding applied to audio before it is uploaded.
pub trait Codec: Send + Sync {
    fn format_name(&self) -> &str;
    fn encode(&self, signal: &PcmSignal) -> Vec<u8>;
}

/// Uploads the canonical WAV bytes unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct WavPassthrough;

impl Codec for WavPassthrough {
    fn format_name(&self) -> &str {
        "wav-passthrough"
    }

    fn encode(&self, signal: &PcmSignal) -> Vec<u8> {
        write_wav(signal)
    }
}

/// Fingerprint the mock server would compute for `signal` under `codec`.
pub fn clip_fingerprint(codec: &dyn Codec, signal: &PcmSignal) -> String {
    fingerprint(&codec.encode(signal))
}
