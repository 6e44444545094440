use std::time::Duration;

use super::{Codec, SpeechError, Transcript, WavPassthrough, CONFIDENCE_HEADER, LANGUAGE_HEADER};
use crate::audio_io::PcmSignal;

pub const DEFAULT_ASR_ENDPOINT: &str = "http://127.0.0.1:8765";
pub const DEFAULT_LANGUAGE: &str = "en-us";

#[derive(Debug, Clone, PartialEq)]
pub struct AsrConfig {
    pub endpoint: String,
    pub language: String,
    /// Extra result polls after the first one answers "pending".
    pub retries: u32,
    pub retry_delay: Duration,
    pub timeout: Duration,
}

impl Default for AsrConfig {
    fn default() -> Self {
        Self {
            endpoint: DEFAULT_ASR_ENDPOINT.to_string(),
            language: DEFAULT_LANGUAGE.to_string(),
            retries: 3,
            retry_delay: Duration::from_millis(100),
            timeout: Duration::from_secs(10),
        }
    }
}

/// Blocking client for the upload-then-poll recognition protocol.
pub struct AsrClient {
    config: AsrConfig,
    codec: Box<dyn Codec>,
    agent: ureq::Agent,
}

impl std::fmt::Debug for AsrClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AsrClient")
            .field("config", &self.config)
            .field("codec", &self.codec.format_name())
            .finish()
    }
}

impl AsrClient {
    pub fn new(config: AsrConfig) -> Self {
        Self::with_codec(config, Box::new(WavPassthrough))
    }

    pub fn with_codec(config: AsrConfig, codec: Box<dyn Codec>) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        Self {
            config,
            codec,
            agent,
        }
    }

    pub fn config(&self) -> &AsrConfig {
        &self.config
    }

    pub fn codec(&self) -> &dyn Codec {
        self.codec.as_ref()
    }

    /// Encodes the signal, uploads it and polls for the transcript.
    pub fn recognize(&self, signal: &PcmSignal) -> Result<Transcript, SpeechError> {
        self.recognize_payload(&self.codec.encode(signal))
    }

    pub fn recognize_payload(&self, payload: &[u8]) -> Result<Transcript, SpeechError> {
        if payload.is_empty() {
            return Err(SpeechError::EmptyPayload);
        }
        let session = self.upload(payload)?;
        self.poll(&session)
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.config.endpoint.trim_end_matches('/'), path)
    }

    fn upload(&self, payload: &[u8]) -> Result<String, SpeechError> {
        let response = self
            .agent
            .post(&self.url("/recognize"))
            .set(LANGUAGE_HEADER, &self.config.language)
            .set("Content-Type", "application/octet-stream")
            .send_bytes(payload)
            .map_err(into_speech_error)?;
        let id = response
            .into_string()
            .map_err(|e| SpeechError::MalformedResponse(e.to_string()))?
            .trim()
            .to_string();
        if id.is_empty() || id.contains('/') {
            return Err(SpeechError::MalformedResponse(format!(
                "bad session id {id:?}"
            )));
        }
        Ok(id)
    }

    fn poll(&self, session: &str) -> Result<Transcript, SpeechError> {
        let url = self.url(&format!("/result/{session}"));
        let attempts = self.config.retries + 1;
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(self.config.retry_delay);
            }
            let response = self.agent.get(&url).call().map_err(into_speech_error)?;
            match response.status() {
                202 => continue,
                200 => {
                    let confidence = match response.header(CONFIDENCE_HEADER) {
                        Some(raw) => Some(
                            raw.trim()
                                .parse::<f64>()
                                .ok()
                                .filter(|c| (0.0..=1.0).contains(c))
                                .ok_or_else(|| {
                                    SpeechError::MalformedResponse(format!("confidence {raw:?}"))
                                })?,
                        ),
                        None => None,
                    };
                    let text = response
                        .into_string()
                        .map_err(|e| SpeechError::MalformedResponse(e.to_string()))?;
                    return Ok(Transcript {
                        text: text.trim().to_string(),
                        confidence,
                    });
                }
                other => {
                    return Err(SpeechError::RemoteRejection {
                        status: other,
                        body: response.into_string().unwrap_or_default(),
                    })
                }
            }
        }
        Err(SpeechError::RecognitionPending { attempts })
    }
}

fn into_speech_error(err: ureq::Error) -> SpeechError {
    match err {
        ureq::Error::Status(status, response) => SpeechError::RemoteRejection {
            status,
            body: response.into_string().unwrap_or_default(),
        },
        ureq::Error::Transport(t) => SpeechError::TransportError(t.to_string()),
    }
}
