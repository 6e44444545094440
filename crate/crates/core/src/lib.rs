//! Audio communication toolkit for a social exhibition-guide robot.
//!
//! * [`audio_io`]: mono PCM16 WAV parsing and writing.
//! * [`spectral`]: radix-2 FFT and the peak-frequency speech feature.
//! * [`gender`]: threshold training, classification and evaluation.
//! * [`qa`]: keyword question answering.
//! * [`dialogue`]: the fifteen-state conversation machine.
//! * [`speech`]: recognition client and mock server, codec, synthesizer.
//! * [`pipeline`]: one turn through all of the above.

pub mod audio_io;
pub mod config;
pub mod dialogue;
pub mod gender;
pub mod pipeline;
pub mod qa;
pub mod spectral;
pub mod speech;

pub use audio_io::{parse_wav, write_wav, PcmSignal, WavError};
pub use config::PipelineConfig;
pub use dialogue::{Condition, DialogueEngine, RobotAction, Session, SessionContext, StateId};
pub use gender::{Band, EvaluationReport, GenderLabel, GenderModel};
pub use pipeline::{HostEvent, Pipeline, PipelineError, Stage, TurnInput, TurnRecord};
pub use qa::{default_rules, RuleTable};
pub use spectral::{extract_peak, fft, SpectralFeature, Spectrum};
pub use speech::{AsrClient, AsrConfig, MockRecognizer, MockServer, Transcript};
