//! One conversational turn end to end: audio or text in, recognition and
//! gender identification, dialogue and question answering, synthesized
//! speech out.

use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::audio_io::{write_wav, PcmSignal};
use crate::config::PipelineConfig;
use crate::dialogue::{
    Condition, DialogueEngine, Reaction, RobotAction, Session, StateId, Step, TransitionTable,
};
use crate::gender::{self, GenderLabel, GenderModel};
use crate::qa::{self, RuleTable};
use crate::speech::{AsrClient, SpeechSynthesizer, ToneSynthesizer, Transcript};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Setup,
    Recognition,
    GenderId,
    Synthesis,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Setup => "setup",
            Stage::Recognition => "recognition",
            Stage::GenderId => "gender identification",
            Stage::Synthesis => "synthesis",
            Stage::Output => "output",
        })
    }
}

/// An error together with the stage that raised it.
#[derive(Debug, Error)]
#[error("{stage} failed: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Box<dyn std::error::Error + Send + Sync>,
}

impl PipelineError {
    pub fn new(stage: Stage, source: impl Into<Box<dyn std::error::Error + Send + Sync>>) -> Self {
        Self {
            stage,
            source: source.into(),
        }
    }
}

/// Things the host (vision, clock) reports besides speech.
#[derive(Debug, Clone, PartialEq)]
pub enum HostEvent {
    PersonArrived,
    /// `Some(name)` for a recognized face, `None` for an unknown one.
    Face(Option<String>),
    FaceAbsentFor(f64),
    Timeout,
    Silence,
    Condition(Condition),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TurnInput {
    Audio { signal: PcmSignal, source: String },
    Text(String),
    Event(HostEvent),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    File(String),
    Typed(String),
    Event(HostEvent),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurnRecord {
    pub turn: usize,
    pub input_source: InputSource,
    pub transcript: Transcript,
    pub gender: Option<GenderLabel>,
    pub peak_frequency_hz: Option<f64>,
    pub state_before: StateId,
    /// State the input moved the machine into.
    pub state_after: StateId,
    /// State the machine rests in after automatic arcs.
    pub resting_state: StateId,
    pub steps: Vec<Step>,
    pub actions: Vec<RobotAction>,
    pub output_wav: Option<PathBuf>,
}

impl TurnRecord {
    /// Everything the robot says this turn, in order.
    pub fn speech(&self) -> Vec<&str> {
        self.actions
            .iter()
            .filter_map(RobotAction::speech)
            .collect()
    }

    /// Trace lines: one per transition, plus one for speech produced
    /// without a transition.
    pub fn log_lines(&self) -> Vec<String> {
        let from_steps: usize = self.steps.iter().map(|s| s.actions.len()).sum();
        let extra = &self.actions[..self.actions.len() - from_steps];
        let mut lines = Vec::new();
        if !extra.is_empty() {
            let acts: Vec<String> = extra.iter().map(ToString::to_string).collect();
            lines.push(format!(
                "STATE {} | COND - | ACTION {}",
                self.state_before,
                acts.join("; ")
            ));
        }
        lines.extend(self.steps.iter().map(Step::log_line));
        lines
    }
}

pub struct Pipeline {
    config: PipelineConfig,
    model: Option<GenderModel>,
    asr: Option<AsrClient>,
    session: Session,
    synth: Box<dyn SpeechSynthesizer>,
    turns: usize,
}

impl Pipeline {
    /// Loads the gender model and rule table named in `config` and builds
    /// a recognition client for its endpoint.
    pub fn from_config(config: PipelineConfig) -> Result<Self, PipelineError> {
        config
            .validate()
            .map_err(|e| PipelineError::new(Stage::Setup, e))?;
        let model = match &config.model_path {
            Some(path) => {
                let bytes = std::fs::read(path).map_err(|e| {
                    PipelineError::new(Stage::Setup, format!("{}: {e}", path.display()))
                })?;
                Some(gender::load_model(&bytes).map_err(|e| PipelineError::new(Stage::Setup, e))?)
            }
            None => None,
        };
        let rules = match &config.rules_path {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    PipelineError::new(Stage::Setup, format!("{}: {e}", path.display()))
                })?;
                RuleTable::parse(&text).map_err(|e| PipelineError::new(Stage::Setup, e))?
            }
            None => qa::default_rules(),
        };
        let asr = AsrClient::new(config.asr.clone());
        Ok(Self::with_parts(
            config,
            model,
            Some(asr),
            DialogueEngine::new(TransitionTable::standard(), rules),
        ))
    }

    pub fn with_parts(
        config: PipelineConfig,
        model: Option<GenderModel>,
        asr: Option<AsrClient>,
        engine: DialogueEngine,
    ) -> Self {
        Self {
            config,
            model,
            asr,
            session: Session::new(engine),
            synth: Box::new(ToneSynthesizer),
            turns: 0,
        }
    }

    pub fn with_synthesizer(mut self, synth: Box<dyn SpeechSynthesizer>) -> Self {
        self.synth = synth;
        self
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn state(&self) -> StateId {
        self.session.state()
    }

    pub fn run_turn(&mut self, input: TurnInput) -> Result<TurnRecord, PipelineError> {
        let state_before = self.session.state();
        let mut gender = None;
        let mut peak = None;

        let (input_source, transcript, reaction) = match input {
            TurnInput::Audio { signal, source } => {
                if signal.sample_rate_hz() != self.config.sample_rate_hz {
                    log::warn!(
                        "{source}: sampled at {} Hz, expected {} Hz",
                        signal.sample_rate_hz(),
                        self.config.sample_rate_hz
                    );
                }
                let asr = self.asr.as_ref().ok_or_else(|| {
                    PipelineError::new(Stage::Recognition, "no recognition client configured")
                })?;
                // Both stages read the same buffer.
                let transcript = asr
                    .recognize(&signal)
                    .map_err(|e| PipelineError::new(Stage::Recognition, e))?;
                if let Some(model) = &self.model {
                    let (label, feature) = gender::identify(model, &signal)
                        .map_err(|e| PipelineError::new(Stage::GenderId, e))?;
                    gender = Some(label);
                    peak = Some(feature.peak_frequency_hz);
                    self.session.set_gender(gender);
                }
                let reaction = self.session.hear(&transcript.text);
                (InputSource::File(source), transcript, reaction)
            }
            TurnInput::Text(text) => {
                let reaction = self.session.hear(&text);
                (
                    InputSource::Typed(text.clone()),
                    Transcript::new(text),
                    reaction,
                )
            }
            TurnInput::Event(event) => {
                let reaction = self.apply_event(&event);
                (InputSource::Event(event), Transcript::new(""), reaction)
            }
        };

        self.turns += 1;
        let actions = reaction.actions();
        let output_wav = self.speak(&actions)?;
        Ok(TurnRecord {
            turn: self.turns,
            input_source,
            transcript,
            gender,
            peak_frequency_hz: peak,
            state_before,
            state_after: reaction.entered_state().unwrap_or(state_before),
            resting_state: self.session.state(),
            steps: reaction.steps,
            actions,
            output_wav,
        })
    }

    fn apply_event(&mut self, event: &HostEvent) -> Reaction {
        match event {
            HostEvent::PersonArrived => self.session.handle(Condition::A),
            HostEvent::Face(name) => self.session.face(name.as_deref()),
            HostEvent::FaceAbsentFor(secs) => self.session.face_absent_for(*secs),
            HostEvent::Timeout => self.session.handle(Condition::Timeout20s),
            HostEvent::Silence => self.session.silence(),
            HostEvent::Condition(c) => self.session.handle(*c),
        }
    }

    /// Synthesizes this turn's speech into one WAV when an output directory
    /// is configured.
    fn speak(&self, actions: &[RobotAction]) -> Result<Option<PathBuf>, PipelineError> {
        let Some(dir) = &self.config.output_dir else {
            return Ok(None);
        };
        let text = actions
            .iter()
            .filter_map(RobotAction::speech)
            .collect::<Vec<_>>()
            .join(" ");
        if text.is_empty() {
            return Ok(None);
        }
        let signal = self.synth.synthesize(&text);
        if signal.is_empty() {
            return Err(PipelineError::new(
                Stage::Synthesis,
                "synthesizer produced no audio",
            ));
        }
        std::fs::create_dir_all(dir).map_err(|e| PipelineError::new(Stage::Output, e))?;
        let path = dir.join(format!("turn-{:03}.wav", self.turns));
        std::fs::write(&path, write_wav(&signal))
            .map_err(|e| PipelineError::new(Stage::Output, e))?;
        Ok(Some(path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialogue::lines;

    fn pipeline() -> Pipeline {
        Pipeline::with_parts(
            PipelineConfig::default(),
            None,
            None,
            DialogueEngine::default(),
        )
    }

    fn drive_to_request(p: &mut Pipeline) {
        p.run_turn(TurnInput::Event(HostEvent::PersonArrived))
            .unwrap();
        p.run_turn(TurnInput::Event(HostEvent::Face(Some("Putri".into()))))
            .unwrap();
        p.run_turn(TurnInput::Text("I am fine".into())).unwrap();
        assert_eq!(p.state(), StateId::ASK_REQUEST);
    }

    #[test]
    fn typed_name_question() {
        let mut p = pipeline();
        drive_to_request(&mut p);
        let r = p
            .run_turn(TurnInput::Text("what is your name".into()))
            .unwrap();
        assert_eq!(r.state_before, StateId::ASK_REQUEST);
        assert_eq!(r.state_after.id(), 13);
        assert!(r
            .actions
            .contains(&RobotAction::Speak("My name is Lumen".into())));
        assert_eq!(r.resting_state, StateId::ANYTHING_ELSE);
        assert_eq!(r.gender, None);
        assert_eq!(r.output_wav, None);
    }

    #[test]
    fn empty_text_does_nothing() {
        let mut p = pipeline();
        drive_to_request(&mut p);
        let r = p.run_turn(TurnInput::Text(String::new())).unwrap();
        assert!(r.actions.is_empty());
        assert_eq!(r.state_after, r.state_before);
        assert_eq!(r.resting_state, r.state_before);
    }

    #[test]
    fn audio_without_client_is_a_recognition_error() {
        let mut p = pipeline();
        let err = p
            .run_turn(TurnInput::Audio {
                signal: PcmSignal::new(vec![1, 2, 3], 44_100).unwrap(),
                source: "x.wav".into(),
            })
            .unwrap_err();
        assert_eq!(err.stage, Stage::Recognition);
    }

    #[test]
    fn reprompt_logged_without_transition() {
        let mut p = pipeline();
        p.run_turn(TurnInput::Event(HostEvent::PersonArrived))
            .unwrap();
        p.run_turn(TurnInput::Event(HostEvent::Face(Some("Putri".into()))))
            .unwrap();
        let r = p.run_turn(TurnInput::Text("banana".into())).unwrap();
        assert_eq!(
            r.log_lines(),
            vec![format!(
                "STATE 4 | COND - | ACTION Speak({:?})",
                lines::ASK_HOW_ARE_YOU
            )]
        );
    }

    #[test]
    fn writes_turn_wav() {
        let dir = tempfile::tempdir().unwrap();
        let config = PipelineConfig {
            output_dir: Some(dir.path().to_path_buf()),
            ..PipelineConfig::default()
        };
        let mut p = Pipeline::with_parts(config, None, None, DialogueEngine::default());
        let r = p
            .run_turn(TurnInput::Event(HostEvent::PersonArrived))
            .unwrap();
        let path = r.output_wav.unwrap();
        let sig = crate::audio_io::parse_wav(&std::fs::read(path).unwrap()).unwrap();
        assert_eq!(sig, crate::speech::synthesize(lines::INTRODUCTION));
        // posture-only or silent turns write nothing
        let r = p.run_turn(TurnInput::Text(String::new())).unwrap();
        assert_eq!(r.output_wav, None);
    }

    #[test]
    fn setup_errors_are_tagged() {
        let config = PipelineConfig {
            model_path: Some("/nonexistent/model.txt".into()),
            ..PipelineConfig::default()
        };
        let err = Pipeline::from_config(config).err().unwrap();
        assert_eq!(err.stage, Stage::Setup);
        assert!(err.to_string().starts_with("setup failed"));
    }
}
