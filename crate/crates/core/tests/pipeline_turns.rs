use std::time::Duration;

use guide_core::dialogue::{lines, RobotAction};
use guide_core::gender::{self, Band};
use guide_core::speech::{
    clip_fingerprint, AsrClient, AsrConfig, MockRecognizer, MockServer, WavPassthrough,
};
use guide_core::{
    DialogueEngine, GenderLabel, HostEvent, PcmSignal, Pipeline, PipelineConfig, StateId, TurnInput,
};

const MALE: [f64; 5] = [512.0, 698.0, 497.0, 506.0, 628.0];
const FEMALE: [f64; 5] = [623.0, 676.0, 628.0, 576.0, 639.0];

fn tone(freq: f64) -> PcmSignal {
    let step = 2.0 * std::f64::consts::PI * freq / 44_100.0;
    let s = (0..44_100)
        .map(|n| (12_000.0 * (step * n as f64).sin()).round() as i16)
        .collect();
    PcmSignal::new(s, 44_100).unwrap()
}

fn audio(signal: &PcmSignal) -> TurnInput {
    TurnInput::Audio {
        signal: signal.clone(),
        source: "clip.wav".into(),
    }
}

fn to_request(p: &mut Pipeline) {
    p.run_turn(TurnInput::Event(HostEvent::PersonArrived))
        .unwrap();
    p.run_turn(TurnInput::Event(HostEvent::Face(Some("Putri".into()))))
        .unwrap();
    p.run_turn(TurnInput::Text("I am fine".into())).unwrap();
    assert_eq!(p.state(), StateId::ASK_REQUEST);
}

fn audio_pipeline(server: &MockServer) -> Pipeline {
    let model = gender::train_from_peaks(&MALE, &FEMALE, Band::default()).unwrap();
    let asr = AsrClient::new(AsrConfig {
        endpoint: server.url(),
        retry_delay: Duration::from_millis(1),
        ..AsrConfig::default()
    });
    Pipeline::with_parts(
        PipelineConfig::default(),
        Some(model),
        Some(asr),
        DialogueEngine::default(),
    )
}

#[test]
fn spoken_dance_request_from_female_voice() {
    let clip = tone(623.0);
    let mapping = [(
        clip_fingerprint(&WavPassthrough, &clip),
        "can you dance".to_string(),
    )];
    let server = MockServer::start(MockRecognizer::new(mapping), "127.0.0.1:0").unwrap();
    let mut p = audio_pipeline(&server);
    to_request(&mut p);

    let r = p.run_turn(audio(&clip)).unwrap();
    assert_eq!(r.transcript.text, "can you dance");
    assert_eq!(r.gender, Some(GenderLabel::Female));
    assert!(r.actions.contains(&RobotAction::Dance));
    assert_eq!(r.state_after, StateId::DANCE);
    assert!((r.peak_frequency_hz.unwrap() - 623.0).abs() <= 44_100.0 / 65_536.0);
}

#[test]
fn honorific_follows_identified_gender() {
    let clip = tone(512.0);
    let mapping = [(
        clip_fingerprint(&WavPassthrough, &clip),
        "I am fine".to_string(),
    )];
    let server = MockServer::start(MockRecognizer::new(mapping), "127.0.0.1:0").unwrap();
    let mut p = audio_pipeline(&server);
    p.run_turn(TurnInput::Event(HostEvent::PersonArrived))
        .unwrap();
    p.run_turn(TurnInput::Event(HostEvent::Face(Some("Taki".into()))))
        .unwrap();
    let r = p.run_turn(audio(&clip)).unwrap();
    assert_eq!(r.gender, Some(GenderLabel::Male));
    assert!(
        r.speech().iter().any(|s| s.ends_with("Sir?")),
        "{:?}",
        r.speech()
    );
}

#[test]
fn identical_inputs_give_identical_records() {
    let clip = tone(676.0);
    let mapping = [(
        clip_fingerprint(&WavPassthrough, &clip),
        "how old are you".to_string(),
    )];
    let server = MockServer::start(MockRecognizer::new(mapping), "127.0.0.1:0").unwrap();
    let run = || {
        let mut p = audio_pipeline(&server);
        to_request(&mut p);
        p.run_turn(audio(&clip)).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    assert!(a
        .actions
        .contains(&RobotAction::Speak("I am very young.".into())));
}

#[test]
fn recognition_failure_is_tagged() {
    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let cfg = PipelineConfig {
        asr: AsrConfig {
            endpoint: format!("http://127.0.0.1:{port}"),
            ..AsrConfig::default()
        },
        ..PipelineConfig::default()
    };
    let mut p = Pipeline::from_config(cfg).unwrap();
    let err = p.run_turn(audio(&tone(600.0))).unwrap_err();
    assert_eq!(err.stage, guide_core::Stage::Recognition);
    assert_eq!(p.state(), StateId::STANDBY);
}

#[test]
fn full_visit_with_goodbye() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        output_dir: Some(dir.path().to_path_buf()),
        ..PipelineConfig::default()
    };
    let mut p = Pipeline::from_config(cfg).unwrap();
    to_request(&mut p);
    let r = p
        .run_turn(TurnInput::Text("where is the toilet".into()))
        .unwrap();
    assert_eq!(r.state_after.id(), 13);
    assert_eq!(r.resting_state, StateId::ANYTHING_ELSE);
    let r = p.run_turn(TurnInput::Text("no thanks".into())).unwrap();
    assert_eq!(r.resting_state, StateId::STANDBY);
    assert!(r.speech().contains(&lines::GOODBYE));
    let wav = std::fs::read(r.output_wav.unwrap()).unwrap();
    assert!(!guide_core::parse_wav(&wav).unwrap().is_empty());
}

#[test]
fn rules_file_replaces_builtin_answers() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("rules.tsv");
    std::fs::write(&rules, "name\tI am the custom guide\n").unwrap();
    let cfg = PipelineConfig {
        rules_path: Some(rules),
        ..PipelineConfig::default()
    };
    let mut p = Pipeline::from_config(cfg).unwrap();
    to_request(&mut p);
    let r = p
        .run_turn(TurnInput::Text("what is your name".into()))
        .unwrap();
    assert!(r.speech().contains(&"I am the custom guide"));
}
