//! The `converse` loop: typed utterances and `/` commands in, trace out.

use std::io::{BufRead, IsTerminal, Write};
use std::path::Path;

use anyhow::Result;
use guide_core::config::PipelineConfig;
use guide_core::{HostEvent, Pipeline, TurnInput, TurnRecord};

use crate::commands::read_signal;

const HELP: &str = "\
commands:
  <text>               say something to the robot
  /person              a person walks up
  /face <name|unknown> face recognition result
  /timeout             the visitor's face has been gone for 20 s
  /silence             no answer to the last question
  /audio <file.wav>    speak a recording (recognition + gender)
  /state               show the current state
  /quit                leave";

enum Line {
    Turn(TurnInput),
    Quit,
    Help,
    State,
    Nothing,
    Bad(String),
}

fn parse_line(line: &str) -> Line {
    let line = line.trim();
    if line.is_empty() {
        return Line::Nothing;
    }
    let Some(cmd) = line.strip_prefix('/') else {
        return Line::Turn(TurnInput::Text(line.to_string()));
    };
    let (name, arg) = match cmd.split_once(char::is_whitespace) {
        Some((n, a)) => (n, a.trim()),
        None => (cmd, ""),
    };
    let event = |e| Line::Turn(TurnInput::Event(e));
    match name {
        "quit" | "exit" => Line::Quit,
        "help" => Line::Help,
        "state" => Line::State,
        "person" => event(HostEvent::PersonArrived),
        "timeout" => event(HostEvent::Timeout),
        "silence" => event(HostEvent::Silence),
        "face" if arg.is_empty() => Line::Bad("usage: /face <name|unknown>".into()),
        "face" if arg.eq_ignore_ascii_case("unknown") => event(HostEvent::Face(None)),
        "face" => event(HostEvent::Face(Some(arg.to_string()))),
        "audio" if arg.is_empty() => Line::Bad("usage: /audio <file.wav>".into()),
        "audio" => match read_signal(Path::new(arg)) {
            Ok(signal) => Line::Turn(TurnInput::Audio {
                signal,
                source: arg.to_string(),
            }),
            Err(e) => Line::Bad(format!("{e:#}")),
        },
        other => Line::Bad(format!("unknown command /{other}, try /help")),
    }
}

pub fn print_record(record: &TurnRecord, out: &mut impl Write) -> std::io::Result<()> {
    if let guide_core::pipeline::InputSource::File(_) = record.input_source {
        writeln!(out, "heard: {}", record.transcript.text)?;
    }
    if let (Some(g), Some(f)) = (record.gender, record.peak_frequency_hz) {
        writeln!(out, "gender: {g} ({f:.1} Hz)")?;
    }
    for line in record.log_lines() {
        writeln!(out, "{line}")?;
    }
    for text in record.speech() {
        writeln!(out, "robot: {text}")?;
    }
    if let Some(path) = &record.output_wav {
        writeln!(out, "wav: {}", path.display())?;
    }
    writeln!(
        out,
        "turn {}: state {} -> {} (now {})",
        record.turn, record.state_before, record.state_after, record.resting_state
    )
}

pub fn converse(config: PipelineConfig, input: impl BufRead, mut out: impl Write) -> Result<()> {
    let interactive = std::io::stdin().is_terminal();
    let mut pipeline = Pipeline::from_config(config)?;
    if interactive {
        writeln!(out, "{HELP}")?;
    }
    let mut lines = input.lines();
    loop {
        if interactive {
            write!(out, "[{}]> ", pipeline.state())?;
            out.flush()?;
        }
        let Some(line) = lines.next() else { break };
        match parse_line(&line?) {
            Line::Quit => break,
            Line::Nothing => {}
            Line::Help => writeln!(out, "{HELP}")?,
            Line::State => writeln!(
                out,
                "state {}: {}",
                pipeline.state(),
                pipeline.state().description()
            )?,
            Line::Bad(msg) => writeln!(out, "error: {msg}")?,
            Line::Turn(turn) => match pipeline.run_turn(turn) {
                Ok(record) => print_record(&record, &mut out)?,
                Err(e) => writeln!(out, "error: {e}")?,
            },
        }
        out.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(script: &str) -> String {
        let mut out = Vec::new();
        converse(PipelineConfig::default(), script.as_bytes(), &mut out).unwrap();
        String::from_utf8(out).unwrap()
    }

    #[test]
    fn scripted_name_question() {
        let out = run("/person\n/face Putri\nI am fine\nwhat is your name\n/quit\nhello\n");
        assert!(
            out.contains("STATE 13 | COND H | ACTION Speak(\"My name is Lumen\")"),
            "{out}"
        );
        assert!(out.contains("turn 4: state 8 -> 13 (now 14)"), "{out}");
        assert!(!out.contains("turn 5"));
    }

    #[test]
    fn bad_commands_do_not_stop_the_loop() {
        let out = run("/dance\n/face\n/audio /nonexistent.wav\n/person\n");
        assert_eq!(out.matches("error:").count(), 3, "{out}");
        assert!(out.contains("turn 1: state 1 -> 2"), "{out}");
    }

    #[test]
    fn unknown_face() {
        let out = run("/person\n/face unknown\n");
        assert!(out.contains("COND !B"), "{out}");
    }
}
