//! Conversation state machine for the exhibition guide.
//!
//! Fifteen states, driven by lettered conditions reported by the host
//! (person present, face recognized, name given, ...). Some states move on
//! by themselves once their actions are done; those arcs carry the internal
//! [`Trigger::Auto`] and are followed by [`DialogueEngine::dispatch`].
//!
//! The engine never reads a clock. Face absence is reported by the host and
//! turned into [`Condition::Timeout20s`] by [`DialogueEngine::face_absence`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::gender::GenderLabel;
use crate::qa::{self, normalize, RuleTable};

/// Seconds without a face before the guide gives up on a visitor.
pub const FACE_TIMEOUT_SECS: f64 = 20.0;

/// Re-asks of the visitor's name before moving on without it.
pub const MAX_NAME_RETRIES: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(u8);

impl StateId {
    pub const STANDBY: StateId = StateId(1);
    pub const INTRODUCTION: StateId = StateId(2);
    pub const ASK_NAME: StateId = StateId(3);
    pub const GREET: StateId = StateId(4);
    pub const SAVE_FACE: StateId = StateId(5);
    pub const GOODBYE: StateId = StateId(6);
    pub const REPLY_GREETING: StateId = StateId(7);
    pub const ASK_REQUEST: StateId = StateId(8);
    pub const EXPLAIN: StateId = StateId(9);
    pub const DANCE: StateId = StateId(10);
    pub const SING: StateId = StateId(11);
    pub const PICTURE: StateId = StateId(12);
    pub const ANSWER_FIRST: StateId = StateId(13);
    pub const ANYTHING_ELSE: StateId = StateId(14);
    pub const ANSWER: StateId = StateId(15);

    pub fn new(id: u8) -> Option<StateId> {
        (1..=15).contains(&id).then_some(StateId(id))
    }

    pub fn id(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = StateId> {
        (1..=15).map(StateId)
    }

    pub fn description(self) -> &'static str {
        match self.0 {
            1 => "Standby.",
            2 => "Stand, face recognizing, face tracking, introduction.",
            3 => "Asking name.",
            4 => "Greeting with people's name",
            5 => "Saving new name and face.",
            6 => "Saying goodbye, waving hand.",
            7 => "Replying greeting.",
            8 => "Asking if there's any request.",
            9 => "Explaining about the product in stand.",
            10 => "Dancing",
            11 => "Singing.",
            12 => "Making pose to take picture.",
            13 => "Answer first question.",
            14 => "Asking if there's anything else.",
            15 => "Answering a question.",
            _ => unreachable!("state ids are 1..=15"),
        }
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    A,
    NotA,
    B,
    NotB,
    C,
    NotC,
    D,
    NotD,
    E,
    F,
    G,
    H,
    NotH,
    I,
    J,
    Timeout20s,
}

impl Condition {
    pub const ALL: [Condition; 16] = [
        Condition::A,
        Condition::NotA,
        Condition::B,
        Condition::NotB,
        Condition::C,
        Condition::NotC,
        Condition::D,
        Condition::NotD,
        Condition::E,
        Condition::F,
        Condition::G,
        Condition::H,
        Condition::NotH,
        Condition::I,
        Condition::J,
        Condition::Timeout20s,
    ];

    pub fn code(self) -> &'static str {
        use Condition::*;
        match self {
            A => "A",
            NotA => "!A",
            B => "B",
            NotB => "!B",
            C => "C",
            NotC => "!C",
            D => "D",
            NotD => "!D",
            E => "E",
            F => "F",
            G => "G",
            H => "H",
            NotH => "!H",
            I => "I",
            J => "J",
            Timeout20s => "T20",
        }
    }

    pub fn description(self) -> &'static str {
        use Condition::*;
        match self {
            A => "There is people.",
            NotA => "No people.",
            B => "Face recognized.",
            NotB => "Face unrecognized.",
            C => "There is name respond.",
            NotC => "No name respond.",
            D => "There is greeting respond.",
            NotD => "No greeting respond.",
            E => "Request for explaining product.",
            F => "Request for dancing.",
            G => "Request for playing music.",
            H => "Question recognized.",
            NotH => "Question unrecognized.",
            I => "User don't respond anything else.",
            J => "Request for take a picture with Lumen.",
            Timeout20s => "Face out of view for 20 seconds.",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown condition {0:?}")]
pub struct UnknownCondition(pub String);

impl FromStr for Condition {
    type Err = UnknownCondition;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Condition::ALL
            .into_iter()
            .find(|c| c.code().eq_ignore_ascii_case(s))
            .or_else(|| {
                s.eq_ignore_ascii_case("timeout")
                    .then_some(Condition::Timeout20s)
            })
            .ok_or_else(|| UnknownCondition(s.to_string()))
    }
}

/// What moves the machine: a host-reported condition, or the engine's own
/// "done, move on" signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Trigger {
    On(Condition),
    Auto,
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trigger::On(c) => c.fmt(f),
            Trigger::Auto => f.write_str("auto"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Posture {
    Stand,
    StandInit,
    StandZero,
    Sit,
    SitRelax,
    Crouch,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RobotAction {
    Speak(String),
    Posture(Posture),
    Dance,
    PlaySong,
    WaveHands,
    PosePicture,
    SaveNameFace(String),
}

impl RobotAction {
    fn speak(text: impl Into<String>) -> Self {
        let text = text.into();
        debug_assert!(!text.trim().is_empty());
        RobotAction::Speak(text)
    }

    pub fn speech(&self) -> Option<&str> {
        match self {
            RobotAction::Speak(t) => Some(t),
            _ => None,
        }
    }
}

impl fmt::Display for RobotAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RobotAction::Speak(t) => write!(f, "Speak({t:?})"),
            RobotAction::Posture(p) => write!(f, "Posture({p:?})"),
            RobotAction::Dance => f.write_str("Dance"),
            RobotAction::PlaySong => f.write_str("PlaySong"),
            RobotAction::WaveHands => f.write_str("WaveHands"),
            RobotAction::PosePicture => f.write_str("PosePicture"),
            RobotAction::SaveNameFace(n) => write!(f, "SaveNameFace({n:?})"),
        }
    }
}

/// Where an arc leads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    To(StateId),
    /// Loop back to `state` up to `max` times, then go to `then`.
    Retry {
        state: StateId,
        max: u8,
        then: StateId,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("duplicate arc for state {0}, {1}")]
    Duplicate(StateId, Trigger),
}

/// Arcs keyed by `(state, trigger)`; each key has exactly one target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionTable {
    arcs: BTreeMap<(StateId, Trigger), Target>,
}

impl TransitionTable {
    pub fn new(
        arcs: impl IntoIterator<Item = (StateId, Trigger, Target)>,
    ) -> Result<Self, TableError> {
        let mut map = BTreeMap::new();
        for (from, trigger, target) in arcs {
            if map.insert((from, trigger), target).is_some() {
                return Err(TableError::Duplicate(from, trigger));
            }
        }
        Ok(Self { arcs: map })
    }

    /// The guide's conversation flow.
    pub fn standard() -> Self {
        use Condition::*;
        let s = |id| StateId::new(id).expect("valid state id");
        let on = |from, c, to| (s(from), Trigger::On(c), Target::To(s(to)));
        let auto = |from, to| (s(from), Trigger::Auto, Target::To(s(to)));

        let mut arcs = vec![
            on(1, A, 2),
            on(2, B, 4),
            on(2, NotB, 3),
            on(3, C, 5),
            // Reconstructed: the retry cap on an unanswered name is not
            // drawn explicitly.
            (
                s(3),
                Trigger::On(NotC),
                Target::Retry {
                    state: s(3),
                    max: MAX_NAME_RETRIES,
                    then: s(8),
                },
            ),
            // Reconstructed: a freshly saved visitor is greeted next.
            auto(5, 4),
            on(4, D, 7),
            on(4, NotD, 8),
            auto(7, 8),
            on(8, E, 9),
            on(8, F, 10),
            on(8, G, 11),
            on(8, J, 12),
            on(8, H, 13),
            on(8, NotH, 8),
            on(8, I, 6),
            auto(9, 14),
            auto(10, 14),
            auto(11, 14),
            auto(12, 14),
            auto(13, 14),
            on(14, H, 15),
            on(14, I, 6),
            auto(15, 14),
            auto(6, 1),
        ];
        arcs.extend((2..=15).map(|id| on(id, Timeout20s, 6)));
        Self::new(arcs).expect("standard table has no duplicate arcs")
    }

    pub fn target(&self, from: StateId, trigger: Trigger) -> Option<Target> {
        self.arcs.get(&(from, trigger)).copied()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (StateId, Trigger, Target)> + '_ {
        self.arcs.iter().map(|(&(s, t), &target)| (s, t, target))
    }

    /// Every state a single arc out of `from` can lead to.
    pub fn successors(&self, from: StateId) -> BTreeSet<StateId> {
        self.arcs
            .range((from, Trigger::On(Condition::A))..=(from, Trigger::Auto))
            .flat_map(|(_, target)| match *target {
                Target::To(s) => vec![s],
                Target::Retry { state, then, .. } => vec![state, then],
            })
            .collect()
    }

    /// States reachable from `start` (inclusive) over any arcs.
    pub fn reachable_from(&self, start: StateId) -> BTreeSet<StateId> {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(s) = queue.pop_front() {
            for next in self.successors(s) {
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        seen
    }

    /// Audit listing, one `state, condition -> state` line per arc.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for (from, trigger, target) in self.arcs() {
            match target {
                Target::To(to) => out.push_str(&format!("{from}, {trigger} -> {to}\n")),
                Target::Retry { state, max, then } => {
                    out.push_str(&format!("# after {max} retries this arc leads to {then}\n"));
                    out.push_str(&format!("{from}, {trigger} -> {state}\n"));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionContext {
    pub current_state: StateId,
    pub visitor_name: Option<String>,
    pub visitor_gender: Option<GenderLabel>,
    pub seconds_since_face_seen: f64,
    /// Most recent visitor utterance, used by states that answer it.
    pub last_utterance: Option<String>,
    pub name_retries: u8,
}

impl Default for SessionContext {
    fn default() -> Self {
        Self {
            current_state: StateId::STANDBY,
            visitor_name: None,
            visitor_gender: None,
            seconds_since_face_seen: 0.0,
            last_utterance: None,
            name_retries: 0,
        }
    }
}

pub mod lines {
    pub const INTRODUCTION: &str =
        "Hello, my name is Lumen. Lumen is a humanoid robot designed to be an exhibition guide.";
    pub const ASK_NAME: &str = "What is your name?";
    pub const ASK_NAME_AGAIN: &str = "Sorry, I did not hear you. What is your name?";
    pub const HAPPY: &str = "I am happy to hear that";
    pub const SORRY: &str = "I am sorry to hear that, get well soon.";
    pub const ASK_HOW_ARE_YOU: &str = "Sorry, how are you today?";
    pub const NOT_UNDERSTOOD: &str = "I am sorry, I do not understand your question.";
    pub const PICTURE: &str = "Sure, let's take a picture together.";
    pub const ANYTHING_ELSE: &str = "Is there anything else?";
    pub const GOODBYE: &str = "Thank you for visiting. Goodbye.";
}

/// How the visitor is addressed.
pub fn honorific(gender: GenderLabel) -> &'static str {
    match gender {
        GenderLabel::Male => "Sir",
        GenderLabel::Female => "Ma'am",
    }
}

pub fn help_prompt(gender: Option<GenderLabel>) -> String {
    match gender {
        Some(g) => format!("what can I help you, {}?", honorific(g)),
        None => "what can I help you?".to_string(),
    }
}

pub fn greeting(name: Option<&str>) -> String {
    match name {
        Some(n) => format!("good morning, how are you today {n}?"),
        None => "good morning, how are you today?".to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreetReply {
    Fine,
    NotFine,
    Unclear,
}

pub fn classify_greet_reply(answer: &str) -> GreetReply {
    let tokens = normalize(answer);
    let not_fine = tokens.windows(2).any(|w| w[0] == "not" && w[1] == "fine");
    if not_fine {
        GreetReply::NotFine
    } else if tokens.iter().any(|t| t == "fine") {
        GreetReply::Fine
    } else {
        GreetReply::Unclear
    }
}

/// Reply to the visitor's answer to "how are you".
pub fn greet_response(answer: &str) -> &'static str {
    match classify_greet_reply(answer) {
        GreetReply::NotFine => lines::SORRY,
        GreetReply::Fine => lines::HAPPY,
        GreetReply::Unclear => lines::ASK_HOW_ARE_YOU,
    }
}

/// Pulls a name out of an answer such as "my name is Putri" or "I'm Taki".
pub fn extract_name(answer: &str) -> Option<String> {
    const LEADS: [&[&str]; 6] = [
        &["my", "name", "is"],
        &["my", "name's"],
        &["i", "am"],
        &["i'm"],
        &["call", "me"],
        &["it's"],
    ];
    let words: Vec<String> = answer
        .split_whitespace()
        .map(|w| {
            w.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'')
                .to_string()
        })
        .filter(|w| !w.is_empty())
        .collect();
    let lower: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
    let skip = LEADS
        .iter()
        .find(|lead| lower.len() > lead.len() && lower.iter().zip(lead.iter()).all(|(a, b)| a == b))
        .map_or(0, |lead| lead.len());
    let rest = &words[skip..];
    if rest.is_empty() {
        return None;
    }
    let mut name = rest.join(" ");
    if let Some(first) = name.chars().next() {
        let upper: String = first.to_uppercase().collect();
        name.replace_range(..first.len_utf8(), &upper);
    }
    Some(name)
}

/// What a visitor utterance means in the current state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Interpretation {
    Condition(Condition),
    /// Stay in place and say this.
    Reprompt(String),
    /// Nothing to act on.
    Ignore,
}

fn has_any(tokens: &[String], words: &[&str]) -> bool {
    tokens.iter().any(|t| words.contains(&t.as_str()))
}

fn is_decline(tokens: &[String]) -> bool {
    const LEADS: [&str; 7] = [
        "no", "nope", "nothing", "bye", "goodbye", "thanks", "enough",
    ];
    tokens.first().is_some_and(|t| LEADS.contains(&t.as_str()))
        || tokens.iter().map(String::as_str).eq(["that's", "all"])
}

/// One transition taken by the engine.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub from: StateId,
    pub trigger: Trigger,
    pub to: StateId,
    pub actions: Vec<RobotAction>,
}

impl Step {
    /// `STATE n | COND x | ACTION ...`
    pub fn log_line(&self) -> String {
        let actions = if self.actions.is_empty() {
            "none".to_string()
        } else {
            self.actions
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ")
        };
        format!(
            "STATE {} | COND {} | ACTION {}",
            self.to, self.trigger, actions
        )
    }
}

#[derive(Debug, Clone)]
pub struct DialogueEngine {
    table: TransitionTable,
    rules: RuleTable,
}

impl Default for DialogueEngine {
    fn default() -> Self {
        Self::new(TransitionTable::standard(), qa::default_rules())
    }
}

impl DialogueEngine {
    pub fn new(table: TransitionTable, rules: RuleTable) -> Self {
        Self { table, rules }
    }

    pub fn table(&self) -> &TransitionTable {
        &self.table
    }

    pub fn rules(&self) -> &RuleTable {
        &self.rules
    }

    /// One transition. Pairs without an arc leave the context untouched and
    /// produce no actions.
    pub fn next(
        &self,
        ctx: &SessionContext,
        condition: Condition,
    ) -> (SessionContext, Vec<RobotAction>) {
        match self.step(ctx, Trigger::On(condition)) {
            Some((ctx, step)) => (ctx, step.actions),
            None => (ctx.clone(), Vec::new()),
        }
    }

    fn step(&self, ctx: &SessionContext, trigger: Trigger) -> Option<(SessionContext, Step)> {
        let from = ctx.current_state;
        let target = self.table.target(from, trigger)?;
        let mut next = ctx.clone();
        let to = match target {
            Target::To(s) => s,
            Target::Retry { state, max, then } => {
                if ctx.name_retries < max {
                    next.name_retries += 1;
                    state
                } else {
                    next.name_retries = 0;
                    then
                }
            }
        };
        next.current_state = to;
        match trigger {
            Trigger::On(Condition::A | Condition::B) => next.seconds_since_face_seen = 0.0,
            Trigger::On(Condition::Timeout20s) => next.seconds_since_face_seen = 0.0,
            _ => {}
        }
        if to == StateId::STANDBY {
            next = SessionContext::default();
        }
        let actions = self.entry_actions(to, trigger, &next);
        Some((
            next,
            Step {
                from,
                trigger,
                to,
                actions,
            },
        ))
    }

    fn entry_actions(
        &self,
        state: StateId,
        via: Trigger,
        ctx: &SessionContext,
    ) -> Vec<RobotAction> {
        use RobotAction as Act;
        let answer = || {
            let said = ctx.last_utterance.as_deref().unwrap_or("");
            self.rules.respond(said).unwrap_or(lines::NOT_UNDERSTOOD)
        };
        match state.id() {
            1 => vec![],
            2 => vec![
                Act::Posture(Posture::Stand),
                Act::speak(lines::INTRODUCTION),
            ],
            3 if via == Trigger::On(Condition::NotC) => vec![Act::speak(lines::ASK_NAME_AGAIN)],
            3 => vec![Act::speak(lines::ASK_NAME)],
            4 => vec![Act::speak(greeting(ctx.visitor_name.as_deref()))],
            5 => vec![Act::SaveNameFace(
                ctx.visitor_name
                    .clone()
                    .unwrap_or_else(|| "visitor".to_string()),
            )],
            6 => vec![
                Act::speak(lines::GOODBYE),
                Act::WaveHands,
                Act::Posture(Posture::Sit),
            ],
            7 => vec![Act::speak(greet_response(
                ctx.last_utterance.as_deref().unwrap_or(""),
            ))],
            8 if via == Trigger::On(Condition::NotH) => vec![
                Act::speak(lines::NOT_UNDERSTOOD),
                Act::speak(help_prompt(ctx.visitor_gender)),
            ],
            8 => vec![Act::speak(help_prompt(ctx.visitor_gender))],
            9 => vec![Act::speak(qa::answers::EXPLAIN)],
            10 => vec![Act::speak(qa::answers::DANCE), Act::Dance],
            11 => vec![Act::speak(qa::answers::SING), Act::PlaySong],
            12 => vec![Act::speak(lines::PICTURE), Act::PosePicture],
            13 | 15 => vec![Act::speak(answer())],
            14 => vec![Act::speak(lines::ANYTHING_ELSE)],
            _ => unreachable!("state ids are 1..=15"),
        }
    }

    /// Follows automatic arcs until the machine rests in a state that waits
    /// for the host.
    pub fn settle(&self, ctx: &SessionContext) -> (SessionContext, Vec<Step>) {
        let mut ctx = ctx.clone();
        let mut steps = Vec::new();
        // Auto arcs never form a cycle in a sane table; the bound guards
        // against a custom one that does.
        for _ in 0..=15 {
            match self.step(&ctx, Trigger::Auto) {
                Some((next, step)) => {
                    ctx = next;
                    steps.push(step);
                }
                None => break,
            }
        }
        (ctx, steps)
    }

    /// Applies `condition` and then any automatic arcs. Returns the steps
    /// taken, empty when the condition has no arc from the current state.
    pub fn dispatch(
        &self,
        ctx: &SessionContext,
        condition: Condition,
    ) -> (SessionContext, Vec<Step>) {
        let Some((after, first)) = self.step(ctx, Trigger::On(condition)) else {
            return (ctx.clone(), Vec::new());
        };
        let (settled, mut rest) = self.settle(&after);
        let mut steps = vec![first];
        steps.append(&mut rest);
        (settled, steps)
    }

    /// Timeout condition once the face has been gone long enough.
    pub fn face_absence(&self, ctx: &SessionContext, seconds: f64) -> Option<Condition> {
        (ctx.current_state != StateId::STANDBY && seconds >= FACE_TIMEOUT_SECS)
            .then_some(Condition::Timeout20s)
    }

    /// Maps an utterance onto the condition it signals in the current state.
    pub fn interpret(&self, state: StateId, utterance: &str) -> Interpretation {
        let tokens = normalize(utterance);
        if tokens.is_empty() {
            return Interpretation::Ignore;
        }
        match state {
            StateId::ASK_NAME => Interpretation::Condition(Condition::C),
            StateId::GREET => match classify_greet_reply(utterance) {
                GreetReply::Unclear => Interpretation::Reprompt(lines::ASK_HOW_ARE_YOU.to_string()),
                _ => Interpretation::Condition(Condition::D),
            },
            StateId::ASK_REQUEST => {
                let c = if is_decline(&tokens) {
                    Condition::I
                } else if has_any(
                    &tokens,
                    &["picture", "pictures", "photo", "photos", "selfie"],
                ) {
                    Condition::J
                } else if has_any(&tokens, &["dance", "dancing"]) {
                    Condition::F
                } else if has_any(&tokens, &["sing", "singing", "song", "music"]) {
                    Condition::G
                } else if has_any(&tokens, &["explain", "product"]) {
                    Condition::E
                } else if self.rules.respond(utterance).is_some() {
                    Condition::H
                } else {
                    Condition::NotH
                };
                Interpretation::Condition(c)
            }
            StateId::ANYTHING_ELSE => {
                let c = if is_decline(&tokens) {
                    Condition::I
                } else if self.rules.respond(utterance).is_some() {
                    Condition::H
                } else {
                    Condition::NotH
                };
                Interpretation::Condition(c)
            }
            _ => Interpretation::Ignore,
        }
    }

    /// Negative condition for "the visitor said nothing" in the current state.
    pub fn silence(&self, state: StateId) -> Option<Condition> {
        match state {
            StateId::ASK_NAME => Some(Condition::NotC),
            StateId::GREET => Some(Condition::NotD),
            StateId::ASK_REQUEST | StateId::ANYTHING_ELSE => Some(Condition::I),
            _ => None,
        }
    }
}

/// Outcome of feeding one input to a [`Session`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Reaction {
    pub condition: Option<Condition>,
    pub steps: Vec<Step>,
    /// Speech produced without a transition (re-prompts).
    pub extra_actions: Vec<RobotAction>,
}

impl Reaction {
    pub fn actions(&self) -> Vec<RobotAction> {
        self.extra_actions
            .iter()
            .cloned()
            .chain(self.steps.iter().flat_map(|s| s.actions.iter().cloned()))
            .collect()
    }

    /// State entered by the input itself, before automatic arcs.
    pub fn entered_state(&self) -> Option<StateId> {
        self.steps.first().map(|s| s.to)
    }
}

/// One visitor conversation: an engine plus its context.
#[derive(Debug, Clone)]
pub struct Session {
    engine: DialogueEngine,
    ctx: SessionContext,
}

impl Session {
    pub fn new(engine: DialogueEngine) -> Self {
        Self {
            engine,
            ctx: SessionContext::default(),
        }
    }

    pub fn context(&self) -> &SessionContext {
        &self.ctx
    }

    pub fn state(&self) -> StateId {
        self.ctx.current_state
    }

    pub fn engine(&self) -> &DialogueEngine {
        &self.engine
    }

    pub fn set_gender(&mut self, gender: Option<GenderLabel>) {
        if gender.is_some() {
            self.ctx.visitor_gender = gender;
        }
    }

    /// Reports a host condition (person seen, face recognized, timeout, ...).
    pub fn handle(&mut self, condition: Condition) -> Reaction {
        let (ctx, steps) = self.engine.dispatch(&self.ctx, condition);
        self.ctx = ctx;
        Reaction {
            condition: Some(condition),
            steps,
            extra_actions: Vec::new(),
        }
    }

    /// Face recognized (with the stored name) or not.
    pub fn face(&mut self, name: Option<&str>) -> Reaction {
        match name {
            Some(n) => {
                if self
                    .engine
                    .table
                    .target(self.ctx.current_state, Trigger::On(Condition::B))
                    .is_some()
                {
                    self.ctx.visitor_name = Some(n.to_string());
                }
                self.handle(Condition::B)
            }
            None => self.handle(Condition::NotB),
        }
    }

    /// The visitor said nothing when an answer was expected.
    pub fn silence(&mut self) -> Reaction {
        match self.engine.silence(self.ctx.current_state) {
            Some(c) => self.handle(c),
            None => Reaction::default(),
        }
    }

    /// Host report of how long the face has been out of view.
    pub fn face_absent_for(&mut self, seconds: f64) -> Reaction {
        self.ctx.seconds_since_face_seen = seconds.max(0.0);
        match self.engine.face_absence(&self.ctx, seconds) {
            Some(c) => self.handle(c),
            None => Reaction::default(),
        }
    }

    /// A recognized or typed visitor utterance.
    pub fn hear(&mut self, utterance: &str) -> Reaction {
        match self.engine.interpret(self.ctx.current_state, utterance) {
            Interpretation::Ignore => Reaction::default(),
            Interpretation::Reprompt(text) => Reaction {
                condition: None,
                steps: Vec::new(),
                extra_actions: vec![RobotAction::speak(text)],
            },
            Interpretation::Condition(c) => {
                self.ctx.last_utterance = Some(utterance.to_string());
                if c == Condition::C {
                    self.ctx.visitor_name = extract_name(utterance);
                }
                self.handle(c)
            }
        }
    }
}

impl Default for Session {
    fn default() -> Self {
        Self::new(DialogueEngine::default())
    }
}
