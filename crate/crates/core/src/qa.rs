//! Keyword question answering.
//!
//! A rule fires when every one of its keywords occurs as a token of the
//! utterance. Among firing rules the one with the most keywords wins, then
//! the one listed first.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("line {line}: expected `keyword[&keyword...]<TAB>answer`")]
    MissingTab { line: usize },
    #[error("line {line}: rule has no keywords")]
    NoKeywords { line: usize },
    #[error("line {line}: keyword {keyword:?} is not a single lowercase token")]
    BadKeyword { line: usize, keyword: String },
    #[error("line {line}: empty answer")]
    EmptyAnswer { line: usize },
    #[error("rule table is empty")]
    EmptyTable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseRule {
    keywords: BTreeSet<String>,
    answer: String,
    rank: usize,
}

impl ResponseRule {
    pub fn keywords(&self) -> &BTreeSet<String> {
        &self.keywords
    }

    pub fn answer(&self) -> &str {
        &self.answer
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    fn matches(&self, tokens: &BTreeSet<&str>) -> bool {
        self.keywords.iter().all(|k| tokens.contains(k.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult<'a> {
    pub matched: Option<(&'a ResponseRule, usize)>,
    pub normalized_utterance: Vec<String>,
}

/// Ordered rule table. Ranks are the positions in the table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleTable {
    rules: Vec<ResponseRule>,
}

/// Lowercases, splits on whitespace and strips punctuation. Apostrophes
/// inside a word are kept, so "I'm" stays one token.
pub fn normalize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|word| {
            let kept: String = word
                .chars()
                .map(|c| if c == '\u{2019}' { '\'' } else { c })
                .filter(|c| c.is_alphanumeric() || *c == '\'')
                .flat_map(char::to_lowercase)
                .collect();
            let trimmed = kept.trim_matches('\'');
            (!trimmed.is_empty()).then(|| trimmed.to_string())
        })
        .collect()
}

fn valid_keyword(k: &str) -> bool {
    let tokens = normalize(k);
    tokens.len() == 1 && tokens[0] == k
}

impl RuleTable {
    /// Builds a table from `(keywords, answer)` pairs in rank order.
    pub fn new<I, K, S>(rules: I) -> Result<Self, RuleError>
    where
        I: IntoIterator<Item = (K, S)>,
        K: IntoIterator,
        K::Item: Into<String>,
        S: Into<String>,
    {
        let mut out = Vec::new();
        for (rank, (keywords, answer)) in rules.into_iter().enumerate() {
            let line = rank + 1;
            let keywords: BTreeSet<String> = keywords.into_iter().map(Into::into).collect();
            if keywords.is_empty() {
                return Err(RuleError::NoKeywords { line });
            }
            if let Some(bad) = keywords.iter().find(|k| !valid_keyword(k)) {
                return Err(RuleError::BadKeyword {
                    line,
                    keyword: bad.clone(),
                });
            }
            let answer = answer.into();
            if answer.trim().is_empty() {
                return Err(RuleError::EmptyAnswer { line });
            }
            out.push(ResponseRule {
                keywords,
                answer,
                rank,
            });
        }
        if out.is_empty() {
            return Err(RuleError::EmptyTable);
        }
        Ok(Self { rules: out })
    }

    pub fn rules(&self) -> &[ResponseRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn find(&self, utterance: &str) -> MatchResult<'_> {
        let normalized_utterance = normalize(utterance);
        let tokens: BTreeSet<&str> = normalized_utterance.iter().map(String::as_str).collect();
        let mut best: Option<&ResponseRule> = None;
        for rule in &self.rules {
            if !rule.matches(&tokens) {
                continue;
            }
            // strictly more keywords replaces; equal keeps the earlier rank
            if best.is_none_or(|b| rule.keywords.len() > b.keywords.len()) {
                best = Some(rule);
            }
        }
        MatchResult {
            matched: best.map(|r| (r, r.keywords.len())),
            normalized_utterance,
        }
    }

    /// Answer for `utterance`, or `None` when no rule matches.
    pub fn respond(&self, utterance: &str) -> Option<&str> {
        self.find(utterance)
            .matched
            .map(|(rule, _)| rule.answer.as_str())
    }

    /// Parses the rule file format: one `keyword[&keyword...]<TAB>answer`
    /// per line. Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self, RuleError> {
        let mut rows = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let (keys, answer) = raw.split_once('\t').ok_or(RuleError::MissingTab { line })?;
            let keywords: Vec<String> = keys
                .split('&')
                .map(|k| k.trim().to_string())
                .filter(|k| !k.is_empty())
                .collect();
            if keywords.is_empty() {
                return Err(RuleError::NoKeywords { line });
            }
            if let Some(bad) = keywords.iter().find(|k| !valid_keyword(k)) {
                return Err(RuleError::BadKeyword {
                    line,
                    keyword: bad.clone(),
                });
            }
            let answer = answer.trim();
            if answer.is_empty() {
                return Err(RuleError::EmptyAnswer { line });
            }
            rows.push((keywords, answer.to_string()));
        }
        Self::new(rows)
    }
}

impl fmt::Display for RuleTable {
    /// Writes the table in the rule file format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in &self.rules {
            let keys: Vec<&str> = rule.keywords.iter().map(String::as_str).collect();
            writeln!(f, "{}\t{}", keys.join("&"), rule.answer)?;
        }
        Ok(())
    }
}

pub mod answers {
    pub const NAME: &str = "My name is Lumen";
    pub const DONT_KNOW_PLACE: &str =
        "Oh, I'm sorry. I don't know where it is. Maybe you can ask the crew or security.";
    pub const EXPLAIN: &str = "My name is Lumen. I am robot guide and you are now in Lumen Super Intelligence Agent stand. I was made to be a tour guide robot. I am able to explain about my stand. I can also amuse you with dancing and singing. I was made by Syarif, Taki, and Putri. That is all about me.";
    pub const DANCE: &str =
        "Of course I can dance. I will dance a Gangnam Style. Watch carefully, ok.";
    pub const SING: &str =
        "Of course I can sing. I will sing Manuk Jajali Song. I will switch my voice to female voice.";
    pub const EXHIBITION: &str = "You are now in Electrical Engineering Days Exhibition. It's an exhibition to show final project of the students. It is held by electrical engineering department of ITB. There are 49 stands of bachelor students including this stand. That is all about EE Days.";
    pub const MADE: &str = "I am nao robot platform. I am from Aldebaran Robotics, a French robotics company. But, Lumen is programmed by Syarif, Taki, and Putri.";
    pub const WHAT_DO: &str = "I can recognize human face. I can understand human language and respond to them. I can also amuse people with my dancing and singing. I can even walk, you know?";
    pub const BUSY_DAY: &str = "Well, actually I can. But today is a busy day. I need to be in this position for a while. I'm sorry.";
    pub const RUN: &str = "I want to, but no. I can't run.";
    pub const SPEAK_SLOW: &str = "I am sorry. I can only talk at this tempo.";
    pub const HEIGHT: &str = "I'm about 57 cm high.";
    pub const WEIGHT: &str = "My weight is 5.2 kg. I'm not fat, right?";
    pub const PLAY: &str = "Well, I want to play with you. But, I can't play around. I need to be in this stand. But I can show you my dancing and singing.";
    pub const PROGRAMMED: &str = "I was programmed by Syarif, Taki, and Putri.";
    pub const LUMEN: &str = "Lumen is a humanoid robot designed to be an exhibition guide.";
    pub const ALDEBARAN: &str =
        "Aldebaran is a robotic company from French. That's all I can tell you.";
    pub const OLD: &str = "I am very young.";
    pub const WEATHER: &str = "I think it is nice. I don't care anyway.";
    pub const STANDS: &str = "There are 49 stands. In each stand presented the final product of electrical engineering students. For more information, you can ask the stand directly.";
}

/// The question table shipped with the guide. Rows whose words are
/// alternatives are split into one single-keyword rule per word; the
/// two-word rows {what, do}, {can, walk}, {can, sit}, {can, run},
/// {speak, slow} and {kind, stand} require both words.
pub fn default_rules() -> RuleTable {
    use answers::*;
    let rows: &[(&[&str], &str)] = &[
        (&["name"], NAME),
        (&["toilet"], DONT_KNOW_PLACE),
        (&["pray"], DONT_KNOW_PLACE),
        (&["room"], DONT_KNOW_PLACE),
        (&["door"], DONT_KNOW_PLACE),
        (&["explain"], EXPLAIN),
        (&["dance"], DANCE),
        (&["dancing"], DANCE),
        (&["sing"], SING),
        (&["singing"], SING),
        (&["exhibition"], EXHIBITION),
        (&["event"], EXHIBITION),
        (&["made"], MADE),
        (&["create"], MADE),
        (&["what", "do"], WHAT_DO),
        (&["can", "walk"], BUSY_DAY),
        (&["can", "sit"], BUSY_DAY),
        (&["can", "run"], RUN),
        (&["speak", "slow"], SPEAK_SLOW),
        (&["tall"], HEIGHT),
        (&["height"], HEIGHT),
        (&["weight"], WEIGHT),
        (&["fat"], WEIGHT),
        (&["play"], PLAY),
        (&["programmed"], PROGRAMMED),
        (&["program"], PROGRAMMED),
        (&["lumen"], LUMEN),
        (&["aldebaran"], ALDEBARAN),
        (&["old"], OLD),
        (&["weather"], WEATHER),
        (&["kind", "stand"], STANDS),
    ];
    RuleTable::new(rows.iter().map(|(k, a)| (k.iter().copied(), *a)))
        .expect("built-in rule table is valid")
}
