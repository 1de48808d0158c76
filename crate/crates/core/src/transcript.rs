//! Line-oriented transcript format.
//!
//! ```text
//! # ulam-transcript n=3 N=4 q=5
//! bit:0	Y	2,2,4	BIT 0
//! bit:1	N	1,2,3
//! pad:2	-	1,4,3	PAD 4
//! {1,2}	Y	1,1,2
//! ```
//!
//! One record per line, tab separated: question (`bit:i`, `range:lo-hi` or a
//! sorted `{id,...}` list), answer (`Y`/`N`), and the summary `a,b,j` after
//! the answer. Padding records use `pad:k` and `-`. An optional fourth column
//! carries a phase note. Lines are byte-stable: replaying the questions and
//! answers reproduces the file exactly.

// The example above keeps the real tab separators.
#![allow(clippy::tabs_in_doc_comments)]

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::game::{Answer, GameError, GameState, Question, StateSummary};

const HEADER: &str = "# ulam-transcript";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Record {
    Answer {
        question: Question,
        answer: Answer,
        summary: StateSummary,
        note: Option<String>,
    },
    Pad {
        count: u64,
        summary: StateSummary,
        note: Option<String>,
    },
}

impl Record {
    pub fn summary(&self) -> StateSummary {
        match self {
            Record::Answer { summary, .. } | Record::Pad { summary, .. } => *summary,
        }
    }

    pub fn note(&self) -> Option<&str> {
        match self {
            Record::Answer { note, .. } | Record::Pad { note, .. } => note.as_deref(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub n: u64,
    pub padded: u64,
    pub budget: u32,
    records: Vec<Record>,
    answers: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranscriptError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("record {index}: stored summary {stored} but replay gives {replayed}")]
    Diverged {
        index: usize,
        stored: StateSummary,
        replayed: StateSummary,
    },
    #[error(transparent)]
    Game(#[from] GameError),
}

impl Transcript {
    pub fn new(n: u64, padded: u64, budget: u32) -> Self {
        Self {
            n,
            padded,
            budget,
            records: Vec::new(),
            answers: 0,
        }
    }

    /// Number of answers applied; padding records are not counted.
    pub fn len(&self) -> usize {
        self.answers
    }

    pub fn is_empty(&self) -> bool {
        self.answers == 0
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn last_summary(&self) -> StateSummary {
        self.records.last().map_or(
            StateSummary::new(self.padded, 0, self.budget),
            Record::summary,
        )
    }

    pub(crate) fn push(&mut self, record: Record) {
        if matches!(record, Record::Answer { .. }) {
            self.answers += 1;
        }
        self.records.push(record);
    }

    /// Rebuilds the game from scratch, checking every stored summary.
    pub fn replay(&self) -> Result<GameState, TranscriptError> {
        let mut state = GameState::padded(self.n, self.padded, self.budget)?;
        for (index, record) in self.records.iter().enumerate() {
            let replayed = match record {
                Record::Answer {
                    question,
                    answer,
                    note,
                    ..
                } => state.apply_answer_noted(question, *answer, note.clone())?,
                Record::Pad { count, note, .. } => state.add_virtual_pennies(*count, note.clone()),
            };
            if replayed != record.summary() {
                return Err(TranscriptError::Diverged {
                    index,
                    stored: record.summary(),
                    replayed,
                });
            }
        }
        Ok(state)
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{HEADER} n={} N={} q={}",
            self.n, self.padded, self.budget
        )?;
        for record in &self.records {
            match record {
                Record::Answer {
                    question,
                    answer,
                    summary,
                    ..
                } => write!(f, "{question}\t{answer}\t{summary}")?,
                Record::Pad { count, summary, .. } => write!(f, "pad:{count}\t-\t{summary}")?,
            }
            if let Some(note) = record.note() {
                write!(f, "\t{note}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn parse_summary(text: &str) -> Option<StateSummary> {
    let mut parts = text.split(',');
    let a = parts.next()?.parse().ok()?;
    let b = parts.next()?.parse().ok()?;
    let j = parts.next()?.parse().ok()?;
    parts.next().is_none().then_some(StateSummary::new(a, b, j))
}

impl FromStr for Transcript {
    type Err = TranscriptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let fail = |line: usize, reason: &str| TranscriptError::Parse {
            line: line + 1,
            reason: reason.to_string(),
        };
        let (_, header) = lines.next().ok_or_else(|| fail(0, "missing header"))?;
        let fields = header
            .strip_prefix(HEADER)
            .ok_or_else(|| fail(0, "missing header"))?;
        let mut n = None;
        let mut padded = None;
        let mut budget = None;
        for field in fields.split_whitespace() {
            match field.split_once('=') {
                Some(("n", v)) => n = v.parse().ok(),
                Some(("N", v)) => padded = v.parse().ok(),
                Some(("q", v)) => budget = v.parse().ok(),
                _ => return Err(fail(0, "unknown header field")),
            }
        }
        let (Some(n), Some(padded), Some(budget)) = (n, padded, budget) else {
            return Err(fail(0, "header needs n, N and q"));
        };
        let mut transcript = Transcript::new(n, padded, budget);
        for (line, text) in lines {
            let cols: Vec<&str> = text.split('\t').collect();
            if !(3..=4).contains(&cols.len()) {
                return Err(fail(line, "expected 3 or 4 tab-separated columns"));
            }
            let summary = parse_summary(cols[2]).ok_or_else(|| fail(line, "bad summary"))?;
            let note = cols.get(3).map(|s| s.to_string());
            let record = if let Some(count) = cols[0].strip_prefix("pad:") {
                if cols[1] != "-" {
                    return Err(fail(line, "padding records carry no answer"));
                }
                let count = count.parse().map_err(|_| fail(line, "bad padding count"))?;
                Record::Pad {
                    count,
                    summary,
                    note,
                }
            } else {
                let question = cols[0]
                    .parse()
                    .map_err(|e: crate::game::ParseQuestionError| fail(line, &e.to_string()))?;
                let answer = match cols[1] {
                    "Y" => Answer::Yes,
                    "N" => Answer::No,
                    _ => return Err(fail(line, "answer must be Y or N")),
                };
                Record::Answer {
                    question,
                    answer,
                    summary,
                    note,
                }
            };
            transcript.push(record);
        }
        Ok(transcript)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GameState {
        let mut s = GameState::padded(3, 4, 5).unwrap();
        s.apply_answer_noted(&Question::Bit(0), Answer::Yes, Some("BIT 0".into()))
            .unwrap();
        s.apply_answer(&Question::Bit(1), Answer::No).unwrap();
        s.add_virtual_pennies(2, Some("PAD 4".into()));
        s.apply_answer(&Question::set([2, 1]), Answer::Yes).unwrap();
        s.apply_answer(&Question::Range { lo: 3, hi: 6 }, Answer::No)
            .unwrap();
        s
    }

    #[test]
    fn format_is_stable() {
        let text = sample().transcript().to_string();
        assert_eq!(
            text,
            "# ulam-transcript n=3 N=4 q=5\n\
             bit:0\tY\t2,2,4\tBIT 0\n\
             bit:1\tN\t1,2,3\n\
             pad:2\t-\t1,4,3\tPAD 4\n\
             {1,2}\tY\t1,1,2\n\
             range:3-6\tN\t1,1,1\n"
        );
    }

    #[test]
    fn parse_and_replay_reproduce_bytes() {
        let state = sample();
        let text = state.transcript().to_string();
        let parsed: Transcript = text.parse().unwrap();
        assert_eq!(&parsed, state.transcript());
        assert_eq!(parsed.len(), 4);
        let replayed = parsed.replay().unwrap();
        assert_eq!(replayed.transcript().to_string(), text);
        assert_eq!(replayed.summary(), state.summary());
    }

    #[test]
    fn replay_detects_tampering() {
        let text = sample().transcript().to_string().replace("1,1,2", "1,2,2");
        let parsed: Transcript = text.parse().unwrap();
        assert!(matches!(
            parsed.replay(),
            Err(TranscriptError::Diverged { index: 3, .. })
        ));
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!("bit:0\tY\t1,1,1\n".parse::<Transcript>().is_err());
        assert!("# ulam-transcript n=2 N=2 q=3\nbit:0\tX\t1,1,2\n"
            .parse::<Transcript>()
            .is_err());
        assert!("# ulam-transcript n=2 N=2 q=3\nbit:0\tY\t1,1\n"
            .parse::<Transcript>()
            .is_err());
    }
}
