//! Game semantics: candidates, questions, answer application and win detection.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::blocks::Block;
use crate::num::{pow2, weight_of};
use crate::transcript::{Record, Transcript};

/// Real candidates are `1..=n`, padding ghosts `n+1..=N`, virtual pennies above `N`.
pub type CandidateId = u64;

/// Largest question budget for which every weight fits in a `u64`.
pub const MAX_QUESTIONS: u32 = 57;

/// Contradiction count reported for eliminated candidates. Counts saturate here.
pub const ELIMINATED: u8 = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("search space must contain at least one candidate")]
    EmptySearchSpace,
    #[error("question budget {0} exceeds the supported cap of {MAX_QUESTIONS}")]
    BudgetTooLarge(u32),
    #[error("padded size {padded} is smaller than the real size {n}")]
    BadPadding { n: u64, padded: u64 },
    #[error("no questions remaining")]
    NoQuestionsRemaining,
    #[error("question references ids outside 1..={max}: {detail}")]
    UnknownIds { max: u64, detail: String },
    #[error("weight overflow for a={a} b={b} j={j}")]
    WeightOverflow { a: u64, b: u64, j: u32 },
    #[error("answers admit no real candidate with at most one lie")]
    InconsistentResponder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Answer {
    Yes,
    No,
}

impl Answer {
    pub fn from_bool(yes: bool) -> Self {
        if yes {
            Answer::Yes
        } else {
            Answer::No
        }
    }

    pub fn negate(self) -> Self {
        match self {
            Answer::Yes => Answer::No,
            Answer::No => Answer::Yes,
        }
    }

    pub fn code(self) -> char {
        match self {
            Answer::Yes => 'Y',
            Answer::No => 'N',
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// The set `A` in "Is x in A?".
///
/// `Bit(i)` is the set of ids `v` in `1..=N` whose code `v - 1` has bit `i`
/// set; `Range` is inclusive on both ends; `Set` is kept sorted and
/// deduplicated so its text form is canonical.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Question {
    Bit(u32),
    Range { lo: CandidateId, hi: CandidateId },
    Set(Vec<CandidateId>),
}

impl Question {
    pub fn set<I: IntoIterator<Item = CandidateId>>(ids: I) -> Self {
        let mut members: Vec<_> = ids.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Question::Set(members)
    }

    pub fn empty() -> Self {
        Question::Set(Vec::new())
    }

    pub fn contains(&self, universe: u64, id: CandidateId) -> bool {
        match self {
            Question::Bit(bit) => id >= 1 && id <= universe && ((id - 1) >> bit) & 1 == 1,
            Question::Range { lo, hi } => *lo <= id && id <= *hi,
            Question::Set(members) => members.binary_search(&id).is_ok(),
        }
    }

    /// Explicit members, ascending. Bit questions need the universe size.
    pub fn members(&self, universe: u64) -> Vec<CandidateId> {
        match self {
            Question::Bit(_) => (1..=universe)
                .filter(|&id| self.contains(universe, id))
                .collect(),
            Question::Range { lo, hi } => (*lo..=*hi).collect(),
            Question::Set(members) => members.clone(),
        }
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Question::Bit(bit) => write!(f, "bit:{bit}"),
            Question::Range { lo, hi } => write!(f, "range:{lo}-{hi}"),
            Question::Set(members) => {
                f.write_str("{")?;
                for (i, id) in members.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{id}")?;
                }
                f.write_str("}")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed question {text:?}: {reason}")]
pub struct ParseQuestionError {
    pub text: String,
    pub reason: String,
}

impl FromStr for Question {
    type Err = ParseQuestionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fail = |reason: &str| ParseQuestionError {
            text: s.to_string(),
            reason: reason.to_string(),
        };
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("bit:") {
            let bit: u32 = rest
                .parse()
                .map_err(|_| fail("bit index is not an integer"))?;
            if bit >= 64 {
                return Err(fail("bit index must be below 64"));
            }
            Ok(Question::Bit(bit))
        } else if let Some(rest) = s.strip_prefix("range:") {
            let (lo, hi) = rest
                .split_once('-')
                .ok_or_else(|| fail("expected range:lo-hi"))?;
            let lo: u64 = lo
                .parse()
                .map_err(|_| fail("range bound is not an integer"))?;
            let hi: u64 = hi
                .parse()
                .map_err(|_| fail("range bound is not an integer"))?;
            if lo == 0 || lo > hi {
                return Err(fail("range needs 1 <= lo <= hi"));
            }
            Ok(Question::Range { lo, hi })
        } else if let Some(inner) = s.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
            if inner.trim().is_empty() {
                return Ok(Question::empty());
            }
            let ids = inner
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u64>()
                        .map_err(|_| fail("set member is not an integer"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Question::set(ids))
        } else {
            Err(fail("expected bit:i, range:lo-hi or {id,...}"))
        }
    }
}

/// The pair `(a, b)` together with the questions remaining `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StateSummary {
    pub a: u64,
    pub b: u64,
    pub j: u32,
}

impl StateSummary {
    pub fn new(a: u64, b: u64, j: u32) -> Self {
        Self { a, b, j }
    }

    /// `w_j(a, b) = (j + 1) a + b`.
    pub fn weight(&self) -> Result<u64, GameError> {
        weight_of(&self.a, &self.b, self.j).ok_or(GameError::WeightOverflow {
            a: self.a,
            b: self.b,
            j: self.j,
        })
    }

    pub fn survivors(&self) -> u64 {
        self.a + self.b
    }

    pub fn is_won(&self) -> bool {
        self.survivors() <= 1
    }

    /// Whether the weight still fits the volume `2^j` of the remaining questions.
    pub fn within_volume(&self) -> bool {
        match (self.weight(), pow2::<u64>(self.j)) {
            (Ok(w), Some(cap)) => w <= cap,
            _ => false,
        }
    }
}

impl fmt::Display for StateSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.a, self.b, self.j)
    }
}

/// Outcome of a prospective answer, computed without mutating the state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChildPreview {
    pub summary: StateSummary,
    /// Real candidates (ids `<= n`) with at most one contradiction.
    pub real_live: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Cell {
    block: Block,
    lies: u8,
}

/// Full game state: every live candidate with its contradiction count.
///
/// Candidates not held in any cell have been eliminated. Virtual pennies are
/// ordinary single-id cells created with one contradiction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameState {
    real: u64,
    padded: u64,
    virtuals: u64,
    remaining: u32,
    cells: Vec<Cell>,
    transcript: Transcript,
}

impl GameState {
    /// Fresh game on `1..=n` with `q` questions.
    pub fn new(n: u64, q: u32) -> Result<Self, GameError> {
        Self::padded(n, n, q)
    }

    /// Fresh game played over `1..=padded` where only `1..=n` are real secrets.
    pub fn padded(n: u64, padded: u64, q: u32) -> Result<Self, GameError> {
        if n == 0 {
            return Err(GameError::EmptySearchSpace);
        }
        if padded < n || padded > 1 << 62 {
            return Err(GameError::BadPadding { n, padded });
        }
        if q > MAX_QUESTIONS {
            return Err(GameError::BudgetTooLarge(q));
        }
        Ok(Self {
            real: n,
            padded,
            virtuals: 0,
            remaining: q,
            cells: vec![Cell {
                block: Block::Cube {
                    mask: 0,
                    pattern: 0,
                },
                lies: 0,
            }],
            transcript: Transcript::new(n, padded, q),
        })
    }

    pub fn real_size(&self) -> u64 {
        self.real
    }

    pub fn padded_size(&self) -> u64 {
        self.padded
    }

    pub fn virtual_count(&self) -> u64 {
        self.virtuals
    }

    /// Highest valid candidate id.
    pub fn max_id(&self) -> u64 {
        self.padded + self.virtuals
    }

    pub fn remaining(&self) -> u32 {
        self.remaining
    }

    /// Number of answers applied so far.
    pub fn asked(&self) -> usize {
        self.transcript.len()
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn summary(&self) -> StateSummary {
        let (mut a, mut b) = (0, 0);
        for cell in &self.cells {
            let size = cell.block.count(self.padded, u64::MAX);
            if cell.lies == 0 {
                a += size;
            } else {
                b += size;
            }
        }
        StateSummary {
            a,
            b,
            j: self.remaining,
        }
    }

    pub fn weight(&self) -> Result<u64, GameError> {
        self.summary().weight()
    }

    /// Contradiction count of `id`; eliminated candidates report [`ELIMINATED`].
    pub fn contradictions(&self, id: CandidateId) -> Option<u8> {
        if id == 0 || id > self.max_id() {
            return None;
        }
        Some(
            self.cells
                .iter()
                .find(|c| c.block.contains(self.padded, id))
                .map_or(ELIMINATED, |c| c.lies),
        )
    }

    fn ids_with(&self, lies: u8) -> Vec<CandidateId> {
        let mut ids: Vec<_> = self
            .cells
            .iter()
            .filter(|c| c.lies == lies)
            .flat_map(|c| c.block.ids(self.padded))
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Candidates consistent with every answer, ascending.
    pub fn consistent(&self) -> Vec<CandidateId> {
        self.ids_with(0)
    }

    /// Candidates contradicting exactly one answer, ascending.
    pub fn pennies(&self) -> Vec<CandidateId> {
        self.ids_with(1)
    }

    /// Real candidates with at most one contradiction.
    pub fn real_live(&self) -> u64 {
        self.cells
            .iter()
            .map(|c| c.block.count(self.padded, self.real))
            .sum()
    }

    pub fn validate(&self, question: &Question) -> Result<(), GameError> {
        let max = self.max_id();
        let unknown = |detail: String| Err(GameError::UnknownIds { max, detail });
        match question {
            Question::Bit(bit) => {
                if *bit >= 63 || (1u64 << bit) >= self.padded {
                    return unknown(format!("bit:{bit} selects nobody in 1..={}", self.padded));
                }
            }
            Question::Range { lo, hi } => {
                if *lo == 0 || lo > hi || *hi > max {
                    return unknown(format!("range:{lo}-{hi}"));
                }
            }
            Question::Set(members) => {
                let bad: Vec<_> = members
                    .iter()
                    .filter(|&&id| id == 0 || id > max)
                    .take(5)
                    .collect();
                if !bad.is_empty() {
                    return unknown(format!("{bad:?}"));
                }
            }
        }
        Ok(())
    }

    /// Both possible children of `question`, as `(yes, no)`.
    pub fn preview(&self, question: &Question) -> Result<(ChildPreview, ChildPreview), GameError> {
        if self.remaining == 0 {
            return Err(GameError::NoQuestionsRemaining);
        }
        self.validate(question)?;
        let j = self.remaining - 1;
        let mut yes = ChildPreview {
            summary: StateSummary::new(0, 0, j),
            real_live: 0,
        };
        let mut no = yes;
        for cell in &self.cells {
            let size = cell.block.count(self.padded, u64::MAX);
            let real = cell.block.count(self.padded, self.real);
            let inside = cell.block.count_in(question, self.padded, u64::MAX);
            let inside_real = cell.block.count_in(question, self.padded, self.real);
            let (outside, outside_real) = (size - inside, real - inside_real);
            if cell.lies == 0 {
                yes.summary.a += inside;
                yes.summary.b += outside;
                yes.real_live += real;
                no.summary.a += outside;
                no.summary.b += inside;
                no.real_live += real;
            } else {
                yes.summary.b += inside;
                yes.real_live += inside_real;
                no.summary.b += outside;
                no.real_live += outside_real;
            }
        }
        Ok((yes, no))
    }

    /// Applies `answer` to `question`: every candidate on the wrong side gains a contradiction.
    pub fn apply_answer(
        &mut self,
        question: &Question,
        answer: Answer,
    ) -> Result<StateSummary, GameError> {
        self.apply_answer_noted(question, answer, None)
    }

    /// As [`apply_answer`](Self::apply_answer), attaching a free-form note to the transcript line.
    pub fn apply_answer_noted(
        &mut self,
        question: &Question,
        answer: Answer,
        note: Option<String>,
    ) -> Result<StateSummary, GameError> {
        if self.remaining == 0 {
            return Err(GameError::NoQuestionsRemaining);
        }
        self.validate(question)?;
        let mut next = Vec::with_capacity(self.cells.len() + 1);
        for cell in &self.cells {
            let (inside, outside) = cell.block.split(question, self.padded);
            let (kept, hit) = match answer {
                Answer::Yes => (inside, outside),
                Answer::No => (outside, inside),
            };
            next.extend(kept.into_iter().map(|block| Cell {
                block,
                lies: cell.lies,
            }));
            if cell.lies == 0 {
                next.extend(hit.into_iter().map(|block| Cell { block, lies: 1 }));
            }
        }
        self.cells = next;
        self.remaining -= 1;
        let summary = self.summary();
        self.transcript.push(Record::Answer {
            question: question.clone(),
            answer,
            summary,
            note,
        });
        Ok(summary)
    }

    /// Adds `count` virtual pennies with ids above every existing candidate.
    pub fn add_virtual_pennies(&mut self, count: u64, note: Option<String>) -> StateSummary {
        let first = self.max_id() + 1;
        self.cells.extend((first..first + count).map(|id| Cell {
            block: Block::Single(id),
            lies: 1,
        }));
        self.virtuals += count;
        let summary = self.summary();
        self.transcript.push(Record::Pad {
            count,
            summary,
            note,
        });
        summary
    }

    /// True once at most one candidate survives.
    ///
    /// A lone survivor that is not a real candidate, or no survivor at all,
    /// means the answers cannot come from a responder holding a real secret.
    pub fn is_won(&self) -> Result<bool, GameError> {
        Ok(self.identified()?.is_some())
    }

    /// The unique surviving real candidate, once the game is decided.
    pub fn identified(&self) -> Result<Option<CandidateId>, GameError> {
        match self.summary().survivors() {
            0 => Err(GameError::InconsistentResponder),
            1 => {
                let id = self
                    .cells
                    .iter()
                    .find(|c| c.block.count(self.padded, u64::MAX) == 1)
                    .and_then(|c| c.block.ids(self.padded).first().copied())
                    .expect("one survivor lives in exactly one cell");
                if id > self.real {
                    Err(GameError::InconsistentResponder)
                } else {
                    Ok(Some(id))
                }
            }
            _ => Ok(None),
        }
    }
}
