//! Constructive questioner guaranteeing identification within the
//! bit-search bound.
//!
//! The game is played over `1..=N` with `N = 2^ell >= n`. Play runs in four
//! phases:
//!
//! 1. `ell` bit questions ("is bit `i` of `x - 1` set?"), leaving exactly one
//!    consistent candidate and `ell` pennies whatever the answers were.
//! 2. Virtual pennies are added until the weight with `p = q - ell` questions
//!    left is exactly `2^p`, giving the state `(1, r)` with `p + 1 + r = 2^p`.
//! 3. Halving: ask about the consistent candidate plus `y = (r + 1 - p) / 2`
//!    pennies. Either answer halves the weight. "Yes" gives `(1, y)` and the
//!    step repeats with `p - 1`; "No" leaves `2^(p-1)` pennies, found by plain
//!    binary search.
//! 4. At `p = 2` the state is `(1, 1)` and two singleton questions finish.

use std::fmt;

use thiserror::Error;

use crate::adversary::Responder;
use crate::bounds::{theorem2_bound, BoundsError};
use crate::game::{
    Answer, CandidateId, GameError, GameState, Question, StateSummary, MAX_QUESTIONS,
};
use crate::num::ceil_log2;
use crate::transcript::Transcript;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("question budget {q} for n={n} exceeds the supported cap of {MAX_QUESTIONS}")]
    TooLarge { n: u64, q: u32 },
    #[error("expected phase {expected}, plan is in {found:?}")]
    OutOfPhase {
        expected: &'static str,
        found: Phase,
    },
    #[error("r + 1 - p must be even and positive (p={p}, r={r})")]
    Parity { p: u32, r: u64 },
    #[error("penny search needs a power-of-two penny count, got {0}")]
    NotPowerOfTwo(usize),
    #[error("state {summary} has weight above 2^j and cannot be won")]
    Unwinnable { summary: StateSummary },
    #[error("unexpected state {found} in phase {phase:?}")]
    UnexpectedState { phase: Phase, found: StateSummary },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Phase {
    BitSearch(u32),
    PennyInit,
    Halving {
        p: u32,
        r: u64,
    },
    PennySearch {
        pennies: Vec<CandidateId>,
        step: u32,
    },
    Endgame(u32),
    Done,
}

/// Per-question annotation written into strategy traces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseTag {
    Bit(u32),
    Pad(u64),
    Halving { p: u32, y: u64 },
    PennySearch(u32),
    Endgame(u32),
}

impl fmt::Display for PhaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseTag::Bit(i) => write!(f, "BIT {i}"),
            PhaseTag::Pad(r) => write!(f, "PAD {r}"),
            PhaseTag::Halving { p, y } => write!(f, "HALV {p} {y}"),
            PhaseTag::PennySearch(step) => write!(f, "PSRCH {step}"),
            PhaseTag::Endgame(step) => write!(f, "END {step}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyPlan {
    pub n: u64,
    pub padded: u64,
    pub ell: u32,
    pub q: u32,
    phase: Phase,
    /// Off when the game runs with fewer questions than `q`; the endgame then
    /// plays on without its winnability check.
    strict: bool,
}

/// `y = (r + 1 - p) / 2`, the number of pennies joining the consistent candidate.
pub fn halving_size(p: u32, r: u64) -> Result<u64, StrategyError> {
    let excess = (r + 1)
        .checked_sub(u64::from(p))
        .filter(|e| *e >= 2 && e % 2 == 0);
    excess.map(|e| e / 2).ok_or(StrategyError::Parity { p, r })
}

/// The halving set: the consistent candidate and the `y` lowest-id pennies.
pub fn halving_set(p: u32, r: u64, state: &GameState) -> Result<Question, StrategyError> {
    let summary = state.summary();
    if p <= 2
        || r < u64::from(p) + 1
        || summary.a != 1
        || summary.b != r
        || u64::from(p) + 1 + r != 1u64 << p
    {
        return Err(StrategyError::UnexpectedState {
            phase: Phase::Halving { p, r },
            found: summary,
        });
    }
    let y = halving_size(p, r)?;
    let pennies = state.pennies();
    Ok(Question::set(
        state
            .consistent()
            .into_iter()
            .chain(pennies.into_iter().take(y as usize)),
    ))
}

/// Binary-search question over a fixed, sorted penny list: ranks with bit `step` set.
pub fn penny_search_question(
    pennies: &[CandidateId],
    step: u32,
) -> Result<Question, StrategyError> {
    if !pennies.len().is_power_of_two() {
        return Err(StrategyError::NotPowerOfTwo(pennies.len()));
    }
    if (1usize << step.min(63)) >= pennies.len() {
        return Err(StrategyError::OutOfPhase {
            expected: "penny search step below log2(pennies)",
            found: Phase::Done,
        });
    }
    Ok(Question::set(
        pennies
            .iter()
            .enumerate()
            .filter(|(rank, _)| (rank >> step) & 1 == 1)
            .map(|(_, id)| *id),
    ))
}

fn endgame_question(state: &GameState) -> Result<Option<Question>, StrategyError> {
    let summary = state.summary();
    match (summary.a, summary.b) {
        (a, b) if a + b <= 1 => Ok(None),
        (1, 1) => Ok(Some(Question::set(state.consistent()))),
        (0, 2) => Ok(Some(Question::set(state.pennies().into_iter().take(1)))),
        _ => Err(StrategyError::UnexpectedState {
            phase: Phase::Endgame(0),
            found: summary,
        }),
    }
}

/// Next endgame question, or `None` once the game is decided.
///
/// From `(1, 1)` ask about the consistent candidate: "Yes" eliminates the
/// penny, "No" leaves two pennies, and a singleton question on either of them
/// eliminates exactly one.
pub fn endgame(state: &GameState) -> Result<Option<Question>, StrategyError> {
    let summary = state.summary();
    if !summary.is_won() && !summary.within_volume() {
        return Err(StrategyError::Unwinnable { summary });
    }
    endgame_question(state)
}

impl StrategyPlan {
    pub fn new(n: u64) -> Result<Self, StrategyError> {
        let bound = theorem2_bound(n)?;
        if bound.q > MAX_QUESTIONS {
            return Err(StrategyError::TooLarge { n, q: bound.q });
        }
        debug_assert_eq!(bound.ell, ceil_log2(n));
        let phase = if bound.ell == 0 {
            Phase::Done
        } else {
            Phase::BitSearch(0)
        };
        Ok(Self {
            n,
            padded: 1 << bound.ell,
            ell: bound.ell,
            q: bound.q,
            phase,
            strict: true,
        })
    }

    /// Same questions, but tolerant of a game with fewer than `q` questions.
    pub fn relaxed(n: u64) -> Result<Self, StrategyError> {
        Ok(Self {
            strict: false,
            ..Self::new(n)?
        })
    }

    /// Questions left after the bit search.
    pub fn p(&self) -> u32 {
        self.q - self.ell
    }

    pub fn phase(&self) -> &Phase {
        &self.phase
    }

    pub fn is_done(&self) -> bool {
        self.phase == Phase::Done
    }

    pub fn initial_state(&self) -> GameState {
        self.state_with_budget(self.q)
            .expect("plan budget is within the cap")
    }

    pub fn state_with_budget(&self, budget: u32) -> Result<GameState, GameError> {
        GameState::padded(self.n, self.padded, budget)
    }

    pub fn bit_question(&self, i: u32) -> Result<Question, StrategyError> {
        match self.phase {
            Phase::BitSearch(current) if current == i && i < self.ell => Ok(Question::Bit(i)),
            _ => Err(StrategyError::OutOfPhase {
                expected: "BitSearch(i)",
                found: self.phase.clone(),
            }),
        }
    }

    /// Pads `(1, ell)` up to `(1, r)` with `r = 2^p - p - 1`; returns `r`.
    pub fn pad_pennies(&mut self, state: &mut GameState) -> Result<u64, StrategyError> {
        if self.phase != Phase::PennyInit {
            return Err(StrategyError::OutOfPhase {
                expected: "PennyInit",
                found: self.phase.clone(),
            });
        }
        let summary = state.summary();
        let p = self.p();
        let target = 1u64 << p;
        let current = u64::from(p) + 1 + summary.b;
        if summary.a != 1 || summary.b != u64::from(self.ell) || current > target {
            return Err(StrategyError::UnexpectedState {
                phase: self.phase.clone(),
                found: summary,
            });
        }
        let r = target - u64::from(p) - 1;
        state.add_virtual_pennies(r - summary.b, Some(PhaseTag::Pad(r).to_string()));
        self.phase = if r > u64::from(p) {
            Phase::Halving { p, r }
        } else {
            Phase::Endgame(0)
        };
        Ok(r)
    }

    /// Next question with its phase tag, padding first when due; `None` when finished.
    pub fn next_question(
        &mut self,
        state: &mut GameState,
    ) -> Result<Option<(Question, PhaseTag)>, StrategyError> {
        if state.summary().is_won() {
            self.phase = Phase::Done;
        }
        if self.phase == Phase::PennyInit {
            self.pad_pennies(state)?;
        }
        let next = match &self.phase {
            Phase::Done => None,
            Phase::PennyInit => unreachable!("padding advances the phase"),
            Phase::BitSearch(i) => Some((self.bit_question(*i)?, PhaseTag::Bit(*i))),
            Phase::Halving { p, r } => {
                let y = halving_size(*p, *r)?;
                Some((halving_set(*p, *r, state)?, PhaseTag::Halving { p: *p, y }))
            }
            Phase::PennySearch { pennies, step } => Some((
                penny_search_question(pennies, *step)?,
                PhaseTag::PennySearch(*step),
            )),
            Phase::Endgame(step) => {
                let question = if self.strict {
                    endgame(state)?
                } else {
                    endgame_question(state)?
                };
                question.map(|q| (q, PhaseTag::Endgame(*step)))
            }
        };
        if next.is_none() {
            self.phase = Phase::Done;
        }
        Ok(next)
    }

    /// Advances the phase given the state after `answer` was applied.
    pub fn on_answer(&mut self, state: &GameState, answer: Answer) -> Result<(), StrategyError> {
        let summary = state.summary();
        self.phase = match std::mem::replace(&mut self.phase, Phase::Done) {
            Phase::BitSearch(i) if i + 1 < self.ell => Phase::BitSearch(i + 1),
            Phase::BitSearch(_) => Phase::PennyInit,
            Phase::Halving { p, r } => {
                let y = halving_size(p, r)?;
                match answer {
                    Answer::Yes if p - 1 == 2 => Phase::Endgame(0),
                    Answer::Yes => Phase::Halving { p: p - 1, r: y },
                    Answer::No => {
                        let pennies = state.pennies();
                        if summary.a != 0 || pennies.len() as u64 != 1 << (p - 1) {
                            return Err(StrategyError::UnexpectedState {
                                phase: Phase::Halving { p, r },
                                found: summary,
                            });
                        }
                        Phase::PennySearch { pennies, step: 0 }
                    }
                }
            }
            Phase::PennySearch { pennies, step } => {
                if (2usize << step) < pennies.len() {
                    Phase::PennySearch {
                        pennies,
                        step: step + 1,
                    }
                } else {
                    Phase::Done
                }
            }
            Phase::Endgame(step) => Phase::Endgame(step + 1),
            other => {
                return Err(StrategyError::OutOfPhase {
                    expected: "a questioning phase",
                    found: other,
                })
            }
        };
        if summary.is_won() {
            self.phase = Phase::Done;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Identified(CandidateId),
    InconsistentResponder,
    /// More than one candidate survived; only possible when the budget was cut short.
    Undecided,
}

#[derive(Clone, Debug)]
pub struct GameOutcome {
    pub transcript: Transcript,
    pub questions: u32,
    pub summary: StateSummary,
    pub verdict: Verdict,
    /// Every halving and penny-search answer cut the weight exactly in half.
    pub exact_halving: bool,
}

/// Plays the strategy for `n` against `responder` with its natural budget.
pub fn run_game(n: u64, responder: &mut dyn Responder) -> Result<GameOutcome, StrategyError> {
    let budget = StrategyPlan::new(n)?.q;
    run_with_budget(n, budget, responder)
}

/// Plays the strategy with `budget` questions, stopping early if they run out.
pub fn run_with_budget(
    n: u64,
    budget: u32,
    responder: &mut dyn Responder,
) -> Result<GameOutcome, StrategyError> {
    let mut plan = StrategyPlan::new(n)?;
    if budget < plan.q {
        plan = StrategyPlan::relaxed(n)?;
    }
    let mut state = plan.state_with_budget(budget)?;
    let mut exact_halving = true;
    while state.remaining() > 0 {
        let Some((question, tag)) = plan.next_question(&mut state)? else {
            break;
        };
        let parent = state.weight()?;
        let answer = responder.respond(&state, &question)?;
        let child = state
            .apply_answer_noted(&question, answer, Some(tag.to_string()))?
            .weight()?;
        if plan.strict
            && matches!(tag, PhaseTag::Halving { .. } | PhaseTag::PennySearch(_))
            && 2 * child != parent
        {
            exact_halving = false;
        }
        plan.on_answer(&state, answer)?;
    }
    let summary = state.summary();
    let verdict = match state.identified() {
        Ok(Some(x)) => Verdict::Identified(x),
        Ok(None) => Verdict::Undecided,
        Err(_) => Verdict::InconsistentResponder,
    };
    Ok(GameOutcome {
        questions: state.asked() as u32,
        transcript: state.transcript().clone(),
        summary,
        verdict,
        exact_halving,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::Honest;

    #[test]
    fn plans() {
        let plan = StrategyPlan::new(1_000_000).unwrap();
        assert_eq!(
            (plan.padded, plan.ell, plan.q, plan.p()),
            (1 << 20, 20, 25, 5)
        );
        assert_eq!(plan.phase(), &Phase::BitSearch(0));
        let plan = StrategyPlan::new(4).unwrap();
        assert_eq!((plan.padded, plan.ell, plan.q), (4, 2, 5));
        let plan = StrategyPlan::new(1).unwrap();
        assert!(plan.is_done());
        assert_eq!(plan.q, 0);
    }

    #[test]
    fn bit_questions() {
        let plan = StrategyPlan::new(4).unwrap();
        assert_eq!(plan.bit_question(0).unwrap().members(4), vec![2, 4]);
        assert!(plan.bit_question(1).is_err());
        let mut later = plan.clone();
        later.phase = Phase::BitSearch(1);
        assert_eq!(later.bit_question(1).unwrap().members(4), vec![3, 4]);
    }

    #[test]
    fn halving_sizes() {
        assert_eq!(halving_size(5, 26).unwrap(), 11);
        assert_eq!(halving_size(4, 11).unwrap(), 4);
        assert_eq!(halving_size(3, 4).unwrap(), 1);
        assert_eq!(
            halving_size(4, 10),
            Err(StrategyError::Parity { p: 4, r: 10 })
        );
    }

    fn after_bits(n: u64, answers: u64) -> (StrategyPlan, GameState) {
        let mut plan = StrategyPlan::new(n).unwrap();
        let mut state = plan.initial_state();
        for i in 0..plan.ell {
            let q = plan.bit_question(i).unwrap();
            let a = Answer::from_bool(answers >> i & 1 == 1);
            state.apply_answer(&q, a).unwrap();
            plan.on_answer(&state, a).unwrap();
        }
        (plan, state)
    }

    #[test]
    fn padding_for_n4() {
        let (mut plan, mut state) = after_bits(4, 0b10);
        assert_eq!(plan.phase(), &Phase::PennyInit);
        assert_eq!(plan.pad_pennies(&mut state).unwrap(), 4);
        assert_eq!(state.virtual_count(), 2);
        assert_eq!(state.summary(), StateSummary::new(1, 4, 3));
        assert_eq!(plan.phase(), &Phase::Halving { p: 3, r: 4 });
        let q = halving_set(3, 4, &state).unwrap();
        // consistent is 3 (code 10); lowest penny is 1 (code 00).
        assert_eq!(q, Question::Set(vec![1, 3]));
    }

    #[test]
    fn no_padding_when_already_exact() {
        let (mut plan, mut state) = after_bits(2, 1);
        assert_eq!(plan.pad_pennies(&mut state).unwrap(), 1);
        assert_eq!(state.virtual_count(), 0);
        assert_eq!(plan.phase(), &Phase::Endgame(0));
    }

    #[test]
    fn halving_transitions() {
        let (mut plan, mut state) = after_bits(4, 0);
        plan.pad_pennies(&mut state).unwrap();
        let mut yes_plan = plan.clone();
        let mut yes_state = state.clone();
        let q = halving_set(3, 4, &state).unwrap();
        yes_state.apply_answer(&q, Answer::Yes).unwrap();
        yes_plan.on_answer(&yes_state, Answer::Yes).unwrap();
        assert_eq!(yes_plan.phase(), &Phase::Endgame(0));
        assert_eq!(yes_state.summary(), StateSummary::new(1, 1, 2));

        state.apply_answer(&q, Answer::No).unwrap();
        plan.on_answer(&state, Answer::No).unwrap();
        assert!(
            matches!(plan.phase(), Phase::PennySearch { pennies, step: 0 } if pennies.len() == 4)
        );
        assert_eq!(state.summary(), StateSummary::new(0, 4, 2));
    }

    #[test]
    fn penny_search() {
        let pennies = [3, 8, 11, 20];
        assert_eq!(
            penny_search_question(&pennies, 0).unwrap(),
            Question::Set(vec![8, 20])
        );
        assert_eq!(
            penny_search_question(&pennies, 1).unwrap(),
            Question::Set(vec![11, 20])
        );
        assert!(penny_search_question(&pennies, 2).is_err());
        assert_eq!(
            penny_search_question(&[1, 2, 3], 0),
            Err(StrategyError::NotPowerOfTwo(3))
        );
    }

    #[test]
    fn two_pennies_one_question() {
        let mut s = GameState::new(2, 2).unwrap();
        s.apply_answer(&Question::empty(), Answer::Yes).unwrap();
        assert_eq!(s.summary(), StateSummary::new(0, 2, 1));
        let q = penny_search_question(&s.pennies(), 0).unwrap();
        s.apply_answer(&q, Answer::No).unwrap();
        assert_eq!(s.identified().unwrap(), Some(1));
    }

    #[test]
    fn endgame_traces() {
        let setup = || {
            let mut s = GameState::new(2, 3).unwrap();
            s.apply_answer(&Question::set([2]), Answer::Yes).unwrap();
            s
        };
        let mut s = setup();
        assert_eq!(s.summary(), StateSummary::new(1, 1, 2));
        let q1 = endgame(&s).unwrap().unwrap();
        assert_eq!(q1, Question::Set(vec![2]));
        s.apply_answer(&q1, Answer::Yes).unwrap();
        assert_eq!(s.identified().unwrap(), Some(2));
        assert_eq!(endgame(&s).unwrap(), None);

        let mut s = setup();
        s.apply_answer(&q1, Answer::No).unwrap();
        assert_eq!(s.summary(), StateSummary::new(0, 2, 1));
        let q2 = endgame(&s).unwrap().unwrap();
        assert_eq!(q2, Question::Set(vec![1]));
        s.apply_answer(&q2, Answer::Yes).unwrap();
        assert_eq!(s.identified().unwrap(), Some(1));
    }

    #[test]
    fn endgame_refuses_unwinnable() {
        let s = GameState::new(3, 2).unwrap();
        assert!(matches!(endgame(&s), Err(StrategyError::Unwinnable { .. })));
    }

    #[test]
    fn n2_with_lie_at_first_question() {
        let out = run_game(
            2,
            &mut Honest {
                x: 2,
                lie_at: Some(1),
            },
        )
        .unwrap();
        assert_eq!(out.verdict, Verdict::Identified(2));
        assert!(out.questions <= 3);
    }

    #[test]
    fn n4_every_case() {
        for x in 1..=4 {
            for lie in std::iter::once(None).chain((1..=5).map(Some)) {
                let out = run_game(4, &mut Honest { x, lie_at: lie }).unwrap();
                assert_eq!(
                    out.verdict,
                    Verdict::Identified(x),
                    "x={x} lie={lie:?}\n{}",
                    out.transcript
                );
                assert!(out.questions <= 5);
                assert!(out.exact_halving);
            }
        }
    }

    #[test]
    fn trace_annotations() {
        let out = run_game(4, &mut Honest { x: 1, lie_at: None }).unwrap();
        let notes: Vec<_> = out
            .transcript
            .records()
            .iter()
            .filter_map(|r| r.note().map(str::to_string))
            .collect();
        assert_eq!(notes[..4], ["BIT 0", "BIT 1", "PAD 4", "HALV 3 1"]);
    }
}
