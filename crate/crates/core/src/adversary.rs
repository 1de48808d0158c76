//! Responders: an honest one with an optional scripted lie, and the
//! weight-maximizing adversary.

use crate::game::{Answer, CandidateId, ChildPreview, GameError, GameState, Question};

/// Anything that answers questions during a game.
pub trait Responder {
    fn respond(&mut self, state: &GameState, question: &Question) -> Result<Answer, GameError>;
}

impl<F> Responder for F
where
    F: FnMut(&GameState, &Question) -> Result<Answer, GameError>,
{
    fn respond(&mut self, state: &GameState, question: &Question) -> Result<Answer, GameError> {
        self(state, question)
    }
}

/// How the adversary settles equal-weight children.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum TieBreak {
    /// Keep more consistent candidates; if still tied, answer No.
    #[default]
    MoreConsistentThenNo,
    /// Always answer No on equal weights.
    PreferNo,
    /// Always answer Yes on equal weights.
    PreferYes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ResponderConfig {
    /// Holds `x`; lies exactly at the 1-based question `lie_at` if given.
    Honest {
        x: CandidateId,
        lie_at: Option<u32>,
    },
    WeightAdversary {
        tie_break: TieBreak,
    },
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("secret {x} is outside 1..={n}")]
    SecretOutOfRange { x: CandidateId, n: u64 },
    #[error("lie position {lie_at} is outside 1..={q}")]
    LieOutOfRange { lie_at: u32, q: u32 },
}

impl ResponderConfig {
    pub fn validate(&self, n: u64, q: u32) -> Result<(), ConfigError> {
        if let ResponderConfig::Honest { x, lie_at } = *self {
            if x == 0 || x > n {
                return Err(ConfigError::SecretOutOfRange { x, n });
            }
            if let Some(lie_at) = lie_at {
                if lie_at == 0 || lie_at > q {
                    return Err(ConfigError::LieOutOfRange { lie_at, q });
                }
            }
        }
        Ok(())
    }

    pub fn responder(&self) -> Box<dyn Responder + Send> {
        match *self {
            ResponderConfig::Honest { x, lie_at } => Box::new(Honest { x, lie_at }),
            ResponderConfig::WeightAdversary { tie_break } => {
                Box::new(WeightAdversary { tie_break })
            }
        }
    }
}

/// Truthful membership answer, negated at question `lie_at` (1-based).
pub fn honest_answer(
    x: CandidateId,
    lie_at: Option<u32>,
    question_index: u32,
    question: &Question,
    universe: u64,
) -> Answer {
    let truth = Answer::from_bool(question.contains(universe, x));
    if lie_at == Some(question_index) {
        truth.negate()
    } else {
        truth
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Honest {
    pub x: CandidateId,
    pub lie_at: Option<u32>,
}

impl Responder for Honest {
    fn respond(&mut self, state: &GameState, question: &Question) -> Result<Answer, GameError> {
        let index = state.asked() as u32 + 1;
        Ok(honest_answer(
            self.x,
            self.lie_at,
            index,
            question,
            state.padded_size(),
        ))
    }
}

/// Picks the child of larger weight, never one that strands every real candidate.
pub fn adversarial_answer(
    state: &GameState,
    question: &Question,
    tie_break: TieBreak,
) -> Result<Answer, GameError> {
    let (yes, no) = state.preview(question)?;
    let (wy, wn) = (yes.summary.weight()?, no.summary.weight()?);
    let preferred = if wy != wn {
        Answer::from_bool(wy > wn)
    } else {
        match tie_break {
            TieBreak::MoreConsistentThenNo if yes.summary.a != no.summary.a => {
                Answer::from_bool(yes.summary.a > no.summary.a)
            }
            TieBreak::MoreConsistentThenNo | TieBreak::PreferNo => Answer::No,
            TieBreak::PreferYes => Answer::Yes,
        }
    };
    let child = |a: Answer| -> ChildPreview {
        match a {
            Answer::Yes => yes,
            Answer::No => no,
        }
    };
    if child(preferred).real_live == 0 && child(preferred.negate()).real_live > 0 {
        Ok(preferred.negate())
    } else {
        Ok(preferred)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WeightAdversary {
    pub tie_break: TieBreak,
}

impl Responder for WeightAdversary {
    fn respond(&mut self, state: &GameState, question: &Question) -> Result<Answer, GameError> {
        adversarial_answer(state, question, self.tie_break)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn honest_membership_and_lie() {
        let q = Question::set([1, 3]);
        assert_eq!(honest_answer(3, None, 1, &q, 4), Answer::Yes);
        assert_eq!(honest_answer(3, Some(1), 1, &q, 4), Answer::No);
        assert_eq!(honest_answer(3, Some(2), 1, &q, 4), Answer::Yes);
    }

    #[test]
    fn symmetric_split_uses_tie_break() {
        let state = GameState::new(2, 2).unwrap();
        let q = Question::set([1]);
        let (yes, no) = state.preview(&q).unwrap();
        assert_eq!((yes.summary.a, yes.summary.b), (1, 1));
        assert_eq!((no.summary.a, no.summary.b), (1, 1));
        assert_eq!(
            adversarial_answer(&state, &q, TieBreak::MoreConsistentThenNo).unwrap(),
            Answer::No
        );
        assert_eq!(
            adversarial_answer(&state, &q, TieBreak::PreferYes).unwrap(),
            Answer::Yes
        );
    }

    #[test]
    fn empty_question_answered_no() {
        let state = GameState::new(8, 6).unwrap();
        assert_eq!(
            adversarial_answer(&state, &Question::empty(), TieBreak::default()).unwrap(),
            Answer::No
        );
    }

    #[test]
    fn avoids_stranding_real_candidates() {
        // Real 1..=2, virtual pennies 3..=10: "Yes" to {3..10} is heavier but
        // leaves only virtual candidates.
        let mut state = GameState::padded(2, 2, 4).unwrap();
        state.add_virtual_pennies(8, None);
        let q = Question::Range { lo: 3, hi: 10 };
        let (yes, no) = state.preview(&q).unwrap();
        assert!(yes.summary.weight().unwrap() > no.summary.weight().unwrap());
        assert_eq!(yes.real_live, 2);
        let mut pinned = state.clone();
        pinned.apply_answer(&q, Answer::Yes).unwrap();
        let q2 = Question::Range { lo: 3, hi: 10 };
        let (yes2, no2) = pinned.preview(&q2).unwrap();
        assert_eq!(yes2.real_live, 0);
        assert!(no2.real_live > 0);
        assert_eq!(
            adversarial_answer(&pinned, &q2, TieBreak::default()).unwrap(),
            Answer::No
        );
    }

    #[test]
    fn config_validation() {
        let cfg = ResponderConfig::Honest { x: 5, lie_at: None };
        assert!(cfg.validate(4, 5).is_err());
        assert!(ResponderConfig::Honest {
            x: 2,
            lie_at: Some(6)
        }
        .validate(4, 5)
        .is_err());
        assert!(ResponderConfig::Honest {
            x: 2,
            lie_at: Some(5)
        }
        .validate(4, 5)
        .is_ok());
        assert!(ResponderConfig::WeightAdversary {
            tie_break: TieBreak::default()
        }
        .validate(4, 5)
        .is_ok());
    }
}
