//! Verification runs: exhaustive and sampled soundness checks of the
//! strategy, and simulations against the weight adversary.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::adversary::{Honest, TieBreak, WeightAdversary};
use crate::game::{CandidateId, StateSummary};
use crate::strategy::{run_game, run_with_budget, StrategyError, StrategyPlan, Verdict};
use crate::transcript::{Record, Transcript};

/// Default ceiling on exhaustive case counts.
pub const DEFAULT_CASE_BUDGET: u64 = 5_000_000;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("{cases} cases exceed the budget of {budget}; sample instead or raise the budget")]
    BudgetExceeded { cases: u64, budget: u64 },
    #[error("secret {x} is outside 1..={n}")]
    SecretOutOfRange { x: CandidateId, n: u64 },
    #[error("lie position {lie_at} is outside 1..={q}")]
    LieOutOfRange { lie_at: u32, q: u32 },
}

/// One honest-responder game: the secret and the 1-based question it lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Case {
    pub x: CandidateId,
    pub lie_at: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailureReason {
    Misidentified(Verdict),
    OverBudget(u32),
    HalvingNotExact,
}

#[derive(Clone, Debug)]
pub struct CaseFailure {
    pub case: Case,
    pub reason: FailureReason,
    pub transcript: Transcript,
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub n: u64,
    pub budget: u32,
    pub q_used_max: u32,
    pub cases_run: u64,
    pub failures: Vec<CaseFailure>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.q_used_max <= self.budget
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "n={} budget={} cases={} max_questions={} failures={} {}",
            self.n,
            self.budget,
            self.cases_run,
            self.q_used_max,
            self.failures.len(),
            if self.passed() { "PASS" } else { "FAIL" }
        )?;
        for failure in &self.failures {
            let lie = failure
                .case
                .lie_at
                .map_or("none".to_string(), |l| l.to_string());
            writeln!(
                f,
                "  x={} lie_at={} reason={:?}",
                failure.case.x, lie, failure.reason
            )?;
        }
        Ok(())
    }
}

fn lie_positions(q: u32) -> impl Iterator<Item = Option<u32>> + Clone {
    std::iter::once(None).chain((1..=q).map(Some))
}

struct CaseResult {
    questions: u32,
    failure: Option<CaseFailure>,
}

fn run_case(n: u64, budget: u32, case: Case) -> Result<CaseResult, StrategyError> {
    let outcome = run_game(
        n,
        &mut Honest {
            x: case.x,
            lie_at: case.lie_at,
        },
    )?;
    let reason = if outcome.verdict != Verdict::Identified(case.x) {
        Some(FailureReason::Misidentified(outcome.verdict))
    } else if outcome.questions > budget {
        Some(FailureReason::OverBudget(outcome.questions))
    } else if !outcome.exact_halving {
        Some(FailureReason::HalvingNotExact)
    } else {
        None
    };
    Ok(CaseResult {
        questions: outcome.questions,
        failure: reason.map(|reason| CaseFailure {
            case,
            reason,
            transcript: outcome.transcript,
        }),
    })
}

fn merge(n: u64, budget: u32, results: Vec<CaseResult>) -> VerificationReport {
    let mut report = VerificationReport {
        n,
        budget,
        q_used_max: 0,
        cases_run: 0,
        failures: Vec::new(),
    };
    for result in results {
        report.cases_run += 1;
        report.q_used_max = report.q_used_max.max(result.questions);
        report.failures.extend(result.failure);
    }
    report
}

/// Runs the given cases, in parallel, reporting in input order.
pub fn verify_cases(n: u64, cases: &[Case]) -> Result<VerificationReport, HarnessError> {
    let budget = StrategyPlan::new(n)?.q;
    for case in cases {
        if case.x == 0 || case.x > n {
            return Err(HarnessError::SecretOutOfRange { x: case.x, n });
        }
        if let Some(lie_at) = case.lie_at.filter(|&l| l == 0 || l > budget) {
            return Err(HarnessError::LieOutOfRange { lie_at, q: budget });
        }
    }
    let results = cases
        .par_iter()
        .map(|&case| run_case(n, budget, case))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(merge(n, budget, results))
}

/// Every secret and every lie position (including none).
///
/// `progress` is called after each secret with `(done, total)` secrets.
pub fn verify_exhaustive(
    n: u64,
    case_budget: Option<u64>,
    progress: Option<&(dyn Fn(u64, u64) + Sync)>,
) -> Result<VerificationReport, HarnessError> {
    let budget = StrategyPlan::new(n)?.q;
    let cases = n.saturating_mul(u64::from(budget) + 1);
    if let Some(limit) = case_budget.filter(|&limit| cases > limit) {
        return Err(HarnessError::BudgetExceeded {
            cases,
            budget: limit,
        });
    }
    let done = std::sync::atomic::AtomicU64::new(0);
    let per_secret = (1..=n)
        .into_par_iter()
        .map(|x| {
            let results = lie_positions(budget)
                .map(|lie_at| run_case(n, budget, Case { x, lie_at }))
                .collect::<Result<Vec<_>, _>>();
            if let Some(report) = progress {
                let finished = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                report(finished, n);
            }
            results
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(merge(n, budget, per_secret.into_iter().flatten().collect()))
}

/// The seeded case sequence used by [`verify_sampled`].
///
/// The generator is ChaCha8 seeded with `seed_from_u64(seed)`. Each case draws
/// `x` uniformly from `1..=n`, then a lie slot uniformly from `0..=q`, where `0`
/// means no lie.
pub fn sample_cases(n: u64, q: u32, samples: u64, seed: u64) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let x = rng.gen_range(1..=n);
            let slot = rng.gen_range(0..=q);
            Case {
                x,
                lie_at: (slot > 0).then_some(slot),
            }
        })
        .collect()
}

/// Seeded random cases; degenerates to the exhaustive run when `samples`
/// covers the whole case space.
pub fn verify_sampled(n: u64, samples: u64, seed: u64) -> Result<VerificationReport, HarnessError> {
    let budget = StrategyPlan::new(n)?.q;
    if samples >= n.saturating_mul(u64::from(budget) + 1) {
        return verify_exhaustive(n, None, None);
    }
    verify_cases(n, &sample_cases(n, budget, samples, seed))
}

#[derive(Clone, Debug)]
pub struct AdversaryRun {
    pub n: u64,
    pub q: u32,
    pub transcript: Transcript,
    pub summary: StateSummary,
    pub questioner_won: bool,
    /// Every answer kept at least half of the weight before it.
    pub half_weight_held: bool,
    /// The summary `a = 1, b = 0` appeared at some point.
    pub visited_lone_consistent: bool,
}

impl fmt::Display for AdversaryRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} q={} final={} questioner_won={} half_weight_held={} visited_(1,0)={}",
            self.n,
            self.q,
            self.summary,
            self.questioner_won,
            self.half_weight_held,
            self.visited_lone_consistent
        )
    }
}

/// Plays the strategy, cut to `q` questions if needed, against the weight adversary.
pub fn simulate_adversary(n: u64, q: u32) -> Result<AdversaryRun, HarnessError> {
    let mut adversary = WeightAdversary {
        tie_break: TieBreak::default(),
    };
    let outcome = run_with_budget(n, q, &mut adversary)?;
    let transcript = outcome.transcript;
    let mut before = StateSummary::new(transcript.padded, 0, q);
    let mut half_weight_held = true;
    let mut visited_lone_consistent = before.a == 1 && before.b == 0;
    for record in transcript.records() {
        let after = record.summary();
        if let Record::Answer { .. } = record {
            let (parent, child) = (
                before.weight().unwrap_or(u64::MAX),
                after.weight().unwrap_or(0),
            );
            if 2 * child < parent {
                half_weight_held = false;
            }
        }
        visited_lone_consistent |= after.a == 1 && after.b == 0;
        before = after;
    }
    Ok(AdversaryRun {
        n,
        q,
        summary: outcome.summary,
        questioner_won: matches!(outcome.verdict, Verdict::Identified(_)),
        half_weight_held,
        visited_lone_consistent,
        transcript,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_small() {
        let report = verify_exhaustive(2, None, None).unwrap();
        assert_eq!(report.cases_run, 8);
        assert!(report.passed(), "{report}");
        let report = verify_exhaustive(1, None, None).unwrap();
        assert_eq!((report.cases_run, report.q_used_max), (1, 0));
        let report = verify_exhaustive(16, None, None).unwrap();
        assert_eq!(report.cases_run, 16 * 8);
        assert!(report.passed());
        assert!(report.q_used_max <= StrategyPlan::new(16).unwrap().q);
    }

    #[test]
    fn budget_refusal() {
        let err = verify_exhaustive(1000, Some(100), None).unwrap_err();
        assert!(matches!(
            err,
            HarnessError::BudgetExceeded {
                cases: 15000,
                budget: 100
            }
        ));
    }

    #[test]
    fn ghost_secret_rejected() {
        let err = verify_cases(
            1_000_000,
            &[Case {
                x: 1_048_576,
                lie_at: None,
            }],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            HarnessError::SecretOutOfRange { x: 1_048_576, .. }
        ));
    }

    #[test]
    fn sampled_is_deterministic_and_exhausts_small_spaces() {
        assert_eq!(sample_cases(100, 10, 50, 7), sample_cases(100, 10, 50, 7));
        assert_ne!(sample_cases(100, 10, 50, 7), sample_cases(100, 10, 50, 8));
        let report = verify_sampled(4, 24, 3).unwrap();
        assert_eq!(report.cases_run, 24);
        assert!(report.passed());
        let report = verify_sampled(4, 15, 3).unwrap();
        assert_eq!(report.cases_run, 15);
        assert!(report.passed());
    }

    #[test]
    fn adversary_small_cases() {
        let run = simulate_adversary(2, 3).unwrap();
        assert!(run.questioner_won, "{run}");
        let run = simulate_adversary(3, 2).unwrap();
        assert!(!run.questioner_won, "{run}");
        assert!(run.summary.survivors() >= 2);
    }
}
