//! A single live game and the JSON shapes it is seen through.

use serde::{Deserialize, Serialize};
use ulam_core::adversary::{ResponderConfig, TieBreak};
use ulam_core::bounds::pelc_q1;
use ulam_core::strategy::PhaseTag;
use ulam_core::{Answer, CandidateId, GameError, GameState, Question, StateSummary, StrategyPlan};

use crate::error::ServiceError;

/// Real members listed verbatim in a rendered question, at most.
pub const LIST_LIMIT: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// The server asks, a human answers.
    #[serde(alias = "MachineAsks")]
    MachineAsks,
    /// A human asks, a configured responder answers.
    #[serde(alias = "HumanAsks")]
    HumanAsks,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum Status {
    InProgress,
    Won { candidate: CandidateId },
    ResponderCaught,
    OutOfQuestions,
    Expired,
}

impl Status {
    pub fn is_terminal(self) -> bool {
        self != Status::InProgress
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreakSpec {
    #[default]
    MoreConsistentThenNo,
    PreferNo,
    PreferYes,
}

impl From<TieBreakSpec> for TieBreak {
    fn from(spec: TieBreakSpec) -> Self {
        match spec {
            TieBreakSpec::MoreConsistentThenNo => TieBreak::MoreConsistentThenNo,
            TieBreakSpec::PreferNo => TieBreak::PreferNo,
            TieBreakSpec::PreferYes => TieBreak::PreferYes,
        }
    }
}

/// Machine responder for `human_asks` sessions. A missing `x` is drawn at random.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResponderSpec {
    Honest {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x: Option<CandidateId>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lie_at: Option<u32>,
    },
    Adversary {
        #[serde(default)]
        tie_break: TieBreakSpec,
    },
}

impl Default for ResponderSpec {
    fn default() -> Self {
        ResponderSpec::Adversary {
            tie_break: TieBreakSpec::default(),
        }
    }
}

impl ResponderSpec {
    fn kind(&self) -> &'static str {
        match self {
            ResponderSpec::Honest { .. } => "honest",
            ResponderSpec::Adversary { .. } => "adversary",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateRequest {
    pub mode: Mode,
    pub n: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub responder: Option<ResponderSpec>,
}

/// `yes`/`no` (any case, or `y`/`n`) or a JSON boolean.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnswerValue {
    Bool(bool),
    Text(String),
}

impl AnswerValue {
    pub fn parse(&self) -> Result<Answer, ServiceError> {
        match self {
            AnswerValue::Bool(yes) => Ok(Answer::from_bool(*yes)),
            AnswerValue::Text(text) => match text.to_ascii_lowercase().as_str() {
                "yes" | "y" => Ok(Answer::Yes),
                "no" | "n" => Ok(Answer::No),
                _ => Err(ServiceError::BadRequest(format!(
                    "answer must be yes or no, got {text:?}"
                ))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRequest {
    pub value: AnswerValue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeSpec {
    pub lo: CandidateId,
    pub hi: CandidateId,
}

/// Exactly one of the fields must be present. `shorthand` takes the transcript
/// notation (`bit:3`, `range:1-4`, `{1,5,9}`).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<Vec<CandidateId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<RangeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bit: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shorthand: Option<String>,
}

impl QuestionRequest {
    pub fn to_question(&self) -> Result<Question, ServiceError> {
        let given = [
            self.set.is_some(),
            self.range.is_some(),
            self.bit.is_some(),
            self.shorthand.is_some(),
        ];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(ServiceError::InvalidQuestion(
                "give exactly one of set, range, bit or shorthand".to_string(),
            ));
        }
        if let Some(set) = &self.set {
            return Ok(Question::set(set.iter().copied()));
        }
        if let Some(RangeSpec { lo, hi }) = self.range {
            return Ok(Question::Range { lo, hi });
        }
        if let Some(bit) = self.bit {
            return Ok(Question::Bit(bit));
        }
        let text = self.shorthand.as_deref().unwrap_or_default();
        text.parse()
            .map_err(|e| ServiceError::InvalidQuestion(format!("{e}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryView {
    pub a: u64,
    pub b: u64,
    pub j: u32,
    pub weight: u64,
}

impl SummaryView {
    fn of(summary: StateSummary) -> Result<Self, ServiceError> {
        let weight = summary
            .weight()
            .map_err(|e| ServiceError::Internal(e.to_string()))?;
        Ok(Self {
            a: summary.a,
            b: summary.b,
            j: summary.j,
            weight,
        })
    }
}

/// A machine question as shown to a human.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionView {
    /// 1-based position in the game.
    pub number: usize,
    pub budget: u32,
    pub phase: String,
    /// Transcript notation, including bookkeeping ids.
    pub shorthand: String,
    pub prompt: String,
    /// Real candidates in the question, when there are few enough to list.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<CandidateId>>,
    pub real_members: u64,
    /// Members that are not real candidates (padding and virtual pennies).
    pub bookkeeping_tokens: u64,
}

fn bit_members(n: u64, bit: u32) -> u64 {
    let period = 1u64 << (bit + 1);
    let half = 1u64 << bit;
    n / period * half + (n % period).saturating_sub(half)
}

fn render(
    question: &Question,
    tag: Option<PhaseTag>,
    state: &GameState,
    budget: u32,
) -> QuestionView {
    let n = state.real_size();
    let (prompt, candidates, real_members, tokens) = match question {
        Question::Bit(bit) => {
            let real = bit_members(n, *bit);
            let all = bit_members(state.padded_size(), *bit);
            let prompt = format!("Is bit {bit} of (your number - 1) set? Bit 0 is the lowest.");
            (prompt, None, real, all - real)
        }
        _ => {
            let members = question.members(state.max_id());
            let real: Vec<_> = members.iter().copied().filter(|&id| id <= n).collect();
            let tokens = (members.len() - real.len()) as u64;
            let listed = if real.is_empty() {
                "(no real candidate)".to_string()
            } else if real.len() as u64 <= LIST_LIMIT {
                real.iter()
                    .map(u64::to_string)
                    .collect::<Vec<_>>()
                    .join(", ")
            } else {
                format!("{} candidates", real.len())
            };
            let mut prompt = format!("Is your number one of: {listed}?");
            if tokens > 0 {
                prompt.push_str(&format!(" ({tokens} bookkeeping tokens are also in the set; they never hold your number.)"));
            }
            let count = real.len() as u64;
            (prompt, (count <= LIST_LIMIT).then_some(real), count, tokens)
        }
    };
    QuestionView {
        number: state.asked() + 1,
        budget,
        phase: tag.map(|t| t.to_string()).unwrap_or_default(),
        shorthand: question.to_string(),
        prompt,
        candidates,
        real_members,
        bookkeeping_tokens: tokens,
    }
}

/// The next machine question, worked out on a copy of the game so that
/// padding only shows up in the state once the question is answered.
#[derive(Clone, Debug)]
struct Pending {
    question: Question,
    view: QuestionView,
}

#[derive(Clone, Debug)]
enum Role {
    Machine {
        plan: StrategyPlan,
        pending: Option<Pending>,
    },
    Human {
        responder: ResponderConfig,
        spec: ResponderSpec,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateResponse {
    pub id: String,
    pub mode: Mode,
    pub n: u64,
    /// Questions this session may use.
    pub budget: u32,
    /// Optimal worst-case question count for `n`.
    pub target: u32,
    pub status: Status,
    pub summary: SummaryView,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub question: Option<QuestionView>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerResponse {
    pub status: Status,
    pub summary: SummaryView,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub question: Option<QuestionView>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionResponse {
    pub question: String,
    pub answer: String,
    pub previous_weight: u64,
    pub summary: SummaryView,
    pub status: Status,
}

/// Read-only snapshot served by `GET /sessions/{id}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub mode: Mode,
    pub n: u64,
    pub budget: u32,
    pub target: u32,
    pub status: Status,
    pub summary: SummaryView,
    pub questions_asked: usize,
    pub questions_remaining: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub question: Option<QuestionView>,
    /// Responder kind for `human_asks`; the secret is never shown.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub responder: Option<String>,
    pub transcript: String,
}

#[derive(Clone, Debug)]
pub struct Session {
    id: String,
    mode: Mode,
    budget: u32,
    target: u32,
    state: GameState,
    role: Role,
    status: Status,
}

fn game_error(e: GameError) -> ServiceError {
    match e {
        GameError::UnknownIds { .. } => ServiceError::OutOfRange(e.to_string()),
        other => ServiceError::Internal(other.to_string()),
    }
}

impl Session {
    /// Builds a session from a request whose random choices are already resolved.
    pub fn create(id: String, request: &CreateRequest, max_n: u64) -> Result<Self, ServiceError> {
        let n = request.n;
        if n == 0 || n > max_n {
            return Err(ServiceError::InvalidN { n, max: max_n });
        }
        let target = pelc_q1(n).map_err(|e| ServiceError::Internal(e.to_string()))?;
        let mut session = match request.mode {
            Mode::MachineAsks => {
                if request.responder.is_some() {
                    return Err(ServiceError::InvalidResponder(
                        "machine_asks sessions take no responder".to_string(),
                    ));
                }
                let plan =
                    StrategyPlan::new(n).map_err(|e| ServiceError::Internal(e.to_string()))?;
                let state = plan.initial_state();
                Session {
                    id,
                    mode: Mode::MachineAsks,
                    budget: plan.q,
                    target,
                    state,
                    role: Role::Machine {
                        plan,
                        pending: None,
                    },
                    status: Status::InProgress,
                }
            }
            Mode::HumanAsks => {
                let spec = request.responder.unwrap_or_default();
                let responder = match spec {
                    ResponderSpec::Honest { x: Some(x), lie_at } => {
                        ResponderConfig::Honest { x, lie_at }
                    }
                    ResponderSpec::Honest { x: None, .. } => {
                        return Err(ServiceError::InvalidResponder(
                            "honest responder needs x".to_string(),
                        ))
                    }
                    ResponderSpec::Adversary { tie_break } => ResponderConfig::WeightAdversary {
                        tie_break: tie_break.into(),
                    },
                };
                responder
                    .validate(n, target)
                    .map_err(|e| ServiceError::InvalidResponder(e.to_string()))?;
                Session {
                    id,
                    mode: Mode::HumanAsks,
                    budget: target,
                    target,
                    state: GameState::new(n, target).map_err(game_error)?,
                    role: Role::Human { responder, spec },
                    status: Status::InProgress,
                }
            }
        };
        session.settle()?;
        Ok(session)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn expire(&mut self) {
        if self.status == Status::InProgress {
            self.status = Status::Expired;
            if let Role::Machine { pending, .. } = &mut self.role {
                *pending = None;
            }
        }
    }

    fn summary(&self) -> Result<SummaryView, ServiceError> {
        SummaryView::of(self.state.summary())
    }

    fn pending_view(&self) -> Option<QuestionView> {
        match &self.role {
            Role::Machine {
                pending: Some(pending),
                ..
            } => Some(pending.view.clone()),
            _ => None,
        }
    }

    /// Decides the status after a state change and fetches the next machine question.
    fn settle(&mut self) -> Result<(), ServiceError> {
        let summary = self.state.summary();
        if self.state.real_live() == 0 {
            self.status = Status::ResponderCaught;
        } else if summary.is_won() {
            self.status = match self.state.identified() {
                Ok(Some(candidate)) => Status::Won { candidate },
                _ => Status::ResponderCaught,
            };
        } else if self.state.remaining() == 0 {
            self.status = Status::OutOfQuestions;
        }
        if let Role::Machine { plan, pending } = &mut self.role {
            *pending = None;
            if self.status == Status::InProgress {
                let (mut plan, mut state) = (plan.clone(), self.state.clone());
                let next = plan
                    .next_question(&mut state)
                    .map_err(|e| ServiceError::Internal(e.to_string()))?;
                match next {
                    Some((question, tag)) => {
                        let view = render(&question, Some(tag), &state, self.budget);
                        *pending = Some(Pending { question, view });
                    }
                    None => self.status = Status::OutOfQuestions,
                }
            }
        }
        Ok(())
    }

    fn require_progress(&self, mode: Mode) -> Result<(), ServiceError> {
        if self.mode != mode {
            return Err(ServiceError::WrongMode { expected: mode });
        }
        if self.status != Status::InProgress {
            return Err(ServiceError::NotInProgress(self.status));
        }
        Ok(())
    }

    pub fn create_response(&self) -> Result<CreateResponse, ServiceError> {
        Ok(CreateResponse {
            id: self.id.clone(),
            mode: self.mode,
            n: self.state.real_size(),
            budget: self.budget,
            target: self.target,
            status: self.status,
            summary: self.summary()?,
            question: self.pending_view(),
        })
    }

    /// A human's answer to the pending machine question.
    pub fn answer(&mut self, answer: Answer) -> Result<AnswerResponse, ServiceError> {
        self.require_progress(Mode::MachineAsks)?;
        let Role::Machine { plan, pending } = &mut self.role else {
            unreachable!("mode checked")
        };
        let expected = pending
            .take()
            .expect("in-progress machine sessions have a pending question");
        let next = plan
            .next_question(&mut self.state)
            .map_err(|e| ServiceError::Internal(e.to_string()))?;
        let Some((question, tag)) = next.filter(|(q, _)| *q == expected.question) else {
            return Err(ServiceError::Internal(
                "strategy did not reproduce the pending question".to_string(),
            ));
        };
        self.state
            .apply_answer_noted(&question, answer, Some(tag.to_string()))
            .map_err(game_error)?;
        plan.on_answer(&self.state, answer)
            .map_err(|e| ServiceError::Internal(e.to_string()))?;
        self.settle()?;
        Ok(AnswerResponse {
            status: self.status,
            summary: self.summary()?,
            question: self.pending_view(),
        })
    }

    /// A human's question to the configured responder.
    pub fn ask(&mut self, question: &Question) -> Result<QuestionResponse, ServiceError> {
        self.require_progress(Mode::HumanAsks)?;
        let Role::Human { responder, .. } = &self.role else {
            unreachable!("mode checked")
        };
        self.state.validate(question).map_err(game_error)?;
        let previous_weight = self.summary()?.weight;
        let answer = responder
            .responder()
            .respond(&self.state, question)
            .map_err(game_error)?;
        self.state
            .apply_answer(question, answer)
            .map_err(game_error)?;
        self.settle()?;
        Ok(QuestionResponse {
            question: question.to_string(),
            answer: if answer == Answer::Yes { "yes" } else { "no" }.to_string(),
            previous_weight,
            summary: self.summary()?,
            status: self.status,
        })
    }

    pub fn view(&self) -> Result<SessionView, ServiceError> {
        Ok(SessionView {
            id: self.id.clone(),
            mode: self.mode,
            n: self.state.real_size(),
            budget: self.budget,
            target: self.target,
            status: self.status,
            summary: self.summary()?,
            questions_asked: self.state.asked(),
            questions_remaining: self.state.remaining(),
            question: self.pending_view(),
            responder: match &self.role {
                Role::Human { spec, .. } => Some(spec.kind().to_string()),
                Role::Machine { .. } => None,
            },
            transcript: self.state.transcript().to_string(),
        })
    }
}
