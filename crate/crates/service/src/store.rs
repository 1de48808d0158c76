//! In-memory session store with per-session serialization and event logging.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, RwLock, TryLockError};
use std::time::{Duration, Instant};

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::ServiceError;
use crate::log::{read_events, EventKind, EventLog, LogError};
use crate::session::{
    AnswerRequest, AnswerResponse, CreateRequest, CreateResponse, QuestionRequest,
    QuestionResponse, ResponderSpec, Session, SessionView, Status,
};

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    /// Largest accepted `n`.
    pub max_n: u64,
    /// Sessions kept in memory, terminal ones included.
    pub max_sessions: usize,
    /// Idle time after which an in-progress session expires.
    pub idle_timeout: Duration,
    /// Append-only event log; replayed on startup when present.
    pub event_log: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            max_n: 1 << 20,
            max_sessions: 10_000,
            idle_timeout: Duration::from_secs(30 * 60),
            event_log: None,
        }
    }
}

struct Entry {
    session: Mutex<Session>,
    snapshot: RwLock<Arc<SessionView>>,
    /// Milliseconds since the store was created.
    last_active: AtomicU64,
}

pub struct SessionStore {
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<Entry>>>,
    log: Option<EventLog>,
    started: Instant,
}

fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("service types serialize")
}

fn log_id(id: &str) -> String {
    if id.is_empty() || id.chars().any(|c| c.is_whitespace() || c.is_control()) {
        "-".to_string()
    } else {
        id.to_string()
    }
}

impl SessionStore {
    /// Builds a store, replaying the configured event log first.
    pub fn open(config: ServiceConfig) -> Result<Self, LogError> {
        let mut store = Self {
            config,
            sessions: RwLock::new(HashMap::new()),
            log: None,
            started: Instant::now(),
        };
        if let Some(path) = store.config.event_log.clone() {
            store.replay(&path)?;
            store.log = Some(EventLog::open(&path)?);
        }
        Ok(store)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session map").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn now_ms(&self) -> u64 {
        self.started.elapsed().as_millis() as u64
    }

    fn idle(&self, entry: &Entry) -> bool {
        let idle = self
            .now_ms()
            .saturating_sub(entry.last_active.load(Ordering::Relaxed));
        u128::from(idle) > self.config.idle_timeout.as_millis()
    }

    fn record(&self, id: &str, kind: EventKind, payload: Value) -> Result<(), ServiceError> {
        match &self.log {
            Some(log) => log
                .append(&log_id(id), kind, payload)
                .map_err(ServiceError::from),
            None => Ok(()),
        }
    }

    fn reject(&self, id: &str, request: Value, error: ServiceError) -> ServiceError {
        // A failing audit line must not hide the original error.
        let _ = self.record(
            id,
            EventKind::Reject,
            json!({ "request": request, "error": to_json(&error.body()) }),
        );
        error
    }

    fn entry(&self, id: &str) -> Option<Arc<Entry>> {
        self.sessions.read().expect("session map").get(id).cloned()
    }

    fn publish(&self, entry: &Entry, session: &Session) -> Result<(), ServiceError> {
        let view = Arc::new(session.view()?);
        *entry.snapshot.write().expect("snapshot") = view;
        Ok(())
    }

    fn make_entry(&self, session: Session) -> Result<(String, Arc<Entry>), ServiceError> {
        let view = session.view()?;
        let id = view.id.clone();
        let entry = Entry {
            snapshot: RwLock::new(Arc::new(view)),
            last_active: AtomicU64::new(self.now_ms()),
            session: Mutex::new(session),
        };
        Ok((id, Arc::new(entry)))
    }

    /// Fills in random choices so the logged request replays identically.
    fn resolve(request: &CreateRequest) -> CreateRequest {
        let mut resolved = request.clone();
        if let Some(ResponderSpec::Honest { x: x @ None, .. }) = &mut resolved.responder {
            if request.n >= 1 {
                *x = Some(rand::thread_rng().gen_range(1..=request.n));
            }
        }
        resolved
    }

    pub fn create(&self, request: &CreateRequest) -> Result<CreateResponse, ServiceError> {
        let resolved = Self::resolve(request);
        let id = uuid::Uuid::new_v4().simple().to_string();
        let result =
            Session::create(id.clone(), &resolved, self.config.max_n).and_then(|session| {
                let response = session.create_response()?;
                let (id, entry) = self.make_entry(session)?;
                let mut sessions = self.sessions.write().expect("session map");
                if sessions.len() >= self.config.max_sessions {
                    return Err(ServiceError::Capacity(self.config.max_sessions));
                }
                self.record(
                    &id,
                    EventKind::Create,
                    json!({ "request": to_json(&resolved), "response": to_json(&response) }),
                )?;
                sessions.insert(id, entry);
                Ok(response)
            });
        result.map_err(|e| self.reject("-", to_json(request), e))
    }

    /// Locks a session for one mutation, expiring it first if it sat idle.
    fn lock<'a>(
        &self,
        id: &str,
        entry: &'a Entry,
    ) -> Result<MutexGuard<'a, Session>, ServiceError> {
        let mut session = match entry.session.try_lock() {
            Ok(guard) => guard,
            Err(TryLockError::WouldBlock) => return Err(ServiceError::Busy),
            Err(TryLockError::Poisoned(poisoned)) => poisoned.into_inner(),
        };
        if session.status() == Status::InProgress && self.idle(entry) {
            self.record(id, EventKind::Expire, json!({}))?;
            session.expire();
            self.publish(entry, &session)?;
        }
        Ok(session)
    }

    /// Runs `apply` on a copy of the session, logs the outcome, then commits it.
    fn mutate<R: Serialize>(
        &self,
        id: &str,
        kind: EventKind,
        request: Value,
        apply: impl FnOnce(&mut Session) -> Result<R, ServiceError>,
    ) -> Result<R, ServiceError> {
        let entry = self
            .entry(id)
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()));
        let result = entry.and_then(|entry| {
            let mut session = self.lock(id, &entry)?;
            let mut next = session.clone();
            let response = apply(&mut next)?;
            self.record(
                id,
                kind,
                json!({ "request": request.clone(), "response": to_json(&response) }),
            )?;
            *session = next;
            entry.last_active.store(self.now_ms(), Ordering::Relaxed);
            self.publish(&entry, &session)?;
            Ok(response)
        });
        result.map_err(|e| self.reject(id, request, e))
    }

    /// Answer to the pending question of a `machine_asks` session.
    pub fn answer(
        &self,
        id: &str,
        request: &AnswerRequest,
    ) -> Result<AnswerResponse, ServiceError> {
        self.mutate(id, EventKind::Answer, to_json(request), |session| {
            session.answer(request.value.parse()?)
        })
    }

    /// A question in a `human_asks` session.
    pub fn ask(
        &self,
        id: &str,
        request: &QuestionRequest,
    ) -> Result<QuestionResponse, ServiceError> {
        self.mutate(id, EventKind::Question, to_json(request), |session| {
            session.ask(&request.to_question()?)
        })
    }

    /// Latest published snapshot. Never takes the session lock or changes anything.
    pub fn get(&self, id: &str) -> Result<SessionView, ServiceError> {
        let entry = self
            .entry(id)
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))?;
        let mut view = SessionView::clone(&entry.snapshot.read().expect("snapshot"));
        if view.status == Status::InProgress && self.idle(&entry) {
            view.status = Status::Expired;
            view.question = None;
        }
        Ok(view)
    }

    /// Marks idle in-progress sessions as expired; returns how many changed.
    pub fn sweep_expired(&self) -> usize {
        let entries: Vec<_> = self
            .sessions
            .read()
            .expect("session map")
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let mut expired = 0;
        for (id, entry) in entries {
            if !self.idle(&entry) {
                continue;
            }
            let before = entry.snapshot.read().expect("snapshot").status;
            if before == Status::InProgress {
                if let Ok(session) = self.lock(&id, &entry) {
                    expired += usize::from(session.status() == Status::Expired);
                }
            }
        }
        expired
    }

    fn replay(&mut self, path: &std::path::Path) -> Result<(), LogError> {
        for (line, event) in read_events(path)? {
            let diverged = || LogError::Diverged { line };
            let parse = |reason: String| LogError::Parse { line, reason };
            let request = event.payload.get("request").cloned().unwrap_or(Value::Null);
            let logged = event.payload.get("response").cloned();
            match event.kind {
                EventKind::Reject => {}
                EventKind::Create => {
                    let request: CreateRequest =
                        serde_json::from_value(request).map_err(|e| parse(e.to_string()))?;
                    let session = Session::create(event.session.clone(), &request, u64::MAX)
                        .map_err(|_| diverged())?;
                    let response = session.create_response().map_err(|_| diverged())?;
                    if logged != Some(to_json(&response)) {
                        return Err(diverged());
                    }
                    let (id, entry) = self.make_entry(session).map_err(|_| diverged())?;
                    self.sessions
                        .get_mut()
                        .expect("session map")
                        .insert(id, entry);
                }
                EventKind::Answer | EventKind::Question | EventKind::Expire => {
                    let entry = self.entry(&event.session).ok_or_else(diverged)?;
                    let mut session = entry.session.lock().expect("replay is single-threaded");
                    let response = match event.kind {
                        EventKind::Answer => {
                            let request: AnswerRequest = serde_json::from_value(request)
                                .map_err(|e| parse(e.to_string()))?;
                            let answer = request.value.parse().map_err(|_| diverged())?;
                            session.answer(answer).map(|r| to_json(&r))
                        }
                        EventKind::Question => {
                            let request: QuestionRequest = serde_json::from_value(request)
                                .map_err(|e| parse(e.to_string()))?;
                            let question = request.to_question().map_err(|_| diverged())?;
                            session.ask(&question).map(|r| to_json(&r))
                        }
                        _ => {
                            session.expire();
                            Ok(Value::Null)
                        }
                    };
                    let response = response.map_err(|_| diverged())?;
                    if event.kind != EventKind::Expire && logged != Some(response) {
                        return Err(diverged());
                    }
                    self.publish(&entry, &session).map_err(|_| diverged())?;
                }
            }
        }
        Ok(())
    }
}
