//! Append-only event log.
//!
//! One line per handled request:
//!
//! ```text
//! <unix_ms>\t<session>\t<event>\t<json>
//! ```
//!
//! `event` is one of `create`, `answer`, `question`, `expire` or `reject`.
//! The JSON object is compact and holds `request` and `response` for the first
//! three, `request` and `error` for `reject`, and nothing for `expire`. A
//! `create` request is stored with its random choices already made, so replaying
//! the `create`, `answer`, `question` and `expire` lines in order rebuilds every
//! session exactly. `reject` lines are audit only; requests that fail before a
//! session id is known use `-` as the session.
//!
//! A final line without a newline is a torn write and is ignored on replay.

use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::Value;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Create,
    Answer,
    Question,
    Expire,
    Reject,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Create => "create",
            EventKind::Answer => "answer",
            EventKind::Question => "question",
            EventKind::Expire => "expire",
            EventKind::Reject => "reject",
        }
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "create" => EventKind::Create,
            "answer" => EventKind::Answer,
            "question" => EventKind::Question,
            "expire" => EventKind::Expire,
            "reject" => EventKind::Reject,
            other => return Err(format!("unknown event {other:?}")),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub unix_ms: u64,
    pub session: String,
    pub kind: EventKind,
    pub payload: Value,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}",
            self.unix_ms,
            self.session,
            self.kind.as_str(),
            self.payload
        )
    }
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: replay does not reproduce the logged outcome")]
    Diverged { line: usize },
}

impl FromStr for Event {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let mut fields = line.splitn(4, '\t');
        let mut next = |name: &str| fields.next().ok_or_else(|| format!("missing {name}"));
        let unix_ms = next("timestamp")?
            .parse()
            .map_err(|e| format!("timestamp: {e}"))?;
        let session = next("session")?.to_string();
        let kind = next("event")?.parse()?;
        let payload =
            serde_json::from_str(next("payload")?).map_err(|e| format!("payload: {e}"))?;
        Ok(Event {
            unix_ms,
            session,
            kind,
            payload,
        })
    }
}

pub fn unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl EventLog {
    /// Opens `path` for appending, creating it if needed.
    pub fn open(path: &Path) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            path: path.to_path_buf(),
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, session: &str, kind: EventKind, payload: Value) -> io::Result<()> {
        let event = Event {
            unix_ms: unix_ms(),
            session: session.to_string(),
            kind,
            payload,
        };
        let line = format!("{event}\n");
        let mut file = self
            .file
            .lock()
            .unwrap_or_else(|poisoned| poisoned.into_inner());
        file.write_all(line.as_bytes())?;
        file.flush()
    }
}

/// Reads every complete line of a log. A missing file is an empty log.
pub fn read_events(path: &Path) -> Result<Vec<(usize, Event)>, LogError> {
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let complete = match text.rfind('\n') {
        Some(end) => &text[..end],
        None => "",
    };
    complete
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            line.parse()
                .map(|event| (i + 1, event))
                .map_err(|reason| LogError::Parse {
                    line: i + 1,
                    reason,
                })
        })
        .collect()
}
