//! Event-sourced debate storage.
//!
//! Every debate is a sequence of [`Event`]s. Version `n` is the state after
//! the `n`-th event, so a freshly created debate is at version 1. Writers
//! name the version they last saw; the store applies the event only if that
//! is still current.
//!
//! On disk each debate lives in its own directory holding `events.ndjson`
//! (one [`LoggedEvent`] per line, append only) and `snapshot.json`, which is
//! rewritten every [`SNAPSHOT_EVERY`] versions so startup does not have to
//! replay the whole log.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use argucast_core::acf::validate_acf;
use argucast_core::datasets::{to_json_string, DebateDocument};
use argucast_core::qbaf::Violation;
use argucast_core::{Acf, Argument, ArgumentId, Edge, ForecasterId, Polarity, Vote};
use serde::{Deserialize, Serialize};

/// Id of the single forecasting argument in every service debate.
pub const FORECASTING_ID: &str = "f";
pub const SNAPSHOT_EVERY: u64 = 25;

const EVENTS_FILE: &str = "events.ndjson";
const SNAPSHOT_FILE: &str = "snapshot.json";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("unknown {kind} `{id}`")]
    NotFound { kind: &'static str, id: String },
    #[error("stale version {expected}; debate is at version {current}")]
    Conflict { expected: u64, current: u64 },
    #[error("{}", argucast_core::Error::Invalid(.0.clone()))]
    Invalid(Vec<Violation>),
    #[error("{0}")]
    Unprocessable(String),
    #[error("{path}:{line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Created {
        id: String,
        question: String,
        prior: Option<f64>,
    },
    /// Adding an argument also records the author's agreement with it.
    ArgumentAdded {
        id: ArgumentId,
        text: String,
        target: ArgumentId,
        polarity: Polarity,
        author: ForecasterId,
    },
    VoteCast {
        user: ForecasterId,
        arg: ArgumentId,
        vote: Vote,
    },
    PredictionSubmitted {
        user: ForecasterId,
        arg: ArgumentId,
        p: f64,
    },
}

/// One line of a debate's event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedEvent {
    pub version: u64,
    pub event: Event,
}

/// A debate at one version.
#[derive(Debug, Clone, PartialEq)]
pub struct Debate {
    pub id: String,
    pub question: String,
    pub prior: Option<f64>,
    pub version: u64,
    pub acf: Acf,
}

/// Serialized form of [`Debate`], used for `GET /debates/{id}` and for
/// snapshot files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebateSnapshot {
    pub id: String,
    pub question: String,
    pub prior: Option<f64>,
    pub version: u64,
    pub forecasting: ArgumentId,
    pub debate: DebateDocument,
}

fn forecasting_id() -> ArgumentId {
    ArgumentId::new(FORECASTING_ID).expect("static id")
}

fn check_prior(prior: Option<f64>) -> Result<()> {
    match prior {
        Some(g) if !(g > 0.0 && g < 1.0) => Err(StoreError::Unprocessable(format!(
            "prior {g} is outside the legal interval (0, 1)"
        ))),
        _ => Ok(()),
    }
}

impl Debate {
    fn created(id: String, question: String, prior: Option<f64>) -> Self {
        let mut acf = Acf::new();
        acf.add_forecasting(Argument::new(forecasting_id(), &question));
        Debate {
            id,
            question,
            prior,
            version: 1,
            acf,
        }
    }

    /// Rebuilds a debate from its full log.
    pub fn replay<'a>(events: impl IntoIterator<Item = &'a LoggedEvent>) -> Result<Self> {
        let mut events = events.into_iter();
        let mut debate = match events.next() {
            Some(LoggedEvent {
                version: 1,
                event: Event::Created { id, question, prior },
            }) => Debate::created(id.clone(), question.clone(), *prior),
            _ => return Err(StoreError::Unprocessable("log does not start with a creation event".into())),
        };
        for e in events {
            debate = debate.apply(e)?;
        }
        Ok(debate)
    }

    pub fn snapshot(&self) -> DebateSnapshot {
        DebateSnapshot {
            id: self.id.clone(),
            question: self.question.clone(),
            prior: self.prior,
            version: self.version,
            forecasting: forecasting_id(),
            debate: DebateDocument::from(&self.acf),
        }
    }

    fn from_snapshot(s: DebateSnapshot) -> Self {
        Debate {
            acf: s.debate.to_acf(),
            id: s.id,
            question: s.question,
            prior: s.prior,
            version: s.version,
        }
    }

    /// Canonical JSON of the snapshot; equal debates give equal bytes.
    pub fn snapshot_json(&self) -> String {
        to_json_string(&self.snapshot())
    }

    fn require_argument(&self, arg: &ArgumentId) -> Result<()> {
        if self.acf.argument(arg).is_some() {
            Ok(())
        } else {
            Err(StoreError::NotFound {
                kind: "argument",
                id: arg.to_string(),
            })
        }
    }

    /// Id for the next regular argument.
    fn next_argument_id(&self) -> ArgumentId {
        let n = self.acf.regular_args().count() + 1;
        ArgumentId::new(format!("a{n}")).expect("generated id")
    }

    /// Returns the debate after `logged`, rejecting events that would break
    /// a debate invariant.
    fn apply(&self, logged: &LoggedEvent) -> Result<Debate> {
        if logged.version != self.version + 1 {
            return Err(StoreError::Conflict {
                expected: logged.version.saturating_sub(1),
                current: self.version,
            });
        }
        let mut acf = self.acf.clone();
        match &logged.event {
            Event::Created { .. } => {
                return Err(StoreError::Unprocessable("debate already created".into()));
            }
            Event::ArgumentAdded {
                id,
                text,
                target,
                polarity,
                author,
            } => {
                self.require_argument(target)?;
                if self.acf.argument(id).is_some() {
                    return Err(StoreError::Unprocessable(format!("argument `{id}` already exists")));
                }
                acf.add_regular(Argument::new(id.clone(), text))
                    .add_edge(Edge::new(id.clone(), target.clone(), *polarity))
                    .set_vote(author.clone(), id.clone(), Some(Vote::Agree));
            }
            Event::VoteCast { user, arg, vote } => {
                self.require_argument(arg)?;
                acf.set_vote(user.clone(), arg.clone(), Some(*vote));
            }
            Event::PredictionSubmitted { user, arg, p } => {
                self.require_argument(arg)?;
                acf.set_prediction(user.clone(), arg.clone(), Some(*p));
            }
        }
        let violations = validate_acf(&acf);
        if !violations.is_empty() {
            return Err(StoreError::Invalid(violations));
        }
        Ok(Debate {
            acf,
            version: logged.version,
            id: self.id.clone(),
            question: self.question.clone(),
            prior: self.prior,
        })
    }
}

/// Reads a debate's event log.
pub fn read_log(path: &Path) -> Result<Vec<LoggedEvent>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let e = serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(e);
    }
    Ok(out)
}

/// Rebuilds a debate from its on-disk log alone, ignoring any snapshot.
pub fn replay_dir(dir: &Path) -> Result<Debate> {
    Debate::replay(&read_log(&dir.join(EVENTS_FILE))?)
}

struct Slot {
    debate: Arc<Debate>,
    log: Option<File>,
}

/// All debates, each guarded by its own lock. Reads clone an `Arc` of the
/// current version and evaluate outside any lock.
pub struct DebateStore {
    data_dir: Option<PathBuf>,
    debates: RwLock<HashMap<String, Arc<Mutex<Slot>>>>,
}

impl DebateStore {
    /// Store without persistence.
    pub fn in_memory() -> Self {
        DebateStore {
            data_dir: None,
            debates: RwLock::default(),
        }
    }

    /// Opens (creating if needed) a data directory and loads every debate
    /// in it from its snapshot plus the log tail.
    pub fn open(data_dir: impl Into<PathBuf>) -> Result<Self> {
        let data_dir = data_dir.into();
        fs::create_dir_all(&data_dir).map_err(io_err(&data_dir))?;
        let mut debates = HashMap::new();
        for entry in fs::read_dir(&data_dir).map_err(io_err(&data_dir))? {
            let dir = entry.map_err(io_err(&data_dir))?.path();
            if !dir.join(EVENTS_FILE).is_file() {
                continue;
            }
            let debate = load_dir(&dir)?;
            let log = open_log(&dir.join(EVENTS_FILE))?;
            debates.insert(
                debate.id.clone(),
                Arc::new(Mutex::new(Slot {
                    debate: Arc::new(debate),
                    log: Some(log),
                })),
            );
        }
        Ok(DebateStore {
            data_dir: Some(data_dir),
            debates: RwLock::new(debates),
        })
    }

    pub fn data_dir(&self) -> Option<&Path> {
        self.data_dir.as_deref()
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.debates.read().expect("store lock").keys().cloned().collect();
        ids.sort();
        ids
    }

    fn slot(&self, id: &str) -> Result<Arc<Mutex<Slot>>> {
        self.debates
            .read()
            .expect("store lock")
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::NotFound {
                kind: "debate",
                id: id.to_string(),
            })
    }

    pub fn get(&self, id: &str) -> Result<Arc<Debate>> {
        Ok(self.slot(id)?.lock().expect("debate lock").debate.clone())
    }

    pub fn create(&self, question: String, prior: Option<f64>) -> Result<Arc<Debate>> {
        check_prior(prior)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let debate = Debate::created(id.clone(), question.clone(), prior);
        let logged = LoggedEvent {
            version: 1,
            event: Event::Created {
                id: id.clone(),
                question,
                prior,
            },
        };
        let log = match &self.data_dir {
            Some(root) => {
                let dir = root.join(&id);
                fs::create_dir_all(&dir).map_err(io_err(&dir))?;
                let path = dir.join(EVENTS_FILE);
                let mut log = open_log(&path)?;
                append(&mut log, &path, &logged)?;
                Some(log)
            }
            None => None,
        };
        let debate = Arc::new(debate);
        self.debates.write().expect("store lock").insert(
            id,
            Arc::new(Mutex::new(Slot {
                debate: debate.clone(),
                log,
            })),
        );
        Ok(debate)
    }

    /// Applies the event built by `make` if `expected` is still the current
    /// version. The event is durable before the new version becomes visible.
    pub fn commit(
        &self,
        id: &str,
        expected: u64,
        make: impl FnOnce(&Debate) -> Result<Event>,
    ) -> Result<(Arc<Debate>, Event)> {
        let slot = self.slot(id)?;
        let mut slot = slot.lock().expect("debate lock");
        let current = slot.debate.version;
        if expected != current {
            return Err(StoreError::Conflict { expected, current });
        }
        let logged = LoggedEvent {
            version: current + 1,
            event: make(&slot.debate)?,
        };
        let next = Arc::new(slot.debate.apply(&logged)?);
        if let (Some(root), Some(log)) = (&self.data_dir, slot.log.as_mut()) {
            let dir = root.join(id);
            append(log, &dir.join(EVENTS_FILE), &logged)?;
            if next.version % SNAPSHOT_EVERY == 0 {
                write_snapshot(&dir, &next)?;
            }
        }
        slot.debate = next.clone();
        Ok((next, logged.event))
    }

    pub fn add_argument(
        &self,
        id: &str,
        expected: u64,
        author: ForecasterId,
        text: String,
        target: ArgumentId,
        polarity: Polarity,
    ) -> Result<(Arc<Debate>, ArgumentId)> {
        let (debate, event) = self.commit(id, expected, |d| {
            Ok(Event::ArgumentAdded {
                id: d.next_argument_id(),
                text,
                target,
                polarity,
                author,
            })
        })?;
        match event {
            Event::ArgumentAdded { id, .. } => Ok((debate, id)),
            _ => unreachable!("argument event"),
        }
    }

    pub fn cast_vote(&self, id: &str, expected: u64, user: ForecasterId, arg: ArgumentId, vote: Vote) -> Result<Arc<Debate>> {
        Ok(self.commit(id, expected, |_| Ok(Event::VoteCast { user, arg, vote }))?.0)
    }

    pub fn submit_prediction(
        &self,
        id: &str,
        expected: u64,
        user: ForecasterId,
        arg: ArgumentId,
        p: f64,
    ) -> Result<Arc<Debate>> {
        Ok(self
            .commit(id, expected, |_| Ok(Event::PredictionSubmitted { user, arg, p }))?
            .0)
    }
}

fn open_log(path: &Path) -> Result<File> {
    OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))
}

fn append(log: &mut File, path: &Path, logged: &LoggedEvent) -> Result<()> {
    let mut line = serde_json::to_string(logged).expect("events serialize");
    line.push('\n');
    log.write_all(line.as_bytes()).map_err(io_err(path))?;
    log.flush().map_err(io_err(path))
}

fn write_snapshot(dir: &Path, debate: &Debate) -> Result<()> {
    let tmp = dir.join(format!("{SNAPSHOT_FILE}.tmp"));
    let path = dir.join(SNAPSHOT_FILE);
    fs::write(&tmp, debate.snapshot_json()).map_err(io_err(&tmp))?;
    fs::rename(&tmp, &path).map_err(io_err(&path))
}

/// Snapshot if present, then every logged event past it.
fn load_dir(dir: &Path) -> Result<Debate> {
    let events = read_log(&dir.join(EVENTS_FILE))?;
    let snap_path = dir.join(SNAPSHOT_FILE);
    let base = if snap_path.is_file() {
        let text = fs::read_to_string(&snap_path).map_err(io_err(&snap_path))?;
        let snap: DebateSnapshot = serde_json::from_str(&text).map_err(|e| StoreError::Corrupt {
            path: snap_path.clone(),
            line: e.line(),
            message: e.to_string(),
        })?;
        Some(Debate::from_snapshot(snap))
    } else {
        None
    };
    match base {
        Some(mut debate) => {
            let start = debate.version;
            for e in events.iter().filter(|e| e.version > start) {
                debate = debate.apply(e)?;
            }
            Ok(debate)
        }
        None => Debate::replay(&events),
    }
}
