use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, SystemTime};

use parking_lot::Mutex;
use relint_core::analysis::{AnalysisReport, ConstrainedAnalysis};
use relint_core::bounds::ConstraintSet;
use relint_core::data::Dataset;
use relint_core::Analysis;
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;

use crate::ApiError;

/// Source of the current time, replaceable in tests.
pub trait Clock: Send + Sync {
    fn now(&self) -> SystemTime;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> SystemTime {
        SystemTime::now()
    }
}

/// Clock that only moves when told to.
#[derive(Debug)]
pub struct ManualClock(Mutex<SystemTime>);

impl ManualClock {
    pub fn new(start: SystemTime) -> Self {
        Self(Mutex::new(start))
    }

    pub fn advance(&self, by: Duration) {
        *self.0.lock() += by;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> SystemTime {
        *self.0.lock()
    }
}

/// One uploaded dataset with its analysis and the current constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub dataset: Dataset,
    pub analysis: Analysis,
    pub constraints: ConstraintSet,
    /// Bounds under `constraints`; absent while no constraint is set.
    pub constrained: Option<ConstrainedAnalysis>,
    pub created: SystemTime,
    pub updated: SystemTime,
}

impl Session {
    pub fn results(&self) -> AnalysisReport {
        self.analysis.report()
    }

    /// Results under the current constraints, or the unconstrained results.
    pub fn current_results(&self) -> AnalysisReport {
        match &self.constrained {
            Some(c) => c.report(&self.analysis.baseline),
            None => self.results(),
        }
    }
}

/// On-disk form of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub schema: u32,
    pub session: Session,
}

impl SessionSnapshot {
    pub const SCHEMA: u32 = 1;

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string(self).map_err(std::io::Error::other)?;
        std::fs::write(path, text)
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let snap: Self = serde_json::from_str(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        if snap.schema != Self::SCHEMA {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("unsupported session schema {}", snap.schema),
            ));
        }
        Ok(snap)
    }
}

struct Entry {
    session: Arc<RwLock<Session>>,
    last_access: SystemTime,
}

/// In-memory sessions keyed by id, dropped after `ttl` without access.
pub struct SessionStore {
    entries: Mutex<HashMap<String, Entry>>,
    ttl: Duration,
    clock: Arc<dyn Clock>,
}

impl SessionStore {
    pub fn new(ttl: Duration, clock: Arc<dyn Clock>) -> Self {
        Self { entries: Mutex::new(HashMap::new()), ttl, clock }
    }

    pub fn now(&self) -> SystemTime {
        self.clock.now()
    }

    pub fn insert(&self, session: Session) -> String {
        let id = session.id.clone();
        let entry = Entry { session: Arc::new(RwLock::new(session)), last_access: self.now() };
        let mut entries = self.entries.lock();
        self.evict_locked(&mut entries);
        entries.insert(id.clone(), entry);
        id
    }

    /// Looks a session up and refreshes its expiry.
    pub fn get(&self, id: &str) -> Result<Arc<RwLock<Session>>, ApiError> {
        let now = self.now();
        let mut entries = self.entries.lock();
        self.evict_locked(&mut entries);
        let entry = entries.get_mut(id).ok_or_else(|| ApiError::NotFound(id.to_string()))?;
        entry.last_access = now;
        Ok(Arc::clone(&entry.session))
    }

    pub fn remove(&self, id: &str) -> Result<(), ApiError> {
        let mut entries = self.entries.lock();
        self.evict_locked(&mut entries);
        entries.remove(id).map(|_| ()).ok_or_else(|| ApiError::NotFound(id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.entries.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn evict_expired(&self) {
        self.evict_locked(&mut self.entries.lock());
    }

    fn evict_locked(&self, entries: &mut HashMap<String, Entry>) {
        let now = self.now();
        entries.retain(|_, e| now.duration_since(e.last_access).unwrap_or_default() < self.ttl);
    }
}
