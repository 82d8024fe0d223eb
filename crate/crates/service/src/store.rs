//! In-memory session table with optional JSON snapshots on disk.

use std::collections::HashMap;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use caseflow_core::Session;
use chrono::{DateTime, Utc};
use tracing::warn;

pub type SharedSession = Arc<tokio::sync::RwLock<Session>>;

struct Entry {
    session: SharedSession,
    last_access: Mutex<DateTime<Utc>>,
}

pub struct SessionStore {
    entries: RwLock<HashMap<String, Entry>>,
    dir: Option<PathBuf>,
    idle_expiry: Duration,
}

impl SessionStore {
    pub fn in_memory(idle_expiry: Duration) -> Self {
        Self {
            entries: RwLock::new(HashMap::new()),
            dir: None,
            idle_expiry,
        }
    }

    /// Opens a snapshot directory, restoring every session that has not expired.
    /// Unreadable snapshots are logged and left in place.
    pub fn open(dir: impl Into<PathBuf>, idle_expiry: Duration) -> io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        let store = Self {
            entries: RwLock::new(HashMap::new()),
            dir: Some(dir.clone()),
            idle_expiry,
        };
        let cutoff = store.cutoff(Utc::now());
        for item in std::fs::read_dir(&dir)? {
            let path = item?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let session: Session = match std::fs::read_to_string(&path)
                .map_err(|e| e.to_string())
                .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()))
            {
                Ok(s) => s,
                Err(e) => {
                    warn!(path = %path.display(), error = %e, "skipping unreadable session snapshot");
                    continue;
                }
            };
            if session.last_used < cutoff {
                let _ = std::fs::remove_file(&path);
                continue;
            }
            store.insert(session);
        }
        Ok(store)
    }

    fn cutoff(&self, now: DateTime<Utc>) -> DateTime<Utc> {
        now - chrono::Duration::from_std(self.idle_expiry).unwrap_or(chrono::Duration::MAX)
    }

    fn insert(&self, session: Session) -> SharedSession {
        let id = session.id.clone();
        let last = session.last_used;
        let shared = Arc::new(tokio::sync::RwLock::new(session));
        self.entries.write().expect("store lock").insert(
            id,
            Entry {
                session: shared.clone(),
                last_access: Mutex::new(last),
            },
        );
        shared
    }

    pub fn create(&self) -> io::Result<Session> {
        let session = Session::new(uuid::Uuid::new_v4().simple().to_string());
        self.persist(&session)?;
        self.insert(session.clone());
        Ok(session)
    }

    /// Looks a session up and marks it as used.
    pub fn get(&self, id: &str) -> Option<SharedSession> {
        let entries = self.entries.read().expect("store lock");
        let entry = entries.get(id)?;
        *entry.last_access.lock().expect("access lock") = Utc::now();
        Some(entry.session.clone())
    }

    pub fn remove(&self, id: &str) -> bool {
        let removed = self.entries.write().expect("store lock").remove(id).is_some();
        if let Some(path) = self.snapshot_path(id) {
            let _ = std::fs::remove_file(path);
        }
        removed
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn snapshot_path(&self, id: &str) -> Option<PathBuf> {
        // ids are generated here, but snapshots must never escape the directory
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            return None;
        }
        self.dir.as_ref().map(|d| d.join(format!("{id}.json")))
    }

    /// Writes the session snapshot atomically (temp file, then rename).
    pub fn persist(&self, session: &Session) -> io::Result<()> {
        let Some(path) = self.snapshot_path(&session.id) else {
            return Ok(());
        };
        let tmp = path.with_extension("json.tmp");
        let body = serde_json::to_vec(session).map_err(io::Error::other)?;
        std::fs::write(&tmp, body)?;
        std::fs::rename(&tmp, &path)
    }

    /// Drops sessions idle since before `now - idle_expiry`; returns their ids.
    pub fn expire(&self, now: DateTime<Utc>) -> Vec<String> {
        let cutoff = self.cutoff(now);
        let stale: Vec<String> = self
            .entries
            .read()
            .expect("store lock")
            .iter()
            .filter(|(_, e)| *e.last_access.lock().expect("access lock") < cutoff)
            .map(|(id, _)| id.clone())
            .collect();
        for id in &stale {
            self.remove(id);
        }
        stale
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }
}
