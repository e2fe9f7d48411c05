//! Job records for the asynchronous enabler operations.
//!
//! Every state change is appended to a JSON-lines journal, so a restart
//! sees the last committed state of each job. Jobs that were still
//! pending or running when the process stopped are failed as
//! `interrupted` on reopen.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::future::Future;
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use chrono::Utc;
use tokio::sync::{Notify, Semaphore};
use tracing::warn;

use crate::domain::{JobKind, JobRecord, JobState};
use crate::error::{CmsError, Result};
use crate::storage::write_atomic;

pub const INTERRUPTED: &str = "interrupted";

pub struct JobStore {
    jobs: RwLock<HashMap<String, JobRecord>>,
    journal: Mutex<File>,
    changed: Notify,
}

impl JobStore {
    pub fn open(journal_path: impl Into<PathBuf>) -> Result<Self> {
        let path = journal_path.into();
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut jobs: HashMap<String, JobRecord> = HashMap::new();
        if path.exists() {
            for line in fs::read_to_string(&path)?.lines() {
                match serde_json::from_str::<JobRecord>(line) {
                    Ok(job) => {
                        jobs.insert(job.event_identifier.clone(), job);
                    }
                    Err(e) => warn!(error = %e, "skipping unreadable job journal line"),
                }
            }
        }
        let now = Utc::now();
        for job in jobs.values_mut() {
            if !job.state.is_terminal() {
                job.state = JobState::Failed;
                job.detail = INTERRUPTED.to_string();
                job.updated_at = now;
            }
        }
        let mut compacted = String::new();
        for job in jobs.values() {
            compacted.push_str(&serde_json::to_string(job).expect("job serializes"));
            compacted.push('\n');
        }
        write_atomic(&path, compacted.as_bytes())?;
        let journal = OpenOptions::new().append(true).open(&path)?;
        Ok(Self {
            jobs: RwLock::new(jobs),
            journal: Mutex::new(journal),
            changed: Notify::new(),
        })
    }

    fn persist(&self, job: &JobRecord) -> Result<()> {
        let mut line = serde_json::to_string(job).expect("job serializes");
        line.push('\n');
        let mut f = self.journal.lock().unwrap_or_else(|e| e.into_inner());
        f.write_all(line.as_bytes())?;
        f.flush()?;
        Ok(())
    }

    pub fn create(&self, kind: JobKind, reference: &str) -> Result<JobRecord> {
        let now = Utc::now();
        let job = JobRecord {
            event_identifier: uuid::Uuid::new_v4().to_string(),
            kind,
            state: JobState::Pending,
            reference: reference.to_string(),
            detail: "queued".to_string(),
            result_location: None,
            outputs: Vec::new(),
            created_at: now,
            updated_at: now,
        };
        let mut jobs = self.jobs.write().unwrap_or_else(|e| e.into_inner());
        self.persist(&job)?;
        jobs.insert(job.event_identifier.clone(), job.clone());
        drop(jobs);
        self.changed.notify_waiters();
        Ok(job)
    }

    fn transition<F>(&self, id: &str, next: JobState, fill: F) -> Result<JobRecord>
    where
        F: FnOnce(&mut JobRecord),
    {
        let mut jobs = self.jobs.write().unwrap_or_else(|e| e.into_inner());
        let current = jobs
            .get(id)
            .ok_or_else(|| CmsError::NotFound(format!("job {id}")))?;
        if !current.state.can_become(next) {
            return Err(CmsError::InvalidTransition {
                id: id.to_string(),
                from: current.state,
                to: next,
            });
        }
        let mut job = current.clone();
        job.state = next;
        job.updated_at = Utc::now();
        fill(&mut job);
        self.persist(&job)?;
        jobs.insert(id.to_string(), job.clone());
        drop(jobs);
        self.changed.notify_waiters();
        Ok(job)
    }

    pub fn start(&self, id: &str, detail: &str) -> Result<JobRecord> {
        self.transition(id, JobState::Running, |j| j.detail = detail.to_string())
    }

    pub fn succeed(
        &self,
        id: &str,
        detail: impl Into<String>,
        result_location: Option<String>,
        outputs: Vec<String>,
    ) -> Result<JobRecord> {
        self.transition(id, JobState::Succeeded, |j| {
            j.detail = detail.into();
            j.result_location = result_location;
            j.outputs = outputs;
        })
    }

    pub fn fail(&self, id: &str, detail: impl Into<String>) -> Result<JobRecord> {
        self.transition(id, JobState::Failed, |j| j.detail = detail.into())
    }

    pub fn get(&self, id: &str) -> Option<JobRecord> {
        self.jobs
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
    }

    /// Snapshot of `id`, or not-found.
    pub fn status(&self, id: &str, kind: &[JobKind]) -> Result<JobRecord> {
        self.get(id)
            .filter(|j| kind.is_empty() || kind.contains(&j.kind))
            .ok_or_else(|| CmsError::NotFound(format!("event {id}")))
    }

    pub fn list(&self) -> Vec<JobRecord> {
        let mut all: Vec<JobRecord> = self
            .jobs
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .values()
            .cloned()
            .collect();
        all.sort_by_key(|j| j.created_at);
        all
    }

    /// Waits until `id` reaches a terminal state or `timeout` elapses.
    pub async fn wait_terminal(&self, id: &str, timeout: Duration) -> Result<JobRecord> {
        let wait = async {
            loop {
                let notified = self.changed.notified();
                tokio::pin!(notified);
                notified.as_mut().enable();
                match self.get(id) {
                    None => return Err(CmsError::NotFound(format!("event {id}"))),
                    Some(job) if job.state.is_terminal() => return Ok(job),
                    Some(_) => notified.await,
                }
            }
        };
        tokio::time::timeout(timeout, wait)
            .await
            .map_err(|_| CmsError::Validation(format!("timed out waiting for event {id}")))?
    }
}

/// Bounded pool of background workers: at most `size` jobs run at once,
/// the rest wait for a permit.
#[derive(Clone)]
pub struct WorkerPool {
    permits: Arc<Semaphore>,
}

impl WorkerPool {
    pub fn new(size: usize) -> Self {
        Self {
            permits: Arc::new(Semaphore::new(size.max(1))),
        }
    }

    pub fn spawn<F>(&self, work: F)
    where
        F: Future<Output = ()> + Send + 'static,
    {
        let permits = self.permits.clone();
        tokio::spawn(async move {
            let Ok(_permit) = permits.acquire_owned().await else {
                return;
            };
            work.await;
        });
    }
}
