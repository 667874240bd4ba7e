//! COPY jobs: state machine, per-stripe progress, and the registry the
//! status endpoint reads.

use std::sync::atomic::{AtomicI64, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use parking_lot::{Mutex, RwLock};
use serde::Serialize;
use tokio::sync::watch;
use tokio_util::sync::CancellationToken;
use tpc_core::{PerfMarker, TransferMode, VirtualPath};

/// Job lifecycle. Transitions only run
/// `PENDING → RUNNING → {SUCCEEDED, FAILED, CANCELLED}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JobState {
    Pending,
    Running,
    Succeeded,
    Failed(String),
    Cancelled,
}

impl JobState {
    pub fn is_terminal(&self) -> bool {
        matches!(
            self,
            JobState::Succeeded | JobState::Failed(_) | JobState::Cancelled
        )
    }

    pub fn label(&self) -> &'static str {
        match self {
            JobState::Pending => "PENDING",
            JobState::Running => "RUNNING",
            JobState::Succeeded => "SUCCEEDED",
            JobState::Failed(_) => "FAILED",
            JobState::Cancelled => "CANCELLED",
        }
    }
}

/// One COPY transfer in flight (or finished).
pub struct JobHandle {
    pub id: u64,
    pub mode: TransferMode,
    pub local_path: VirtualPath,
    pub remote_url: String,
    state: watch::Sender<JobState>,
    stripes: RwLock<Vec<Arc<AtomicU64>>>,
    last_progress_ms: AtomicU64,
    cancel: CancellationToken,
    started_at: AtomicI64,
    finished_at: AtomicI64,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

pub fn unix_now() -> i64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs() as i64)
        .unwrap_or(0)
}

impl JobHandle {
    fn new(id: u64, mode: TransferMode, local_path: VirtualPath, remote_url: String) -> Self {
        let (state, _) = watch::channel(JobState::Pending);
        Self {
            id,
            mode,
            local_path,
            remote_url,
            state,
            stripes: RwLock::new(vec![Arc::new(AtomicU64::new(0))]),
            last_progress_ms: AtomicU64::new(now_ms()),
            cancel: CancellationToken::new(),
            started_at: AtomicI64::new(0),
            finished_at: AtomicI64::new(0),
        }
    }

    pub fn state(&self) -> JobState {
        self.state.borrow().clone()
    }

    /// Move the job forward; terminal states stick.
    pub fn set_state(&self, next: JobState) {
        self.state.send_if_modified(|current| {
            if current.is_terminal() {
                return false;
            }
            if matches!(next, JobState::Running) {
                self.started_at.store(unix_now(), Ordering::Relaxed);
            }
            if next.is_terminal() {
                self.finished_at.store(unix_now(), Ordering::Relaxed);
            }
            *current = next.clone();
            true
        });
    }

    /// Wait until the job reaches a terminal state.
    pub async fn wait_terminal(&self) -> JobState {
        let mut rx = self.state.subscribe();
        let state = rx
            .wait_for(|s| s.is_terminal())
            .await
            .map(|s| s.clone())
            .unwrap_or(JobState::Cancelled);
        state
    }

    /// Request cancellation; the worker flips the state when it unwinds.
    pub fn request_cancel(&self) {
        self.cancel.cancel();
    }

    pub fn cancel_token(&self) -> CancellationToken {
        self.cancel.clone()
    }

    /// Size the per-stripe progress table once the stripe count is known.
    pub fn init_stripes(&self, count: u32) {
        let mut stripes = self.stripes.write();
        *stripes = (0..count.max(1))
            .map(|_| Arc::new(AtomicU64::new(0)))
            .collect();
    }

    pub fn stripe_counter(&self, index: usize) -> Arc<AtomicU64> {
        self.stripes.read()[index].clone()
    }

    /// Record transferred bytes and refresh the progress clock.
    pub fn touch_progress(&self) {
        self.last_progress_ms.store(now_ms(), Ordering::Relaxed);
    }

    pub fn progress_age(&self) -> Duration {
        Duration::from_millis(now_ms().saturating_sub(self.last_progress_ms.load(Ordering::Relaxed)))
    }

    pub fn bytes_done(&self) -> Vec<u64> {
        self.stripes
            .read()
            .iter()
            .map(|s| s.load(Ordering::Relaxed))
            .collect()
    }

    pub fn total_bytes_done(&self) -> u64 {
        self.bytes_done().iter().sum()
    }

    /// One marker block per stripe, stamped with `timestamp`.
    pub fn markers(&self, timestamp: i64) -> Vec<PerfMarker> {
        let bytes = self.bytes_done();
        let total = bytes.len() as u32;
        bytes
            .into_iter()
            .enumerate()
            .map(|(index, done)| {
                PerfMarker::new(timestamp, index as u32, done, total)
                    .expect("stripe index within count")
            })
            .collect()
    }

    pub fn snapshot(&self) -> JobSnapshot {
        let state = self.state();
        let started_at = self.started_at.load(Ordering::Relaxed);
        let finished_at = self.finished_at.load(Ordering::Relaxed);
        let bytes_done = self.bytes_done();
        JobSnapshot {
            id: self.id,
            mode: self.mode.as_str(),
            local_path: self.local_path.to_string(),
            remote_url: self.remote_url.clone(),
            state: state.label(),
            reason: match state {
                JobState::Failed(reason) => Some(reason),
                _ => None,
            },
            total_stripe_count: bytes_done.len() as u32,
            bytes_done,
            started_at: (started_at != 0).then_some(started_at),
            finished_at: (finished_at != 0).then_some(finished_at),
        }
    }
}

/// Status-endpoint view of one job.
#[derive(Debug, Clone, Serialize)]
pub struct JobSnapshot {
    pub id: u64,
    pub mode: &'static str,
    pub local_path: String,
    pub remote_url: String,
    pub state: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub bytes_done: Vec<u64>,
    pub total_stripe_count: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub started_at: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<i64>,
}

/// All jobs this endpoint has accepted, newest last.
#[derive(Default)]
pub struct JobRegistry {
    jobs: Mutex<Vec<Arc<JobHandle>>>,
    next_id: AtomicU64,
}

impl JobRegistry {
    pub fn create(
        &self,
        mode: TransferMode,
        local_path: VirtualPath,
        remote_url: String,
    ) -> Arc<JobHandle> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed) + 1;
        let job = Arc::new(JobHandle::new(id, mode, local_path, remote_url));
        self.jobs.lock().push(job.clone());
        job
    }

    pub fn snapshots(&self) -> Vec<JobSnapshot> {
        self.jobs.lock().iter().map(|j| j.snapshot()).collect()
    }

    pub fn running_count(&self) -> usize {
        self.jobs
            .lock()
            .iter()
            .filter(|j| j.state() == JobState::Running)
            .count()
    }
}
