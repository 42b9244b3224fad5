use std::collections::{HashSet, VecDeque};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::JoinHandle;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueueError {
    #[error("queue is full ({0} pending)")]
    Full(usize),
    #[error("superseded by request {by} from the same session")]
    Superseded { by: u64 },
    #[error("queue is shutting down")]
    ShuttingDown,
}

type Work = Box<dyn FnOnce() + Send>;
type Cancel = Box<dyn FnOnce(QueueError) + Send>;

struct Job {
    session: String,
    serial: u64,
    work: Work,
    cancel: Cancel,
}

#[derive(Default)]
struct State {
    pending: VecDeque<Job>,
    running: HashSet<String>,
    shutdown: bool,
}

struct Shared {
    state: Mutex<State>,
    ready: Condvar,
    capacity: usize,
}

/// Bounded FIFO of pending assist computations served by a worker pool.
///
/// Each session has at most one pending job: submitting a newer serial
/// replaces the pending one (whose `cancel` runs with
/// [`QueueError::Superseded`]), and an older serial is refused outright.
/// Jobs of one session never run concurrently.
pub struct AssistQueue {
    shared: Arc<Shared>,
    workers: Vec<JoinHandle<()>>,
}

impl AssistQueue {
    pub fn new(capacity: usize, workers: usize) -> Self {
        let shared = Arc::new(Shared {
            state: Mutex::new(State::default()),
            ready: Condvar::new(),
            capacity: capacity.max(1),
        });
        let workers = (0..workers.max(1))
            .map(|i| {
                let shared = Arc::clone(&shared);
                std::thread::Builder::new()
                    .name(format!("assist-worker-{i}"))
                    .spawn(move || worker_loop(&shared))
                    .expect("spawn assist worker")
            })
            .collect();
        Self { shared, workers }
    }

    /// Enqueues `work` for `session`. `cancel` runs instead of `work` if
    /// the job is superseded or the queue shuts down first.
    pub fn submit<W, C>(&self, session: &str, serial: u64, work: W, cancel: C) -> Result<(), QueueError>
    where
        W: FnOnce() + Send + 'static,
        C: FnOnce(QueueError) + Send + 'static,
    {
        let mut state = self.shared.state.lock().expect("queue lock poisoned");
        if state.shutdown {
            return Err(QueueError::ShuttingDown);
        }
        let job = Job {
            session: session.to_owned(),
            serial,
            work: Box::new(work),
            cancel: Box::new(cancel),
        };
        if let Some(pos) = state.pending.iter().position(|j| j.session == session) {
            let existing = state.pending[pos].serial;
            if existing > serial {
                return Err(QueueError::Superseded { by: existing });
            }
            let old = std::mem::replace(&mut state.pending[pos], job);
            drop(state);
            (old.cancel)(QueueError::Superseded { by: serial });
            self.shared.ready.notify_all();
            return Ok(());
        }
        if state.pending.len() >= self.shared.capacity {
            return Err(QueueError::Full(state.pending.len()));
        }
        state.pending.push_back(job);
        drop(state);
        self.shared.ready.notify_all();
        Ok(())
    }

    pub fn pending(&self) -> usize {
        self.shared.state.lock().expect("queue lock poisoned").pending.len()
    }
}

fn worker_loop(shared: &Shared) {
    loop {
        let job = {
            let mut state = shared.state.lock().expect("queue lock poisoned");
            loop {
                if state.shutdown {
                    return;
                }
                let runnable = state
                    .pending
                    .iter()
                    .position(|j| !state.running.contains(&j.session));
                if let Some(pos) = runnable {
                    let job = state.pending.remove(pos).expect("position in range");
                    state.running.insert(job.session.clone());
                    break job;
                }
                state = shared.ready.wait(state).expect("queue lock poisoned");
            }
        };
        let session = job.session;
        (job.work)();
        shared
            .state
            .lock()
            .expect("queue lock poisoned")
            .running
            .remove(&session);
        shared.ready.notify_all();
    }
}

impl Drop for AssistQueue {
    fn drop(&mut self) {
        let drained: Vec<Job> = {
            let mut state = self.shared.state.lock().expect("queue lock poisoned");
            state.shutdown = true;
            state.pending.drain(..).collect()
        };
        self.shared.ready.notify_all();
        for job in drained {
            (job.cancel)(QueueError::ShuttingDown);
        }
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}
