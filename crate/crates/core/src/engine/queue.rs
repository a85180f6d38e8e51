use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use parking_lot::{Condvar, Mutex};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::Value;

/// Scheduling discipline for the work queue.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// Honour order directives; unprioritized work goes first in FIFO order.
    Priority,
    Fifo,
    /// Uniformly shuffled pop order from a seeded generator.
    Random(u64),
}

impl std::str::FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "priority" => Ok(Schedule::Priority),
            "fifo" => Ok(Schedule::Fifo),
            _ => match s.strip_prefix("random:").or_else(|| s.strip_prefix("random=")) {
                Some(seed) => seed.parse().map(Schedule::Random).map_err(|e| format!("bad seed: {e}")),
                None if s == "random" => Ok(Schedule::Random(0)),
                None => Err(format!("unknown schedule `{s}`")),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PriorityKey {
    Fifo,
    Asc(Value),
    Desc(Reverse<Value>),
    Random(u64),
}

#[derive(Debug)]
pub struct Task {
    pub priority: PriorityKey,
    pub seq: u64,
    pub relation: usize,
    pub key: Vec<Value>,
    pub value: Vec<Value>,
}

impl PartialEq for Task {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Task {}

impl PartialOrd for Task {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Task {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.priority, self.seq).cmp(&(&other.priority, other.seq))
    }
}

struct Inner {
    heap: BinaryHeap<Reverse<Task>>,
    seq: u64,
    in_flight: usize,
    rng: ChaCha8Rng,
    schedule: Schedule,
}

/// A shared min-queue with quiescence detection: workers block while the
/// queue is empty but some task is still being processed, and all return
/// once both are zero.
pub struct WorkQueue {
    inner: Mutex<Inner>,
    ready: Condvar,
}

impl WorkQueue {
    pub fn new(schedule: Schedule) -> Self {
        let seed = match schedule {
            Schedule::Random(s) => s,
            _ => 0,
        };
        WorkQueue {
            inner: Mutex::new(Inner {
                heap: BinaryHeap::new(),
                seq: 0,
                in_flight: 0,
                rng: ChaCha8Rng::seed_from_u64(seed),
                schedule,
            }),
            ready: Condvar::new(),
        }
    }

    pub fn set_schedule(&self, schedule: Schedule) {
        let mut g = self.inner.lock();
        if let Schedule::Random(seed) = schedule {
            g.rng = ChaCha8Rng::seed_from_u64(seed);
        }
        g.schedule = schedule;
        // Re-key pending work under the new discipline, keeping arrival order.
        let mut tasks: Vec<Task> = std::mem::take(&mut g.heap).into_iter().map(|r| r.0).collect();
        tasks.sort_by_key(|t| t.seq);
        for mut t in tasks {
            t.priority = match (schedule, t.priority) {
                (Schedule::Priority, PriorityKey::Random(_)) | (Schedule::Fifo, _) => PriorityKey::Fifo,
                (Schedule::Random(_), _) => PriorityKey::Random(g.rng.next_u64()),
                (_, p) => p,
            };
            g.heap.push(Reverse(t));
        }
    }

    pub fn schedule(&self) -> Schedule {
        self.inner.lock().schedule
    }

    pub fn len(&self) -> usize {
        self.inner.lock().heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Enqueues a fact. `priority` is consulted only by the priority schedule.
    pub fn push(&self, relation: usize, key: Vec<Value>, value: Vec<Value>, priority: impl FnOnce() -> PriorityKey) {
        let mut g = self.inner.lock();
        let priority = match g.schedule {
            Schedule::Priority => priority(),
            Schedule::Fifo => PriorityKey::Fifo,
            Schedule::Random(_) => PriorityKey::Random(g.rng.next_u64()),
        };
        let seq = g.seq;
        g.seq += 1;
        g.heap.push(Reverse(Task {
            priority,
            seq,
            relation,
            key,
            value,
        }));
        drop(g);
        self.ready.notify_one();
    }

    /// Pops without blocking; the caller must call `done` afterwards.
    pub fn try_pop(&self) -> Option<Task> {
        let mut g = self.inner.lock();
        let t = g.heap.pop()?.0;
        g.in_flight += 1;
        Some(t)
    }

    /// Blocks until a task is available or the queue has quiesced.
    pub fn pop_wait(&self) -> Option<Task> {
        let mut g = self.inner.lock();
        loop {
            if let Some(Reverse(t)) = g.heap.pop() {
                g.in_flight += 1;
                return Some(t);
            }
            if g.in_flight == 0 {
                self.ready.notify_all();
                return None;
            }
            self.ready.wait(&mut g);
        }
    }

    pub fn done(&self) {
        let mut g = self.inner.lock();
        g.in_flight -= 1;
        if g.in_flight == 0 && g.heap.is_empty() {
            self.ready.notify_all();
        }
    }

    pub fn drain(&self) -> Vec<Task> {
        let mut g = self.inner.lock();
        let mut tasks: Vec<Task> = std::mem::take(&mut g.heap).into_iter().map(|r| r.0).collect();
        tasks.sort();
        tasks
    }
}
