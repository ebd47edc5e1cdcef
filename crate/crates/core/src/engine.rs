//! Deterministic discrete-event core.
//!
//! Time is a non-negative real number of seconds. Events are dispatched in
//! `(fire_time, id)` order where `id` is the insertion counter, so replaying
//! the same schedule always yields the same dispatch sequence.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Simulation time in seconds.
pub type SimTime = f64;

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("event scheduled in the past: fire_time {fire_time} < now {now}")]
    InThePast { fire_time: SimTime, now: SimTime },
    #[error("run_until target {target} is before the current clock {now}")]
    RunBackwards { target: SimTime, now: SimTime },
    #[error("non-finite event time {0}")]
    NonFinite(SimTime),
}

/// Opaque handle returned by [`Scheduler::schedule`]; used to cancel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventHandle(u64);

impl EventHandle {
    pub fn id(self) -> u64 {
        self.0
    }
}

struct Entry<E> {
    fire_time: SimTime,
    id: u64,
    payload: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // BinaryHeap is a max-heap; reverse so the earliest (time, id) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .fire_time
            .total_cmp(&self.fire_time)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Receives dispatched events. The scheduler is passed back in so handlers
/// can schedule and cancel follow-up events.
pub trait Handler<E> {
    fn handle(&mut self, sched: &mut Scheduler<E>, event: E);
}

impl<E, F> Handler<E> for F
where
    F: FnMut(&mut Scheduler<E>, E),
{
    fn handle(&mut self, sched: &mut Scheduler<E>, event: E) {
        self(sched, event)
    }
}

/// Time-ordered event queue with a monotone clock.
pub struct Scheduler<E> {
    now: SimTime,
    next_id: u64,
    heap: BinaryHeap<Entry<E>>,
    pending: HashSet<u64>,
    dispatched: u64,
}

impl<E> Default for Scheduler<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Scheduler<E> {
    pub fn new() -> Self {
        Self {
            now: 0.0,
            next_id: 0,
            heap: BinaryHeap::new(),
            pending: HashSet::new(),
            dispatched: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Number of events dispatched so far.
    pub fn dispatched(&self) -> u64 {
        self.dispatched
    }

    /// Number of events scheduled and neither fired nor canceled.
    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    pub fn schedule(&mut self, fire_time: SimTime, payload: E) -> Result<EventHandle, EngineError> {
        if !fire_time.is_finite() {
            return Err(EngineError::NonFinite(fire_time));
        }
        if fire_time < self.now {
            return Err(EngineError::InThePast {
                fire_time,
                now: self.now,
            });
        }
        let id = self.next_id;
        self.next_id += 1;
        self.heap.push(Entry {
            fire_time,
            id,
            payload,
        });
        self.pending.insert(id);
        Ok(EventHandle(id))
    }

    /// Schedules `delay` seconds after the current clock.
    pub fn schedule_in(&mut self, delay: SimTime, payload: E) -> Result<EventHandle, EngineError> {
        self.schedule(self.now + delay, payload)
    }

    /// Returns true iff the event had neither fired nor been canceled.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        self.pending.remove(&handle.0)
    }

    /// Dispatches every event with `fire_time <= t_end` in order, then sets
    /// the clock to `t_end`.
    pub fn run_until<H: Handler<E>>(
        &mut self,
        t_end: SimTime,
        handler: &mut H,
    ) -> Result<(), EngineError> {
        if t_end < self.now {
            return Err(EngineError::RunBackwards {
                target: t_end,
                now: self.now,
            });
        }
        while let Some(top) = self.heap.peek() {
            if top.fire_time > t_end {
                break;
            }
            let Entry {
                fire_time,
                id,
                payload,
            } = self.heap.pop().expect("peeked");
            if !self.pending.remove(&id) {
                continue;
            }
            debug_assert!(fire_time >= self.now);
            self.now = fire_time;
            self.dispatched += 1;
            handler.handle(self, payload);
        }
        self.now = t_end;
        Ok(())
    }
}

/// Factory for named, independent random streams derived from one run seed.
///
/// Each `(seed, label)` pair maps to its own ChaCha8 stream, so adding a new
/// consumer never shifts the draws seen by existing ones.
#[derive(Debug, Clone, Copy)]
pub struct RngStreams {
    seed: u64,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, label: &str) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(fnv1a64(label.as_bytes()));
        rng
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
