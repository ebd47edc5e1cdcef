use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::engine::SimTime;

/// Two-state (unblocked/blocked) continuous-time blockage process with
/// exponential dwell times.
///
/// State is advanced lazily: queries must come with non-decreasing `now`.
#[derive(Debug, Clone)]
pub struct BlockageProcess {
    blocked: bool,
    last: SimTime,
    next_transition: SimTime,
    mean_unblocked: SimTime,
    mean_blocked: SimTime,
    loss_db: f64,
    blocked_time: SimTime,
}

impl BlockageProcess {
    /// Starts at `t = 0` in a state drawn from the stationary distribution.
    pub fn new<R: Rng + ?Sized>(
        mean_unblocked: SimTime,
        mean_blocked: SimTime,
        loss_db: f64,
        rng: &mut R,
    ) -> Self {
        assert!(
            mean_unblocked > 0.0 && mean_blocked > 0.0,
            "dwell means must be positive"
        );
        let p_blocked = mean_blocked / (mean_blocked + mean_unblocked);
        let blocked = rng.random::<f64>() < p_blocked;
        let mut p = Self {
            blocked,
            last: 0.0,
            next_transition: 0.0,
            mean_unblocked,
            mean_blocked,
            loss_db,
            blocked_time: 0.0,
        };
        p.next_transition = p.dwell(rng);
        p
    }

    /// A process that never leaves `blocked`.
    pub fn stuck(blocked: bool, loss_db: f64) -> Self {
        Self {
            blocked,
            last: 0.0,
            next_transition: f64::INFINITY,
            mean_unblocked: f64::INFINITY,
            mean_blocked: f64::INFINITY,
            loss_db,
            blocked_time: 0.0,
        }
    }

    fn dwell<R: Rng + ?Sized>(&self, rng: &mut R) -> SimTime {
        let mean = if self.blocked {
            self.mean_blocked
        } else {
            self.mean_unblocked
        };
        Exp::new(1.0 / mean).expect("positive rate").sample(rng)
    }

    pub fn advance<R: Rng + ?Sized>(&mut self, now: SimTime, rng: &mut R) {
        if now <= self.last {
            return;
        }
        while self.next_transition <= now {
            if self.blocked {
                self.blocked_time += self.next_transition - self.last;
            }
            self.last = self.next_transition;
            self.blocked = !self.blocked;
            self.next_transition = self.last + self.dwell(rng);
        }
        if self.blocked {
            self.blocked_time += now - self.last;
        }
        self.last = now;
    }

    pub fn is_blocked(&self) -> bool {
        self.blocked
    }

    /// Attenuation applied right now, dB.
    pub fn current_loss_db(&self) -> f64 {
        if self.blocked {
            self.loss_db
        } else {
            0.0
        }
    }

    pub fn loss_db(&self) -> f64 {
        self.loss_db
    }

    /// Time until the next state change, measured from the last advance.
    pub fn next_transition(&self) -> SimTime {
        self.next_transition
    }

    /// Total blocked time between 0 and the last `advance`.
    pub fn blocked_time(&self) -> SimTime {
        self.blocked_time
    }

    pub fn stationary_blocked_fraction(&self) -> f64 {
        self.mean_blocked / (self.mean_blocked + self.mean_unblocked)
    }
}
