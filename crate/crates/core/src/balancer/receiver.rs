use std::collections::BTreeMap;

use crate::engine::SimTime;

/// What the caller must do after feeding the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct RxOutput<T> {
    /// Released to the application, in ascending sequence order.
    pub released: Vec<(u64, T)>,
    /// Arm the reordering timer for this generation at this instant.
    pub start_timer: Option<(u64, SimTime)>,
    pub duplicate: bool,
}

impl<T> Default for RxOutput<T> {
    fn default() -> Self {
        Self {
            released: Vec::new(),
            start_timer: None,
            duplicate: false,
        }
    }
}

/// UE-side PDCP receive window: duplicate removal and in-sequence delivery
/// with a reordering timer.
///
/// `next_deliver` is the lowest sequence number not yet released or skipped,
/// `next_rx` is one past the highest received, and `reorder_mark` is the
/// value of `next_rx` when the running timer was started. Anything below
/// `next_deliver` is stale and dropped.
#[derive(Debug, Clone)]
pub struct UeReceiver<T> {
    t_reordering: SimTime,
    next_deliver: u64,
    next_rx: u64,
    reorder_mark: u64,
    buffer: BTreeMap<u64, T>,
    timer_running: bool,
    timer_gen: u64,
    released: u64,
    duplicates: u64,
}

impl<T> UeReceiver<T> {
    pub fn new(t_reordering: SimTime) -> Self {
        Self {
            t_reordering,
            next_deliver: 0,
            next_rx: 0,
            reorder_mark: 0,
            buffer: BTreeMap::new(),
            timer_running: false,
            timer_gen: 0,
            released: 0,
            duplicates: 0,
        }
    }

    pub fn next_expected(&self) -> u64 {
        self.next_deliver
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    pub fn released_count(&self) -> u64 {
        self.released
    }

    pub fn duplicates(&self) -> u64 {
        self.duplicates
    }

    pub fn timer_running(&self) -> bool {
        self.timer_running
    }

    pub fn receive(&mut self, seq: u64, payload: T, now: SimTime) -> RxOutput<T> {
        let mut out = RxOutput::default();
        if seq < self.next_deliver || self.buffer.contains_key(&seq) {
            self.duplicates += 1;
            out.duplicate = true;
            return out;
        }
        self.buffer.insert(seq, payload);
        if seq >= self.next_rx {
            self.next_rx = seq + 1;
        }
        if seq == self.next_deliver {
            self.release_consecutive(&mut out.released);
        }
        if self.timer_running && self.next_deliver >= self.reorder_mark {
            self.timer_running = false;
            self.timer_gen += 1;
        }
        if !self.timer_running && self.next_deliver < self.next_rx {
            out.start_timer = Some(self.arm(now));
        }
        out
    }

    /// Reordering timer expiry. Stale generations are ignored.
    pub fn on_reorder_timeout(&mut self, generation: u64, now: SimTime) -> RxOutput<T> {
        let mut out = RxOutput::default();
        if !self.timer_running || generation != self.timer_gen {
            return out;
        }
        self.timer_running = false;
        let mark = self.reorder_mark;
        let rest = self.buffer.split_off(&mark);
        let below = std::mem::replace(&mut self.buffer, rest);
        self.released += below.len() as u64;
        out.released.extend(below);
        self.next_deliver = self.next_deliver.max(mark);
        self.release_consecutive(&mut out.released);
        if self.next_deliver < self.next_rx {
            out.start_timer = Some(self.arm(now));
        }
        out
    }

    fn arm(&mut self, now: SimTime) -> (u64, SimTime) {
        self.timer_running = true;
        self.timer_gen += 1;
        self.reorder_mark = self.next_rx;
        (self.timer_gen, now + self.t_reordering)
    }

    fn release_consecutive(&mut self, out: &mut Vec<(u64, T)>) {
        while let Some(p) = self.buffer.remove(&self.next_deliver) {
            out.push((self.next_deliver, p));
            self.next_deliver += 1;
            self.released += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seqs(out: &RxOutput<()>) -> Vec<u64> {
        out.released.iter().map(|&(s, _)| s).collect()
    }

    #[test]
    fn duplicates_are_dropped() {
        let mut rx = UeReceiver::new(0.01);
        let mut got = Vec::new();
        for s in [0, 1, 1, 2] {
            got.extend(seqs(&rx.receive(s, (), 0.0)));
        }
        assert_eq!(got, vec![0, 1, 2]);
        assert_eq!(rx.duplicates(), 1);
    }

    #[test]
    fn gap_filled_before_timeout() {
        let mut rx = UeReceiver::new(0.01);
        assert_eq!(seqs(&rx.receive(0, (), 0.0)), vec![0]);
        let out = rx.receive(2, (), 0.001);
        assert!(out.released.is_empty());
        assert_eq!(out.start_timer, Some((1, 0.011)));
        assert_eq!(seqs(&rx.receive(1, (), 0.002)), vec![1, 2]);
        assert!(!rx.timer_running());
        // The stale timer must not do anything.
        assert!(rx.on_reorder_timeout(1, 0.011).released.is_empty());
    }

    #[test]
    fn gap_never_filled_releases_at_timeout() {
        // Hand trace: 0 at t=0 released; 2 at t=1 ms arms the timer for
        // t = 1 ms + 10 ms; expiry releases 2 and skips 1.
        let mut rx = UeReceiver::new(0.010);
        rx.receive(0, (), 0.0);
        let (gen, at) = rx.receive(2, (), 0.001).start_timer.unwrap();
        assert!((at - 0.011).abs() < 1e-15);
        let out = rx.on_reorder_timeout(gen, at);
        assert_eq!(seqs(&out), vec![2]);
        assert_eq!(out.start_timer, None);
        assert_eq!(rx.next_expected(), 3);
        // The late packet is now stale.
        assert!(rx.receive(1, (), 0.02).duplicate);
        assert_eq!(rx.released_count(), 2);
    }

    #[test]
    fn timeout_restarts_for_newer_gap() {
        let mut rx = UeReceiver::new(0.010);
        let (g1, t1) = rx.receive(1, (), 0.0).start_timer.unwrap();
        // Arrives while the first timer runs; beyond the reorder mark.
        assert!(rx.receive(4, (), 0.005).start_timer.is_none());
        let out = rx.on_reorder_timeout(g1, t1);
        assert_eq!(seqs(&out), vec![1]);
        let (g2, t2) = out.start_timer.unwrap();
        assert!((t2 - 0.020).abs() < 1e-15);
        assert_eq!(seqs(&rx.on_reorder_timeout(g2, t2)), vec![4]);
        assert_eq!(rx.buffered(), 0);
    }
}
