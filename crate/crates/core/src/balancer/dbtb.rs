//! Delay-based traffic balancing at the MgNB.
//!
//! Every PDU is first offered to the SgNB. The MgNB keeps a copy in a
//! per-stream queue together with the latest instant at which FR1 must start
//! sending it so that the frame can still make its delay budget, leaving room
//! for one FR1 retransmission. If the SgNB has not acknowledged the PDU by
//! then, the copy is handed to the FR1 RLC.

use std::collections::VecDeque;

use super::PdcpPdu;
use crate::engine::SimTime;

/// Latest FR1 transmission start for a new PDU of `size_bits`:
/// `now + (d_qos - d_retx) - size_bits / c_est`.
///
/// A non-positive rate estimate gives `now` (send on FR1 immediately).
pub fn compute_deadline(
    now: SimTime,
    size_bits: u64,
    c_est: f64,
    d_qos: SimTime,
    d_retx: SimTime,
) -> SimTime {
    if c_est <= 0.0 || !c_est.is_finite() {
        return now;
    }
    now + (d_qos - d_retx) - size_bits as f64 / c_est
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueuedPdu {
    pub pdu: PdcpPdu,
    pub deadline: SimTime,
}

/// What the MgNB does with a freshly created PDU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrivalAction {
    /// Copy sent to the SgNB and kept in the queue until acked or expired.
    Queued,
    /// No time left to try FR2: hand to the FR1 RLC right away.
    ForwardFr1,
}

/// QUEUE#i: PDUs offered to the SgNB and not yet acknowledged, ordered by
/// sequence number, each with its FR1 start deadline.
#[derive(Debug, Clone)]
pub struct StreamQueue {
    entries: VecDeque<QueuedPdu>,
    c_est: f64,
    d_qos: SimTime,
    d_retx: SimTime,
    recalc_on_ack: bool,
}

impl StreamQueue {
    pub fn new(d_qos: SimTime, d_retx: SimTime) -> Self {
        Self {
            entries: VecDeque::new(),
            c_est: 0.0,
            d_qos,
            d_retx,
            recalc_on_ack: false,
        }
    }

    pub fn with_recalc_on_ack(mut self, on: bool) -> Self {
        self.recalc_on_ack = on;
        self
    }

    pub fn set_rate_estimate(&mut self, c_est: f64) {
        self.c_est = c_est.max(0.0);
    }

    pub fn rate_estimate(&self) -> f64 {
        self.c_est
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &QueuedPdu> {
        self.entries.iter()
    }

    pub fn contains(&self, seq: u64) -> bool {
        self.position(seq).is_some()
    }

    fn position(&self, seq: u64) -> Option<usize> {
        self.entries.binary_search_by_key(&seq, |e| e.pdu.seq).ok()
    }

    pub fn deadline_for(&self, size_bits: u64, now: SimTime) -> SimTime {
        compute_deadline(now, size_bits, self.c_est, self.d_qos, self.d_retx)
    }

    /// Handles a new PDU. PDUs must arrive in increasing sequence order.
    pub fn on_sdu_arrival(&mut self, pdu: PdcpPdu, now: SimTime) -> ArrivalAction {
        let deadline = self.deadline_for(pdu.size_bits, now);
        if self.c_est <= 0.0 || deadline <= now {
            return ArrivalAction::ForwardFr1;
        }
        if let Some(last) = self.entries.back() {
            assert!(pdu.seq > last.pdu.seq, "sequence numbers must increase");
        }
        self.entries.push_back(QueuedPdu { pdu, deadline });
        self.recalc_deadlines();
        ArrivalAction::Queued
    }

    /// Tail-to-head pass: `T_n = min(T_n, T_{n+1} - s_n / C)`.
    pub fn recalc_deadlines(&mut self) {
        if self.c_est <= 0.0 || self.entries.len() < 2 {
            return;
        }
        for i in (0..self.entries.len() - 1).rev() {
            let next = self.entries[i + 1].deadline;
            let cur = &mut self.entries[i];
            let bound = next - cur.pdu.size_bits as f64 / self.c_est;
            if bound < cur.deadline {
                cur.deadline = bound;
            }
        }
    }

    /// Earliest pending deadline.
    pub fn next_deadline(&self) -> Option<SimTime> {
        self.entries
            .iter()
            .map(|e| e.deadline)
            .min_by(f64::total_cmp)
    }

    /// Removes and returns, in sequence order, every PDU whose deadline has
    /// been reached. These go to the FR1 RLC.
    pub fn on_timer(&mut self, now: SimTime) -> Vec<PdcpPdu> {
        let mut expired = Vec::new();
        self.entries.retain(|e| {
            if e.deadline <= now {
                expired.push(e.pdu.clone());
                false
            } else {
                true
            }
        });
        expired
    }

    /// Drops acknowledged PDUs. Unknown sequence numbers were already handed
    /// to FR1 and are ignored. Returns how many entries were removed.
    pub fn on_xn_ack(&mut self, seqs: &[u64]) -> usize {
        let mut removed = 0;
        for &seq in seqs {
            if let Some(pos) = self.position(seq) {
                self.entries.remove(pos);
                removed += 1;
            }
        }
        if removed > 0 && self.recalc_on_ack {
            self.recalc_deadlines();
        }
        removed
    }

    /// True if every adjacent pair satisfies `T_n + s_n / C <= T_{n+1}`
    /// up to `tol` seconds.
    pub fn spacing_holds(&self, tol: f64) -> bool {
        if self.c_est <= 0.0 {
            return true;
        }
        self.entries
            .iter()
            .zip(self.entries.iter().skip(1))
            .all(|(a, b)| a.deadline + a.pdu.size_bits as f64 / self.c_est <= b.deadline + tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MS: f64 = 1e-3;

    fn pdu(seq: u64, size_bits: u64) -> PdcpPdu {
        PdcpPdu {
            seq,
            size_bits,
            frame_id: 0,
            packet_index: seq as u32,
            created: 0.0,
        }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1e-3)
    }

    #[test]
    fn deadline_hand_values() {
        // 100 ms + 10 ms - 11_680 / 50e6 s = 109.7664 ms
        assert!(close(
            compute_deadline(100.0 * MS, 11_680, 50e6, 15.0 * MS, 5.0 * MS),
            109.7664 * MS
        ));
        // 0 + 10 ms - 12_000 / 1e8 s = 9.88 ms
        assert!(close(
            compute_deadline(0.0, 12_000, 100e6, 15.0 * MS, 5.0 * MS),
            9.88 * MS
        ));
        assert!(close(
            compute_deadline(0.3, 0, 50e6, 15.0 * MS, 5.0 * MS),
            0.31
        ));
    }

    #[test]
    fn zero_rate_or_no_budget_goes_to_fr1() {
        assert_eq!(compute_deadline(1.0, 100, 0.0, 15.0 * MS, 5.0 * MS), 1.0);
        let mut q = StreamQueue::new(15.0 * MS, 5.0 * MS);
        assert_eq!(
            q.on_sdu_arrival(pdu(0, 100), 1.0),
            ArrivalAction::ForwardFr1
        );
        let mut q = StreamQueue::new(5.0 * MS, 5.0 * MS);
        q.set_rate_estimate(50e6);
        assert!(q.deadline_for(11_680, 1.0) < 1.0);
        assert_eq!(
            q.on_sdu_arrival(pdu(0, 11_680), 1.0),
            ArrivalAction::ForwardFr1
        );
        assert!(q.is_empty());
    }

    #[test]
    fn zero_size_pdu_gets_full_budget() {
        let mut q = StreamQueue::new(15.0 * MS, 5.0 * MS);
        q.set_rate_estimate(50e6);
        q.on_sdu_arrival(pdu(0, 0), 0.2);
        assert!(close(q.next_deadline().unwrap(), 0.21));
    }

    #[test]
    fn recalc_hand_value() {
        // T_2 = 109.7664 ms, T_1 = 109.9 ms, s_1 = 11_680 bits, C = 50 Mbps
        // T_1 = min(109.9, 109.7664 - 0.2336) = 109.5328 ms
        let mut q = StreamQueue::new(15.0 * MS, 5.0 * MS);
        q.set_rate_estimate(50e6);
        q.entries.push_back(QueuedPdu {
            pdu: pdu(1, 11_680),
            deadline: 109.9 * MS,
        });
        q.entries.push_back(QueuedPdu {
            pdu: pdu(2, 11_680),
            deadline: 109.7664 * MS,
        });
        q.recalc_deadlines();
        assert!(close(q.entries[0].deadline, 109.5328 * MS));
        assert!(close(q.entries[1].deadline, 109.7664 * MS));
    }

    #[test]
    fn recalc_keeps_already_spaced_entries() {
        let mut q = StreamQueue::new(15.0 * MS, 5.0 * MS);
        q.set_rate_estimate(50e6);
        q.entries.push_back(QueuedPdu {
            pdu: pdu(1, 11_680),
            deadline: 100.0 * MS,
        });
        q.entries.push_back(QueuedPdu {
            pdu: pdu(2, 11_680),
            deadline: 109.0 * MS,
        });
        q.recalc_deadlines();
        assert_eq!(q.entries[0].deadline, 100.0 * MS);
        let mut single = StreamQueue::new(15.0 * MS, 5.0 * MS);
        single.set_rate_estimate(50e6);
        single.on_sdu_arrival(pdu(0, 11_680), 0.1);
        let before = single.next_deadline();
        single.recalc_deadlines();
        assert_eq!(single.next_deadline(), before);
    }

    #[test]
    fn burst_arrivals_chain_back_from_the_newest() {
        let mut q = StreamQueue::new(15.0 * MS, 5.0 * MS);
        q.set_rate_estimate(50e6);
        q.on_sdu_arrival(pdu(0, 11_680), 0.1);
        q.on_sdu_arrival(pdu(1, 11_680), 0.1);
        let d: Vec<f64> = q.entries().map(|e| e.deadline).collect();
        assert!(close(d[1], 109.7664 * MS));
        assert!(close(d[0], 109.5328 * MS));
        assert!(q.spacing_holds(1e-12));
    }

    #[test]
    fn timer_expires_in_seq_order() {
        let mut q = StreamQueue::new(15.0 * MS, 5.0 * MS);
        q.set_rate_estimate(50e6);
        for seq in 0..3 {
            q.on_sdu_arrival(pdu(seq, 0), 0.0);
        }
        let out = q.on_timer(10.0 * MS);
        assert_eq!(out.iter().map(|p| p.seq).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(q.is_empty());
    }

    #[test]
    fn ack_before_deadline_keeps_pdu_off_fr1() {
        let mut q = StreamQueue::new(15.0 * MS, 5.0 * MS);
        q.set_rate_estimate(50e6);
        q.on_sdu_arrival(pdu(0, 11_680), 0.0);
        let t = q.next_deadline().unwrap();
        assert_eq!(q.on_xn_ack(&[0]), 1);
        assert!(q.on_timer(t).is_empty());
    }

    #[test]
    fn acks_remove_listed_and_ignore_unknown() {
        let mut q = StreamQueue::new(15.0 * MS, 5.0 * MS);
        q.set_rate_estimate(50e6);
        for seq in 5..8 {
            q.on_sdu_arrival(pdu(seq, 11_680), 0.0);
        }
        assert_eq!(q.on_xn_ack(&[5, 7]), 2);
        assert_eq!(q.entries().map(|e| e.pdu.seq).collect::<Vec<_>>(), vec![6]);
        assert_eq!(q.on_xn_ack(&[5, 99]), 0);
        assert_eq!(q.on_xn_ack(&[6]), 1);
        assert!(q.is_empty());
    }

    #[test]
    fn recalc_on_ack_changes_nothing() {
        let mut a = StreamQueue::new(15.0 * MS, 5.0 * MS);
        a.set_rate_estimate(80e6);
        let mut b = a.clone().with_recalc_on_ack(true);
        for seq in 0..20 {
            a.on_sdu_arrival(pdu(seq, 11_680), seq as f64 * 0.1 * MS);
            b.on_sdu_arrival(pdu(seq, 11_680), seq as f64 * 0.1 * MS);
        }
        a.on_xn_ack(&[3, 4, 10, 19]);
        b.on_xn_ack(&[3, 4, 10, 19]);
        let da: Vec<f64> = a.entries().map(|e| e.deadline).collect();
        let db: Vec<f64> = b.entries().map(|e| e.deadline).collect();
        assert_eq!(da, db);
    }
}
