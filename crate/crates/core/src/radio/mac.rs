use std::collections::{HashMap, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Channel, LinkId, LinkParams, RadioError};
use crate::engine::SimTime;

const EPS: f64 = 1e-9;

/// A piece of a PDCP PDU carried by one MAC PDU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub seq: u64,
    pub offset_bits: u64,
    pub bits: u64,
    pub total_bits: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MacPdu {
    pub id: u64,
    pub ue: usize,
    pub bits: u64,
}

/// MAC PDU id → PDCP segments it carries (and the UE it is addressed to),
/// for every MAC PDU still awaiting its HARQ outcome.
#[derive(Debug, Default, Clone)]
pub struct MacMap {
    entries: HashMap<u64, (usize, Vec<Segment>)>,
}

impl MacMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        mac_id: u64,
        ue: usize,
        segments: Vec<Segment>,
    ) -> Result<(), RadioError> {
        if self.entries.contains_key(&mac_id) {
            return Err(RadioError::DuplicateMacPdu(mac_id));
        }
        self.entries.insert(mac_id, (ue, segments));
        Ok(())
    }

    /// Removes the entry on a successful HARQ outcome and returns the owning
    /// UE with the carried segments.
    pub fn on_mac_ack(&mut self, mac_id: u64) -> Result<(usize, Vec<Segment>), RadioError> {
        self.entries
            .remove(&mac_id)
            .ok_or(RadioError::UnknownMacPdu(mac_id))
    }

    /// Removes the entry after the final failed HARQ attempt.
    pub fn on_mac_fail(&mut self, mac_id: u64) -> Result<(usize, Vec<Segment>), RadioError> {
        self.entries
            .remove(&mac_id)
            .ok_or(RadioError::UnknownMacPdu(mac_id))
    }

    /// Sequence numbers carried by a live entry, in carriage order.
    pub fn seqs(&self, mac_id: u64) -> Option<Vec<u64>> {
        self.entries
            .get(&mac_id)
            .map(|(_, segs)| segs.iter().map(|s| s.seq).collect())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of live MAC PDUs carrying the segment of `seq` at `offset_bits`.
    pub fn live_copies(&self, seq: u64, offset_bits: u64) -> usize {
        self.entries
            .values()
            .flat_map(|(_, segs)| segs.iter())
            .filter(|s| s.seq == seq && s.offset_bits == offset_bits)
            .count()
    }
}

/// Slot accounting for one gNB.
#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct ResourceLedger {
    slots_elapsed: u64,
    slots_used: u64,
    busy: f64,
}

impl ResourceLedger {
    pub fn tick(&mut self, used_fraction: f64) {
        self.slots_elapsed += 1;
        if used_fraction > EPS {
            self.slots_used += 1;
            self.busy += used_fraction.min(1.0);
        }
    }

    pub fn slots_elapsed(&self) -> u64 {
        self.slots_elapsed
    }

    pub fn slots_used(&self) -> u64 {
        self.slots_used
    }

    /// Fraction of slots that carried any transmission; 0 before the first slot.
    pub fn usage(&self) -> f64 {
        if self.slots_elapsed == 0 {
            0.0
        } else {
            self.slots_used as f64 / self.slots_elapsed as f64
        }
    }

    /// Fraction of time–frequency resources actually occupied.
    pub fn busy_fraction(&self) -> f64 {
        if self.slots_elapsed == 0 {
            0.0
        } else {
            self.busy / self.slots_elapsed as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarqOutcome {
    Delivered,
    Retry,
    Failed,
}

/// One HARQ attempt. `attempt` is 1-based. A channel that cannot carry the
/// chosen rate always fails; otherwise the attempt succeeds with
/// `per_attempt_success`.
pub fn harq_attempt<R: Rng + ?Sized>(
    link: &LinkParams,
    attempt: u32,
    channel_supports_rate: bool,
    rng: &mut R,
) -> HarqOutcome {
    let ok = channel_supports_rate
        && (link.per_attempt_success >= 1.0 || rng.random::<f64>() < link.per_attempt_success);
    if ok {
        HarqOutcome::Delivered
    } else if attempt < link.max_harq_attempts {
        HarqOutcome::Retry
    } else {
        HarqOutcome::Failed
    }
}

/// Outcome surfaced by [`GnbLink::on_slot`].
#[derive(Debug, Clone, PartialEq)]
pub enum SlotEvent {
    /// The MAC PDU reaches the UE at `at`; resolve it with [`GnbLink::on_mac_delivered`].
    Delivered { mac_id: u64, ue: usize, at: SimTime },
    /// PDCP PDUs that can no longer complete on this link.
    Failed { ue: usize, seqs: Vec<u64> },
}

/// PDCP-level conservation counters for one link.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct LinkCounters {
    pub handed: u64,
    pub acked: u64,
    pub failed: u64,
}

impl LinkCounters {
    pub fn in_flight(&self) -> u64 {
        self.handed - self.acked - self.failed
    }
}

#[derive(Debug, Clone)]
struct RlcSdu {
    seq: u64,
    total_bits: u64,
    sent_bits: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct RxProgress {
    total: u64,
    ok: u64,
    failed: u64,
}

#[derive(Debug, Clone)]
struct UeState {
    channel: Channel,
    rlc: VecDeque<RlcSdu>,
    backlog_bits: u64,
    mcs_rate: f64,
    harq_rng: ChaCha8Rng,
    rx: HashMap<u64, RxProgress>,
}

#[derive(Debug, Clone)]
struct HarqProcess {
    pdu: MacPdu,
    attempts: u32,
    ready_at: SimTime,
    remaining: f64,
    rate: f64,
}

/// MAC entity of one gNB: RLC queues per UE, slot scheduler with HARQ,
/// the MAC-to-PDCP map and the resource ledger.
///
/// New data is shared among backlogged UEs by equal-share water-filling
/// after pending HARQ retransmissions have been served.
#[derive(Debug, Clone)]
pub struct GnbLink {
    id: LinkId,
    params: LinkParams,
    ues: Vec<UeState>,
    map: MacMap,
    ledger: ResourceLedger,
    harq: VecDeque<HarqProcess>,
    next_mac_id: u64,
    total_backlog: u64,
    counters: LinkCounters,
    accounting: bool,
}

impl GnbLink {
    pub fn new(id: LinkId, params: LinkParams) -> Self {
        Self {
            id,
            params,
            ues: Vec::new(),
            map: MacMap::new(),
            ledger: ResourceLedger::default(),
            harq: VecDeque::new(),
            next_mac_id: 0,
            total_backlog: 0,
            counters: LinkCounters::default(),
            accounting: true,
        }
    }

    /// When off, slots still run but are not entered in the ledger.
    pub fn set_accounting(&mut self, on: bool) {
        self.accounting = on;
    }

    fn tick(&mut self, used_fraction: f64) {
        if self.accounting {
            self.ledger.tick(used_fraction);
        }
    }

    /// Attaches a UE and returns its index on this link.
    pub fn add_ue(&mut self, channel: Channel, harq_rng: ChaCha8Rng) -> usize {
        self.ues.push(UeState {
            channel,
            rlc: VecDeque::new(),
            backlog_bits: 0,
            mcs_rate: 0.0,
            harq_rng,
            rx: HashMap::new(),
        });
        self.ues.len() - 1
    }

    pub fn id(&self) -> LinkId {
        self.id
    }

    pub fn params(&self) -> &LinkParams {
        &self.params
    }

    pub fn ledger(&self) -> &ResourceLedger {
        &self.ledger
    }

    pub fn map(&self) -> &MacMap {
        &self.map
    }

    pub fn counters(&self) -> LinkCounters {
        self.counters
    }

    pub fn channel(&self, ue: usize) -> &Channel {
        &self.ues[ue].channel
    }

    pub fn channel_mut(&mut self, ue: usize) -> &mut Channel {
        &mut self.ues[ue].channel
    }

    pub fn backlog_bits(&self, ue: usize) -> u64 {
        self.ues[ue].backlog_bits
    }

    /// True when nothing is queued or awaiting a HARQ outcome.
    pub fn is_idle(&self) -> bool {
        self.total_backlog == 0 && self.harq.is_empty() && self.map.is_empty()
    }

    /// Periodic measurement: redraws shadowing and updates the rate used for
    /// link adaptation. Returns the estimate.
    pub fn measure(&mut self, ue: usize, now: SimTime) -> f64 {
        let st = &mut self.ues[ue];
        st.mcs_rate = st.channel.measure(&self.params, now);
        st.mcs_rate
    }

    pub fn rate_estimate(&self, ue: usize) -> f64 {
        self.ues[ue].mcs_rate
    }

    /// Hands a PDCP PDU to the RLC queue of `ue`.
    pub fn enqueue(&mut self, ue: usize, seq: u64, bits: u64) {
        assert!(bits > 0, "empty PDCP PDU");
        let st = &mut self.ues[ue];
        st.rlc.push_back(RlcSdu {
            seq,
            total_bits: bits,
            sent_bits: 0,
        });
        st.backlog_bits += bits;
        self.total_backlog += bits;
        self.counters.handed += 1;
    }

    /// Runs one slot starting at `now`, appending outcomes to `out`.
    pub fn on_slot(&mut self, now: SimTime, out: &mut Vec<SlotEvent>) {
        if self.total_backlog == 0 && self.harq.is_empty() {
            self.tick(0.0);
            return;
        }
        let mut avail = 1.0f64;
        self.serve_retransmissions(now, &mut avail, out);
        if avail > EPS && self.total_backlog > 0 {
            self.serve_new_data(now, &mut avail, out);
        }
        self.tick(1.0 - avail);
    }

    fn serve_retransmissions(&mut self, now: SimTime, avail: &mut f64, out: &mut Vec<SlotEvent>) {
        let slot = self.params.slot_duration;
        let mut i = 0;
        while i < self.harq.len() && *avail > EPS {
            if self.harq[i].ready_at > now + EPS {
                break;
            }
            let proc_ = &mut self.harq[i];
            if proc_.remaining <= 0.0 {
                let current = self.ues[proc_.pdu.ue].mcs_rate;
                if current > 0.0 {
                    proc_.rate = current;
                }
                proc_.remaining = proc_.pdu.bits as f64 / (proc_.rate * slot);
            }
            let take = proc_.remaining.min(*avail);
            proc_.remaining -= take;
            *avail -= take;
            if proc_.remaining > EPS {
                i += 1;
                continue;
            }
            let mut p = self.harq.remove(i).expect("index in range");
            p.attempts += 1;
            self.resolve_attempt(p, now, out);
        }
    }

    fn serve_new_data(&mut self, now: SimTime, avail: &mut f64, out: &mut Vec<SlotEvent>) {
        let slot = self.params.slot_duration;
        let mut demands: Vec<(f64, usize)> = self
            .ues
            .iter()
            .enumerate()
            .filter(|(_, u)| u.backlog_bits > 0 && u.mcs_rate > 0.0)
            .map(|(i, u)| (u.backlog_bits as f64 / (u.mcs_rate * slot), i))
            .collect();
        if demands.is_empty() {
            return;
        }
        demands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k = demands.len();
        for (j, &(demand, ue)) in demands.iter().enumerate() {
            let share = *avail / (k - j) as f64;
            let (alloc, bits) = if demand <= share + EPS {
                (demand.min(*avail), self.ues[ue].backlog_bits)
            } else {
                (share, (share * self.ues[ue].mcs_rate * slot).floor() as u64)
            };
            if bits == 0 {
                continue;
            }
            *avail = (*avail - alloc).max(0.0);
            let pdu = self.build_mac_pdu(ue, bits);
            let rate = self.ues[ue].mcs_rate;
            self.resolve_attempt(
                HarqProcess {
                    pdu,
                    attempts: 1,
                    ready_at: now,
                    remaining: 0.0,
                    rate,
                },
                now,
                out,
            );
        }
    }

    fn build_mac_pdu(&mut self, ue: usize, budget: u64) -> MacPdu {
        let st = &mut self.ues[ue];
        let mut left = budget;
        let mut segments = Vec::new();
        while left > 0 {
            let Some(front) = st.rlc.front_mut() else {
                break;
            };
            let take = left.min(front.total_bits - front.sent_bits);
            segments.push(Segment {
                seq: front.seq,
                offset_bits: front.sent_bits,
                bits: take,
                total_bits: front.total_bits,
            });
            front.sent_bits += take;
            left -= take;
            if front.sent_bits == front.total_bits {
                st.rlc.pop_front();
            }
        }
        let bits = budget - left;
        st.backlog_bits -= bits;
        self.total_backlog -= bits;
        let id = self.next_mac_id;
        self.next_mac_id += 1;
        self.map.insert(id, ue, segments).expect("fresh MAC PDU id");
        MacPdu { id, ue, bits }
    }

    fn resolve_attempt(&mut self, mut p: HarqProcess, now: SimTime, out: &mut Vec<SlotEvent>) {
        let st = &mut self.ues[p.pdu.ue];
        let supports = st.channel.rate_now(now) >= p.rate * (1.0 - 1e-9);
        match harq_attempt(&self.params, p.attempts, supports, &mut st.harq_rng) {
            HarqOutcome::Delivered => out.push(SlotEvent::Delivered {
                mac_id: p.pdu.id,
                ue: p.pdu.ue,
                at: now + self.params.slot_duration,
            }),
            HarqOutcome::Retry => {
                p.ready_at = now + self.params.harq_rtt;
                p.remaining = 0.0;
                self.harq.push_back(p);
            }
            HarqOutcome::Failed => {
                let (ue, segments) = self.map.on_mac_fail(p.pdu.id).expect("live MAP entry");
                let seqs = self.settle(ue, &segments, false);
                if !seqs.is_empty() {
                    out.push(SlotEvent::Failed { ue: p.pdu.ue, seqs });
                }
            }
        }
    }

    /// Resolves a delivered MAC PDU. Returns the UE and the PDCP sequence
    /// numbers that are now completely received.
    pub fn on_mac_delivered(&mut self, mac_id: u64) -> Result<(usize, Vec<u64>), RadioError> {
        let (ue, segments) = self.map.on_mac_ack(mac_id)?;
        Ok((ue, self.settle(ue, &segments, true)))
    }

    fn settle(&mut self, ue: usize, segments: &[Segment], ok: bool) -> Vec<u64> {
        let st = &mut self.ues[ue];
        let mut resolved = Vec::new();
        for s in segments {
            let entry = st.rx.entry(s.seq).or_insert(RxProgress {
                total: s.total_bits,
                ..RxProgress::default()
            });
            if ok {
                entry.ok += s.bits;
            } else {
                entry.failed += s.bits;
            }
            if entry.ok + entry.failed == entry.total {
                let done = *entry;
                st.rx.remove(&s.seq);
                if done.failed == 0 {
                    self.counters.acked += 1;
                    if ok {
                        resolved.push(s.seq);
                    }
                } else {
                    self.counters.failed += 1;
                    if !ok {
                        resolved.push(s.seq);
                    }
                }
            }
        }
        resolved
    }
}
