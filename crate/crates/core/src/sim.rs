//! One simulation run of a cell: N video streams over an FR1 MgNB and an
//! FR2 SgNB under one balancing policy.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::balancer::{
    route_link_switching, route_packet_splitting, ArrivalAction, PdcpPdu, Policy, RateEstimates,
    StreamQueue, UeReceiver,
};
use crate::config::{BlockageMode, FramePhase, ScenarioConfig};
use crate::engine::{EngineError, EventHandle, Handler, RngStreams, Scheduler, SimTime};
use crate::metrics::{RunResult, UeStats};
use crate::radio::{
    BlockageProcess, Channel, GnbLink, LinkCounters, LinkId, RadioError, ResourceLedger, SlotEvent,
};
use crate::traffic::{fragment, FrameSource, FrameTracker, TrafficError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Radio(#[from] RadioError),
    #[error("no UEs to simulate")]
    NoUes,
}

/// Per-UE outcome of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct UeOutcome {
    pub stats: UeStats,
    pub frames_lost: u64,
    /// Counted frames delivered complete within the budget.
    pub on_time_ids: Vec<u64>,
    pub pdus_created: u64,
    /// PDUs released by the UE receive window to the application.
    pub pdus_released: u64,
    /// Copies discarded by the UE receive window.
    pub duplicates_dropped: u64,
    /// Releases of a packet the application had already received.
    pub double_releases: u64,
    /// DBTB: PDUs handed to FR1 (on arrival or at their deadline).
    pub dbtb_fr1_forwards: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkReport {
    pub ledger: ResourceLedger,
    pub counters: LinkCounters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub ues: Vec<UeOutcome>,
    pub fr1: LinkReport,
    pub fr2: LinkReport,
    pub events: u64,
    /// Both links idle and every DBTB queue empty when the run stopped.
    pub drained: bool,
}

impl CellOutcome {
    pub fn run_result(&self, point: f64, seed: u64) -> RunResult {
        RunResult {
            point,
            seed,
            ues: self.ues.iter().map(|u| u.stats.clone()).collect(),
            fr1_usage: self.fr1.ledger.usage(),
            fr2_usage: self.fr2.ledger.usage(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Ev {
    Measure,
    Slot(LinkId),
    Frame(usize),
    FrameDeadline(usize, u64),
    XnToSgnb(usize, Vec<(u64, u64)>),
    MacDelivered(LinkId, u64),
    XnAck(usize, Vec<u64>),
    DbtbTimer(usize),
    Reorder(usize, u64),
    StopAccounting,
}

struct Ue {
    source: FrameSource,
    traffic_rng: ChaCha8Rng,
    split_rng: ChaCha8Rng,
    tracker: FrameTracker,
    receiver: UeReceiver<()>,
    next_seq: u64,
    /// First sequence number of each frame, indexed by frame id.
    frame_first_seq: Vec<u64>,
    est: RateEstimates,
    c_est: Option<f64>,
    queue: StreamQueue,
    timer: Option<(EventHandle, SimTime)>,
    double_releases: u64,
    dbtb_fr1_forwards: u64,
}

impl Ue {
    fn locate(&self, seq: u64) -> (u64, u32) {
        let frame = self.frame_first_seq.partition_point(|&s| s <= seq) - 1;
        (frame as u64, (seq - self.frame_first_seq[frame]) as u32)
    }
}

struct Cell<'a> {
    cfg: &'a ScenarioConfig,
    policy: Policy,
    ues: Vec<Ue>,
    fr1: GnbLink,
    fr2: GnbLink,
    slot_index: [u64; 2],
    slot_events: Vec<SlotEvent>,
    error: Option<SimError>,
}

fn link_slot(id: LinkId) -> usize {
    match id {
        LinkId::Fr1 => 0,
        LinkId::Fr2 => 1,
    }
}

impl Cell<'_> {
    fn link_mut(&mut self, id: LinkId) -> &mut GnbLink {
        match id {
            LinkId::Fr1 => &mut self.fr1,
            LinkId::Fr2 => &mut self.fr2,
        }
    }

    fn at(&mut self, sched: &mut Scheduler<Ev>, t: SimTime, ev: Ev) -> Option<EventHandle> {
        match sched.schedule(t, ev) {
            Ok(h) => Some(h),
            Err(e) => {
                self.error.get_or_insert(e.into());
                None
            }
        }
    }

    fn measure(&mut self, now: SimTime) {
        let alpha = self.cfg.c_est_smoothing;
        for u in 0..self.ues.len() {
            let fr1 = self.fr1.measure(u, now);
            let fr2 = self.fr2.measure(u, now);
            let ue = &mut self.ues[u];
            ue.est = RateEstimates {
                fr1,
                fr2,
                last_update: now,
            };
            let c = match ue.c_est {
                Some(prev) => alpha * fr1 + (1.0 - alpha) * prev,
                None => fr1,
            };
            ue.c_est = Some(c);
            ue.queue.set_rate_estimate(c);
        }
    }

    fn on_frame(&mut self, sched: &mut Scheduler<Ev>, u: usize, now: SimTime) {
        let cfg = self.cfg;
        let ue = &mut self.ues[u];
        let frame = ue.source.next_frame(&mut ue.traffic_rng, now);
        let packets = fragment(&frame, cfg.traffic.mtu_payload_bits);
        ue.tracker.register(&frame, packets.len() as u32);
        ue.frame_first_seq.push(ue.next_seq);

        let mut to_fr2 = Vec::new();
        for p in &packets {
            let ue = &mut self.ues[u];
            let seq = ue.next_seq;
            ue.next_seq += 1;
            let bits = p.size_bits;
            let fr1 = match self.policy {
                Policy::SingleFr1 => true,
                Policy::SingleFr2 => false,
                Policy::LinkSwitching => route_link_switching(&ue.est) == LinkId::Fr1,
                Policy::PacketSplitting => {
                    route_packet_splitting(&ue.est, &mut ue.split_rng) == LinkId::Fr1
                }
                Policy::PacketDuplication => {
                    to_fr2.push((seq, bits));
                    true
                }
                Policy::Dbtb => {
                    let pdu = PdcpPdu {
                        seq,
                        size_bits: bits,
                        frame_id: p.frame_id,
                        packet_index: p.packet_index,
                        created: now,
                    };
                    if ue.est.fr2 <= 0.0 {
                        ue.dbtb_fr1_forwards += 1;
                        true
                    } else {
                        match ue.queue.on_sdu_arrival(pdu, now) {
                            ArrivalAction::Queued => {
                                to_fr2.push((seq, bits));
                                false
                            }
                            ArrivalAction::ForwardFr1 => {
                                ue.dbtb_fr1_forwards += 1;
                                true
                            }
                        }
                    }
                }
            };
            if fr1 {
                self.fr1.enqueue(u, seq, bits);
            } else if !matches!(self.policy, Policy::Dbtb) {
                to_fr2.push((seq, bits));
            }
        }
        if !to_fr2.is_empty() {
            self.at(sched, now + cfg.xn_latency, Ev::XnToSgnb(u, to_fr2));
        }
        if self.policy == Policy::Dbtb {
            self.arm_dbtb_timer(sched, u, now);
        }
        self.at(
            sched,
            now + cfg.traffic.d_qos,
            Ev::FrameDeadline(u, frame.frame_id),
        );
        let next = now + cfg.traffic.frame_period();
        if next < cfg.sim_time {
            self.at(sched, next, Ev::Frame(u));
        }
    }

    /// Keeps one engine timer per stream, at the earliest queued deadline.
    fn arm_dbtb_timer(&mut self, sched: &mut Scheduler<Ev>, u: usize, now: SimTime) {
        let Some(t) = self.ues[u].queue.next_deadline() else {
            return;
        };
        let t = t.max(now);
        if let Some((h, armed)) = self.ues[u].timer {
            if armed <= t {
                return;
            }
            sched.cancel(h);
        }
        self.ues[u].timer = self.at(sched, t, Ev::DbtbTimer(u)).map(|h| (h, t));
    }

    fn on_dbtb_timer(&mut self, sched: &mut Scheduler<Ev>, u: usize, now: SimTime) {
        self.ues[u].timer = None;
        let expired = self.ues[u].queue.on_timer(now);
        self.ues[u].dbtb_fr1_forwards += expired.len() as u64;
        for pdu in expired {
            self.fr1.enqueue(u, pdu.seq, pdu.size_bits);
        }
        self.arm_dbtb_timer(sched, u, now);
    }

    fn on_slot(&mut self, sched: &mut Scheduler<Ev>, id: LinkId, now: SimTime) {
        let mut events = std::mem::take(&mut self.slot_events);
        events.clear();
        self.link_mut(id).on_slot(now, &mut events);
        for ev in &events {
            if let SlotEvent::Delivered { mac_id, at, .. } = *ev {
                self.at(sched, at, Ev::MacDelivered(id, mac_id));
            }
        }
        self.slot_events = events;
        let k = &mut self.slot_index[link_slot(id)];
        *k += 1;
        let next = *k as f64 * self.link_mut(id).params().slot_duration;
        self.at(sched, next, Ev::Slot(id));
    }

    fn on_mac_delivered(
        &mut self,
        sched: &mut Scheduler<Ev>,
        id: LinkId,
        mac_id: u64,
        now: SimTime,
    ) {
        let (u, seqs) = match self.link_mut(id).on_mac_delivered(mac_id) {
            Ok(x) => x,
            Err(e) => {
                self.error.get_or_insert(e.into());
                return;
            }
        };
        for &seq in &seqs {
            self.deliver(sched, u, seq, now);
        }
        if id == LinkId::Fr2 && self.policy == Policy::Dbtb && !seqs.is_empty() {
            self.at(sched, now + self.cfg.xn_latency, Ev::XnAck(u, seqs));
        }
    }

    fn deliver(&mut self, sched: &mut Scheduler<Ev>, u: usize, seq: u64, now: SimTime) {
        let out = self.ues[u].receiver.receive(seq, (), now);
        self.release(sched, u, out, now);
    }

    fn release(
        &mut self,
        sched: &mut Scheduler<Ev>,
        u: usize,
        out: crate::balancer::RxOutput<()>,
        now: SimTime,
    ) {
        let ue = &mut self.ues[u];
        for (seq, ()) in out.released {
            let (frame, idx) = ue.locate(seq);
            if let Err(TrafficError::DuplicateDelivery { .. }) = ue.tracker.deliver(frame, idx, now)
            {
                ue.double_releases += 1;
            }
        }
        if let Some((gen, t)) = out.start_timer {
            self.at(sched, t, Ev::Reorder(u, gen));
        }
    }
}

impl Handler<Ev> for Cell<'_> {
    fn handle(&mut self, sched: &mut Scheduler<Ev>, event: Ev) {
        let now = sched.now();
        match event {
            Ev::Measure => {
                self.measure(now);
                self.at(sched, now + self.cfg.measurement_period, Ev::Measure);
            }
            Ev::Slot(id) => self.on_slot(sched, id, now),
            Ev::Frame(u) => self.on_frame(sched, u, now),
            Ev::FrameDeadline(u, f) => {
                self.ues[u].tracker.on_deadline(f);
            }
            Ev::XnToSgnb(u, pdus) => {
                for (seq, bits) in pdus {
                    self.fr2.enqueue(u, seq, bits);
                }
            }
            Ev::MacDelivered(id, mac_id) => self.on_mac_delivered(sched, id, mac_id, now),
            Ev::XnAck(u, seqs) => {
                self.ues[u].queue.on_xn_ack(&seqs);
            }
            Ev::DbtbTimer(u) => self.on_dbtb_timer(sched, u, now),
            Ev::Reorder(u, gen) => {
                let out = self.ues[u].receiver.on_reorder_timeout(gen, now);
                self.release(sched, u, out, now);
            }
            Ev::StopAccounting => {
                self.fr1.set_accounting(false);
                self.fr2.set_accounting(false);
            }
        }
    }
}

fn fr2_blockage(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Option<BlockageProcess> {
    match cfg.blockage_mode {
        BlockageMode::Never => None,
        BlockageMode::Always => Some(BlockageProcess::stuck(true, cfg.blockage_loss_db)),
        BlockageMode::Markov => Some(BlockageProcess::new(
            cfg.blockage_mean_unblocked,
            cfg.blockage_mean_blocked,
            cfg.blockage_loss_db,
            rng,
        )),
    }
}

/// Simulates one cell with UEs at `distances_m` for `cfg.sim_time` seconds
/// of traffic, then lets in-flight frames reach their deadlines.
pub fn run_cell(
    cfg: &ScenarioConfig,
    policy: Policy,
    distances_m: &[f64],
    seed: u64,
) -> Result<CellOutcome, SimError> {
    if distances_m.is_empty() {
        return Err(SimError::NoUes);
    }
    let streams = RngStreams::new(seed);
    let mut fr1 = GnbLink::new(LinkId::Fr1, cfg.fr1.clone());
    let mut fr2 = GnbLink::new(LinkId::Fr2, cfg.fr2.clone());
    let mut ues = Vec::with_capacity(distances_m.len());
    for (u, &d) in distances_m.iter().enumerate() {
        let s = |what: &str| streams.stream(&format!("ue{u}/{what}"));
        fr1.add_ue(
            Channel::new(d, None, s("fr1/shadow"), s("fr1/blockage")),
            s("fr1/harq"),
        );
        let mut block_rng = s("fr2/blockage");
        let blockage = fr2_blockage(cfg, &mut block_rng);
        fr2.add_ue(
            Channel::new(d, blockage, s("fr2/shadow"), block_rng),
            s("fr2/harq"),
        );
        ues.push(Ue {
            source: FrameSource::new(&cfg.traffic),
            traffic_rng: s("traffic"),
            split_rng: s("split"),
            tracker: FrameTracker::new(cfg.traffic.d_qos, cfg.warmup),
            receiver: UeReceiver::new(cfg.t_reordering),
            next_seq: 0,
            frame_first_seq: Vec::new(),
            est: RateEstimates::default(),
            c_est: None,
            queue: StreamQueue::new(cfg.traffic.d_qos, cfg.d_retx)
                .with_recalc_on_ack(cfg.recalc_on_ack),
            timer: None,
            double_releases: 0,
            dbtb_fr1_forwards: 0,
        });
    }

    let mut sched = Scheduler::new();
    sched.schedule(0.0, Ev::Measure)?;
    sched.schedule(0.0, Ev::Slot(LinkId::Fr1))?;
    sched.schedule(0.0, Ev::Slot(LinkId::Fr2))?;
    let period = cfg.traffic.frame_period();
    for u in 0..ues.len() {
        let phase = match cfg.frame_phase {
            FramePhase::Aligned => 0.0,
            FramePhase::Random => streams.stream(&format!("ue{u}/phase")).random::<f64>() * period,
        };
        sched.schedule(phase, Ev::Frame(u))?;
    }
    sched.schedule(cfg.sim_time, Ev::StopAccounting)?;

    let mut cell = Cell {
        cfg,
        policy,
        ues,
        fr1,
        fr2,
        slot_index: [0, 0],
        slot_events: Vec::new(),
        error: None,
    };
    let mut t_end = cfg.sim_time + cfg.traffic.d_qos;
    sched.run_until(t_end, &mut cell)?;
    // Drain what is still in flight so conservation can be checked.
    let drained =
        |c: &Cell| c.fr1.is_idle() && c.fr2.is_idle() && c.ues.iter().all(|u| u.queue.is_empty());
    for _ in 0..100 {
        if drained(&cell) || cell.error.is_some() {
            break;
        }
        t_end += 0.01;
        sched.run_until(t_end, &mut cell)?;
    }
    if let Some(e) = cell.error.take() {
        return Err(e);
    }
    let is_drained = drained(&cell);
    let ues = cell
        .ues
        .iter()
        .enumerate()
        .map(|(u, ue)| UeOutcome {
            stats: UeStats {
                ue_id: u,
                distance_m: distances_m[u],
                frames_generated: ue.tracker.frames_generated(),
                frames_on_time: ue.tracker.frames_on_time(),
            },
            frames_lost: ue.tracker.frames_lost(),
            on_time_ids: ue.tracker.on_time_ids(),
            pdus_created: ue.next_seq,
            pdus_released: ue.receiver.released_count(),
            duplicates_dropped: ue.receiver.duplicates(),
            double_releases: ue.double_releases,
            dbtb_fr1_forwards: ue.dbtb_fr1_forwards,
        })
        .collect();
    Ok(CellOutcome {
        ues,
        fr1: LinkReport {
            ledger: *cell.fr1.ledger(),
            counters: cell.fr1.counters(),
        },
        fr2: LinkReport {
            ledger: *cell.fr2.ledger(),
            counters: cell.fr2.counters(),
        },
        events: sched.dispatched(),
        drained: is_drained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(policy: Policy) -> (ScenarioConfig, Policy) {
        let cfg = ScenarioConfig {
            sim_time: 1.5,
            ..ScenarioConfig::default()
        };
        (cfg, policy)
    }

    #[test]
    fn every_policy_runs_and_conserves_frames() {
        for p in Policy::ALL {
            let (cfg, p) = short(p);
            let out = run_cell(&cfg, p, &[40.0], 3).unwrap();
            let ue = &out.ues[0];
            assert_eq!(ue.stats.frames_generated, 60, "{p}");
            assert_eq!(
                ue.stats.frames_generated,
                ue.stats.frames_on_time + ue.frames_lost,
                "{p}"
            );
            assert_eq!(ue.double_releases, 0, "{p}");
            assert!(out.drained, "{p}");
            for l in [out.fr1, out.fr2] {
                assert_eq!(l.counters.in_flight(), 0, "{p}");
            }
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let (cfg, p) = short(Policy::Dbtb);
        let a = run_cell(&cfg, p, &[60.0, 90.0], 9).unwrap();
        let b = run_cell(&cfg, p, &[60.0, 90.0], 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_links_use_only_their_link() {
        let (cfg, _) = short(Policy::SingleFr1);
        let a = run_cell(&cfg, Policy::SingleFr1, &[40.0], 1).unwrap();
        assert_eq!(a.fr2.ledger.slots_used(), 0);
        assert!(a.fr1.ledger.slots_used() > 0);
        let b = run_cell(&cfg, Policy::SingleFr2, &[40.0], 1).unwrap();
        assert_eq!(b.fr1.ledger.slots_used(), 0);
    }

    #[test]
    fn ledger_covers_only_the_traffic_window() {
        let (cfg, p) = short(Policy::SingleFr1);
        let out = run_cell(&cfg, p, &[40.0], 1).unwrap();
        assert_eq!(out.fr1.ledger.slots_elapsed(), 3000);
        assert_eq!(out.fr2.ledger.slots_elapsed(), 12000);
    }
}
