//! AR/VR video source and per-frame delivery bookkeeping.
//!
//! Frames are generated periodically with a random size, emitted as an
//! instantaneous burst of MTU-sized packets, and judged lost as a whole if
//! any packet misses the frame's delay budget.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::engine::SimTime;

/// Lower truncation bound of the frame-size distribution, as a fraction of the mean.
pub const MIN_SIZE_FRACTION: f64 = 0.25;
/// Standard deviation of the frame-size distribution, as a fraction of the mean.
pub const SIZE_SIGMA_FRACTION: f64 = 0.25;

#[derive(Debug, Error, PartialEq)]
pub enum TrafficError {
    #[error("packet {packet_index} of frame {frame_id} delivered twice")]
    DuplicateDelivery { frame_id: u64, packet_index: u32 },
    #[error("unknown frame {0}")]
    UnknownFrame(u64),
    #[error("packet index {packet_index} out of range for frame {frame_id}")]
    BadPacketIndex { frame_id: u64, packet_index: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficConfig {
    pub mean_bitrate_bps: f64,
    pub fps: f64,
    pub peak_to_average: f64,
    pub mtu_payload_bits: u64,
    /// Per-frame delivery budget, seconds.
    pub d_qos: SimTime,
    pub flr_qos: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            mean_bitrate_bps: 50e6,
            fps: 60.0,
            peak_to_average: 2.0,
            mtu_payload_bits: 1460 * 8,
            d_qos: 15e-3,
            flr_qos: 1e-2,
        }
    }
}

impl TrafficConfig {
    pub fn mean_frame_bits(&self) -> f64 {
        self.mean_bitrate_bps / self.fps
    }

    pub fn frame_period(&self) -> SimTime {
        1.0 / self.fps
    }

    /// Smallest and largest frame size in whole bits.
    pub fn size_bounds(&self) -> (u64, u64) {
        let mean = self.mean_frame_bits();
        let hi = (self.peak_to_average * mean).floor().max(1.0) as u64;
        let lo = ((MIN_SIZE_FRACTION * mean).ceil().max(1.0) as u64).min(hi);
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameStatus {
    Pending,
    DeliveredInTime,
    Lost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoFrame {
    pub frame_id: u64,
    pub gen_time: SimTime,
    pub size_bits: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppPacket {
    pub frame_id: u64,
    pub packet_index: u32,
    pub size_bits: u64,
    pub gen_time: SimTime,
}

/// Truncated-normal frame size law.
///
/// With `peak_to_average == 1` the upper bound collapses onto the mean and
/// every frame has the same size.
#[derive(Debug, Clone)]
pub struct FrameSizeDistribution {
    normal: Option<Normal<f64>>,
    mean: f64,
    lo: u64,
    hi: u64,
}

impl FrameSizeDistribution {
    pub fn new(cfg: &TrafficConfig) -> Self {
        let mean = cfg.mean_frame_bits();
        let (lo, hi) = cfg.size_bounds();
        let normal = if cfg.peak_to_average > 1.0 {
            Some(Normal::new(mean, SIZE_SIGMA_FRACTION * mean).expect("positive sigma"))
        } else {
            None
        };
        Self {
            normal,
            mean,
            lo,
            hi,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let Some(normal) = &self.normal else {
            return (self.mean.round() as u64).clamp(self.lo, self.hi);
        };
        loop {
            let x = normal.sample(rng);
            if x >= self.lo as f64 && x <= self.hi as f64 {
                return (x.round() as u64).clamp(self.lo, self.hi);
            }
        }
    }
}

/// Periodic frame generator for one stream.
#[derive(Debug, Clone)]
pub struct FrameSource {
    sizes: FrameSizeDistribution,
    next_id: u64,
}

impl FrameSource {
    pub fn new(cfg: &TrafficConfig) -> Self {
        Self {
            sizes: FrameSizeDistribution::new(cfg),
            next_id: 0,
        }
    }

    pub fn next_frame<R: Rng + ?Sized>(&mut self, rng: &mut R, now: SimTime) -> VideoFrame {
        let frame_id = self.next_id;
        self.next_id += 1;
        VideoFrame {
            frame_id,
            gen_time: now,
            size_bits: self.sizes.sample(rng),
        }
    }
}

/// Splits a frame into `ceil(size / mtu)` packets; only the last may be short.
pub fn fragment(frame: &VideoFrame, mtu_payload_bits: u64) -> Vec<AppPacket> {
    assert!(mtu_payload_bits > 0, "mtu payload must be positive");
    assert!(frame.size_bits > 0, "frame size must be positive");
    let count = frame.size_bits.div_ceil(mtu_payload_bits);
    (0..count)
        .map(|i| {
            let start = i * mtu_payload_bits;
            AppPacket {
                frame_id: frame.frame_id,
                packet_index: i as u32,
                size_bits: (frame.size_bits - start).min(mtu_payload_bits),
                gen_time: frame.gen_time,
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
struct FrameRecord {
    gen_time: SimTime,
    received: Vec<bool>,
    delivered: u32,
    status: FrameStatus,
    counted: bool,
}

struct AppPacketRef {
    frame_id: u64,
    packet_index: u32,
}

/// Per-stream frame outcome ledger at the UE application layer.
///
/// Frames generated before `warmup` are tracked (so duplicate detection
/// still works) but excluded from the counters.
#[derive(Debug, Clone)]
pub struct FrameTracker {
    d_qos: SimTime,
    warmup: SimTime,
    frames: Vec<FrameRecord>,
    generated: u64,
    on_time: u64,
    lost: u64,
}

impl FrameTracker {
    pub fn new(d_qos: SimTime, warmup: SimTime) -> Self {
        Self {
            d_qos,
            warmup,
            frames: Vec::new(),
            generated: 0,
            on_time: 0,
            lost: 0,
        }
    }

    /// Registers a frame; frame ids must be issued densely from 0.
    pub fn register(&mut self, frame: &VideoFrame, packet_count: u32) {
        assert_eq!(
            frame.frame_id as usize,
            self.frames.len(),
            "frame ids must be dense"
        );
        let counted = frame.gen_time >= self.warmup;
        if counted {
            self.generated += 1;
        }
        self.frames.push(FrameRecord {
            gen_time: frame.gen_time,
            received: vec![false; packet_count as usize],
            delivered: 0,
            status: FrameStatus::Pending,
            counted,
        });
    }

    pub fn deadline_of(&self, frame_id: u64) -> Option<SimTime> {
        self.frames
            .get(frame_id as usize)
            .map(|f| f.gen_time + self.d_qos)
    }

    pub fn status(&self, frame_id: u64) -> Option<FrameStatus> {
        self.frames.get(frame_id as usize).map(|f| f.status)
    }

    /// Records an application-layer arrival. Returns the new status when this
    /// arrival completes the frame in time.
    pub fn on_app_delivery(
        &mut self,
        packet: &AppPacket,
        arrival: SimTime,
    ) -> Result<Option<FrameStatus>, TrafficError> {
        self.deliver(packet.frame_id, packet.packet_index, arrival)
    }

    /// Same as [`FrameTracker::on_app_delivery`], keyed by packet identity.
    pub fn deliver(
        &mut self,
        frame_id: u64,
        packet_index: u32,
        arrival: SimTime,
    ) -> Result<Option<FrameStatus>, TrafficError> {
        let packet = AppPacketRef {
            frame_id,
            packet_index,
        };
        let d_qos = self.d_qos;
        let rec = self
            .frames
            .get_mut(packet.frame_id as usize)
            .ok_or(TrafficError::UnknownFrame(packet.frame_id))?;
        let slot = rec.received.get_mut(packet.packet_index as usize).ok_or(
            TrafficError::BadPacketIndex {
                frame_id: packet.frame_id,
                packet_index: packet.packet_index,
            },
        )?;
        if *slot {
            return Err(TrafficError::DuplicateDelivery {
                frame_id: packet.frame_id,
                packet_index: packet.packet_index,
            });
        }
        *slot = true;
        if rec.status != FrameStatus::Pending || arrival > rec.gen_time + d_qos {
            return Ok(None);
        }
        rec.delivered += 1;
        if rec.delivered as usize == rec.received.len() {
            rec.status = FrameStatus::DeliveredInTime;
            if rec.counted {
                self.on_time += 1;
            }
            return Ok(Some(FrameStatus::DeliveredInTime));
        }
        Ok(None)
    }

    /// Finalizes a frame at its deadline. Returns `Lost` if it was still pending.
    pub fn on_deadline(&mut self, frame_id: u64) -> Option<FrameStatus> {
        let rec = self.frames.get_mut(frame_id as usize)?;
        if rec.status != FrameStatus::Pending {
            return None;
        }
        rec.status = FrameStatus::Lost;
        if rec.counted {
            self.lost += 1;
        }
        Some(FrameStatus::Lost)
    }

    pub fn frames_generated(&self) -> u64 {
        self.generated
    }

    pub fn frames_on_time(&self) -> u64 {
        self.on_time
    }

    pub fn frames_lost(&self) -> u64 {
        self.lost
    }

    /// Ids of counted frames that were delivered in time.
    pub fn on_time_ids(&self) -> Vec<u64> {
        self.frames
            .iter()
            .enumerate()
            .filter(|(_, f)| f.counted && f.status == FrameStatus::DeliveredInTime)
            .map(|(i, _)| i as u64)
            .collect()
    }
}
