//! Per-gNB link abstraction.
//!
//! A link is described by [`LinkParams`]. The channel maps distance to SINR
//! through a log-distance path-loss law with log-normal shadowing, and SINR
//! to rate through the Shannon bound clipped at a spectral-efficiency cap.

mod blockage;
mod channel;
mod mac;

pub use blockage::BlockageProcess;
pub use channel::Channel;
pub use mac::{
    harq_attempt, GnbLink, HarqOutcome, LinkCounters, MacMap, MacPdu, ResourceLedger, Segment,
    SlotEvent,
};

use thiserror::Error;

use crate::engine::SimTime;

#[derive(Debug, Error, PartialEq)]
pub enum RadioError {
    #[error("unknown MAC PDU id {0}")]
    UnknownMacPdu(u64),
    #[error("MAC PDU id {0} already has a live MAP entry")]
    DuplicateMacPdu(u64),
}

/// Which of the two links a PDU travels on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkId {
    Fr1,
    Fr2,
}

impl LinkId {
    pub fn label(self) -> &'static str {
        match self {
            LinkId::Fr1 => "fr1",
            LinkId::Fr2 => "fr2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub gnb_height_m: f64,
    pub ue_height_m: f64,
    pub antenna_gain_dbi: f64,
    pub noise_figure_db: f64,
    /// Path loss at 1 m and 1 GHz, dB.
    pub pl_intercept_db: f64,
    pub pl_exponent: f64,
    pub shadowing_sigma_db: f64,
    /// Upper bound on bit/s/Hz.
    pub efficiency_cap: f64,
    pub slot_duration: SimTime,
    pub per_attempt_success: f64,
    pub max_harq_attempts: u32,
    pub harq_rtt: SimTime,
}

impl LinkParams {
    /// MgNB defaults: 3.6 GHz, 100 MHz, 30 kHz numerology.
    pub fn fr1() -> Self {
        Self {
            carrier_hz: 3.6e9,
            bandwidth_hz: 100e6,
            tx_power_dbm: 43.0,
            gnb_height_m: 10.0,
            ue_height_m: 1.6,
            antenna_gain_dbi: 0.0,
            noise_figure_db: 7.0,
            pl_intercept_db: 44.0,
            pl_exponent: 3.0,
            shadowing_sigma_db: 4.0,
            efficiency_cap: 4.4,
            slot_duration: 0.5e-3,
            per_attempt_success: 0.9,
            max_harq_attempts: 4,
            harq_rtt: 2e-3,
        }
    }

    /// SgNB defaults: 28 GHz, 1 GHz, 120 kHz numerology.
    pub fn fr2() -> Self {
        Self {
            carrier_hz: 28e9,
            bandwidth_hz: 1e9,
            tx_power_dbm: 43.0,
            gnb_height_m: 10.0,
            ue_height_m: 1.6,
            antenna_gain_dbi: 40.0,
            noise_figure_db: 9.0,
            pl_intercept_db: 32.4,
            pl_exponent: 3.0,
            shadowing_sigma_db: 7.0,
            efficiency_cap: 7.4,
            slot_duration: 0.125e-3,
            per_attempt_success: 0.9,
            max_harq_attempts: 4,
            harq_rtt: 2e-3,
        }
    }

    /// Thermal noise over the link bandwidth, dBm (without noise figure).
    pub fn noise_floor_dbm(&self) -> f64 {
        -174.0 + 10.0 * self.bandwidth_hz.log10()
    }

    /// Log-distance path loss on the 3D gNB–UE distance.
    pub fn path_loss_db(&self, distance_2d_m: f64) -> f64 {
        let dh = self.gnb_height_m - self.ue_height_m;
        let d3 = (distance_2d_m * distance_2d_m + dh * dh).sqrt().max(1.0);
        self.pl_intercept_db
            + 10.0 * self.pl_exponent * d3.log10()
            + 20.0 * (self.carrier_hz / 1e9).log10()
    }

    /// SINR in dB for a given shadowing realization. An infinite
    /// `blockage_loss_db` yields `-inf`.
    pub fn sinr_db(&self, distance_2d_m: f64, shadowing_db: f64, blockage_loss_db: f64) -> f64 {
        self.tx_power_dbm + self.antenna_gain_dbi
            - self.path_loss_db(distance_2d_m)
            - shadowing_db
            - blockage_loss_db
            - self.noise_floor_dbm()
            - self.noise_figure_db
    }

    /// Shannon rate clipped at the efficiency cap, bits/s.
    pub fn rate_of(&self, sinr_db: f64) -> f64 {
        if sinr_db == f64::NEG_INFINITY || sinr_db.is_nan() {
            return 0.0;
        }
        let linear = 10f64.powf(sinr_db / 10.0);
        self.bandwidth_hz * (1.0 + linear).log2().min(self.efficiency_cap)
    }

    /// Bits that fit into a whole slot at `rate`.
    pub fn slot_bits(&self, rate: f64) -> f64 {
        rate * self.slot_duration
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn shannon_hand_value() {
        // 1e8 * log2(11) = 345.9 Mbps
        let link = LinkParams {
            efficiency_cap: 100.0,
            ..LinkParams::fr1()
        };
        let r = link.rate_of(10.0);
        assert!((r - 1e8 * 11f64.log2()).abs() < 1.0);
        assert!((r / 1e6 - 345.9).abs() < 0.05);
    }

    #[test]
    fn zero_and_capped_rates() {
        let link = LinkParams::fr2();
        assert_eq!(link.rate_of(f64::NEG_INFINITY), 0.0);
        assert!(link.rate_of(-300.0) < 1e-12);
        assert_eq!(link.rate_of(80.0), link.bandwidth_hz * link.efficiency_cap);
    }

    #[test]
    fn full_blockage_gives_minus_infinity() {
        let link = LinkParams::fr2();
        assert_eq!(link.sinr_db(50.0, 0.0, f64::INFINITY), f64::NEG_INFINITY);
        assert_eq!(link.rate_of(link.sinr_db(50.0, 0.0, f64::INFINITY)), 0.0);
    }

    #[test]
    fn noise_floor() {
        assert!((LinkParams::fr1().noise_floor_dbm() + 94.0).abs() < 1e-9);
        assert!((LinkParams::fr2().noise_floor_dbm() + 84.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn doubling_distance_lowers_sinr(d in 0.5f64..100.0, fr2 in any::<bool>()) {
            let link = if fr2 { LinkParams::fr2() } else { LinkParams::fr1() };
            prop_assert!(link.sinr_db(2.0 * d, 0.0, 0.0) < link.sinr_db(d, 0.0, 0.0));
        }

        #[test]
        fn rate_monotone_in_sinr(a in -60.0f64..60.0, b in -60.0f64..60.0) {
            let link = LinkParams::fr2();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(link.rate_of(lo) <= link.rate_of(hi));
        }
    }
}
