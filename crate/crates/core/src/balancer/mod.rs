//! PDCP multi-connectivity layer: the MgNB balancing policies and the
//! UE-side receive window.

mod dbtb;
mod policy;
mod receiver;

pub use dbtb::{compute_deadline, ArrivalAction, QueuedPdu, StreamQueue};
pub use policy::{
    fr1_split_probability, route_duplication, route_link_switching, route_packet_splitting,
    route_single, Policy, RateEstimates,
};
pub use receiver::{RxOutput, UeReceiver};

use crate::engine::SimTime;

/// A sequence-numbered PDCP PDU and the application packet it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct PdcpPdu {
    pub seq: u64,
    pub size_bits: u64,
    pub frame_id: u64,
    pub packet_index: u32,
    pub created: SimTime,
}
