//! MAC frames carried by the radio medium. Sizes are abstracted into
//! configured airtimes; only the fields that influence protocol behavior
//! are modeled.

use crate::mass::Mass;
use crate::rng::NodeId;

/// Routing metric value advertised in collection-mode beacons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BeaconMetric {
    /// Expected duty cycle: the holder's smoothed forwarding delay, seconds.
    Edc(f64),
    /// Queue backlog, packets.
    QueueBacklog(u32),
    /// Random walk: no metric, any awake neighbor qualifies.
    RandomWalk,
    /// Wake-up frequency of the holder, Hz.
    Direct(f64),
}

/// Identity of a collection packet riding in a beacon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketInfo {
    pub origin: NodeId,
    pub seq: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataStep {
    /// Initiator's payload (first frame of the 3-way data phase).
    First,
    /// Responder's payload (second frame).
    Second,
}

#[derive(Debug, Clone)]
pub enum Frame {
    Beacon {
        initiator: NodeId,
        /// Destination for the LPL-unicast baseline; None for anycast.
        lpl_dest: Option<NodeId>,
        metric: Option<BeaconMetric>,
        packet: Option<PacketInfo>,
    },
    Ack {
        responder: NodeId,
        initiator: NodeId,
        /// Elapsed time from the responder's wake-up to the start of this
        /// ack, piggybacked for rendezvous-time correction.
        piggy_delay_us: u64,
    },
    Data {
        from: NodeId,
        to: NodeId,
        step: DataStep,
        mass: Option<Mass>,
        /// Responder's current estimator window mean, microseconds.
        window_mean_us: Option<f64>,
    },
    FinalAck {
        from: NodeId,
        to: NodeId,
    },
    Select {
        initiator: NodeId,
        chosen: NodeId,
    },
}

impl Frame {
    /// True for frames that belong to an ongoing exchange; a listening node
    /// overhearing one goes back to sleep (collision avoidance).
    pub fn is_data_phase(&self) -> bool {
        matches!(
            self,
            Frame::Ack { .. } | Frame::Data { .. } | Frame::FinalAck { .. } | Frame::Select { .. }
        )
    }
}
