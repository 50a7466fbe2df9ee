use super::FlowId;
use crate::units::Rate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketKind {
    Data,
    Ack,
}

/// Information carried back to a sender.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AckPayload {
    /// RRR receiver report: current output-rate estimate (absent until the
    /// estimator has two arrivals) and the highest data id received.
    Rate {
        estimate: Option<Rate>,
        highest_id: u64,
    },
    /// Cumulative TCP acknowledgment: next expected sequence number.
    Cumulative { next_expected: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packet {
    /// Unique per flow, one per transmission.
    pub id: u64,
    /// Stream sequence number. Equals `id` except for TCP retransmissions.
    pub seq: u64,
    pub flow: FlowId,
    pub size_bits: u32,
    pub kind: PacketKind,
    pub sent_at: f64,
    pub retransmission: bool,
    /// Index of the link the packet is at, within its flow's path.
    pub hop: u8,
    pub ack: Option<Ack>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ack {
    pub payload: AckPayload,
    /// Send time of the data packet that triggered this ack.
    pub echo_sent_at: f64,
    pub echo_retransmission: bool,
}

impl Packet {
    pub fn data(flow: FlowId, id: u64, seq: u64, size_bits: u32, now: f64) -> Self {
        Packet {
            id,
            seq,
            flow,
            size_bits,
            kind: PacketKind::Data,
            sent_at: now,
            retransmission: false,
            hop: 0,
            ack: None,
        }
    }

    pub fn ack_for(data: &Packet, payload: AckPayload, size_bits: u32, now: f64) -> Self {
        Packet {
            id: data.id,
            seq: data.seq,
            flow: data.flow,
            size_bits,
            kind: PacketKind::Ack,
            sent_at: now,
            retransmission: false,
            hop: 0,
            ack: Some(Ack {
                payload,
                echo_sent_at: data.sent_at,
                echo_retransmission: data.retransmission,
            }),
        }
    }
}
