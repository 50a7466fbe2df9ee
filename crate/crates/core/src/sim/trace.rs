//! Simulation output: per-packet records, periodic samples and counters.

use std::fmt;
use std::io::{self, Write};

use super::topology::Protocol;
use super::{FlowId, LinkId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Sent,
    Dropped,
    Delivered,
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceKind::Sent => "sent",
            TraceKind::Dropped => "dropped",
            TraceKind::Delivered => "delivered",
        })
    }
}

/// One data-packet event. `link` is the first hop for `Sent`, the dropping
/// link for `Dropped` and the last hop for `Delivered`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub time: f64,
    /// When the packet left its sender.
    pub sent_at: f64,
    pub kind: TraceKind,
    pub flow: FlowId,
    pub pkt: u64,
    pub size_bits: u32,
    pub link: LinkId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub time: f64,
    /// Packets waiting at the bottleneck, excluding the one in service.
    pub bottleneck_queue: u32,
    /// Per-flow packets at the bottleneck, including the one in service.
    pub flow_queue: Vec<u32>,
    /// Per-flow sending rate in bits/s: the paced rate for RRRP, `cwnd * P /
    /// srtt` for Reno, the mean rate for Poisson. Zero when inactive.
    pub send_rate: Vec<f64>,
}

/// Data-packet counters. At every instant
/// `sent == delivered + dropped + queued + propagating`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlowCounters {
    pub sent: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub queued: u64,
    pub propagating: u64,
    pub acks_received: u64,
    pub retransmissions: u64,
    pub timeouts: u64,
}

impl FlowCounters {
    pub fn in_flight(&self) -> u64 {
        self.queued + self.propagating
    }

    pub fn balanced(&self) -> bool {
        self.sent == self.delivered + self.dropped + self.queued + self.propagating
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowInfo {
    pub id: FlowId,
    pub protocol: Protocol,
    pub packet_bits: u32,
    pub counters: FlowCounters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub records: Vec<TraceRecord>,
    pub samples: Vec<Sample>,
    pub flows: Vec<FlowInfo>,
    pub bottleneck: LinkId,
    pub sample_interval: f64,
    pub t_end: f64,
    /// Largest bottleneck waiting-queue length observed.
    pub max_bottleneck_queue: usize,
    pub events_processed: u64,
}

impl EventLog {
    pub fn flow_records(&self, flow: FlowId) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(move |r| r.flow == flow)
    }

    pub fn totals(&self) -> FlowCounters {
        self.flows.iter().fold(FlowCounters::default(), |mut acc, f| {
            let c = f.counters;
            acc.sent += c.sent;
            acc.delivered += c.delivered;
            acc.dropped += c.dropped;
            acc.queued += c.queued;
            acc.propagating += c.propagating;
            acc.acks_received += c.acks_received;
            acc.retransmissions += c.retransmissions;
            acc.timeouts += c.timeouts;
            acc
        })
    }
}

/// Writes `time_s event_type flow_id pkt_id size_bits link_id`, one record
/// per line.
pub fn write_trace<W: Write>(log: &EventLog, mut out: W) -> io::Result<()> {
    for r in &log.records {
        writeln!(out, "{} {} {} {} {} {}", r.time, r.kind, r.flow.0, r.pkt, r.size_bits, r.link.0)?;
    }
    out.flush()
}
