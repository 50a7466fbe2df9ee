//! Drop-tail FIFO links.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::packet::Packet;
use super::SimError;
use crate::units::Rate;

/// Static description of a link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub capacity: Rate,
    /// One-way propagation delay, seconds.
    pub prop_delay: f64,
    /// Packets that may wait behind the one being transmitted.
    pub buffer_packets: usize,
}

impl LinkSpec {
    pub fn new(capacity_bps: f64, prop_delay: f64, buffer_packets: usize) -> Result<Self, SimError> {
        let spec = LinkSpec {
            capacity: Rate::new(capacity_bps).map_err(|e| SimError::Config(e.to_string()))?,
            prop_delay,
            buffer_packets,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.capacity.bps() <= 0.0 {
            return Err(SimError::Config("link capacity must be positive".into()));
        }
        if !(self.prop_delay.is_finite() && self.prop_delay >= 0.0) {
            return Err(SimError::Config(format!(
                "link propagation delay must be finite and non-negative, got {}",
                self.prop_delay
            )));
        }
        Ok(())
    }

    pub fn with_delay(mut self, prop_delay: f64) -> Self {
        self.prop_delay = prop_delay;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnqueueOutcome {
    /// The link was idle; transmission of the packet ends at `done_at`.
    Transmitting { done_at: f64 },
    Queued,
    Dropped(Packet),
}

/// Runtime state of a link: one packet in service plus a bounded FIFO.
#[derive(Debug, Clone)]
pub struct LinkState {
    spec: LinkSpec,
    capacity: f64,
    in_service: Option<Packet>,
    queue: VecDeque<Packet>,
    drops: u64,
    enqueued: u64,
    departed: u64,
}

impl LinkState {
    pub fn new(spec: LinkSpec) -> Self {
        LinkState {
            capacity: spec.capacity.bps(),
            spec,
            in_service: None,
            queue: VecDeque::new(),
            drops: 0,
            enqueued: 0,
            departed: 0,
        }
    }

    pub fn spec(&self) -> &LinkSpec {
        &self.spec
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    /// Takes effect for transmissions that start after the change.
    pub fn set_capacity(&mut self, capacity_bps: f64) {
        self.capacity = capacity_bps;
    }

    pub fn prop_delay(&self) -> f64 {
        self.spec.prop_delay
    }

    /// Waiting packets, excluding the one in service.
    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    pub fn queued(&self) -> impl Iterator<Item = &Packet> {
        self.in_service.iter().chain(self.queue.iter())
    }

    pub fn waiting(&self) -> impl Iterator<Item = &Packet> {
        self.queue.iter()
    }

    pub fn drops(&self) -> u64 {
        self.drops
    }

    pub fn enqueued(&self) -> u64 {
        self.enqueued
    }

    pub fn departed(&self) -> u64 {
        self.departed
    }

    pub fn is_busy(&self) -> bool {
        self.in_service.is_some()
    }

    fn service_time(&self, pkt: &Packet) -> f64 {
        pkt.size_bits as f64 / self.capacity
    }

    /// Offers a packet to the link at time `now`.
    pub fn enqueue(&mut self, pkt: Packet, now: f64) -> EnqueueOutcome {
        if self.in_service.is_none() {
            let done_at = now + self.service_time(&pkt);
            self.in_service = Some(pkt);
            self.enqueued += 1;
            EnqueueOutcome::Transmitting { done_at }
        } else if self.queue.len() >= self.spec.buffer_packets {
            self.drops += 1;
            EnqueueOutcome::Dropped(pkt)
        } else {
            self.queue.push_back(pkt);
            self.enqueued += 1;
            EnqueueOutcome::Queued
        }
    }

    /// Finishes the current transmission. Returns the departed packet and,
    /// if another packet was waiting, the completion time of its service.
    pub fn complete_transmission(&mut self, now: f64) -> Option<(Packet, Option<f64>)> {
        let done = self.in_service.take()?;
        self.departed += 1;
        let next = self.queue.pop_front().map(|pkt| {
            let done_at = now + self.service_time(&pkt);
            self.in_service = Some(pkt);
            done_at
        });
        Some((done, next))
    }
}
