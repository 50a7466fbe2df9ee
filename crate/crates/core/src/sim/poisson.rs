//! Poisson background traffic.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::packet::Packet;
use super::FlowId;
use crate::units::Rate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonConfig {
    pub rate: Rate,
    pub packet_bits: u32,
}

/// Fixed-size packets with exponential inter-arrival times of mean
/// `packet_bits / rate`.
#[derive(Debug, Clone)]
pub struct PoissonSource {
    flow: FlowId,
    rate: f64,
    packet_bits: u32,
    rng: ChaCha8Rng,
    active: bool,
    generation: u64,
    next_id: u64,
    pub packets_sent: u64,
}

impl PoissonSource {
    /// Each source draws from its own ChaCha8 stream, selected by flow id.
    pub fn new(flow: FlowId, cfg: PoissonConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(flow.0 as u64 + 1);
        PoissonSource {
            flow,
            rate: cfg.rate.bps(),
            packet_bits: cfg.packet_bits,
            rng,
            active: false,
            generation: 0,
            next_id: 0,
            packets_sent: 0,
        }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    fn draw_gap(&mut self) -> f64 {
        let e: f64 = Exp1.sample(&mut self.rng);
        e * self.packet_bits as f64 / self.rate
    }

    fn schedule(&mut self, now: f64) -> Option<(f64, u64)> {
        if self.active && self.rate > 0.0 {
            self.generation += 1;
            Some((now + self.draw_gap(), self.generation))
        } else {
            self.generation += 1;
            None
        }
    }

    pub fn start(&mut self, now: f64) -> Option<(f64, u64)> {
        self.active = true;
        self.schedule(now)
    }

    pub fn stop(&mut self) {
        self.active = false;
        self.generation += 1;
    }

    /// Changes the mean rate. The exponential clock is memoryless, so the
    /// pending arrival is simply redrawn.
    pub fn set_rate(&mut self, rate: Rate, now: f64) -> Option<(f64, u64)> {
        self.rate = rate.bps();
        self.schedule(now)
    }

    /// Emits a packet for a current-generation arrival and schedules the next.
    pub fn on_arrival(&mut self, generation: u64, now: f64) -> Option<(Packet, f64)> {
        if !self.active || generation != self.generation || self.rate <= 0.0 {
            return None;
        }
        let id = self.next_id;
        self.next_id += 1;
        self.packets_sent += 1;
        let pkt = Packet::data(self.flow, id, id, self.packet_bits, now);
        Some((pkt, now + self.draw_gap()))
    }
}
