//! TCP Reno sender and cumulative-ack receiver.
//!
//! Slow start, congestion avoidance, fast retransmit on the third duplicate
//! ack with Reno fast recovery (window inflation, exit on the first new ack),
//! and retransmission timeout with go-back-N and exponential backoff. One ack
//! per data packet, unlimited receiver window, always data to send.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::packet::{AckPayload, Packet};
use super::FlowId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenoConfig {
    pub packet_bits: u32,
    #[serde(default = "default_ssthresh")]
    pub initial_ssthresh: f64,
}

fn default_ssthresh() -> f64 {
    1e9
}

impl RenoConfig {
    pub fn new(packet_bits: u32) -> Self {
        RenoConfig {
            packet_bits,
            initial_ssthresh: default_ssthresh(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenoPhase {
    SlowStart,
    CongestionAvoidance,
    FastRecovery,
}

const MIN_RTO: f64 = 1.0;
const MAX_RTO: f64 = 60.0;
const MAX_BACKOFF: f64 = 64.0;
const DUP_ACK_THRESHOLD: u32 = 3;

/// What the engine should do with the retransmission timer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimerCmd {
    Keep,
    Arm { deadline: f64, generation: u64 },
    Cancel,
}

#[derive(Debug, Clone)]
pub struct RenoState {
    flow: FlowId,
    packet_bits: u32,
    /// Congestion window, packets.
    pub cwnd: f64,
    pub ssthresh: f64,
    pub phase: RenoPhase,
    pub dup_acks: u32,
    /// Oldest unacknowledged sequence number.
    snd_una: u64,
    /// Next sequence number to transmit.
    next_seq: u64,
    /// One past the highest sequence number ever transmitted.
    high_sent: u64,
    next_id: u64,
    srtt: Option<f64>,
    rttvar: f64,
    backoff: f64,
    timer_generation: u64,
    active: bool,
    pub packets_sent: u64,
    pub retransmissions: u64,
    pub timeouts: u64,
    pub fast_retransmits: u64,
}

impl RenoState {
    pub fn new(flow: FlowId, cfg: RenoConfig) -> Self {
        RenoState {
            flow,
            packet_bits: cfg.packet_bits,
            cwnd: 1.0,
            ssthresh: cfg.initial_ssthresh.max(2.0),
            phase: RenoPhase::SlowStart,
            dup_acks: 0,
            snd_una: 0,
            next_seq: 0,
            high_sent: 0,
            next_id: 0,
            srtt: None,
            rttvar: 0.0,
            backoff: 1.0,
            timer_generation: 0,
            active: false,
            packets_sent: 0,
            retransmissions: 0,
            timeouts: 0,
            fast_retransmits: 0,
        }
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    pub fn srtt(&self) -> Option<f64> {
        self.srtt
    }

    pub fn outstanding(&self) -> u64 {
        self.high_sent - self.snd_una
    }

    pub fn snd_una(&self) -> u64 {
        self.snd_una
    }

    /// `cwnd * P / srtt`, zero before the first round-trip sample.
    pub fn rate_estimate(&self) -> f64 {
        self.srtt
            .map(|s| self.cwnd * self.packet_bits as f64 / s)
            .unwrap_or(0.0)
    }

    pub fn rto(&self) -> f64 {
        let base = match self.srtt {
            Some(s) => (s + 4.0 * self.rttvar).max(MIN_RTO),
            None => MIN_RTO,
        };
        (base * self.backoff).min(MAX_RTO)
    }

    fn arm(&mut self, now: f64) -> TimerCmd {
        self.timer_generation += 1;
        TimerCmd::Arm {
            deadline: now + self.rto(),
            generation: self.timer_generation,
        }
    }

    fn transmit(&mut self, seq: u64, now: f64, out: &mut Vec<Packet>) {
        let id = self.next_id;
        self.next_id += 1;
        let mut pkt = Packet::data(self.flow, id, seq, self.packet_bits, now);
        pkt.retransmission = seq < self.high_sent;
        if pkt.retransmission {
            self.retransmissions += 1;
        }
        self.high_sent = self.high_sent.max(seq + 1);
        self.packets_sent += 1;
        out.push(pkt);
    }

    fn fill_window(&mut self, now: f64, out: &mut Vec<Packet>) {
        let window = self.cwnd.floor().max(1.0) as u64;
        while self.next_seq - self.snd_una < window {
            let seq = self.next_seq;
            self.next_seq += 1;
            self.transmit(seq, now, out);
        }
    }

    fn sample_rtt(&mut self, r: f64) {
        match self.srtt {
            None => {
                self.srtt = Some(r);
                self.rttvar = r / 2.0;
            }
            Some(s) => {
                self.rttvar = 0.75 * self.rttvar + 0.25 * (s - r).abs();
                self.srtt = Some(0.875 * s + 0.125 * r);
            }
        }
    }

    fn update_phase(&mut self) {
        if self.phase != RenoPhase::FastRecovery {
            self.phase = if self.cwnd < self.ssthresh {
                RenoPhase::SlowStart
            } else {
                RenoPhase::CongestionAvoidance
            };
        }
    }

    pub fn start(&mut self, now: f64, out: &mut Vec<Packet>) -> TimerCmd {
        self.active = true;
        self.fill_window(now, out);
        self.arm(now)
    }

    pub fn stop(&mut self) -> TimerCmd {
        self.active = false;
        self.timer_generation += 1;
        TimerCmd::Cancel
    }

    pub fn on_ack(&mut self, ack: &Packet, now: f64, out: &mut Vec<Packet>) -> TimerCmd {
        if !self.active {
            return TimerCmd::Keep;
        }
        let Some(info) = ack.ack else {
            return TimerCmd::Keep;
        };
        let AckPayload::Cumulative { next_expected } = info.payload else {
            return TimerCmd::Keep;
        };

        let mut timer = TimerCmd::Keep;
        if next_expected > self.snd_una {
            if !info.echo_retransmission {
                self.sample_rtt(now - info.echo_sent_at);
            }
            if self.phase == RenoPhase::FastRecovery {
                self.cwnd = self.ssthresh;
                self.phase = RenoPhase::CongestionAvoidance;
            } else if self.cwnd < self.ssthresh {
                self.cwnd += 1.0;
            } else {
                self.cwnd += 1.0 / self.cwnd;
            }
            self.update_phase();
            self.snd_una = next_expected;
            self.next_seq = self.next_seq.max(self.snd_una);
            self.dup_acks = 0;
            self.backoff = 1.0;
            timer = if self.snd_una < self.high_sent {
                self.arm(now)
            } else {
                self.timer_generation += 1;
                TimerCmd::Cancel
            };
        } else if next_expected == self.snd_una && self.high_sent > self.snd_una {
            self.dup_acks += 1;
            if self.phase == RenoPhase::FastRecovery {
                self.cwnd += 1.0;
            } else if self.dup_acks == DUP_ACK_THRESHOLD {
                let flight = self.outstanding() as f64;
                self.ssthresh = (flight / 2.0).max(2.0);
                self.cwnd = self.ssthresh + DUP_ACK_THRESHOLD as f64;
                self.phase = RenoPhase::FastRecovery;
                self.fast_retransmits += 1;
                let seq = self.snd_una;
                self.transmit(seq, now, out);
                timer = self.arm(now);
            }
        }
        self.fill_window(now, out);
        if matches!(timer, TimerCmd::Cancel) && self.outstanding() > 0 {
            timer = self.arm(now);
        }
        timer
    }

    pub fn on_timeout(&mut self, generation: u64, now: f64, out: &mut Vec<Packet>) -> TimerCmd {
        if !self.active || generation != self.timer_generation || self.outstanding() == 0 {
            return TimerCmd::Keep;
        }
        self.timeouts += 1;
        let flight = self.outstanding() as f64;
        self.ssthresh = (flight / 2.0).max(2.0);
        self.cwnd = 1.0;
        self.phase = RenoPhase::SlowStart;
        self.dup_acks = 0;
        self.next_seq = self.snd_una;
        self.backoff = (self.backoff * 2.0).min(MAX_BACKOFF);
        self.fill_window(now, out);
        self.arm(now)
    }
}

/// Cumulative-ack receiver with an out-of-order buffer.
#[derive(Debug, Clone, Default)]
pub struct RenoReceiver {
    next_expected: u64,
    out_of_order: BTreeSet<u64>,
}

impl RenoReceiver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn next_expected(&self) -> u64 {
        self.next_expected
    }

    pub fn on_data(&mut self, pkt: &Packet, now: f64, ack_bits: u32) -> Packet {
        if pkt.seq == self.next_expected {
            self.next_expected += 1;
            while self.out_of_order.remove(&self.next_expected) {
                self.next_expected += 1;
            }
        } else if pkt.seq > self.next_expected {
            self.out_of_order.insert(pkt.seq);
        }
        Packet::ack_for(
            pkt,
            AckPayload::Cumulative {
                next_expected: self.next_expected,
            },
            ack_bits,
            now,
        )
    }
}
