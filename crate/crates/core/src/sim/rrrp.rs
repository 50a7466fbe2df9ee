//! RRR-controlled sender and receiver.
//!
//! The sender paces data packets evenly at its current input rate whether or
//! not acknowledgments arrive. Every acknowledgment that carries an
//! output-rate estimate resets the input rate through the control law. The
//! receiver acknowledges every data packet with its current estimate.

use serde::{Deserialize, Serialize};

use super::packet::{AckPayload, Packet};
use super::{FlowId, SimError};
use crate::feedback::{next_input_rate, Estimator, FeedbackFunction, RateEstimatorWindow, DEFAULT_ESTIMATOR_WINDOW};
use crate::units::Rate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RrrpConfig {
    pub feedback: FeedbackFunction,
    pub initial_rate: Rate,
    /// Sender ceiling. Defaults to the capacity of the flow's first link.
    #[serde(default)]
    pub c_max: Option<Rate>,
    #[serde(default = "default_window")]
    pub estimator_window: usize,
    #[serde(default)]
    pub estimator: Estimator,
    pub packet_bits: u32,
}

fn default_window() -> usize {
    DEFAULT_ESTIMATOR_WINDOW
}

impl RrrpConfig {
    pub fn new(feedback: FeedbackFunction, initial_rate: Rate, packet_bits: u32) -> Self {
        RrrpConfig {
            feedback,
            initial_rate,
            c_max: None,
            estimator_window: DEFAULT_ESTIMATOR_WINDOW,
            estimator: Estimator::default(),
            packet_bits,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.initial_rate.bps() <= 0.0 {
            return Err(SimError::Config("RRRP initial rate must be positive".into()));
        }
        if self.packet_bits == 0 {
            return Err(SimError::Config("packet size must be positive".into()));
        }
        if self.estimator_window < 2 {
            return Err(SimError::Config("estimator window must be at least 2".into()));
        }
        if let Some(c) = self.c_max {
            if c.bps() <= 0.0 {
                return Err(SimError::Config("c_max must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Smoothing gain of the round-trip estimate used for the rate floor.
const RTT_GAIN: f64 = 0.125;
/// Round-trip estimate before the first sample.
const INITIAL_RTT: f64 = 1.0;

#[derive(Debug, Clone)]
pub struct RrrpSenderState {
    flow: FlowId,
    cfg: RrrpConfig,
    c_max: f64,
    x_in: f64,
    active: bool,
    generation: u64,
    last_send: Option<f64>,
    next_id: u64,
    srtt: Option<f64>,
    pub packets_sent: u64,
    pub packets_acked: u64,
}

impl RrrpSenderState {
    pub fn new(flow: FlowId, cfg: RrrpConfig, default_c_max: Rate) -> Self {
        let c_max = cfg.c_max.unwrap_or(default_c_max).bps();
        RrrpSenderState {
            flow,
            x_in: cfg.initial_rate.bps().min(c_max),
            cfg,
            c_max,
            active: false,
            generation: 0,
            last_send: None,
            next_id: 0,
            srtt: None,
            packets_sent: 0,
            packets_acked: 0,
        }
    }

    pub fn rate(&self) -> f64 {
        self.x_in
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn srtt(&self) -> Option<f64> {
        self.srtt
    }

    fn gap(&self) -> f64 {
        self.cfg.packet_bits as f64 / self.x_in
    }

    /// `P / srtt`: one packet per round trip.
    pub fn rate_floor(&self) -> f64 {
        self.cfg.packet_bits as f64 / self.srtt.unwrap_or(INITIAL_RTT)
    }

    /// Starts (or restarts) the flow at its initial rate. Returns the first
    /// tick time and its generation.
    pub fn start(&mut self, now: f64) -> (f64, u64) {
        self.active = true;
        self.generation += 1;
        self.x_in = self.cfg.initial_rate.bps().min(self.c_max);
        self.last_send = None;
        (now, self.generation)
    }

    pub fn stop(&mut self) {
        self.active = false;
        self.generation += 1;
    }

    /// Handles a pacing tick. Stale ticks (from before a reschedule) return
    /// `None`. Otherwise returns the packet to send and the next tick time.
    pub fn on_tick(&mut self, generation: u64, now: f64) -> Option<(Packet, f64)> {
        if !self.active || generation != self.generation {
            return None;
        }
        let id = self.next_id;
        self.next_id += 1;
        self.packets_sent += 1;
        self.last_send = Some(now);
        let pkt = Packet::data(self.flow, id, id, self.cfg.packet_bits, now);
        Some((pkt, now + self.gap()))
    }

    /// Applies an acknowledgment. When the rate changes, returns the new tick
    /// time and generation; pending ticks of older generations are stale.
    pub fn on_ack(&mut self, ack: &Packet, now: f64) -> Option<(f64, u64)> {
        if !self.active {
            return None;
        }
        let info = ack.ack?;
        self.packets_acked += 1;
        if !info.echo_retransmission {
            let sample = now - info.echo_sent_at;
            if sample > 0.0 {
                self.srtt = Some(match self.srtt {
                    None => sample,
                    Some(s) => s + RTT_GAIN * (sample - s),
                });
            }
        }
        let AckPayload::Rate {
            estimate: Some(x_out),
            ..
        } = info.payload
        else {
            return None;
        };
        let p_t = self.cfg.feedback.target_rrr(x_out);
        let floor = Rate::new(self.rate_floor()).ok()?;
        let ceiling = Rate::new(self.c_max).ok()?;
        let update = next_input_rate(x_out, p_t, ceiling, floor).ok()?;
        let new_rate = update.rate.bps();
        if new_rate == self.x_in {
            return None;
        }
        self.x_in = new_rate;
        self.generation += 1;
        let next = match self.last_send {
            Some(t) => (t + self.gap()).max(now),
            None => now,
        };
        Some((next, self.generation))
    }
}

#[derive(Debug, Clone)]
pub struct RrrpReceiver {
    window: RateEstimatorWindow,
    estimator: Estimator,
    highest_id: u64,
}

impl RrrpReceiver {
    pub fn new(cfg: &RrrpConfig) -> Result<Self, SimError> {
        Ok(RrrpReceiver {
            window: RateEstimatorWindow::new(cfg.estimator_window, cfg.packet_bits as f64)
                .map_err(|e| SimError::Config(e.to_string()))?,
            estimator: cfg.estimator,
            highest_id: 0,
        })
    }

    pub fn reset(&mut self) {
        self.window.clear();
        self.highest_id = 0;
    }

    pub fn window(&self) -> &RateEstimatorWindow {
        &self.window
    }

    /// Records a data arrival and builds its acknowledgment.
    pub fn on_data(&mut self, pkt: &Packet, now: f64, ack_bits: u32) -> Packet {
        // Arrivals are processed in time order, so this cannot fail.
        let _ = self.window.record_packet(now, pkt.sent_at, pkt.id);
        self.highest_id = self.highest_id.max(pkt.id);
        Packet::ack_for(
            pkt,
            AckPayload::Rate {
                estimate: self.window.estimate_with(self.estimator),
                highest_id: self.highest_id,
            },
            ack_bits,
            now,
        )
    }
}
