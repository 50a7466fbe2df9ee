//! The RRR control law: target-reduction feedback functions, the input-rate
//! update, the growth exponent and the receiver-side output-rate estimator.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{positive, ModelError, Result};
use crate::fluid;
use crate::units::{Probability, Rate};

/// Largest target reduction the rate update will act on. A target of 1 would
/// make the update divide by zero, so the controller multiplies the measured
/// output rate by at most `1 / (1 - P_TARGET_MAX) = 100`.
pub const P_TARGET_MAX: f64 = 0.99;

/// Target relative rate reduction as a function of the measured output rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", try_from = "RawFeedback")]
pub enum FeedbackFunction {
    /// Constant target.
    Fixed { p_fix: Probability },
    /// Target falls linearly from `p_tlim` at zero rate to zero at `x_tlim`.
    Linear { p_tlim: Probability, x_tlim: Rate },
    /// `min((x_t / x_out)^2, 1)`, mirroring the TCP loss/throughput relation.
    TcpLike { x_t: Rate },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum RawFeedback {
    Fixed { p_fix: Probability },
    Linear { p_tlim: Probability, x_tlim: Rate },
    TcpLike { x_t: Rate },
}

impl TryFrom<RawFeedback> for FeedbackFunction {
    type Error = ModelError;

    fn try_from(raw: RawFeedback) -> Result<Self> {
        match raw {
            RawFeedback::Fixed { p_fix } => FeedbackFunction::fixed(p_fix.value()),
            RawFeedback::Linear { p_tlim, x_tlim } => {
                FeedbackFunction::linear(p_tlim.value(), x_tlim.bps())
            }
            RawFeedback::TcpLike { x_t } => FeedbackFunction::tcp_like(x_t.bps()),
        }
    }
}

fn below_one(what: &'static str, p: f64) -> Result<Probability> {
    let p = Probability::new(p)?;
    if p.value() >= 1.0 {
        return Err(ModelError::InvalidParameter(format!(
            "{what} must be < 1, got {}",
            p.value()
        )));
    }
    Ok(p)
}

impl FeedbackFunction {
    pub fn fixed(p_fix: f64) -> Result<Self> {
        Ok(FeedbackFunction::Fixed {
            p_fix: below_one("p_fix", p_fix)?,
        })
    }

    pub fn linear(p_tlim: f64, x_tlim_bps: f64) -> Result<Self> {
        Ok(FeedbackFunction::Linear {
            p_tlim: below_one("p_tlim", p_tlim)?,
            x_tlim: Rate::new(positive("x_tlim", x_tlim_bps)?)?,
        })
    }

    pub fn tcp_like(x_t_bps: f64) -> Result<Self> {
        Ok(FeedbackFunction::TcpLike {
            x_t: Rate::new(positive("x_t", x_t_bps)?)?,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            FeedbackFunction::Fixed { .. } => "fixed",
            FeedbackFunction::Linear { .. } => "linear",
            FeedbackFunction::TcpLike { .. } => "tcp-like",
        }
    }

    /// Target reduction for a measured output rate. Always in `[0, 1]`.
    pub fn target_rrr(&self, x_out: Rate) -> Probability {
        match *self {
            FeedbackFunction::Fixed { p_fix } => p_fix,
            FeedbackFunction::Linear { p_tlim, x_tlim } => {
                let p = p_tlim.value() * (1.0 - x_out.bps() / x_tlim.bps());
                Probability::saturating(p.max(0.0))
            }
            FeedbackFunction::TcpLike { x_t } => {
                if x_out.bps() <= x_t.bps() {
                    Probability::ONE
                } else {
                    let r = x_t.bps() / x_out.bps();
                    Probability::saturating(r * r)
                }
            }
        }
    }
}

/// Free-function form of [`FeedbackFunction::target_rrr`].
pub fn target_rrr(f: &FeedbackFunction, x_out: Rate) -> Probability {
    f.target_rrr(x_out)
}

/// Result of one application of the rate update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateUpdate {
    pub rate: Rate,
    /// The target reduction was at or above [`P_TARGET_MAX`] and was capped.
    pub target_capped: bool,
    /// The result was clamped to `c_max`.
    pub at_ceiling: bool,
    /// The result was clamped to `x_floor`.
    pub at_floor: bool,
}

/// `clamp(x_out / (1 - p_t), x_floor, c_max)` with `p_t` capped at
/// [`P_TARGET_MAX`].
pub fn next_input_rate(x_out: Rate, p_t: Probability, c_max: Rate, x_floor: Rate) -> Result<RateUpdate> {
    positive("c_max", c_max.bps())?;
    let target_capped = p_t.value() >= P_TARGET_MAX;
    let p = p_t.value().min(P_TARGET_MAX);
    let raw = x_out.bps() / (1.0 - p);
    let (rate, at_ceiling, at_floor) = if raw > c_max.bps() {
        (c_max.bps(), true, false)
    } else if raw < x_floor.bps() {
        (x_floor.bps().min(c_max.bps()), false, true)
    } else {
        (raw, false, false)
    };
    Ok(RateUpdate {
        rate: Rate::new(rate)?,
        target_capped,
        at_ceiling,
        at_floor,
    })
}

/// Exponent of the per-round-trip multiplicative update,
/// `ln((1 - p_hat) / (1 - p_t)) / rtt`, in 1/s.
pub fn growth_exponent(p_hat: Probability, p_t: Probability, rtt: f64) -> Result<f64> {
    let rtt = positive("rtt", rtt)?;
    for (what, p) in [("p_hat", p_hat), ("p_t", p_t)] {
        if p.value() >= 1.0 {
            return Err(ModelError::InvalidParameter(format!("{what} must be < 1")));
        }
    }
    Ok((p_hat.complement().ln() - p_t.complement().ln()) / rtt)
}

/// One round trip of the macroscopic loop on a single link with constant cross
/// traffic: the flow sends `x_in`, observes `x_out` from the fluid link model,
/// and resets its input rate from the control law.
pub fn macroscopic_step(f: &FeedbackFunction, x_in: Rate, x_c: Rate, capacity: Rate) -> Result<Rate> {
    let x_out = fluid::link_output_rate(x_in, x_c, capacity)?;
    let ceiling = Rate::new(f64::MAX)?;
    Ok(next_input_rate(x_out, f.target_rrr(x_out), ceiling, Rate::ZERO)?.rate)
}

/// Iterates [`macroscopic_step`] until successive input rates agree to
/// relative tolerance `tol`. Returns the fixed point and the iteration count.
pub fn iterate_to_fixed_point(
    f: &FeedbackFunction,
    x0: Rate,
    x_c: Rate,
    capacity: Rate,
    tol: f64,
    max_iter: usize,
) -> Result<(Rate, usize)> {
    let mut x = x0;
    for i in 1..=max_iter {
        let next = macroscopic_step(f, x, x_c, capacity)?;
        if (next.bps() - x.bps()).abs() <= tol * next.bps().max(f64::MIN_POSITIVE) {
            return Ok((next, i));
        }
        x = next;
    }
    Err(ModelError::NoConvergence {
        iterations: max_iter,
    })
}

/// Sliding window of data-packet arrival times at a receiver.
///
/// The estimate over the retained arrivals is `(k - 1) * P / (t_last - t_first)`.
/// Arrivals may also carry the packet's send time and sender sequence id,
/// which the sender-clock estimate uses.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimatorWindow {
    window: usize,
    packet_bits: f64,
    arrivals: VecDeque<Arrival>,
    first_id: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Arrival {
    at: f64,
    sent: f64,
    id: u64,
}

/// Default number of consecutive packets averaged by the estimator.
pub const DEFAULT_ESTIMATOR_WINDOW: usize = 8;

impl RateEstimatorWindow {
    pub fn new(window: usize, packet_bits: f64) -> Result<Self> {
        if window < 2 {
            return Err(ModelError::InvalidParameter(format!(
                "estimator window must hold at least 2 packets, got {window}"
            )));
        }
        positive("packet size", packet_bits)?;
        Ok(RateEstimatorWindow {
            window,
            packet_bits,
            arrivals: VecDeque::with_capacity(window),
            first_id: None,
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn len(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrivals.is_empty()
    }

    pub fn clear(&mut self) {
        self.arrivals.clear();
        self.first_id = None;
    }

    /// Records an arrival. Timestamps must not go backwards.
    pub fn record(&mut self, t: f64) -> Result<()> {
        let id = self.arrivals.back().map_or(0, |a| a.id + 1);
        self.record_packet(t, t, id)
    }

    /// Records the arrival at `t` of packet `id` sent at `sent`. Ids must
    /// increase.
    pub fn record_packet(&mut self, t: f64, sent: f64, id: u64) -> Result<()> {
        crate::error::finite("arrival time", t)?;
        crate::error::finite("send time", sent)?;
        if let Some(last) = self.arrivals.back() {
            if t < last.at {
                return Err(ModelError::InvalidParameter(format!(
                    "arrival time {t} precedes previous arrival {}",
                    last.at
                )));
            }
            if id <= last.id {
                return Err(ModelError::InvalidParameter(format!(
                    "packet id {id} does not follow previous id {}",
                    last.id
                )));
            }
        }
        if self.arrivals.len() == self.window {
            self.arrivals.pop_front();
        }
        self.first_id.get_or_insert(id);
        self.arrivals.push_back(Arrival { at: t, sent, id });
        Ok(())
    }

    /// Output-rate estimate, or `None` while fewer than two arrivals span a
    /// positive interval.
    pub fn estimate(&self) -> Option<Rate> {
        let k = self.arrivals.len();
        if k < 2 {
            return None;
        }
        let span = self.arrivals[k - 1].at - self.arrivals[0].at;
        if span <= 0.0 {
            return None;
        }
        Rate::new((k - 1) as f64 * self.packet_bits / span).ok()
    }

    /// Output rate on the sender's time base: the fraction of the last `n`
    /// sequence ids that arrived, times the sending rate over those ids.
    ///
    /// Both factors are free of receive-side spacing jitter and the delivered
    /// fraction enters linearly. Falls back to [`estimate`] when the send
    /// times give no span.
    ///
    /// [`estimate`]: Self::estimate
    pub fn estimate_send_clock(&self) -> Option<Rate> {
        if self.arrivals.len() < 2 {
            return None;
        }
        let last = *self.arrivals.back()?;
        let lowest = self.first_id.unwrap_or(last.id);
        let lo = last.id.saturating_sub(self.window as u64 - 1).max(lowest);
        let mut in_range = self.arrivals.iter().filter(|a| a.id >= lo);
        let first = *in_range.next()?;
        let received = (1 + in_range.count()) as f64;
        if last.id == first.id || last.sent <= first.sent {
            return self.estimate();
        }
        let send_gap = (last.sent - first.sent) / (last.id - first.id) as f64;
        let ids = (last.id - lo + 1) as f64;
        Rate::new(received / ids * self.packet_bits / send_gap).ok()
    }

    pub fn estimate_with(&self, kind: Estimator) -> Option<Rate> {
        match kind {
            Estimator::Spacing => self.estimate(),
            Estimator::SendClock => self.estimate_send_clock(),
        }
    }
}

/// Output-rate estimator used by a receiver.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// `(k - 1) * P / (t_last - t_first)`.
    #[default]
    Spacing,
    /// [`RateEstimatorWindow::estimate_send_clock`].
    SendClock,
}

/// Free-function form of [`RateEstimatorWindow::estimate`].
pub fn estimate_output_rate(w: &RateEstimatorWindow) -> Option<Rate> {
    w.estimate()
}
