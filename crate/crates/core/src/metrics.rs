//! Metrics over simulation logs: windowed throughput and loss, interval
//! statistics, fairness and smoothness.

use serde::Serialize;
use thiserror::Error;

use crate::scenario::{Interval, ScenarioSpec};
use crate::sim::{EventLog, FlowId, Protocol, TraceKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("window must be positive and finite, got {0}")]
    BadWindow(f64),
    #[error("no values to summarise")]
    Empty,
    #[error("fairness index is undefined when every share is zero")]
    AllZero,
    #[error("share {0} is negative or not finite")]
    BadShare(f64),
    #[error("unknown flow {0}")]
    UnknownFlow(u32),
}

pub type Result<T> = std::result::Result<T, MetricsError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesPoint {
    /// Window start, seconds.
    pub t: f64,
    pub throughput_bps: f64,
    /// Dropped over sent, for packets sent in the window.
    pub loss_rate: f64,
    /// Flow packets at the bottleneck at the end of the window.
    pub queue_pkts: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSeries {
    pub flow: FlowId,
    pub protocol: Protocol,
    pub points: Vec<SeriesPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub window: f64,
    pub flows: Vec<FlowSeries>,
}

impl TimeSeries {
    pub fn flow(&self, id: FlowId) -> Option<&FlowSeries> {
        self.flows.get(id.index())
    }
}

fn bin(t: f64, window: f64, n: usize) -> Option<usize> {
    if t < 0.0 {
        return None;
    }
    let k = (t / window) as usize;
    (k < n).then_some(k)
}

/// Per-flow windowed series over `[0, t_end)`. A trailing partial window is
/// kept and divided by the full window length, so the series integrates to
/// the delivered bits.
pub fn throughput_series(log: &EventLog, window: f64) -> Result<TimeSeries> {
    if !(window.is_finite() && window > 0.0) {
        return Err(MetricsError::BadWindow(window));
    }
    let n = ((log.t_end / window) - 1e-9).ceil().max(0.0) as usize;
    let nf = log.flows.len();
    let mut bits = vec![vec![0.0f64; n]; nf];
    let mut sent = vec![vec![0u64; n]; nf];
    let mut dropped = vec![vec![0u64; n]; nf];
    for r in &log.records {
        let f = r.flow.index();
        match r.kind {
            TraceKind::Delivered => {
                if let Some(k) = bin(r.time, window, n) {
                    bits[f][k] += r.size_bits as f64;
                }
            }
            TraceKind::Sent => {
                if let Some(k) = bin(r.time, window, n) {
                    sent[f][k] += 1;
                }
            }
            TraceKind::Dropped => {
                if let Some(k) = bin(r.sent_at, window, n) {
                    dropped[f][k] += 1;
                }
            }
        }
    }
    let queue_at = |f: usize, t: f64| -> u32 {
        let idx = log.samples.partition_point(|s| s.time <= t + 1e-9);
        idx.checked_sub(1).map_or(0, |i| log.samples[i].flow_queue[f])
    };
    let flows = log
        .flows
        .iter()
        .enumerate()
        .map(|(f, info)| FlowSeries {
            flow: info.id,
            protocol: info.protocol,
            points: (0..n)
                .map(|k| SeriesPoint {
                    t: k as f64 * window,
                    throughput_bps: bits[f][k] / window,
                    loss_rate: if sent[f][k] == 0 {
                        0.0
                    } else {
                        dropped[f][k] as f64 / sent[f][k] as f64
                    },
                    queue_pkts: queue_at(f, ((k + 1) as f64 * window).min(log.t_end)),
                })
                .collect(),
        })
        .collect();
    Ok(TimeSeries { window, flows })
}

/// Packet counts of one flow over an interval. Drops are attributed to the
/// interval in which the dropped packet was sent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct IntervalStats {
    pub sent: u64,
    pub dropped: u64,
    pub delivered: u64,
    pub sent_bits: f64,
    pub delivered_bits: f64,
    pub duration: f64,
}

impl IntervalStats {
    pub fn throughput_bps(&self) -> f64 {
        self.delivered_bits / self.duration
    }

    pub fn input_bps(&self) -> f64 {
        self.sent_bits / self.duration
    }

    /// Measured relative rate reduction: dropped over sent.
    pub fn loss_rate(&self) -> f64 {
        if self.sent == 0 {
            0.0
        } else {
            self.dropped as f64 / self.sent as f64
        }
    }
}

pub fn interval_stats(log: &EventLog, flow: FlowId, iv: Interval) -> Result<IntervalStats> {
    if log.flows.get(flow.index()).is_none() {
        return Err(MetricsError::UnknownFlow(flow.0));
    }
    if iv.len().is_nan() || iv.len() <= 0.0 {
        return Err(MetricsError::BadWindow(iv.len()));
    }
    let mut s = IntervalStats {
        duration: iv.len(),
        ..IntervalStats::default()
    };
    for r in log.flow_records(flow) {
        let bits = r.size_bits as f64;
        match r.kind {
            TraceKind::Sent if iv.contains(r.time) => {
                s.sent += 1;
                s.sent_bits += bits;
            }
            TraceKind::Dropped if iv.contains(r.sent_at) => s.dropped += 1,
            TraceKind::Delivered if iv.contains(r.time) => {
                s.delivered += 1;
                s.delivered_bits += bits;
            }
            _ => {}
        }
    }
    Ok(s)
}

/// Sampled sending rate of a flow as `(t, bps)` pairs inside `iv`.
pub fn send_rate_series(log: &EventLog, flow: FlowId, iv: Interval) -> Vec<(f64, f64)> {
    log.samples
        .iter()
        .filter(|s| iv.contains(s.time))
        .filter_map(|s| s.send_rate.get(flow.index()).map(|&r| (s.time, r)))
        .collect()
}

/// Sampled bottleneck occupancy of a flow inside `iv`.
pub fn queue_series(log: &EventLog, flow: FlowId, iv: Interval) -> Vec<f64> {
    log.samples
        .iter()
        .filter(|s| iv.contains(s.time))
        .filter_map(|s| s.flow_queue.get(flow.index()).map(|&q| q as f64))
        .collect()
}

pub fn mean(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Population standard deviation.
pub fn std_dev(xs: &[f64]) -> Result<f64> {
    let m = mean(xs)?;
    Ok((xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt())
}

pub fn coefficient_of_variation(xs: &[f64]) -> Result<f64> {
    let m = mean(xs)?;
    if m == 0.0 {
        return Err(MetricsError::AllZero);
    }
    Ok(std_dev(xs)? / m)
}

/// Nearest-rank percentile, `q` in [0, 1].
pub fn percentile(xs: &[f64], q: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = (q.clamp(0.0, 1.0) * v.len() as f64).ceil() as usize;
    Ok(v[rank.saturating_sub(1)])
}

/// `(sum x)^2 / (n * sum x^2)`.
pub fn jain_index(shares: &[f64]) -> Result<f64> {
    if shares.is_empty() {
        return Err(MetricsError::Empty);
    }
    if let Some(&bad) = shares.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(MetricsError::BadShare(bad));
    }
    let sum: f64 = shares.iter().sum();
    let sq: f64 = shares.iter().map(|x| x * x).sum();
    if sq == 0.0 {
        return Err(MetricsError::AllZero);
    }
    Ok(sum * sum / (shares.len() as f64 * sq))
}

/// Relative band and run length of the convergence-time definition.
pub const CONVERGENCE_BAND: f64 = 0.1;
pub const CONVERGENCE_WINDOWS: usize = 5;
/// Length of the tail whose mean is the convergence target.
pub const CONVERGENCE_TAIL: f64 = 20.0;

/// Start of the first run of [`CONVERGENCE_WINDOWS`] consecutive windows
/// whose throughput stays within [`CONVERGENCE_BAND`] of the mean over the
/// last [`CONVERGENCE_TAIL`] seconds of `points`.
pub fn convergence_time(points: &[SeriesPoint], window: f64) -> Option<f64> {
    let end = points.last()?.t + window;
    let tail: Vec<f64> = points
        .iter()
        .filter(|p| p.t >= end - CONVERGENCE_TAIL - 1e-9)
        .map(|p| p.throughput_bps)
        .collect();
    let target = mean(&tail).ok()?;
    let ok: Vec<bool> = points
        .iter()
        .map(|p| (p.throughput_bps - target).abs() <= CONVERGENCE_BAND * target)
        .collect();
    ok.windows(CONVERGENCE_WINDOWS)
        .position(|w| w.iter().all(|&b| b))
        .map(|i| points[i].t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowMetrics {
    pub flow: FlowId,
    pub protocol: Protocol,
    pub start: f64,
    pub end: f64,
    pub mean_bps: f64,
    pub p95_bps: f64,
    pub loss_fraction: f64,
    pub convergence_time: Option<f64>,
}

/// Metrics of `flow` over the whole windows lying inside `iv`.
pub fn flow_metrics(log: &EventLog, series: &TimeSeries, flow: FlowId, iv: Interval) -> Result<FlowMetrics> {
    let fs = series.flow(flow).ok_or(MetricsError::UnknownFlow(flow.0))?;
    let pts: Vec<SeriesPoint> = fs
        .points
        .iter()
        .filter(|p| p.t >= iv.start - 1e-9 && p.t + series.window <= iv.end + 1e-9)
        .copied()
        .collect();
    let tput: Vec<f64> = pts.iter().map(|p| p.throughput_bps).collect();
    let stats = interval_stats(log, flow, iv)?;
    Ok(FlowMetrics {
        flow,
        protocol: fs.protocol,
        start: iv.start,
        end: iv.end,
        mean_bps: mean(&tput)?,
        p95_bps: percentile(&tput, 0.95)?,
        loss_fraction: stats.loss_rate(),
        convergence_time: convergence_time(&pts, series.window),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalFairness {
    pub interval: Interval,
    pub flows: Vec<FlowId>,
    pub means_bps: Vec<f64>,
    pub jain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub flows: Vec<FlowMetrics>,
    pub intervals: Vec<IntervalFairness>,
}

/// Per-flow metrics over each flow's active span and the Jain index of the
/// closed-loop flows active throughout each stationary interval.
pub fn summarize(spec: &ScenarioSpec, log: &EventLog, series: &TimeSeries) -> Result<Summary> {
    let mut flows = Vec::new();
    for (i, f) in spec.flows.iter().enumerate() {
        let iv = Interval::new(f.start, f.stop.unwrap_or(spec.duration));
        if iv.len() >= series.window {
            flows.push(flow_metrics(log, series, FlowId(i as u32), iv)?);
        }
    }
    let mut intervals = Vec::new();
    for iv in &spec.stationary {
        let ids: Vec<FlowId> = spec
            .flows
            .iter()
            .enumerate()
            .filter(|(_, f)| f.kind.protocol().is_closed_loop() && f.active_during(iv))
            .map(|(i, _)| FlowId(i as u32))
            .collect();
        let means = ids
            .iter()
            .map(|&id| interval_stats(log, id, *iv).map(|s| s.throughput_bps()))
            .collect::<Result<Vec<_>>>()?;
        intervals.push(IntervalFairness {
            interval: *iv,
            jain: jain_index(&means).ok(),
            flows: ids,
            means_bps: means,
        });
    }
    Ok(Summary { flows, intervals })
}
