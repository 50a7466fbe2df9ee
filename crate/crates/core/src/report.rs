//! CSV output of time series and summaries.
//!
//! Numbers are written with Rust's locale-independent formatting; every file
//! starts with a header row.

use std::io::Write;

use serde::Serialize;

use crate::metrics::{Summary, TimeSeries};

#[derive(Serialize)]
struct FlowRow {
    t_s: f64,
    flow_id: u32,
    protocol: &'static str,
    throughput_bps: f64,
    loss_rate: f64,
    queue_pkts: u32,
}

/// One row per window and flow, ordered by time then flow id.
pub fn write_flows_csv<W: Write>(series: &TimeSeries, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n = series.flows.iter().map(|f| f.points.len()).max().unwrap_or(0);
    for k in 0..n {
        for fs in &series.flows {
            if let Some(p) = fs.points.get(k) {
                w.serialize(FlowRow {
                    t_s: p.t,
                    flow_id: fs.flow.0,
                    protocol: fs.protocol.as_str(),
                    throughput_bps: p.throughput_bps,
                    loss_rate: p.loss_rate,
                    queue_pkts: p.queue_pkts,
                })?;
            }
        }
    }
    if n == 0 {
        w.write_record(["t_s", "flow_id", "protocol", "throughput_bps", "loss_rate", "queue_pkts"])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SummaryRow {
    section: &'static str,
    flow_id: Option<u32>,
    protocol: Option<&'static str>,
    start_s: f64,
    end_s: f64,
    mean_bps: Option<f64>,
    p95_bps: Option<f64>,
    loss_fraction: Option<f64>,
    convergence_s: Option<f64>,
    flows: Option<String>,
    jain: Option<f64>,
}

/// `flow` rows carry per-flow metrics over the flow's active span;
/// `interval` rows carry the Jain index of the closed-loop flows over each
/// stationary interval, with the participating flow ids joined by `;`.
pub fn write_summary_csv<W: Write>(summary: &Summary, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for m in &summary.flows {
        w.serialize(SummaryRow {
            section: "flow",
            flow_id: Some(m.flow.0),
            protocol: Some(m.protocol.as_str()),
            start_s: m.start,
            end_s: m.end,
            mean_bps: Some(m.mean_bps),
            p95_bps: Some(m.p95_bps),
            loss_fraction: Some(m.loss_fraction),
            convergence_s: m.convergence_time,
            flows: None,
            jain: None,
        })?;
    }
    for iv in &summary.intervals {
        let ids: Vec<String> = iv.flows.iter().map(|f| f.0.to_string()).collect();
        let mean = if iv.means_bps.is_empty() {
            None
        } else {
            Some(iv.means_bps.iter().sum::<f64>() / iv.means_bps.len() as f64)
        };
        w.serialize(SummaryRow {
            section: "interval",
            flow_id: None,
            protocol: None,
            start_s: iv.interval.start,
            end_s: iv.interval.end,
            mean_bps: mean,
            p95_bps: None,
            loss_fraction: None,
            convergence_s: None,
            flows: Some(ids.join(";")),
            jain: iv.jain,
        })?;
    }
    w.flush()?;
    Ok(())
}
