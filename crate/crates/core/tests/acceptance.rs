//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if a criterion fails that is not listed in `KNOWN_FAILURES`.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rrr_core::feedback::growth_exponent;
use rrr_core::fluid::{compose_path_rrr, link_output_rate, path_output_rate, relative_rate_reduction};
use rrr_core::metrics::{
    coefficient_of_variation, convergence_time, interval_stats, jain_index, queue_series, send_rate_series, std_dev,
    summarize, throughput_series,
};
use rrr_core::operating_point::{solve_operating_point, square_law_closed_form, tcp_loss_from_rate};
use rrr_core::report::{write_flows_csv, write_summary_csv};
use rrr_core::scenario::{
    by_name, fig3, fig4, fig6, switch, Fig3Variant, Interval, ScenarioFlow, ScenarioSpec, SwitchDirection,
    SwitchProtocol, SWITCH_X_T_MBPS,
};
use rrr_core::sim::{EventLog, FlowId, FlowKind, LinkSpec, PoissonConfig};
use rrr_core::{run_scenario, FeedbackFunction, Probability, Rate, TcpFluidCurve};

/// Criteria that fail at their stated tolerances. The README explains why.
const KNOWN_FAILURES: &[u32] = &[6];

struct Outcome {
    pass: bool,
    detail: String,
}

fn mbps(v: f64) -> Rate {
    Rate::from_mbps(v).unwrap()
}

fn prob(v: f64) -> Probability {
    Probability::new(v).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn run(spec: &ScenarioSpec) -> EventLog {
    run_scenario(spec, false).unwrap_or_else(|e| panic!("{}: {e}", spec.name))
}

fn c1_fluid_algebra() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x = mbps(rng.gen_range(1e-3..1e3));
        let n = rng.gen_range(1..=10);
        let ps: Vec<Probability> = (0..n).map(|_| prob(rng.gen_range(0.0..1.0))).collect();
        let direct = relative_rate_reduction(x, path_output_rate(x, &ps).unwrap()).unwrap().value();
        let composed = compose_path_rrr(&ps).unwrap().value();
        worst = worst.max(rel(direct, composed));
    }
    let elapsed = start.elapsed().as_secs_f64();
    Outcome {
        pass: worst <= 1e-12 && elapsed < 1.0,
        detail: format!("1000 draws, worst relative error {worst:.2e}, {elapsed:.3} s"),
    }
}

fn c2_operating_point() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_x, mut worst_res) = (0.0f64, 0.0f64);
    let mut draws = 0;
    while draws < 100 {
        let curve = TcpFluidCurve::new(rng.gen_range(1.0..=2.0), rng.gen_range(1e3..2e4), rng.gen_range(0.005..0.5)).unwrap();
        let x_t = mbps(rng.gen_range(0.05..5.0));
        let c = mbps(rng.gen_range(1.0..1000.0));
        let Ok(closed) = square_law_closed_form(&curve, x_t, c) else {
            continue;
        };
        draws += 1;
        let fb = FeedbackFunction::tcp_like(x_t.bps()).unwrap();
        let op = solve_operating_point(&curve, &fb, c).unwrap();
        worst_x = worst_x.max(rel(op.x_tcp.bps(), closed.x_tcp.bps()));
        let p = op.p_star.value();
        let p_tcp = tcp_loss_from_rate(&curve, op.x_tcp).unwrap().value();
        let p_rrr = fb.target_rrr(op.x_rrrp).value();
        worst_res = worst_res.max(rel(p_tcp, p)).max(rel(p_rrr, p));
    }
    let curve = TcpFluidCurve::new(1.22, 12_000.0, 0.06).unwrap();
    let fb = FeedbackFunction::tcp_like(curve.scale()).unwrap();
    let sym = solve_operating_point(&curve, &fb, mbps(10.0)).unwrap();
    let sym_err = rel(sym.x_tcp.bps(), 5e6);
    Outcome {
        pass: worst_x <= 1e-9 && worst_res < 1e-9 && sym_err <= 1e-9,
        detail: format!(
            "100 draws, worst X* error {worst_x:.2e}, worst residual {worst_res:.2e}; a = x_T gives X* = {:.9} Mbps",
            sym.x_tcp.mbps()
        ),
    }
}

fn c3_fixed_feedback() -> Outcome {
    let spec = fig3(Fig3Variant::Fixed);
    let log = run(&spec);
    let c = spec.bottleneck.capacity;
    let mut pass = true;
    let mut parts = Vec::new();
    for iv in &spec.stationary {
        let s = interval_stats(&log, FlowId(0), *iv).unwrap();
        let p = s.loss_rate();
        let bg = spec.background_at(iv.start);
        let predicted = link_output_rate(Rate::new(s.input_bps()).unwrap(), bg, c).unwrap().bps();
        let err = rel(s.throughput_bps(), predicted);
        let ok = (0.007..=0.013).contains(&p) && err <= 0.10;
        pass &= ok;
        let tag = if iv.start >= 120.0 { " re-pin" } else { "" };
        parts.push(format!(
            "[{:.0},{:.0}]{tag} bg {:.0} Mbps: RRR {:.2}%, {:.3} Mbps vs fluid {:.3} ({:+.1}%)",
            iv.start,
            iv.end,
            bg.mbps(),
            p * 100.0,
            s.throughput_bps() / 1e6,
            predicted / 1e6,
            (s.throughput_bps() / predicted - 1.0) * 100.0
        ));
    }
    let surge = spec.stationary.iter().any(|iv| iv.start == 125.0);
    Outcome {
        pass: pass && surge,
        detail: parts.join("; "),
    }
}

fn c4_linear_feedback() -> Outcome {
    let log = run(&fig3(Fig3Variant::Linear));
    let s = interval_stats(&log, FlowId(0), Interval::new(60.0, 110.0)).unwrap();
    let x = s.throughput_bps();
    let loss = s.loss_rate();
    Outcome {
        pass: rel(x, 4e6) <= 0.05 && loss < 0.0005,
        detail: format!("[60,110]: X_out {:.3} Mbps, loss {:.3}% ({} of {})", x / 1e6, loss * 100.0, s.dropped, s.sent),
    }
}

fn c5_fairness() -> Outcome {
    let iv = Interval::new(70.0, 100.0);
    let mut pass = true;
    let mut parts = Vec::new();
    for hetero in [false, true] {
        let log = run(&fig4(hetero));
        let shares: Vec<f64> = (0..4).map(|i| interval_stats(&log, FlowId(i), iv).unwrap().throughput_bps()).collect();
        let j = jain_index(&shares).unwrap();
        let total: f64 = shares.iter().sum();
        let ok = j > 0.95 && shares.iter().all(|&x| rel(x, 2.5e6) <= 0.2) && total > 0.9 * 10e6;
        pass &= ok;
        let mb: Vec<String> = shares.iter().map(|x| format!("{:.3}", x / 1e6)).collect();
        parts.push(format!(
            "{}: [{}] Mbps, Jain {j:.4}, utilisation {:.1}%",
            if hetero { "heterogeneous" } else { "homogeneous" },
            mb.join(", "),
            total / 1e5
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn c6_friendliness() -> Outcome {
    let iv = Interval::new(90.0, 150.0);
    let mut shares = Vec::new();
    let mut parts = Vec::new();
    let mut util_ok = true;
    let mut equal_ok = false;
    let mut smooth_ok = false;
    for x_t in [0.3, 0.6, 0.9] {
        let spec = fig6(mbps(x_t)).unwrap();
        let log = run(&spec);
        let reno = interval_stats(&log, FlowId(0), iv).unwrap().throughput_bps();
        let rrrp = interval_stats(&log, FlowId(1), iv).unwrap().throughput_bps();
        let util = (reno + rrrp) / spec.bottleneck.capacity.bps();
        util_ok &= util > 0.9;
        shares.push(rrrp);
        let rtt = 6.0 * spec.bottleneck.prop_delay;
        let fluid = square_law_closed_form(&TcpFluidCurve::new(1.22, 12_000.0, rtt).unwrap(), mbps(x_t), spec.bottleneck.capacity)
            .unwrap();
        let mut line = format!(
            "x_T {x_t}: Reno {:.2} / RRRP {:.2} Mbps (fluid split at base RTT {:.2} / {:.2}), util {:.1}%",
            reno / 1e6,
            rrrp / 1e6,
            fluid.x_tcp.mbps(),
            fluid.x_rrrp.mbps(),
            util * 100.0
        );
        if x_t == 0.6 {
            let diff = (rrrp - reno).abs() / reno.max(rrrp);
            equal_ok = diff < 0.25;
            let q_reno = std_dev(&queue_series(&log, FlowId(0), iv)).unwrap();
            let q_rrrp = std_dev(&queue_series(&log, FlowId(1), iv)).unwrap();
            smooth_ok = q_rrrp < q_reno;
            line += &format!(", shares differ {:.0}%, queue std RRRP {q_rrrp:.2} vs Reno {q_reno:.2} pkts", diff * 100.0);
        }
        parts.push(line);
    }
    let ordered = shares.windows(2).all(|w| w[1] > w[0]);
    parts.push(format!(
        "ordering {}, equal share {}, utilisation {}, smoother queue {}",
        ok(ordered),
        ok(equal_ok),
        ok(util_ok),
        ok(smooth_ok)
    ));
    Outcome {
        pass: ordered && equal_ok && util_ok && smooth_ok,
        detail: parts.join("; "),
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}

/// First 1 s window after `after` whose throughput reaches `level`.
fn time_to_reach(log: &EventLog, after: f64, level: f64) -> Option<f64> {
    let ts = throughput_series(log, 1.0).unwrap();
    ts.flows[0].points.iter().find(|p| p.t >= after && p.throughput_bps >= level).map(|p| p.t + 1.0 - after)
}

fn post_convergence_cv(log: &EventLog, after: f64) -> Option<(f64, f64)> {
    let ts = throughput_series(log, 1.0).unwrap();
    let pts: Vec<_> = ts.flows[0].points.iter().filter(|p| p.t >= after).copied().collect();
    let t0 = convergence_time(&pts, 1.0)?;
    let v: Vec<f64> = pts.iter().filter(|p| p.t >= t0).map(|p| p.throughput_bps).collect();
    Some((t0, coefficient_of_variation(&v).ok()?))
}

fn c7_adaptation() -> Outcome {
    let up = switch(SwitchDirection::Up, SwitchProtocol::Rrrp);
    let switch_at = up.capacity_schedule[0].time;
    let c0 = up.bottleneck.capacity.bps();
    let c1 = up.capacity_schedule[0].capacity.bps();
    let rtt = 6.0 * up.bottleneck.prop_delay;
    let log = run(&up);
    let fb = FeedbackFunction::tcp_like(SWITCH_X_T_MBPS * 1e6).unwrap();
    let x_before = send_rate_series(&log, FlowId(0), Interval::new(switch_at - 1.0, switch_at))
        .last()
        .map(|s| s.1)
        .unwrap();
    let ramp: Vec<(f64, f64)> = send_rate_series(&log, FlowId(0), Interval::new(switch_at, up.duration))
        .into_iter()
        .skip_while(|&(_, x)| x <= 1.2 * x_before)
        .take_while(|&(_, x)| x < 0.9 * c1)
        .collect();
    let mut predicted = 0.0;
    for w in ramp.windows(2) {
        let p_t = fb.target_rrr(Rate::new(w[0].1).unwrap());
        predicted += growth_exponent(prob(0.0), p_t, rtt).unwrap() * (w[1].0 - w[0].0);
    }
    let observed = (ramp.last().unwrap().1 / ramp[0].1).ln();
    let ratio = observed / predicted;
    let slope_ok = (0.5..=2.0).contains(&ratio);

    let reno_log = run(&switch(SwitchDirection::Up, SwitchProtocol::Reno));
    let t_rrrp = time_to_reach(&log, switch_at, 0.9 * c1);
    let t_reno = time_to_reach(&reno_log, switch_at, 0.9 * c1);
    let faster = match (t_rrrp, t_reno) {
        (Some(a), Some(b)) => a < b,
        (Some(_), None) => true,
        _ => false,
    };

    let down = switch(SwitchDirection::Down, SwitchProtocol::Rrrp);
    let down_at = down.capacity_schedule[0].time;
    let cv_rrrp = post_convergence_cv(&run(&down), down_at);
    let cv_reno = post_convergence_cv(&run(&switch(SwitchDirection::Down, SwitchProtocol::Reno)), down_at);
    let stable = matches!((cv_rrrp, cv_reno), (Some((_, a)), Some((_, b))) if a < b);
    let fmt_t = |t: Option<f64>| t.map_or("not reached".to_string(), |t| format!("{t:.0} s"));
    let fmt_cv = |c: Option<(f64, f64)>| c.map_or("no convergence".to_string(), |(t, v)| format!("{v:.2e} from {t:.0} s"));
    Outcome {
        pass: slope_ok && faster && stable,
        detail: format!(
            "up {:.0}->{:.0} Mbps: log-rate gain {observed:.3} vs growth exponent {predicted:.3} (ratio {ratio:.2}); \
             90% reached after RRRP {} / Reno {}; down: throughput CV RRRP {} vs Reno {}",
            c0 / 1e6,
            c1 / 1e6,
            fmt_t(t_rrrp),
            fmt_t(t_reno),
            fmt_cv(cv_rrrp),
            fmt_cv(cv_reno)
        ),
    }
}

fn csv_bytes(spec: &ScenarioSpec) -> Vec<u8> {
    let log = run(spec);
    let series = throughput_series(&log, 1.0).unwrap();
    let summary = summarize(spec, &log, &series).unwrap();
    let mut out = Vec::new();
    write_flows_csv(&series, &mut out).unwrap();
    write_summary_csv(&summary, &mut out).unwrap();
    out
}

fn c8_soundness() -> Outcome {
    let mut parts = Vec::new();
    let mut checked_ok = true;
    let mut max_q = 0;
    for name in ["fig3-fixed", "fig4-hetero", "fig6", "switch-down-reno"] {
        let spec = by_name(name).unwrap();
        match run_scenario(&spec, true) {
            Ok(log) => max_q = max_q.max(log.max_bottleneck_queue),
            Err(e) => {
                checked_ok = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    parts.push(format!("per-event conservation checks {}, max bottleneck queue {max_q}", ok(checked_ok)));

    let spec = fig4(false);
    let identical = csv_bytes(&spec) == csv_bytes(&spec);
    parts.push(format!("same-seed CSVs identical: {identical}"));

    let poisson = ScenarioSpec {
        name: "poisson".into(),
        description: String::new(),
        seed: 1,
        duration: 100.0,
        stationary: Vec::new(),
        capacity_schedule: Vec::new(),
        access: LinkSpec::new(100e6, 0.01, 1000).unwrap(),
        bottleneck: LinkSpec::new(10e6, 0.01, 50).unwrap(),
        flows: vec![ScenarioFlow::new(
            FlowKind::Poisson(PoissonConfig {
                rate: mbps(6.0),
                packet_bits: 12_000,
            }),
            0.0,
        )],
    };
    let log = run(&poisson);
    let rate = interval_stats(&log, FlowId(0), Interval::new(0.0, 100.0)).unwrap().throughput_bps();
    let rate_ok = rel(rate, 6e6) <= 0.02;
    parts.push(format!("Poisson 6 Mbps delivered {:.4} Mbps", rate / 1e6));
    Outcome {
        pass: checked_ok && max_q <= 50 && identical && rate_ok,
        detail: parts.join("; "),
    }
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "fluid algebra exactness", c1_fluid_algebra),
        (2, "operating-point solver", c2_operating_point),
        (3, "fixed feedback tracks p_fix", c3_fixed_feedback),
        (4, "linear feedback pins X_Tlim", c4_linear_feedback),
        (5, "four-flow fairness", c5_fairness),
        (6, "TCP friendliness ordering", c6_friendliness),
        (7, "exponential adaptation", c7_adaptation),
        (8, "simulator soundness", c8_soundness),
    ];
    let mut unexpected = 0;
    for (id, name, f) in criteria {
        let start = Instant::now();
        let o = f();
        let known = KNOWN_FAILURES.contains(&id);
        let status = if o.pass { "PASS" } else { "FAIL" };
        let note = match (o.pass, known) {
            (false, true) => " (known failure)",
            (true, true) => " (listed as known failure but passed)",
            _ => "",
        };
        println!(
            "{status} criterion {id} {name}{note} [{:.1} s]: {}",
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass && !known {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criterion(s) failed unexpectedly");
        ExitCode::FAILURE
    }
}
