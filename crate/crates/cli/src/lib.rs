//! Implementation of the `rrr` command line.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use rrr_core::metrics::{summarize, throughput_series, MetricsError};
use rrr_core::operating_point::{solve_operating_point, tcp_loss_from_rate};
use rrr_core::report::{write_flows_csv, write_summary_csv};
use rrr_core::scenario::{by_name, catalog};
use rrr_core::sim::{write_trace, SimError};
use rrr_core::{run_scenario, FeedbackFunction, ModelError, Probability, Rate, ScenarioSpec, TcpFluidCurve};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Stalled(String),
    #[error("{0}")]
    NoOperatingPoint(String),
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Stalled(_) => 3,
            CliError::NoOperatingPoint(_) => 4,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Stalled { .. } => CliError::Stalled(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

fn csv_err<E>(path: &Path) -> impl FnOnce(E) -> CliError + '_
where
    E: Into<Box<dyn std::error::Error + Send + Sync>>,
{
    move |e| CliError::Io {
        context: path.display().to_string(),
        source: io::Error::other(e),
    }
}

#[derive(Debug, Parser)]
#[command(name = "rrr", version, about = "Relative rate reduction congestion control scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a canned scenario or a scenario file and write CSV output.
    Run(RunArgs),
    /// Solve the TCP / TCP-like bandwidth split analytically.
    OperatingPoint(OperatingPointArgs),
    /// List the canned scenarios.
    List,
    /// Print a canned scenario as a TOML scenario file.
    Export {
        scenario: String,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Canned scenario name or path to a TOML scenario file.
    pub scenario: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Throughput window, seconds.
    #[arg(long, default_value_t = 1.0)]
    pub window: f64,
    /// x_T of every TCP-like flow, e.g. `0.6Mbps` or `600000`.
    #[arg(long, value_parser = parse_rate)]
    pub x_t: Option<Rate>,
    /// Target of every fixed-target flow.
    #[arg(long)]
    pub p_fix: Option<f64>,
    /// Simulated seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Multiplies every Poisson background rate.
    #[arg(long)]
    pub background_scale: Option<f64>,
    /// Also write the per-packet trace.
    #[arg(long)]
    pub trace: bool,
    /// Check conservation and buffer bounds after every event.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OperatingPointArgs {
    #[arg(long, default_value_t = 1.22)]
    pub k: f64,
    #[arg(long, default_value_t = 12_000.0)]
    pub pkt_bits: f64,
    /// Round-trip time, seconds.
    #[arg(long)]
    pub rtt: f64,
    #[arg(long, value_parser = parse_rate)]
    pub x_t: Rate,
    #[arg(long, value_parser = parse_rate)]
    pub capacity: Rate,
    /// Sample points of each curve in the CSV table.
    #[arg(long, default_value_t = 50)]
    pub points: usize,
}

/// Parses `600000`, `6e5`, `0.6Mbps`, `600kbps` or `1Gbps`. Suffixes are
/// case-insensitive.
pub fn parse_rate(s: &str) -> Result<Rate, String> {
    let t = s.trim();
    let lower = t.to_ascii_lowercase();
    let (num, scale) = [("gbps", 1e9), ("mbps", 1e6), ("kbps", 1e3), ("bps", 1.0)]
        .iter()
        .find_map(|(suf, k)| lower.strip_suffix(suf).map(|n| (n.trim().to_string(), *k)))
        .unwrap_or((lower.clone(), 1.0));
    let v: f64 = num.parse().map_err(|_| format!("invalid rate {s:?}"))?;
    Rate::new(v * scale).map_err(|e| e.to_string())
}

pub fn resolve_scenario(name_or_path: &str) -> Result<ScenarioSpec, CliError> {
    if let Some(spec) = by_name(name_or_path) {
        return Ok(spec);
    }
    let path = Path::new(name_or_path);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(io_err(path.display().to_string()))?;
        return ScenarioSpec::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())));
    }
    let names: Vec<&str> = catalog().iter().map(|e| e.name).collect();
    Err(CliError::Config(format!(
        "unknown scenario {name_or_path:?}; expected a file or one of: {}",
        names.join(", ")
    )))
}

/// The scenario after command-line overrides.
pub fn resolved_spec(args: &RunArgs) -> Result<ScenarioSpec, CliError> {
    if !(args.window.is_finite() && args.window > 0.0) {
        return Err(CliError::Config(format!("--window must be positive, got {}", args.window)));
    }
    let mut spec = resolve_scenario(&args.scenario)?;
    if let Some(seed) = args.seed {
        spec = spec.with_seed(seed);
    }
    if let Some(d) = args.duration {
        spec = spec.with_duration(d)?;
    }
    if let Some(x_t) = args.x_t {
        spec = spec.with_x_t(x_t)?;
    }
    if let Some(p) = args.p_fix {
        let p = Probability::new(p).map_err(|e| CliError::Config(format!("--p-fix: {e}")))?;
        spec = spec.with_p_fix(p)?;
    }
    if let Some(k) = args.background_scale {
        spec = spec.with_background_scale(k)?;
    }
    spec.validate()?;
    Ok(spec)
}

pub fn cmd_run(args: &RunArgs, out: &mut impl Write) -> Result<(), CliError> {
    let spec = resolved_spec(args)?;
    let config = spec.to_toml().map_err(|e| CliError::Config(e.to_string()))?;
    writeln!(out, "{config}").map_err(io_err("stdout"))?;

    let log = run_scenario(&spec, args.check)?;
    let series = throughput_series(&log, args.window)?;
    let summary = summarize(&spec, &log, &series)?;

    fs::create_dir_all(&args.out).map_err(io_err(args.out.display().to_string()))?;
    let flows_path = args.out.join(format!("{}_flows.csv", spec.name));
    let summary_path = args.out.join(format!("{}_summary.csv", spec.name));
    let create = |p: &Path| File::create(p).map(BufWriter::new).map_err(io_err(p.display().to_string()));
    write_flows_csv(&series, create(&flows_path)?).map_err(csv_err(&flows_path))?;
    write_summary_csv(&summary, create(&summary_path)?).map_err(csv_err(&summary_path))?;
    if args.trace {
        let trace_path = args.out.join(format!("{}_trace.txt", spec.name));
        write_trace(&log, create(&trace_path)?).map_err(io_err(trace_path.display().to_string()))?;
    }

    let w = |e| CliError::Io {
        context: "stdout".into(),
        source: e,
    };
    writeln!(out, "# flow protocol mean_mbps p95_mbps loss_pct convergence_s").map_err(w)?;
    for m in &summary.flows {
        let conv = m.convergence_time.map_or("-".to_string(), |t| format!("{t:.0}"));
        writeln!(
            out,
            "# {} {} {:.3} {:.3} {:.3} {conv}",
            m.flow.0,
            m.protocol,
            m.mean_bps / 1e6,
            m.p95_bps / 1e6,
            m.loss_fraction * 100.0
        )
        .map_err(w)?;
    }
    for iv in &summary.intervals {
        let jain = iv.jain.map_or("-".to_string(), |j| format!("{j:.4}"));
        writeln!(out, "# interval [{}, {}] jain {jain}", iv.interval.start, iv.interval.end).map_err(w)?;
    }
    writeln!(out, "# wrote {} and {}", flows_path.display(), summary_path.display()).map_err(w)?;
    Ok(())
}

pub fn cmd_operating_point(args: &OperatingPointArgs, out: &mut impl Write) -> Result<(), CliError> {
    let model = |e: ModelError| match e {
        ModelError::NoOperatingPoint { .. } => CliError::NoOperatingPoint(e.to_string()),
        other => CliError::Config(other.to_string()),
    };
    let curve = TcpFluidCurve::new(args.k, args.pkt_bits, args.rtt).map_err(model)?;
    let fb = FeedbackFunction::tcp_like(args.x_t.bps()).map_err(model)?;
    if args.points < 2 {
        return Err(CliError::Config("--points must be at least 2".into()));
    }
    let op = solve_operating_point(&curve, &fb, args.capacity).map_err(model)?;
    let w = |e| CliError::Io {
        context: "stdout".into(),
        source: e,
    };
    writeln!(out, "# a_bps = {}", curve.scale()).map_err(w)?;
    writeln!(out, "# x_tcp_bps = {}", op.x_tcp.bps()).map_err(w)?;
    writeln!(out, "# x_rrrp_bps = {}", op.x_rrrp.bps()).map_err(w)?;
    writeln!(out, "# p_star = {}", op.p_star.value()).map_err(w)?;
    writeln!(out, "x_bps,tcp_loss,rrrp_target").map_err(w)?;
    let c = args.capacity.bps();
    for i in 1..=args.points {
        let x = Rate::new(c * i as f64 / args.points as f64).map_err(model)?;
        let p_tcp = tcp_loss_from_rate(&curve, x).map_err(model)?;
        writeln!(out, "{},{},{}", x.bps(), p_tcp.value(), fb.target_rrr(x).value()).map_err(w)?;
    }
    Ok(())
}

pub fn cmd_list(out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "{:<18} {:<24} {:>6} {:>5}  description", "name", "purpose", "secs", "seed")?;
    for e in catalog() {
        let s = (e.build)();
        writeln!(out, "{:<18} {:<24} {:>6} {:>5}  {}", e.name, e.purpose, s.duration, s.seed, s.description)?;
    }
    Ok(())
}

pub fn cmd_export(name: &str, out: &mut impl Write) -> Result<(), CliError> {
    let spec = by_name(name).ok_or_else(|| CliError::Config(format!("unknown scenario {name:?}")))?;
    let text = spec.to_toml().map_err(|e| CliError::Config(e.to_string()))?;
    write!(out, "{text}").map_err(io_err("stdout"))
}

pub fn dispatch(cli: &Cli, out: &mut impl Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::OperatingPoint(a) => cmd_operating_point(a, out),
        Command::List => cmd_list(out).map_err(io_err("stdout")),
        Command::Export { scenario } => cmd_export(scenario, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_with_and_without_suffix() {
        assert_eq!(parse_rate("600000").unwrap().bps(), 6e5);
        assert_eq!(parse_rate("6e5").unwrap().bps(), 6e5);
        assert_eq!(parse_rate("0.6Mbps").unwrap().bps(), 6e5);
        assert_eq!(parse_rate("600 kbps").unwrap().bps(), 6e5);
        assert_eq!(parse_rate("1gbps").unwrap().bps(), 1e9);
        assert!(parse_rate("fast").is_err());
        assert!(parse_rate("-1Mbps").is_err());
    }

    #[test]
    fn unknown_scenario_is_config_error() {
        let e = resolve_scenario("nosuch").unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn overrides_apply() {
        let args = RunArgs {
            scenario: "fig6".into(),
            seed: Some(9),
            out: ".".into(),
            window: 1.0,
            x_t: Some(parse_rate("0.9Mbps").unwrap()),
            p_fix: None,
            duration: Some(80.0),
            background_scale: None,
            trace: false,
            check: false,
        };
        let s = resolved_spec(&args).unwrap();
        assert_eq!((s.seed, s.duration), (9, 80.0));
        let p_fix = RunArgs { p_fix: Some(0.02), ..args };
        assert_eq!(resolved_spec(&p_fix).unwrap_err().exit_code(), 2);
    }
}
