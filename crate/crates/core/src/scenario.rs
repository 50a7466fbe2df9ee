//! Canned experiments and the serialisable scenario description.
//!
//! A [`ScenarioSpec`] is a dumbbell, a list of flows with start/stop times,
//! optional Poisson rate schedules and bottleneck capacity changes. It
//! round-trips through TOML; the shipped config files are the canned
//! scenarios written out.

use serde::{Deserialize, Serialize};

use crate::feedback::{Estimator, FeedbackFunction};
use crate::sim::{
    build_dumbbell, run, Action, EventLog, FlowId, FlowKind, FlowSpec, LinkId, LinkSpec, PoissonConfig, RenoConfig,
    RrrpConfig, ScheduledAction, SimConfig, SimError, Topology,
};
use crate::units::{Probability, Rate};

pub const PACKET_BITS: u32 = 12_000;
/// Estimator window used by every canned RRRP flow.
pub const SCENARIO_ESTIMATOR_WINDOW: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Self {
        Interval { start, end }
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateChange {
    pub time: f64,
    pub rate: Rate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityChange {
    pub time: f64,
    pub capacity: Rate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFlow {
    pub start: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    /// Overrides the access-link delay for this flow.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub access_delay: Option<f64>,
    /// Mean-rate changes of a Poisson flow.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rate_schedule: Vec<RateChange>,
    pub kind: FlowKind,
}

impl ScenarioFlow {
    pub fn new(kind: FlowKind, start: f64) -> Self {
        ScenarioFlow {
            start,
            stop: None,
            access_delay: None,
            rate_schedule: Vec::new(),
            kind,
        }
    }

    pub fn stop_at(mut self, t: f64) -> Self {
        self.stop = Some(t);
        self
    }

    pub fn with_access_delay(mut self, d: f64) -> Self {
        self.access_delay = Some(d);
        self
    }

    pub fn with_rate_change(mut self, time: f64, rate: Rate) -> Self {
        self.rate_schedule.push(RateChange { time, rate });
        self
    }

    /// Whether the flow is sending throughout `iv`.
    pub fn active_during(&self, iv: &Interval) -> bool {
        self.start <= iv.start && self.stop.is_none_or(|s| s >= iv.end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub seed: u64,
    pub duration: f64,
    /// Windows over which the traffic mix is constant, used for summaries.
    #[serde(default)]
    pub stationary: Vec<Interval>,
    #[serde(default)]
    pub capacity_schedule: Vec<CapacityChange>,
    pub access: LinkSpec,
    pub bottleneck: LinkSpec,
    pub flows: Vec<ScenarioFlow>,
}

fn config(msg: impl Into<String>) -> SimError {
    SimError::Config(msg.into())
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        let d = self.duration;
        if !(d.is_finite() && d > 0.0) {
            return Err(config(format!("duration must be positive, got {d}")));
        }
        if self.flows.is_empty() {
            return Err(config("scenario has no flows"));
        }
        let within = |t: f64| t.is_finite() && (0.0..=d).contains(&t);
        for (i, f) in self.flows.iter().enumerate() {
            if !within(f.start) {
                return Err(config(format!("flow {i}: start {} outside [0, {d}]", f.start)));
            }
            if let Some(stop) = f.stop {
                if !within(stop) || stop <= f.start {
                    return Err(config(format!("flow {i}: stop {stop} must lie in ({}, {d}]", f.start)));
                }
            }
            if let Some(a) = f.access_delay {
                if !(a.is_finite() && a >= 0.0) {
                    return Err(config(format!("flow {i}: bad access delay {a}")));
                }
            }
            if !f.rate_schedule.is_empty() && !matches!(f.kind, FlowKind::Poisson(_)) {
                return Err(config(format!("flow {i}: only Poisson flows take a rate schedule")));
            }
            if let Some(c) = f.rate_schedule.iter().find(|c| !within(c.time)) {
                return Err(config(format!("flow {i}: rate change at {} outside [0, {d}]", c.time)));
            }
        }
        if let Some(c) = self.capacity_schedule.iter().find(|c| !within(c.time)) {
            return Err(config(format!("capacity change at {} outside [0, {d}]", c.time)));
        }
        if self.capacity_schedule.iter().any(|c| c.capacity.bps() <= 0.0) {
            return Err(config("capacity changes must be positive"));
        }
        if let Some(iv) = self.stationary.iter().find(|iv| !(within(iv.start) && within(iv.end) && iv.start < iv.end)) {
            return Err(config(format!("stationary interval [{}, {}] is invalid", iv.start, iv.end)));
        }
        Ok(())
    }

    pub fn topology(&self) -> Result<Topology, SimError> {
        let flows: Vec<FlowSpec> = self
            .flows
            .iter()
            .map(|f| FlowSpec {
                kind: f.kind,
                access_delay: f.access_delay,
            })
            .collect();
        build_dumbbell(self.access, self.bottleneck, &flows)
    }

    /// Start, stop, rate and capacity actions in time order.
    pub fn schedule(&self) -> Vec<ScheduledAction> {
        let mut s = Vec::new();
        for (i, f) in self.flows.iter().enumerate() {
            let flow = FlowId(i as u32);
            s.push(ScheduledAction::new(f.start, Action::Start { flow }));
            for c in &f.rate_schedule {
                s.push(ScheduledAction::new(c.time, Action::SetRate { flow, rate: c.rate }));
            }
            if let Some(stop) = f.stop {
                s.push(ScheduledAction::new(stop, Action::Stop { flow }));
            }
        }
        for c in &self.capacity_schedule {
            s.push(ScheduledAction::new(
                c.time,
                Action::SetCapacity {
                    link: LinkId(0),
                    capacity: c.capacity,
                },
            ));
        }
        s.sort_by(|a, b| a.time.total_cmp(&b.time));
        s
    }

    /// Bottleneck capacity in force at `t`.
    pub fn capacity_at(&self, t: f64) -> Rate {
        let mut c = self.bottleneck.capacity;
        let mut changes = self.capacity_schedule.clone();
        changes.sort_by(|a, b| a.time.total_cmp(&b.time));
        for ch in changes.iter().take_while(|ch| ch.time <= t) {
            c = ch.capacity;
        }
        c
    }

    /// Mean rate of a Poisson flow at `t`, zero outside its active period.
    pub fn poisson_rate_at(&self, flow: usize, t: f64) -> Option<Rate> {
        let f = self.flows.get(flow)?;
        let FlowKind::Poisson(p) = f.kind else {
            return None;
        };
        if t < f.start || f.stop.is_some_and(|s| t >= s) {
            return Some(Rate::ZERO);
        }
        let mut rate = p.rate;
        let mut changes = f.rate_schedule.clone();
        changes.sort_by(|a, b| a.time.total_cmp(&b.time));
        for ch in changes.iter().take_while(|ch| ch.time <= t) {
            rate = ch.rate;
        }
        Some(rate)
    }

    /// Sum of Poisson mean rates at `t`.
    pub fn background_at(&self, t: f64) -> Rate {
        let total = (0..self.flows.len()).filter_map(|i| self.poisson_rate_at(i, t)).map(Rate::bps).sum();
        Rate::new(total).unwrap_or(Rate::ZERO)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Shortens or extends the run. Events past the new end are dropped and
    /// stationary intervals are clipped.
    pub fn with_duration(mut self, duration: f64) -> Result<Self, SimError> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(config(format!("duration must be positive, got {duration}")));
        }
        self.duration = duration;
        self.flows.retain(|f| f.start <= duration);
        if self.flows.is_empty() {
            return Err(config(format!("no flow starts before {duration} s")));
        }
        for f in &mut self.flows {
            if f.stop.is_some_and(|s| s > duration) {
                f.stop = None;
            }
            f.rate_schedule.retain(|c| c.time <= duration);
        }
        self.capacity_schedule.retain(|c| c.time <= duration);
        self.stationary = self
            .stationary
            .iter()
            .filter(|iv| iv.start < duration)
            .map(|iv| Interval::new(iv.start, iv.end.min(duration)))
            .collect();
        Ok(self)
    }

    /// Replaces the feedback of every RRRP flow.
    pub fn with_feedback(mut self, fb: FeedbackFunction) -> Self {
        for f in &mut self.flows {
            if let FlowKind::Rrrp(c) = &mut f.kind {
                c.feedback = fb;
            }
        }
        self
    }

    /// Sets `x_t` on every TCP-like RRRP flow.
    pub fn with_x_t(mut self, x_t: Rate) -> Result<Self, SimError> {
        let fb = FeedbackFunction::tcp_like(x_t.bps()).map_err(|e| config(e.to_string()))?;
        let mut hit = false;
        for f in &mut self.flows {
            if let FlowKind::Rrrp(c) = &mut f.kind {
                if matches!(c.feedback, FeedbackFunction::TcpLike { .. }) {
                    c.feedback = fb;
                    hit = true;
                }
            }
        }
        if !hit {
            return Err(config(format!("scenario {} has no TCP-like flow", self.name)));
        }
        Ok(self)
    }

    /// Sets `p_fix` on every fixed-target RRRP flow.
    pub fn with_p_fix(mut self, p: Probability) -> Result<Self, SimError> {
        let fb = FeedbackFunction::fixed(p.value()).map_err(|e| config(e.to_string()))?;
        let mut hit = false;
        for f in &mut self.flows {
            if let FlowKind::Rrrp(c) = &mut f.kind {
                if matches!(c.feedback, FeedbackFunction::Fixed { .. }) {
                    c.feedback = fb;
                    hit = true;
                }
            }
        }
        if !hit {
            return Err(config(format!("scenario {} has no fixed-target flow", self.name)));
        }
        Ok(self)
    }

    /// Multiplies every Poisson rate, initial and scheduled, by `factor`.
    pub fn with_background_scale(mut self, factor: f64) -> Result<Self, SimError> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(config(format!("background scale must be non-negative, got {factor}")));
        }
        let scale = |r: Rate| Rate::new(r.bps() * factor).map_err(|e| config(e.to_string()));
        for f in &mut self.flows {
            if let FlowKind::Poisson(p) = &mut f.kind {
                p.rate = scale(p.rate)?;
            }
            for c in &mut f.rate_schedule {
                c.rate = scale(c.rate)?;
            }
        }
        Ok(self)
    }

    pub fn to_toml(&self) -> Result<String, toml::ser::Error> {
        toml::to_string(self)
    }

    pub fn from_toml(s: &str) -> Result<Self, SimError> {
        let spec: ScenarioSpec = toml::from_str(s).map_err(|e| config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Runs the scenario with its own seed. `check_invariants` enables the
/// per-event conservation and buffer checks.
pub fn run_scenario(spec: &ScenarioSpec, check_invariants: bool) -> Result<EventLog, SimError> {
    spec.validate()?;
    let topo = spec.topology()?;
    let mut cfg = SimConfig::new(spec.seed, spec.duration);
    cfg.check_invariants = check_invariants;
    run(&topo, &spec.schedule(), cfg)
}

fn mbps(v: f64) -> Rate {
    Rate::from_mbps(v).expect("constant rate")
}

fn link(capacity_mbps: f64, delay: f64, buffer: usize) -> LinkSpec {
    LinkSpec::new(capacity_mbps * 1e6, delay, buffer).expect("constant link")
}

fn rrrp(fb: FeedbackFunction, initial: Rate) -> FlowKind {
    let mut c = RrrpConfig::new(fb, initial, PACKET_BITS);
    c.estimator = Estimator::SendClock;
    c.estimator_window = SCENARIO_ESTIMATOR_WINDOW;
    FlowKind::Rrrp(c)
}

fn reno() -> FlowKind {
    FlowKind::Reno(RenoConfig::new(PACKET_BITS))
}

fn poisson(rate: Rate) -> FlowKind {
    FlowKind::Poisson(PoissonConfig {
        rate,
        packet_bits: PACKET_BITS,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fig3Variant {
    Fixed,
    Linear,
    TcpLike,
}

impl Fig3Variant {
    pub fn feedback(self) -> FeedbackFunction {
        match self {
            Fig3Variant::Fixed => FeedbackFunction::fixed(0.01),
            Fig3Variant::Linear => FeedbackFunction::linear(0.01, 4e6),
            Fig3Variant::TcpLike => FeedbackFunction::tcp_like(0.3e6),
        }
        .expect("constant feedback")
    }

    fn slug(self) -> &'static str {
        match self {
            Fig3Variant::Fixed => "fixed",
            Fig3Variant::Linear => "linear",
            Fig3Variant::TcpLike => "tcplike",
        }
    }
}

/// Background change times of the variable-background experiment.
pub const FIG3_CHANGES: [f64; 3] = [50.0, 90.0, 120.0];

/// One RRRP flow from 20 s against Poisson background of 6, 3, 0 and 9 Mbps
/// switching at 50, 90 and 120 s.
pub fn fig3(variant: Fig3Variant) -> ScenarioSpec {
    let bg = ScenarioFlow::new(poisson(mbps(6.0)), 0.0)
        .with_rate_change(50.0, mbps(3.0))
        .with_rate_change(90.0, Rate::ZERO)
        .with_rate_change(120.0, mbps(9.0));
    ScenarioSpec {
        name: format!("fig3-{}", variant.slug()),
        description: format!("single RRRP flow ({} feedback) against variable Poisson background", variant.slug()),
        seed: 1,
        duration: 150.0,
        stationary: vec![
            Interval::new(30.0, 50.0),
            Interval::new(60.0, 90.0),
            Interval::new(100.0, 120.0),
            Interval::new(125.0, 150.0),
        ],
        capacity_schedule: Vec::new(),
        access: link(100.0, 0.01, 1000),
        bottleneck: link(10.0, 0.01, 50),
        flows: vec![ScenarioFlow::new(rrrp(variant.feedback(), mbps(1.6)), 20.0), bg],
    }
}

pub const FIG4_DELAYS: [f64; 4] = [0.001, 0.01, 0.05, 0.1];

/// Four TCP-like RRRP flows (x_T = 0.6 Mbps) starting at 0, 20, 40, 60 s and
/// stopping at 100, 120, 140, 160 s. Heterogeneous runs give the flows access
/// delays of 1, 10, 50 and 100 ms; every other link has 1 ms.
pub fn fig4(heterogeneous: bool) -> ScenarioSpec {
    let fb = FeedbackFunction::tcp_like(0.6e6).expect("constant feedback");
    let flows = (0..4)
        .map(|i| {
            let f = ScenarioFlow::new(rrrp(fb, mbps(1.6)), 20.0 * i as f64).stop_at(100.0 + 20.0 * i as f64);
            if heterogeneous {
                f.with_access_delay(FIG4_DELAYS[i])
            } else {
                f
            }
        })
        .collect();
    let stationary = [(0.0, 20.0), (20.0, 40.0), (40.0, 60.0), (60.0, 100.0), (100.0, 120.0), (120.0, 140.0), (140.0, 160.0)]
        .iter()
        .map(|&(a, b)| Interval::new(a + 10.0, b))
        .collect();
    ScenarioSpec {
        name: if heterogeneous { "fig4-hetero" } else { "fig4" }.into(),
        description: format!(
            "four staggered TCP-like RRRP flows, {} access delays",
            if heterogeneous { "1/10/50/100 ms" } else { "1 ms" }
        ),
        seed: 1,
        duration: 160.0,
        stationary,
        capacity_schedule: Vec::new(),
        access: link(100.0, 0.001, 1000),
        bottleneck: link(10.0, 0.001, 50),
        flows,
    }
}

/// One Reno flow from 20 s and one TCP-like RRRP flow from 50 s.
pub fn fig6(x_t: Rate) -> Result<ScenarioSpec, SimError> {
    let fb = FeedbackFunction::tcp_like(x_t.bps()).map_err(|e| config(e.to_string()))?;
    Ok(ScenarioSpec {
        name: "fig6".into(),
        description: format!("TCP Reno against a TCP-like RRRP flow with x_T = {} Mbps", x_t.mbps()),
        seed: 1,
        duration: 150.0,
        stationary: vec![Interval::new(30.0, 50.0), Interval::new(90.0, 150.0)],
        capacity_schedule: Vec::new(),
        access: link(100.0, 0.01, 1000),
        bottleneck: link(10.0, 0.01, 50),
        flows: vec![
            ScenarioFlow::new(reno(), 20.0),
            ScenarioFlow::new(rrrp(fb, mbps(1.6)), 50.0),
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwitchDirection {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwitchProtocol {
    Rrrp,
    Reno,
}

/// x_T of the RRRP flow in the handover runs.
pub const SWITCH_X_T_MBPS: f64 = 5.0;

/// Per-link delay of the handover runs, giving a 120 ms base round trip.
pub const SWITCH_LINK_DELAY: f64 = 0.02;

/// A lone flow while the bottleneck switches 10 -> 100 Mbps at 10 s (up) or
/// 100 -> 10 Mbps at 60 s (down). Access links run at 1 Gbps.
pub fn switch(direction: SwitchDirection, protocol: SwitchProtocol) -> ScenarioSpec {
    let (c0, c1, at, duration) = match direction {
        SwitchDirection::Up => (10.0, 100.0, 10.0, 100.0),
        SwitchDirection::Down => (100.0, 10.0, 60.0, 120.0),
    };
    let kind = match protocol {
        SwitchProtocol::Rrrp => rrrp(FeedbackFunction::tcp_like(SWITCH_X_T_MBPS * 1e6).expect("constant feedback"), mbps(1.6)),
        SwitchProtocol::Reno => reno(),
    };
    let dir = match direction {
        SwitchDirection::Up => "up",
        SwitchDirection::Down => "down",
    };
    let name = match protocol {
        SwitchProtocol::Rrrp => format!("switch-{dir}"),
        SwitchProtocol::Reno => format!("switch-{dir}-reno"),
    };
    let stationary = match direction {
        SwitchDirection::Up => vec![Interval::new(5.0, 10.0), Interval::new(60.0, 100.0)],
        SwitchDirection::Down => vec![Interval::new(30.0, 60.0), Interval::new(80.0, 120.0)],
    };
    ScenarioSpec {
        name,
        description: format!("lone {} flow, bottleneck {c0} -> {c1} Mbps at {at} s", kind.protocol()),
        seed: 1,
        duration,
        stationary,
        capacity_schedule: vec![CapacityChange {
            time: at,
            capacity: mbps(c1),
        }],
        access: link(1000.0, SWITCH_LINK_DELAY, 1000),
        bottleneck: link(c0, SWITCH_LINK_DELAY, 50),
        flows: vec![ScenarioFlow::new(kind, 0.0)],
    }
}

pub struct CatalogEntry {
    pub name: &'static str,
    pub purpose: &'static str,
    pub build: fn() -> ScenarioSpec,
}

fn fig6_at(mbps_x_t: f64, name: &str) -> ScenarioSpec {
    let mut s = fig6(mbps(mbps_x_t)).expect("constant x_t");
    s.name = name.into();
    s
}

/// Every canned scenario, in a fixed order.
pub fn catalog() -> &'static [CatalogEntry] {
    const ENTRIES: &[CatalogEntry] = &[
        CatalogEntry { name: "fig3-fixed", purpose: "steady state", build: || fig3(Fig3Variant::Fixed) },
        CatalogEntry { name: "fig3-linear", purpose: "steady state", build: || fig3(Fig3Variant::Linear) },
        CatalogEntry { name: "fig3-tcplike", purpose: "steady state", build: || fig3(Fig3Variant::TcpLike) },
        CatalogEntry { name: "fig4", purpose: "fairness", build: || fig4(false) },
        CatalogEntry { name: "fig4-hetero", purpose: "fairness, mixed RTT", build: || fig4(true) },
        CatalogEntry { name: "fig6", purpose: "TCP coexistence", build: || fig6_at(0.6, "fig6") },
        CatalogEntry { name: "fig6-low", purpose: "TCP coexistence", build: || fig6_at(0.3, "fig6-low") },
        CatalogEntry { name: "fig6-high", purpose: "TCP coexistence", build: || fig6_at(0.9, "fig6-high") },
        CatalogEntry { name: "switch-up", purpose: "capacity increase", build: || switch(SwitchDirection::Up, SwitchProtocol::Rrrp) },
        CatalogEntry { name: "switch-down", purpose: "capacity decrease", build: || switch(SwitchDirection::Down, SwitchProtocol::Rrrp) },
        CatalogEntry { name: "switch-up-reno", purpose: "capacity increase", build: || switch(SwitchDirection::Up, SwitchProtocol::Reno) },
        CatalogEntry { name: "switch-down-reno", purpose: "capacity decrease", build: || switch(SwitchDirection::Down, SwitchProtocol::Reno) },
    ];
    ENTRIES
}

pub fn by_name(name: &str) -> Option<ScenarioSpec> {
    catalog().iter().find(|e| e.name == name).map(|e| (e.build)())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_builds_valid_named_specs() {
        for e in catalog() {
            let s = (e.build)();
            assert_eq!(s.name, e.name);
            s.validate().unwrap();
            s.topology().unwrap();
        }
    }

    #[test]
    fn builders_are_pure() {
        for e in catalog() {
            assert_eq!((e.build)(), (e.build)());
        }
    }

    #[test]
    fn toml_round_trip() {
        for e in catalog() {
            let s = (e.build)();
            let text = s.to_toml().unwrap();
            assert_eq!(ScenarioSpec::from_toml(&text).unwrap(), s, "{text}");
        }
    }

    #[test]
    fn fig3_background_levels() {
        let s = fig3(Fig3Variant::Fixed);
        let at = |t| s.background_at(t).mbps();
        assert_eq!([at(10.0), at(60.0), at(100.0), at(130.0)], [6.0, 3.0, 0.0, 9.0]);
    }

    #[test]
    fn rejects_bad_times() {
        let mut s = fig3(Fig3Variant::Fixed);
        s.flows[0].stop = Some(10.0);
        assert!(s.validate().is_err());
        let mut s = fig3(Fig3Variant::Fixed);
        s.flows[1].rate_schedule.push(RateChange { time: 200.0, rate: Rate::ZERO });
        assert!(s.validate().is_err());
        let mut s = fig6(mbps(0.6)).unwrap();
        s.flows[0].rate_schedule.push(RateChange { time: 1.0, rate: Rate::ZERO });
        assert!(s.validate().is_err());
    }

    #[test]
    fn duration_override_clips() {
        let s = fig3(Fig3Variant::Fixed).with_duration(70.0).unwrap();
        s.validate().unwrap();
        assert_eq!(s.flows[1].rate_schedule.len(), 1);
        assert_eq!(s.stationary.len(), 2);
        let s = fig4(false).with_duration(30.0).unwrap();
        assert_eq!(s.flows.len(), 2);
        assert!(s.flows.iter().all(|f| f.stop.is_none()));
    }

    #[test]
    fn overrides_target_matching_flows() {
        assert!(fig3(Fig3Variant::Fixed).with_x_t(mbps(1.0)).is_err());
        let s = fig6(mbps(0.6)).unwrap().with_x_t(mbps(0.9)).unwrap();
        let FlowKind::Rrrp(c) = s.flows[1].kind else { panic!() };
        assert_eq!(c.feedback, FeedbackFunction::tcp_like(0.9e6).unwrap());
        let s = fig3(Fig3Variant::Fixed).with_background_scale(0.5).unwrap();
        assert_eq!(s.background_at(130.0).mbps(), 4.5);
    }

    #[test]
    fn switch_capacity_schedule() {
        let s = switch(SwitchDirection::Down, SwitchProtocol::Reno);
        assert_eq!(s.capacity_at(59.0).mbps(), 100.0);
        assert_eq!(s.capacity_at(60.0).mbps(), 10.0);
        assert_eq!(s.name, "switch-down-reno");
    }
}
