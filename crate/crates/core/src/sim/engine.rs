//! Event loop.

use serde::{Deserialize, Serialize};

use super::event::{EventQueue, Phase};
use super::link::{EnqueueOutcome, LinkState};
use super::packet::Packet;
use super::poisson::PoissonSource;
use super::reno::{RenoReceiver, RenoState, TimerCmd};
use super::rrrp::{RrrpReceiver, RrrpSenderState};
use super::topology::{FlowKind, Topology};
use super::trace::{EventLog, FlowCounters, FlowInfo, Sample, TraceKind, TraceRecord};
use super::{FlowId, LinkId, SimError};
use crate::units::Rate;

/// Scheduled change to the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum Action {
    Start { flow: FlowId },
    Stop { flow: FlowId },
    /// Poisson sources only.
    SetRate { flow: FlowId, rate: Rate },
    SetCapacity { link: LinkId, capacity: Rate },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduledAction {
    pub time: f64,
    #[serde(flatten)]
    pub action: Action,
}

impl ScheduledAction {
    pub fn new(time: f64, action: Action) -> Self {
        ScheduledAction { time, action }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub t_end: f64,
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    /// Check conservation and buffer bounds after every event.
    #[serde(default)]
    pub check_invariants: bool,
    #[serde(default = "default_ack_bits")]
    pub ack_bits: u32,
    /// Keep per-packet records in the log.
    #[serde(default = "default_true")]
    pub record_packets: bool,
}

fn default_sample_interval() -> f64 {
    0.01
}

fn default_ack_bits() -> u32 {
    320
}

fn default_true() -> bool {
    true
}

impl SimConfig {
    pub fn new(seed: u64, t_end: f64) -> Self {
        SimConfig {
            seed,
            t_end,
            sample_interval: default_sample_interval(),
            check_invariants: false,
            ack_bits: default_ack_bits(),
            record_packets: true,
        }
    }

    pub fn checked(mut self) -> Self {
        self.check_invariants = true;
        self
    }
}

#[derive(Debug, Clone, Copy)]
enum Event {
    TxComplete(LinkId),
    /// Data packet reaching hop `pkt.hop` of its path, or its receiver when
    /// the hop index equals the path length.
    Arrive(Packet),
    AckArrive(Packet),
    SendTick { flow: FlowId, generation: u64 },
    PoissonArrival { flow: FlowId, generation: u64 },
    RtoTimer { flow: FlowId, generation: u64 },
    Sample,
    Action(Action),
}

impl Event {
    fn is_traffic(&self) -> bool {
        !matches!(self, Event::Sample | Event::Action(_))
    }
}

enum Endpoint {
    Rrrp {
        sender: RrrpSenderState,
        receiver: RrrpReceiver,
    },
    Reno {
        sender: RenoState,
        receiver: RenoReceiver,
    },
    Poisson(PoissonSource),
}

struct Sim<'a> {
    topo: &'a Topology,
    cfg: SimConfig,
    now: f64,
    queue: EventQueue<Event>,
    traffic_pending: u64,
    links: Vec<LinkState>,
    endpoints: Vec<Endpoint>,
    counters: Vec<FlowCounters>,
    records: Vec<TraceRecord>,
    samples: Vec<Sample>,
    max_bottleneck_queue: usize,
    scratch: Vec<Packet>,
    processed: u64,
}

/// Runs the topology under `schedule` until `config.t_end`.
///
/// Flows start inactive; a `Start` action brings them up. Events later than
/// `t_end` are discarded.
pub fn run(topology: &Topology, schedule: &[ScheduledAction], config: SimConfig) -> Result<EventLog, SimError> {
    if !(config.t_end.is_finite() && config.t_end > 0.0) {
        return Err(SimError::Config(format!("t_end must be positive, got {}", config.t_end)));
    }
    if !(config.sample_interval.is_finite() && config.sample_interval > 0.0) {
        return Err(SimError::Config("sample interval must be positive".into()));
    }
    let n_flows = topology.flows().len();
    for a in schedule {
        if !(a.time.is_finite() && a.time >= 0.0) {
            return Err(SimError::Config(format!("action time {} is invalid", a.time)));
        }
        let flow_ok = |f: FlowId| {
            if f.index() < n_flows {
                Ok(())
            } else {
                Err(SimError::Config(format!("action references unknown flow {}", f.0)))
            }
        };
        match a.action {
            Action::Start { flow } | Action::Stop { flow } => flow_ok(flow)?,
            Action::SetRate { flow, .. } => {
                flow_ok(flow)?;
                if !matches!(topology.flows()[flow.index()].kind, FlowKind::Poisson(_)) {
                    return Err(SimError::Config(format!("set-rate applies to Poisson flows only (flow {})", flow.0)));
                }
            }
            Action::SetCapacity { link, capacity } => {
                if link.index() >= topology.links().len() {
                    return Err(SimError::Config(format!("action references unknown link {}", link.0)));
                }
                if capacity.bps() <= 0.0 {
                    return Err(SimError::Config("link capacity must be positive".into()));
                }
            }
        }
    }

    let mut sim = Sim::new(topology, config)?;
    for a in schedule {
        sim.push(a.time, Phase::Other, Event::Action(a.action));
    }
    sim.push(0.0, Phase::Other, Event::Sample);
    sim.run()?;
    Ok(sim.finish())
}

impl<'a> Sim<'a> {
    fn new(topo: &'a Topology, cfg: SimConfig) -> Result<Self, SimError> {
        let links: Vec<LinkState> = topo.links().iter().map(|s| LinkState::new(*s)).collect();
        let mut endpoints = Vec::with_capacity(topo.flows().len());
        for (i, route) in topo.flows().iter().enumerate() {
            let id = FlowId(i as u32);
            let first_capacity = topo.links()[route.path[0].index()].capacity;
            endpoints.push(match route.kind {
                FlowKind::Rrrp(c) => Endpoint::Rrrp {
                    sender: RrrpSenderState::new(id, c, first_capacity),
                    receiver: RrrpReceiver::new(&c)?,
                },
                FlowKind::Reno(c) => Endpoint::Reno {
                    sender: RenoState::new(id, c),
                    receiver: RenoReceiver::new(),
                },
                FlowKind::Poisson(c) => Endpoint::Poisson(PoissonSource::new(id, c, cfg.seed)),
            });
        }
        Ok(Sim {
            topo,
            cfg,
            now: 0.0,
            queue: EventQueue::new(),
            traffic_pending: 0,
            links,
            counters: vec![FlowCounters::default(); endpoints.len()],
            endpoints,
            records: Vec::new(),
            samples: Vec::new(),
            max_bottleneck_queue: 0,
            scratch: Vec::new(),
            processed: 0,
        })
    }

    /// Traffic events past the horizon stay counted as pending so that a
    /// flow whose next event falls after `t_end` is not reported as stalled.
    fn push(&mut self, time: f64, phase: Phase, ev: Event) {
        if ev.is_traffic() {
            self.traffic_pending += 1;
        }
        if time > self.cfg.t_end {
            return;
        }
        self.queue.push(time, phase, ev);
    }

    fn record(&mut self, kind: TraceKind, pkt: &Packet, link: LinkId) {
        if self.cfg.record_packets {
            self.records.push(TraceRecord {
                time: self.now,
                sent_at: pkt.sent_at,
                kind,
                flow: pkt.flow,
                pkt: pkt.id,
                size_bits: pkt.size_bits,
                link,
            });
        }
    }

    fn run(&mut self) -> Result<(), SimError> {
        let mut processed = 0u64;
        while let Some((t, ev)) = self.queue.pop() {
            self.now = t;
            if ev.is_traffic() {
                self.traffic_pending -= 1;
            }
            processed += 1;
            self.dispatch(ev)?;
            if self.cfg.check_invariants {
                self.check_counters()?;
            }
            if self.traffic_pending == 0 && self.has_active_closed_loop() {
                return Err(SimError::Stalled { time: self.now });
            }
        }
        self.processed = processed;
        Ok(())
    }

    fn has_active_closed_loop(&self) -> bool {
        self.endpoints.iter().any(|e| match e {
            Endpoint::Rrrp { sender, .. } => sender.is_active(),
            Endpoint::Reno { sender, .. } => sender.is_active(),
            Endpoint::Poisson(_) => false,
        })
    }

    fn dispatch(&mut self, ev: Event) -> Result<(), SimError> {
        match ev {
            Event::TxComplete(link) => self.on_tx_complete(link),
            Event::Arrive(pkt) => self.on_arrive(pkt),
            Event::AckArrive(pkt) => self.on_ack(pkt),
            Event::SendTick { flow, generation } => {
                if let Endpoint::Rrrp { sender, .. } = &mut self.endpoints[flow.index()] {
                    if let Some((pkt, next)) = sender.on_tick(generation, self.now) {
                        let gen = sender.generation();
                        self.push(next, Phase::Other, Event::SendTick { flow, generation: gen });
                        self.inject(pkt);
                    }
                }
            }
            Event::PoissonArrival { flow, generation } => {
                if let Endpoint::Poisson(src) = &mut self.endpoints[flow.index()] {
                    if let Some((pkt, next)) = src.on_arrival(generation, self.now) {
                        self.push(next, Phase::Other, Event::PoissonArrival { flow, generation });
                        self.inject(pkt);
                    }
                }
            }
            Event::RtoTimer { flow, generation } => {
                if let Endpoint::Reno { sender, .. } = &mut self.endpoints[flow.index()] {
                    let mut out = std::mem::take(&mut self.scratch);
                    let cmd = sender.on_timeout(generation, self.now, &mut out);
                    self.apply_reno(flow, cmd, &mut out);
                    self.scratch = out;
                }
            }
            Event::Sample => self.on_sample()?,
            Event::Action(a) => self.on_action(a),
        }
        Ok(())
    }

    fn inject(&mut self, mut pkt: Packet) {
        pkt.hop = 0;
        let first = self.topo.flows()[pkt.flow.index()].path[0];
        self.counters[pkt.flow.index()].sent += 1;
        self.record(TraceKind::Sent, &pkt, first);
        self.offer(first, pkt);
    }

    fn offer(&mut self, link: LinkId, pkt: Packet) {
        let flow = pkt.flow.index();
        match self.links[link.index()].enqueue(pkt, self.now) {
            EnqueueOutcome::Transmitting { done_at } => {
                self.counters[flow].queued += 1;
                self.push(done_at, Phase::TransmissionComplete, Event::TxComplete(link));
            }
            EnqueueOutcome::Queued => {
                self.counters[flow].queued += 1;
                if link == self.topo.bottleneck() {
                    let q = self.links[link.index()].queue_len();
                    self.max_bottleneck_queue = self.max_bottleneck_queue.max(q);
                }
            }
            EnqueueOutcome::Dropped(p) => {
                self.counters[flow].dropped += 1;
                self.record(TraceKind::Dropped, &p, link);
            }
        }
    }

    fn on_tx_complete(&mut self, link: LinkId) {
        let Some((mut pkt, next)) = self.links[link.index()].complete_transmission(self.now) else {
            return;
        };
        if let Some(t) = next {
            self.push(t, Phase::TransmissionComplete, Event::TxComplete(link));
        }
        let c = &mut self.counters[pkt.flow.index()];
        c.queued -= 1;
        c.propagating += 1;
        pkt.hop += 1;
        let delay = self.links[link.index()].prop_delay();
        self.push(self.now + delay, Phase::Other, Event::Arrive(pkt));
    }

    fn on_arrive(&mut self, pkt: Packet) {
        let route = &self.topo.flows()[pkt.flow.index()];
        let flow = pkt.flow.index();
        self.counters[flow].propagating -= 1;
        if (pkt.hop as usize) < route.path.len() {
            let link = route.path[pkt.hop as usize];
            self.offer(link, pkt);
            return;
        }
        let last = *route.path.last().expect("paths are non-empty");
        let reverse = route.reverse_delay;
        self.counters[flow].delivered += 1;
        self.record(TraceKind::Delivered, &pkt, last);
        let ack = match &mut self.endpoints[flow] {
            Endpoint::Rrrp { receiver, .. } => Some(receiver.on_data(&pkt, self.now, self.cfg.ack_bits)),
            Endpoint::Reno { receiver, .. } => Some(receiver.on_data(&pkt, self.now, self.cfg.ack_bits)),
            Endpoint::Poisson(_) => None,
        };
        if let Some(ack) = ack {
            self.push(self.now + reverse, Phase::Other, Event::AckArrive(ack));
        }
    }

    fn on_ack(&mut self, ack: Packet) {
        let flow = ack.flow;
        match &mut self.endpoints[flow.index()] {
            Endpoint::Rrrp { sender, .. } => {
                if !sender.is_active() {
                    return;
                }
                self.counters[flow.index()].acks_received += 1;
                if let Some((t, generation)) = sender.on_ack(&ack, self.now) {
                    self.push(t, Phase::Other, Event::SendTick { flow, generation });
                }
            }
            Endpoint::Reno { sender, .. } => {
                if !sender.is_active() {
                    return;
                }
                self.counters[flow.index()].acks_received += 1;
                let mut out = std::mem::take(&mut self.scratch);
                let cmd = sender.on_ack(&ack, self.now, &mut out);
                self.apply_reno(flow, cmd, &mut out);
                self.scratch = out;
            }
            Endpoint::Poisson(_) => {}
        }
    }

    fn apply_reno(&mut self, flow: FlowId, cmd: TimerCmd, out: &mut Vec<Packet>) {
        if let TimerCmd::Arm { deadline, generation } = cmd {
            self.push(deadline, Phase::Other, Event::RtoTimer { flow, generation });
        }
        for pkt in out.drain(..) {
            self.inject(pkt);
        }
    }

    fn on_action(&mut self, action: Action) {
        match action {
            Action::Start { flow } => match &mut self.endpoints[flow.index()] {
                Endpoint::Rrrp { sender, receiver } => {
                    receiver.reset();
                    let (t, generation) = sender.start(self.now);
                    self.push(t, Phase::Other, Event::SendTick { flow, generation });
                }
                Endpoint::Reno { sender, .. } => {
                    if sender.is_active() {
                        return;
                    }
                    let mut out = std::mem::take(&mut self.scratch);
                    let cmd = sender.start(self.now, &mut out);
                    self.apply_reno(flow, cmd, &mut out);
                    self.scratch = out;
                }
                Endpoint::Poisson(src) => {
                    if let Some((t, generation)) = src.start(self.now) {
                        self.push(t, Phase::Other, Event::PoissonArrival { flow, generation });
                    }
                }
            },
            Action::Stop { flow } => match &mut self.endpoints[flow.index()] {
                Endpoint::Rrrp { sender, .. } => sender.stop(),
                Endpoint::Reno { sender, .. } => {
                    sender.stop();
                }
                Endpoint::Poisson(src) => src.stop(),
            },
            Action::SetRate { flow, rate } => {
                if let Endpoint::Poisson(src) = &mut self.endpoints[flow.index()] {
                    if let Some((t, generation)) = src.set_rate(rate, self.now) {
                        self.push(t, Phase::Other, Event::PoissonArrival { flow, generation });
                    }
                }
            }
            Action::SetCapacity { link, capacity } => {
                self.links[link.index()].set_capacity(capacity.bps());
            }
        }
    }

    fn on_sample(&mut self) -> Result<(), SimError> {
        let bn = &self.links[self.topo.bottleneck().index()];
        let mut flow_queue = vec![0u32; self.endpoints.len()];
        for p in bn.queued() {
            flow_queue[p.flow.index()] += 1;
        }
        let send_rate = self
            .endpoints
            .iter()
            .map(|e| match e {
                Endpoint::Rrrp { sender, .. } if sender.is_active() => sender.rate(),
                Endpoint::Reno { sender, .. } if sender.is_active() => sender.rate_estimate(),
                Endpoint::Poisson(src) if src.is_active() => src.rate(),
                _ => 0.0,
            })
            .collect();
        self.samples.push(Sample {
            time: self.now,
            bottleneck_queue: bn.queue_len() as u32,
            flow_queue,
            send_rate,
        });
        if self.cfg.check_invariants {
            self.check_links()?;
        }
        let next = self.cfg.sample_interval * self.samples.len() as f64;
        self.push(next, Phase::Other, Event::Sample);
        Ok(())
    }

    fn check_counters(&self) -> Result<(), SimError> {
        let mut total = FlowCounters::default();
        for (i, c) in self.counters.iter().enumerate() {
            if !c.balanced() {
                return Err(SimError::InvariantViolated(format!(
                    "flow {i} at t = {}: sent {} != delivered {} + dropped {} + queued {} + propagating {}",
                    self.now, c.sent, c.delivered, c.dropped, c.queued, c.propagating
                )));
            }
            total.sent += c.sent;
            total.delivered += c.delivered;
            total.dropped += c.dropped;
            total.queued += c.queued;
            total.propagating += c.propagating;
        }
        if !total.balanced() {
            return Err(SimError::InvariantViolated(format!("global conservation at t = {}", self.now)));
        }
        for (i, l) in self.links.iter().enumerate() {
            if l.queue_len() > l.spec().buffer_packets {
                return Err(SimError::InvariantViolated(format!(
                    "link {i} holds {} waiting packets, buffer is {}",
                    l.queue_len(),
                    l.spec().buffer_packets
                )));
            }
        }
        Ok(())
    }

    /// Cross-checks the per-flow queued counters against the link contents
    /// and FIFO order within each link.
    fn check_links(&self) -> Result<(), SimError> {
        let mut queued = vec![0u64; self.counters.len()];
        for l in &self.links {
            let mut last_id = vec![None::<u64>; self.counters.len()];
            for p in l.queued() {
                let f = p.flow.index();
                queued[f] += 1;
                if let Some(prev) = last_id[f] {
                    if p.id <= prev {
                        return Err(SimError::InvariantViolated(format!("flow {f} reordered inside a link")));
                    }
                }
                last_id[f] = Some(p.id);
            }
        }
        for (i, (q, c)) in queued.iter().zip(&self.counters).enumerate() {
            if *q != c.queued {
                return Err(SimError::InvariantViolated(format!(
                    "flow {i}: {q} packets in links but counter says {}",
                    c.queued
                )));
            }
        }
        Ok(())
    }

    fn finish(self) -> EventLog {
        let mut counters = self.counters;
        let flows = self
            .endpoints
            .iter()
            .enumerate()
            .map(|(i, e)| {
                if let Endpoint::Reno { sender, .. } = e {
                    counters[i].retransmissions = sender.retransmissions;
                    counters[i].timeouts = sender.timeouts;
                }
                let route = &self.topo.flows()[i];
                FlowInfo {
                    id: FlowId(i as u32),
                    protocol: route.kind.protocol(),
                    packet_bits: route.kind.packet_bits(),
                    counters: counters[i],
                }
            })
            .collect();
        EventLog {
            records: self.records,
            samples: self.samples,
            flows,
            bottleneck: self.topo.bottleneck(),
            sample_interval: self.cfg.sample_interval,
            t_end: self.cfg.t_end,
            max_bottleneck_queue: self.max_bottleneck_queue,
            events_processed: self.processed,
        }
    }
}
