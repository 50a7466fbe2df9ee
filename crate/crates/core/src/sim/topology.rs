//! Links, flow paths and the dumbbell builder.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::link::LinkSpec;
use super::poisson::PoissonConfig;
use super::reno::RenoConfig;
use super::rrrp::RrrpConfig;
use super::{FlowId, LinkId, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "kebab-case")]
pub enum FlowKind {
    Rrrp(RrrpConfig),
    Reno(RenoConfig),
    Poisson(PoissonConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Rrrp,
    Reno,
    Poisson,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Rrrp => "rrrp",
            Protocol::Reno => "reno",
            Protocol::Poisson => "poisson",
        }
    }

    /// Acknowledged flows whose sender reacts to the network.
    pub fn is_closed_loop(self) -> bool {
        !matches!(self, Protocol::Poisson)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FlowKind {
    pub fn protocol(&self) -> Protocol {
        match self {
            FlowKind::Rrrp(_) => Protocol::Rrrp,
            FlowKind::Reno(_) => Protocol::Reno,
            FlowKind::Poisson(_) => Protocol::Poisson,
        }
    }

    pub fn packet_bits(&self) -> u32 {
        match self {
            FlowKind::Rrrp(c) => c.packet_bits,
            FlowKind::Reno(c) => c.packet_bits,
            FlowKind::Poisson(c) => c.packet_bits,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.packet_bits() == 0 {
            return Err(SimError::Config("packet size must be positive".into()));
        }
        match self {
            FlowKind::Rrrp(c) => c.validate(),
            FlowKind::Reno(_) => Ok(()),
            FlowKind::Poisson(_) => Ok(()),
        }
    }
}

/// A flow of the dumbbell. `access_delay` overrides the propagation delay of
/// this flow's access link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub kind: FlowKind,
    #[serde(default)]
    pub access_delay: Option<f64>,
}

impl FlowSpec {
    pub fn new(kind: FlowKind) -> Self {
        FlowSpec {
            kind,
            access_delay: None,
        }
    }

    pub fn with_access_delay(mut self, d: f64) -> Self {
        self.access_delay = Some(d);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowRoute {
    pub kind: FlowKind,
    pub path: Vec<LinkId>,
    /// One-way delay of the acknowledgment path.
    pub reverse_delay: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    links: Vec<LinkSpec>,
    flows: Vec<FlowRoute>,
    bottleneck: LinkId,
}

impl Topology {
    /// General constructor. The reverse path of each flow mirrors the
    /// propagation delays of its forward path.
    pub fn new(links: Vec<LinkSpec>, flows: Vec<(FlowKind, Vec<LinkId>)>, bottleneck: LinkId) -> Result<Self, SimError> {
        for l in &links {
            l.validate()?;
        }
        if bottleneck.index() >= links.len() {
            return Err(SimError::Config(format!("bottleneck {} is not a link", bottleneck.0)));
        }
        if links.len() > u32::MAX as usize || flows.len() > u32::MAX as usize {
            return Err(SimError::Config("too many links or flows".into()));
        }
        let mut routes = Vec::with_capacity(flows.len());
        for (i, (kind, path)) in flows.into_iter().enumerate() {
            kind.validate()?;
            if path.is_empty() || path.len() > u8::MAX as usize {
                return Err(SimError::Config(format!("flow {i} has an empty or overlong path")));
            }
            if let Some(bad) = path.iter().find(|l| l.index() >= links.len()) {
                return Err(SimError::Config(format!("flow {i} references unknown link {}", bad.0)));
            }
            let reverse_delay = path.iter().map(|l| links[l.index()].prop_delay).sum();
            routes.push(FlowRoute {
                kind,
                path,
                reverse_delay,
            });
        }
        Ok(Topology {
            links,
            flows: routes,
            bottleneck,
        })
    }

    pub fn links(&self) -> &[LinkSpec] {
        &self.links
    }

    pub fn flows(&self) -> &[FlowRoute] {
        &self.flows
    }

    pub fn flow(&self, id: FlowId) -> Option<&FlowRoute> {
        self.flows.get(id.index())
    }

    pub fn bottleneck(&self) -> LinkId {
        self.bottleneck
    }

    /// Round trip without queuing or transmission time.
    pub fn base_rtt(&self, id: FlowId) -> Option<f64> {
        self.flow(id).map(|f| 2.0 * f.reverse_delay)
    }
}

/// Per-flow access link, a shared bottleneck (link 0) and a per-flow egress
/// link. Poisson background enters the bottleneck directly.
pub fn build_dumbbell(access: LinkSpec, bottleneck: LinkSpec, flows: &[FlowSpec]) -> Result<Topology, SimError> {
    if flows.is_empty() {
        return Err(SimError::Config("a dumbbell needs at least one flow".into()));
    }
    let mut links = vec![bottleneck];
    let mut routes = Vec::with_capacity(flows.len());
    for spec in flows {
        let path = match spec.kind {
            FlowKind::Poisson(_) => vec![LinkId(0)],
            _ => {
                let a = LinkId(links.len() as u32);
                links.push(access.with_delay(spec.access_delay.unwrap_or(access.prop_delay)));
                let e = LinkId(links.len() as u32);
                links.push(access);
                vec![a, LinkId(0), e]
            }
        };
        routes.push((spec.kind, path));
    }
    Topology::new(links, routes, LinkId(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feedback::FeedbackFunction;
    use crate::units::Rate;

    fn rrrp() -> FlowKind {
        FlowKind::Rrrp(RrrpConfig::new(
            FeedbackFunction::fixed(0.01).unwrap(),
            Rate::from_mbps(1.6).unwrap(),
            12_000,
        ))
    }

    #[test]
    fn default_dumbbell_rtt_is_60ms() {
        let access = LinkSpec::new(100e6, 0.01, 1000).unwrap();
        let bn = LinkSpec::new(10e6, 0.01, 50).unwrap();
        let t = build_dumbbell(access, bn, &[FlowSpec::new(rrrp())]).unwrap();
        assert!((t.base_rtt(FlowId(0)).unwrap() - 0.06).abs() < 1e-15);
        assert_eq!(t.flows()[0].path, vec![LinkId(1), LinkId(0), LinkId(2)]);
    }

    #[test]
    fn access_delay_override() {
        let access = LinkSpec::new(100e6, 0.001, 1000).unwrap();
        let bn = LinkSpec::new(10e6, 0.001, 50).unwrap();
        let flows: Vec<_> = [0.001, 0.01, 0.05, 0.1]
            .iter()
            .map(|&d| FlowSpec::new(rrrp()).with_access_delay(d))
            .collect();
        let t = build_dumbbell(access, bn, &flows).unwrap();
        let rtts: Vec<f64> = (0..4).map(|i| t.base_rtt(FlowId(i)).unwrap()).collect();
        for (r, want) in rtts.iter().zip([0.006, 0.024, 0.104, 0.204]) {
            assert!((r - want).abs() < 1e-12, "{rtts:?}");
        }
    }

    #[test]
    fn rejects_empty_and_inconsistent() {
        let access = LinkSpec::new(100e6, 0.01, 1000).unwrap();
        let bn = LinkSpec::new(10e6, 0.01, 50).unwrap();
        assert!(matches!(build_dumbbell(access, bn, &[]), Err(SimError::Config(_))));
        let bad = Topology::new(vec![bn], vec![(rrrp(), vec![LinkId(3)])], LinkId(0));
        assert!(matches!(bad, Err(SimError::Config(_))));
        let bad = Topology::new(vec![bn], vec![(rrrp(), vec![])], LinkId(0));
        assert!(matches!(bad, Err(SimError::Config(_))));
        let mut neg = bn;
        neg.prop_delay = -1.0;
        assert!(build_dumbbell(access, neg, &[FlowSpec::new(rrrp())]).is_err());
    }
}
