//! TCP macroscopic response function and the stable bandwidth split between
//! one TCP flow and one RRR-controlled flow on a shared bottleneck.
//!
//! The split is where TCP's loss-vs-throughput curve meets the RRR flow's
//! feedback curve mirrored from the capacity: `p_tcp(X) == p_T(C - X)`.

use serde::{Deserialize, Serialize};

use crate::error::{positive, ModelError, Result};
use crate::feedback::FeedbackFunction;
use crate::units::{Probability, Rate};

/// Default response-function constant, `sqrt(3/2)` rounded.
pub const DEFAULT_K: f64 = 1.22;

/// `X = k * P / (rtt * sqrt(p))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcpFluidCurve {
    k: f64,
    packet_bits: f64,
    rtt: f64,
}

impl TcpFluidCurve {
    pub fn new(k: f64, packet_bits: f64, rtt: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&k) {
            return Err(ModelError::InvalidParameter(format!("k must lie in [1, 2], got {k}")));
        }
        Ok(TcpFluidCurve {
            k,
            packet_bits: positive("packet size", packet_bits)?,
            rtt: positive("rtt", rtt)?,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn packet_bits(&self) -> f64 {
        self.packet_bits
    }

    pub fn rtt(&self) -> f64 {
        self.rtt
    }

    /// `k * P / rtt`: the TCP rate at loss probability 1.
    pub fn scale(&self) -> f64 {
        self.k * self.packet_bits / self.rtt
    }
}

/// Stable bandwidth split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    /// TCP's share.
    pub x_tcp: Rate,
    /// The RRR flow's share, `capacity - x_tcp`.
    pub x_rrrp: Rate,
    /// Common loss / target reduction at the split.
    pub p_star: Probability,
}

pub fn tcp_rate_from_loss(curve: &TcpFluidCurve, p: Probability) -> Result<Rate> {
    if p.value() == 0.0 {
        return Err(ModelError::InfiniteRate);
    }
    Rate::new(curve.scale() / p.value().sqrt())
}

/// Inverse of [`tcp_rate_from_loss`], capped at 1.
pub fn tcp_loss_from_rate(curve: &TcpFluidCurve, x: Rate) -> Result<Probability> {
    let x = positive("TCP rate", x.bps())?;
    let r = curve.scale() / x;
    Ok(Probability::saturating(r * r))
}

/// Finds the split by bisection on `(0, capacity)`.
///
/// `p_tcp(X)` is non-increasing and `p_T(C - X)` non-decreasing in `X`, so
/// their difference has at most one sign change. A crossing where both
/// curves sit at their cap of 1 is degenerate and rejected.
pub fn solve_operating_point(
    curve: &TcpFluidCurve,
    feedback: &FeedbackFunction,
    capacity: Rate,
) -> Result<OperatingPoint> {
    let c = positive("capacity", capacity.bps())?;
    let no_point = |reason: &str| ModelError::NoOperatingPoint {
        capacity: c,
        reason: reason.to_string(),
    };
    let gap = |x: f64| -> Result<f64> {
        let p_tcp = tcp_loss_from_rate(curve, Rate::new(x)?)?.value();
        let p_rrr = feedback.target_rrr(Rate::new((c - x).max(0.0))?).value();
        Ok(p_tcp - p_rrr)
    };

    let mut lo = c * 1e-12;
    let mut hi = c * (1.0 - 1e-12);
    let g_lo = gap(lo)?;
    let g_hi = gap(hi)?;
    if g_lo < 0.0 || g_hi > 0.0 || (g_lo == 0.0 && g_hi == 0.0) {
        return Err(no_point("curves do not cross"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let p_star = tcp_loss_from_rate(curve, Rate::new(x)?)?;
    if p_star.value() >= 1.0 || p_star.value() <= 0.0 {
        return Err(no_point("crossing lies in the saturated region p = 1"));
    }
    Ok(OperatingPoint {
        x_tcp: Rate::new(x)?,
        x_rrrp: Rate::new(c - x)?,
        p_star,
    })
}

/// Closed-form split for the square-law pair (TCP curve against a TCP-like
/// feedback with parameter `x_t`): `X* = a C / (a + x_t)`,
/// `p* = ((a + x_t) / C)^2` with `a = k P / rtt`.
pub fn square_law_closed_form(curve: &TcpFluidCurve, x_t: Rate, capacity: Rate) -> Result<OperatingPoint> {
    let c = positive("capacity", capacity.bps())?;
    let b = positive("x_t", x_t.bps())?;
    let a = curve.scale();
    let p = ((a + b) / c).powi(2);
    if p >= 1.0 {
        return Err(ModelError::NoOperatingPoint {
            capacity: c,
            reason: format!("k*P/rtt + x_t = {} is not below capacity", a + b),
        });
    }
    let x = a * c / (a + b);
    Ok(OperatingPoint {
        x_tcp: Rate::new(x)?,
        x_rrrp: Rate::new(c - x)?,
        p_star: Probability::new(p)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs())
    }

    fn curve(k: f64) -> TcpFluidCurve {
        TcpFluidCurve::new(k, 12_000.0, 0.1).unwrap()
    }

    #[test]
    fn curve_validation() {
        assert!(TcpFluidCurve::new(0.9, 12_000.0, 0.1).is_err());
        assert!(TcpFluidCurve::new(2.1, 12_000.0, 0.1).is_err());
        assert!(TcpFluidCurve::new(1.5, 0.0, 0.1).is_err());
        assert!(TcpFluidCurve::new(1.5, 12_000.0, 0.0).is_err());
    }

    #[test]
    fn rate_from_loss_examples() {
        let c = curve(1.0);
        let r = tcp_rate_from_loss(&c, Probability::new(0.01).unwrap()).unwrap();
        assert!(close(r.bps(), 1.2e6, 1e-12));
        let r = tcp_rate_from_loss(&c, Probability::ONE).unwrap();
        assert!(close(r.bps(), 0.12e6, 1e-12));
        assert_eq!(tcp_rate_from_loss(&c, Probability::ZERO), Err(ModelError::InfiniteRate));

        let r1 = tcp_rate_from_loss(&curve(1.7), Probability::new(0.02).unwrap()).unwrap();
        let r4 = tcp_rate_from_loss(&curve(1.7), Probability::new(0.08).unwrap()).unwrap();
        assert!(close(r1.bps(), 2.0 * r4.bps(), 1e-12));
    }

    #[test]
    fn loss_from_rate_examples() {
        let p = tcp_loss_from_rate(&curve(1.0), Rate::new(1.2e6).unwrap()).unwrap();
        assert!(close(p.value(), 0.01, 1e-12));
        let p = tcp_loss_from_rate(&curve(2.0), Rate::new(1.2e6).unwrap()).unwrap();
        assert!(close(p.value(), 0.04, 1e-12));
        assert!(tcp_loss_from_rate(&curve(1.0), Rate::ZERO).is_err());
        for p in [1e-6, 1e-3, 0.25, 0.5, 1.0] {
            let c = curve(1.3);
            let x = tcp_rate_from_loss(&c, Probability::new(p).unwrap()).unwrap();
            assert!(close(tcp_loss_from_rate(&c, x).unwrap().value(), p, 1e-12));
        }
    }

    #[test]
    fn closed_form_example() {
        // a = k P / rtt = 0.2 Mbps
        let c = TcpFluidCurve::new(1.0, 20_000.0, 0.1).unwrap();
        let fb = FeedbackFunction::tcp_like(0.6e6).unwrap();
        let cap = Rate::from_mbps(10.0).unwrap();
        let op = solve_operating_point(&c, &fb, cap).unwrap();
        assert!(close(op.x_tcp.bps(), 2.5e6, 1e-9));
        assert!(close(op.x_rrrp.bps(), 7.5e6, 1e-9));
        assert!(close(op.p_star.value(), 0.0064, 1e-9));
        let cf = square_law_closed_form(&c, Rate::new(0.6e6).unwrap(), cap).unwrap();
        assert!(close(cf.x_tcp.bps(), 2.5e6, 1e-12));
    }

    #[test]
    fn symmetric_curves_split_evenly() {
        let c = curve(1.22);
        let fb = FeedbackFunction::tcp_like(c.scale()).unwrap();
        for cap in [1e6, 10e6, 1e9] {
            let op = solve_operating_point(&c, &fb, Rate::new(cap).unwrap()).unwrap();
            assert!(close(op.x_tcp.bps(), cap / 2.0, 1e-12));
        }
    }

    #[test]
    fn degenerate_parameters_have_no_point() {
        let c = curve(1.0); // a = 0.12 Mbps
        let fb = FeedbackFunction::tcp_like(1e6).unwrap();
        let err = solve_operating_point(&c, &fb, Rate::new(1e6).unwrap()).unwrap_err();
        assert!(matches!(err, ModelError::NoOperatingPoint { .. }));
        assert!(square_law_closed_form(&c, Rate::new(1e6).unwrap(), Rate::new(1e6).unwrap()).is_err());
    }

    #[test]
    fn works_for_other_feedback_shapes() {
        let c = curve(1.0);
        let fb = FeedbackFunction::fixed(0.01).unwrap();
        let op = solve_operating_point(&c, &fb, Rate::new(10e6).unwrap()).unwrap();
        // TCP at 1% loss runs at 1.2 Mbps regardless of capacity.
        assert!(close(op.x_tcp.bps(), 1.2e6, 1e-9));
    }

    #[test]
    fn share_monotone_in_parameters() {
        let cap = Rate::new(10e6).unwrap();
        let mut last = f64::INFINITY;
        for x_t in [0.1e6, 0.3e6, 0.6e6, 0.9e6, 2e6] {
            let fb = FeedbackFunction::tcp_like(x_t).unwrap();
            let op = solve_operating_point(&curve(1.22), &fb, cap).unwrap();
            assert!(op.x_tcp.bps() < last);
            last = op.x_tcp.bps();
        }
        let fb = FeedbackFunction::tcp_like(0.6e6).unwrap();
        let mut last = 0.0;
        for rtt in [0.4, 0.2, 0.1, 0.05] {
            let c = TcpFluidCurve::new(1.22, 12_000.0, rtt).unwrap();
            let op = solve_operating_point(&c, &fb, cap).unwrap();
            assert!(op.x_tcp.bps() > last);
            last = op.x_tcp.bps();
        }
    }
}
