//! Macroscopic fluid relations between input rate, cross traffic, capacity,
//! loss and relative rate reduction (RRR) for a single link and for a path
//! of links in series.
//!
//! Everything here is pure algebra over validated inputs. Invalid input is an
//! error, never silently clamped.

use crate::error::{positive, ModelError, Result};
use crate::units::{Probability, Rate};

/// Output rate of a flow crossing a link of capacity `capacity` shared with
/// cross traffic `x_c`.
///
/// Uncongested links pass the flow unchanged. A congested link serves flows
/// in proportion to their input rates. The boundary `x_in + x_c == capacity`
/// takes the uncongested branch.
pub fn link_output_rate(x_in: Rate, x_c: Rate, capacity: Rate) -> Result<Rate> {
    let c = positive("capacity", capacity.bps())?;
    let offered = x_in.bps() + x_c.bps();
    if offered <= c {
        Ok(x_in)
    } else {
        Rate::new(c * x_in.bps() / offered)
    }
}

/// Cross-traffic share of a congested link under the same proportional rule.
pub fn cross_traffic_share(x_in: Rate, x_c: Rate, capacity: Rate) -> Result<Rate> {
    link_output_rate(x_c, x_in, capacity)
}

/// `(x_in - x_out) / x_in`.
pub fn relative_rate_reduction(x_in: Rate, x_out: Rate) -> Result<Probability> {
    if x_in.is_zero() {
        return Err(ModelError::UndefinedRrr);
    }
    if x_out > x_in {
        return Err(ModelError::OutputExceedsInput {
            x_in: x_in.bps(),
            x_out: x_out.bps(),
        });
    }
    // x_out <= x_in and both non-negative, so the quotient is in [0, 1].
    Probability::new((x_in.bps() - x_out.bps()) / x_in.bps())
}

/// Path RRR from per-link RRRs: `1 - prod(1 - p_i)`. The empty path is
/// lossless.
pub fn compose_path_rrr(per_link: &[Probability]) -> Result<Probability> {
    Probability::new(1.0 - survival(per_link))
}

/// Output rate after traversing links with the given per-link reductions:
/// `x_in * prod(1 - p_i)`.
pub fn path_output_rate(x_in: Rate, per_link: &[Probability]) -> Result<Rate> {
    Rate::new(x_in.bps() * survival(per_link))
}

fn survival(per_link: &[Probability]) -> f64 {
    per_link.iter().map(|p| p.complement()).product()
}

/// Steady input rate at which a flow alone against constant cross traffic
/// `x_c` sees exactly the relative rate reduction `p` on a link of capacity
/// `capacity`, together with the resulting output rate.
///
/// Below congestion no reduction is observed, so for `p > 0` the flow must
/// push the link past capacity: `x_in = C / (1 - p) - x_c`. For `p == 0` the
/// flow settles anywhere at or below the residual capacity; the residual
/// capacity itself is returned.
pub fn equilibrium_for_reduction(p: Probability, x_c: Rate, capacity: Rate) -> Result<(Rate, Rate)> {
    let c = positive("capacity", capacity.bps())?;
    if p.value() >= 1.0 {
        return Err(ModelError::OutOfUnitInterval {
            what: "target reduction (must be < 1)",
            value: p.value(),
        });
    }
    let x_in = if p.value() == 0.0 {
        (c - x_c.bps()).max(0.0)
    } else {
        (c / p.complement() - x_c.bps()).max(0.0)
    };
    let x_in = Rate::new(x_in)?;
    let x_out = link_output_rate(x_in, x_c, capacity)?;
    Ok((x_in, x_out))
}
