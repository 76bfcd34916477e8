//! Lower bounds on the decoding complexity per iteration (edges per
//! information bit) of message-passing decoders, as a function of the
//! multiplicative gap to capacity `eps = 1 - R/C_avg`.
//!
//! The punctured variants are obtained by applying the parallel-channel bound
//! to the decomposition built in [`crate::puncturing`]; results carry a
//! [`BoundVariant`] tag saying so.

use crate::channels::ChannelModel;
use crate::degree_distributions::EnsembleSpec;
use crate::error::{Error, Result};
use crate::puncturing::{ip_decomposition, rp_decomposition, PuncturingPattern};
use crate::rate_bounds::ParallelAssignment;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundVariant {
    Generic,
    /// All channels are erasure channels; the `1/(2 ln 2)` factor is dropped.
    BecVariant,
    /// Random puncturing, through the two-channel decomposition.
    RpDerived,
    /// Intentional puncturing, through the per-degree decomposition.
    IpDerived,
}

/// `chi_D(eps) >= k1 + k2 ln(1/eps)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityBound<T> {
    pub k1: T,
    pub k2: T,
    pub average_capacity: T,
    pub variant: BoundVariant,
}

impl<T: Real> ComplexityBound<T> {
    /// Evaluates the bound at gap `eps` in `(0, 1]`.
    pub fn at(&self, eps: T) -> Result<T> {
        if !(eps > T::zero() && eps <= T::one()) {
            return Err(Error::domain(
                "gap to capacity",
                eps.to_f64().unwrap_or(f64::NAN),
                "(0, 1]",
            ));
        }
        Ok(self.k1 + self.k2 * (T::one() / eps).ln())
    }
}

/// Free-function form of [`ComplexityBound::at`].
pub fn complexity_lower_bound_at<T: Real>(b: &ComplexityBound<T>, eps: T) -> Result<T> {
    b.at(eps)
}

/// Edges per information bit, `(1 - R_d)/R_d * a_R`.
pub fn decoding_complexity<T: Real>(e: &EnsembleSpec<T>) -> Result<T> {
    let r = e.design_rate()?;
    Ok((T::one() - r) / r * e.average_right_degree())
}

/// Bound for parallel channels. Uses the erasure variant when every channel
/// is a BEC.
pub fn parallel_complexity_bound<T: Real>(
    assign: &ParallelAssignment<T>,
) -> Result<ComplexityBound<T>> {
    let variant = if assign.all_bec() {
        BoundVariant::BecVariant
    } else {
        BoundVariant::Generic
    };
    complexity_bound(assign, variant)
}

/// Bound for parallel channels that always keeps the `1/(2 ln 2)` factor.
pub fn generic_complexity_bound<T: Real>(
    assign: &ParallelAssignment<T>,
) -> Result<ComplexityBound<T>> {
    complexity_bound(assign, BoundVariant::Generic)
}

fn complexity_bound<T: Real>(
    assign: &ParallelAssignment<T>,
    variant: BoundVariant,
) -> Result<ComplexityBound<T>> {
    for (index, e) in assign.entries().iter().enumerate() {
        if e.channel.capacity().value <= T::zero() {
            return Err(Error::ZeroCapacity { index });
        }
    }
    let cap = assign.average_capacity().value;
    let s = assign.mixed_moment(1)?.value;
    if !(s > T::zero() && s < T::one()) {
        return Err(Error::DegenerateLog(s.to_f64().unwrap_or(f64::NAN)));
    }
    let one = T::one();
    let log_s = s.ln();
    let k2 = -(one - cap) / (cap * log_s);
    let mut ratio = (one - cap) / cap;
    if variant != BoundVariant::BecVariant {
        ratio = ratio / (T::lit(2.0) * T::LN_2());
    }
    let k1 = k2 * ratio.ln();
    Ok(ComplexityBound {
        k1,
        k2,
        average_capacity: cap,
        variant,
    })
}

/// Bound for randomly punctured codes.
pub fn rp_complexity_bound<T: Real>(
    e: &EnsembleSpec<T>,
    ch: &ChannelModel<T>,
    alpha: T,
    p_pct: T,
) -> Result<ComplexityBound<T>> {
    let assign = rp_decomposition(e, ch, alpha, p_pct)?;
    Ok(ComplexityBound {
        variant: BoundVariant::RpDerived,
        ..parallel_complexity_bound(&assign)?
    })
}

/// Bound for intentionally punctured codes.
pub fn ip_complexity_bound<T: Real>(
    e: &EnsembleSpec<T>,
    ch: &ChannelModel<T>,
    pattern: &PuncturingPattern<T>,
) -> Result<ComplexityBound<T>> {
    let assign = ip_decomposition(e, ch, pattern)?;
    Ok(ComplexityBound {
        variant: BoundVariant::IpDerived,
        ..parallel_complexity_bound(&assign)?
    })
}
