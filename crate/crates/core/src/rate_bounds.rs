//! Upper bounds on the design rate of LDPC ensembles that achieve vanishing
//! bit error probability over parallel MBIOS channels, and their punctured
//! specializations.
//!
//! All bounds share the form
//!
//! ```text
//! R <= 1/(1-x) * [ 1 - (1 - (1-x) C) / (1 - 1/(2 ln 2) * sum_p Gamma(arg_p) / (p (2p-1))) ]
//! ```
//!
//! where `x` is the fraction of punctured bits (0 for the plain parallel
//! bound), `C` an average capacity and `arg_p` a mixture of channel moments
//! `g_p`. Only the numerator term and `arg_p` differ between the variants.
//!
//! # Series truncation
//!
//! Since every `g_p` is nonincreasing in `p` with limit `g_inf` (the mass at
//! `+inf`), the tail after `P` terms lies between `Gamma(arg_inf) R_P` and
//! `Gamma(arg_P) R_P`, with `R_P = 2 ln 2 - sum_{p<=P} 1/(p(2p-1))`. The sum
//! stops once half that bracket is below the tolerance, and the midpoint is
//! used for the tail. For erasure channels the bracket is empty after one
//! term, so the BEC closed form is recovered exactly.

use crate::channels::{BoundResult, ChannelKind, ChannelModel};
use crate::degree_distributions::{DegreePolynomial, EnsembleSpec, Perspective, Side};
use crate::error::{Error, Result};
use crate::puncturing::PuncturingPattern;
use crate::scalar::Real;

/// One sub-channel of a parallel assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallelEntry<T> {
    /// Fraction of code bits sent over this channel.
    pub p: T,
    /// Fraction of edges attached to those bits.
    pub q: T,
    pub channel: ChannelModel<T>,
}

/// How code bits and graph edges split over `J` independent channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelAssignment<T> {
    entries: Vec<ParallelEntry<T>>,
}

impl<T: Real> ParallelAssignment<T> {
    /// Requires every `p_j, q_j` in `(0, 1]` and both fractions summing to one
    /// within `1e-10`.
    pub fn new(entries: Vec<ParallelEntry<T>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidAssignment("no channels".into()));
        }
        for (j, e) in entries.iter().enumerate() {
            for (name, v) in [("p", e.p), ("q", e.q)] {
                if !(v > T::zero() && v <= T::one()) {
                    return Err(Error::InvalidAssignment(format!(
                        "{name}_{j} = {v} is not in (0, 1]"
                    )));
                }
            }
        }
        let sp: T = entries.iter().map(|e| e.p).sum();
        let sq: T = entries.iter().map(|e| e.q).sum();
        let tol = T::tol(1e-10);
        if (sp - T::one()).abs() > tol || (sq - T::one()).abs() > tol {
            return Err(Error::InvalidAssignment(format!(
                "fractions sum to p: {sp}, q: {sq}; both must be 1"
            )));
        }
        Ok(ParallelAssignment { entries })
    }

    /// A single channel carrying every bit.
    pub fn single(channel: ChannelModel<T>) -> Self {
        ParallelAssignment {
            entries: vec![ParallelEntry {
                p: T::one(),
                q: T::one(),
                channel,
            }],
        }
    }

    pub fn entries(&self) -> &[ParallelEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn all_bec(&self) -> bool {
        self.entries.iter().all(|e| e.channel.is_bec())
    }

    /// `sum_j p_j C_j`.
    pub fn average_capacity(&self) -> BoundResult<T> {
        let mut value = T::zero();
        let mut err = T::zero();
        for e in &self.entries {
            let c = e.channel.capacity();
            value = value + e.p * c.value;
            err = err + e.p * c.error_bound;
        }
        BoundResult::approx(value, err)
    }

    /// `sum_j q_j g_{j,p}`.
    pub fn mixed_moment(&self, p: u32) -> Result<BoundResult<T>> {
        let mut value = T::zero();
        let mut err = T::zero();
        for e in &self.entries {
            let g = e.channel.g_moment(p)?;
            value = value + e.q * g.value;
            err = err + e.q * g.error_bound;
        }
        Ok(BoundResult::approx(value, err))
    }

    /// Groups equal base channels so that each `g_p` is computed once.
    fn moment_mixture(&self) -> MomentMixture<T> {
        let mut parts: Vec<(ChannelKind<T>, T)> = Vec::new();
        for e in &self.entries {
            let w = e.q * (T::one() - e.channel.erasure_prefix());
            match parts.iter_mut().find(|(k, _)| *k == e.channel.kind()) {
                Some(part) => part.1 = part.1 + w,
                None => parts.push((e.channel.kind(), w)),
            }
        }
        let limit = self
            .entries
            .iter()
            .map(|e| e.q * e.channel.g_limit())
            .sum();
        MomentMixture { parts, limit }
    }
}

/// `arg_p = sum_k w_k g_base_k(p)`.
struct MomentMixture<T> {
    parts: Vec<(ChannelKind<T>, T)>,
    limit: T,
}

impl<T: Real> MomentMixture<T> {
    fn scaled(channel: &ChannelModel<T>, factor: T) -> Self {
        let pass = T::one() - channel.erasure_prefix();
        MomentMixture {
            parts: vec![(channel.kind(), factor * pass)],
            limit: factor * channel.g_limit(),
        }
    }

    /// Mixed moments and their errors for `p = first .. first + count`.
    fn block(&self, first: u32, count: usize) -> Vec<(T, T)> {
        let mut out = vec![(T::zero(), T::zero()); count];
        for (kind, w) in &self.parts {
            for (slot, g) in out.iter_mut().zip(kind.g_base_block(first, count)) {
                slot.0 = slot.0 + *w * g.value;
                slot.1 = slot.1 + *w * g.error_bound;
            }
        }
        out
    }
}

/// Controls truncation of the infinite series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    /// Stop once the tail uncertainty is below this.
    pub tolerance: f64,
    /// Hard cap on the number of terms.
    pub max_terms: usize,
    /// Sum exactly this many terms (used to audit the tail estimate).
    pub fixed_terms: Option<usize>,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            tolerance: 1e-10,
            max_terms: 200_000,
            fixed_terms: None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct SeriesSum<T> {
    value: T,
    error: T,
    terms: usize,
    clamped: bool,
}

/// `sum_{p>=1} Gamma(arg_p) / (p (2p-1))` with the tail bracketed as described
/// in the module docs.
fn gamma_series<T: Real>(
    gamma: &DegreePolynomial<T>,
    mixture: &MomentMixture<T>,
    cfg: &SeriesConfig,
) -> SeriesSum<T> {
    let one = T::one();
    let lipschitz = gamma.derivative_at_one();
    let tol = T::tol(cfg.tolerance);
    let mut clamped = false;
    let mut clamp = |a: T| {
        if a > one {
            clamped = true;
            one
        } else {
            a.max(T::zero())
        }
    };

    let limit = clamp(mixture.limit);
    let gamma_limit = gamma.eval_unchecked(limit);
    let mut remainder = T::lit(2.0) * T::LN_2();
    let mut partial = T::zero();
    let mut err = T::zero();
    let mut p = 0usize;
    let mut block: Vec<(T, T)> = Vec::new();
    let mut block_start = 1usize;
    loop {
        p += 1;
        if p >= block_start + block.len() {
            // Moments are fetched in geometrically growing blocks.
            block_start = p;
            let len = p.clamp(8, 4096);
            block = mixture.block(p as u32, len);
        }
        let pf = T::from_usize_lossy(p);
        let weight = one / (pf * (T::lit(2.0) * pf - one));
        let (a, ea) = block[p - block_start];
        let a = clamp(a);
        partial = partial + weight * gamma.eval_unchecked(a);
        err = err + weight * lipschitz * ea;
        remainder = remainder - weight;

        let upper = gamma.eval_unchecked((a + ea).min(one)) * remainder.max(T::zero());
        let lower = gamma_limit * remainder.max(T::zero());
        let half_width = T::lit(0.5) * (upper - lower).max(T::zero());
        let done = match cfg.fixed_terms {
            Some(n) => p >= n.max(1),
            None => half_width <= tol || p >= cfg.max_terms,
        };
        if done {
            return SeriesSum {
                value: partial + T::lit(0.5) * (upper + lower),
                error: err + half_width,
                terms: p,
                clamped,
            };
        }
    }
}

/// `1/(1-x) * (1 - N/D)` with `N = 1 - (1-x) C` and `D = 1 - S/(2 ln 2)`,
/// propagating the errors of `C` and `S` by interval evaluation.
fn assemble<T: Real>(
    punctured: T,
    capacity: BoundResult<T>,
    series: SeriesSum<T>,
) -> Result<BoundResult<T>> {
    let one = T::one();
    let kept = one - punctured;
    let prefactor = one / kept;
    let num = one - kept * capacity.value;
    let num_err = kept * capacity.error_bound;
    let two_ln2 = T::lit(2.0) * T::LN_2();
    let den = one - series.value / two_ln2;
    let den_err = series.error / two_ln2;

    let finish = |value: T, error_bound: T| BoundResult {
        value,
        error_bound,
        series_terms: series.terms,
        argument_clamped: series.clamped,
    };

    if num <= T::zero() {
        // Noiseless transmission: the bound is trivially 1 (before rescaling).
        return Ok(finish(prefactor, prefactor * num_err / den.max(T::epsilon())));
    }
    if den <= T::zero() {
        return Err(Error::DegenerateDenominator(format!(
            "1 - S/(2 ln 2) = {den}"
        )));
    }
    let ratio = num / den;
    let error = if den - den_err <= T::zero() {
        T::infinity()
    } else {
        let hi = (num + num_err) / (den - den_err) - ratio;
        let lo = ratio - (num - num_err).max(T::zero()) / (den + den_err);
        hi.max(lo)
    };
    Ok(finish(prefactor * (one - ratio), prefactor * error))
}

fn check_gamma<T: Real>(gamma: &DegreePolynomial<T>) -> Result<()> {
    if gamma.perspective() != Perspective::Node || gamma.side() != Side::Check {
        return Err(Error::Perspective {
            expected: "node (check side)",
        });
    }
    Ok(())
}

/// Generic parallel-channel bound on the design rate; `gamma_cap` is the
/// check-node degree distribution from the node perspective.
pub fn parallel_rate_bound<T: Real>(
    assign: &ParallelAssignment<T>,
    gamma_cap: &DegreePolynomial<T>,
) -> Result<BoundResult<T>> {
    parallel_rate_bound_with(assign, gamma_cap, &SeriesConfig::default())
}

pub fn parallel_rate_bound_with<T: Real>(
    assign: &ParallelAssignment<T>,
    gamma_cap: &DegreePolynomial<T>,
    cfg: &SeriesConfig,
) -> Result<BoundResult<T>> {
    check_gamma(gamma_cap)?;
    let series = gamma_series(gamma_cap, &assign.moment_mixture(), cfg);
    assemble(T::zero(), assign.average_capacity(), series)
}

/// Closed-form bound for parallel erasure channels:
/// `1 - sum p_j eps_j / (1 - Gamma(1 - sum q_j eps_j))`.
pub fn bec_rate_bound<T: Real>(
    assign: &ParallelAssignment<T>,
    gamma_cap: &DegreePolynomial<T>,
) -> Result<BoundResult<T>> {
    check_gamma(gamma_cap)?;
    let mut bit_erasure = T::zero();
    let mut edge_erasure = T::zero();
    for (index, e) in assign.entries().iter().enumerate() {
        let ChannelKind::Bec { epsilon } = e.channel.kind() else {
            return Err(Error::NonBecChannel { index });
        };
        bit_erasure = bit_erasure + e.p * epsilon;
        edge_erasure = edge_erasure + e.q * epsilon;
    }
    if bit_erasure <= T::zero() {
        return Ok(BoundResult::exact(T::one()));
    }
    let den = T::one() - gamma_cap.evaluate((T::one() - edge_erasure).max(T::zero()))?;
    if den <= T::zero() {
        return Err(Error::DegenerateDenominator(
            "Gamma(1 - sum q_j eps_j) = 1".into(),
        ));
    }
    Ok(BoundResult::exact(T::one() - bit_erasure / den))
}

fn require_plain<T: Real>(ch: &ChannelModel<T>) -> Result<()> {
    if ch.erasure_prefix() > T::zero() {
        return Err(Error::InvalidChannel(
            "puncturing bounds take the plain channel (erasure_prefix = 0)".into(),
        ));
    }
    Ok(())
}

/// `2 (1 - alpha) P_pct int lambda`.
pub fn rp_xi<T: Real>(e: &EnsembleSpec<T>, alpha: T, p_pct: T) -> T {
    let lam_int = e.lambda().integral().expect("lambda is edge-perspective");
    T::lit(2.0) * (T::one() - alpha) * p_pct * lam_int
}

pub(crate) fn check_rp_params<T: Real>(alpha: T, p_pct: T) -> Result<()> {
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::domain("alpha", f(alpha), "[0, 1]"));
    }
    if !(p_pct >= T::zero() && p_pct < T::one()) {
        return Err(Error::domain("P_pct", f(p_pct), "[0, 1)"));
    }
    Ok(())
}

/// Bound for randomly punctured codes: a fraction `alpha` of the bits is
/// selected a priori and punctured at rate `p_pct`.
///
/// The series argument is `(1 - P_pct + xi) g_p`; if it exceeds 1 it is
/// clamped and `argument_clamped` is set on the result.
pub fn rp_rate_bound<T: Real>(
    e: &EnsembleSpec<T>,
    ch: &ChannelModel<T>,
    alpha: T,
    p_pct: T,
) -> Result<BoundResult<T>> {
    rp_rate_bound_with(e, ch, alpha, p_pct, &SeriesConfig::default())
}

pub fn rp_rate_bound_with<T: Real>(
    e: &EnsembleSpec<T>,
    ch: &ChannelModel<T>,
    alpha: T,
    p_pct: T,
    cfg: &SeriesConfig,
) -> Result<BoundResult<T>> {
    require_plain(ch)?;
    check_rp_params(alpha, p_pct)?;
    let factor = T::one() - p_pct + rp_xi(e, alpha, p_pct);
    let mixture = MomentMixture::scaled(ch, factor);
    let series = gamma_series(&e.gamma_node(), &mixture, cfg);
    assemble(alpha * p_pct, ch.capacity(), series)
}

/// Bound for intentionally punctured codes, where bits of degree `j` are
/// punctured at rate `pi_j`.
pub fn ip_rate_bound<T: Real>(
    e: &EnsembleSpec<T>,
    ch: &ChannelModel<T>,
    pattern: &PuncturingPattern<T>,
) -> Result<BoundResult<T>> {
    ip_rate_bound_with(e, ch, pattern, &SeriesConfig::default())
}

pub fn ip_rate_bound_with<T: Real>(
    e: &EnsembleSpec<T>,
    ch: &ChannelModel<T>,
    pattern: &PuncturingPattern<T>,
    cfg: &SeriesConfig,
) -> Result<BoundResult<T>> {
    require_plain(ch)?;
    let p0 = pattern.average_puncturing_rate(&e.lambda_node())?;
    let edge_punct = pattern.edge_puncturing_rate(e.lambda())?;
    let mixture = MomentMixture::scaled(ch, T::one() - edge_punct);
    let series = gamma_series(&e.gamma_node(), &mixture, cfg);
    assemble(p0, ch.capacity(), series)
}
