//! Puncturing patterns and the equivalent parallel-channel view of punctured
//! transmission: a bit punctured with probability `pi` behaves like a bit sent
//! over the channel preceded by a BEC of erasure probability `pi`.

use crate::channels::ChannelModel;
use crate::degree_distributions::{DegreePolynomial, EnsembleSpec, Perspective};
use crate::error::{Error, Result};
use crate::rate_bounds::{check_rp_params, rp_xi, ParallelAssignment, ParallelEntry};
use crate::scalar::Real;

/// Puncturing rate `pi_j` per variable-node degree `j`.
///
/// Degrees not listed are not punctured.
#[derive(Debug, Clone, PartialEq)]
pub struct PuncturingPattern<T> {
    rates: Vec<(u32, T)>,
}

impl<T: Real> PuncturingPattern<T> {
    pub fn new(rates: Vec<(u32, T)>) -> Result<Self> {
        let mut last = 0u32;
        for &(degree, pi) in &rates {
            if degree == 0 || degree <= last {
                return Err(Error::InvalidPattern(format!(
                    "degrees must be positive and strictly increasing (saw {degree} after {last})"
                )));
            }
            last = degree;
            if !(pi >= T::zero() && pi <= T::one()) {
                return Err(Error::InvalidPattern(format!(
                    "pi_{degree} = {pi} is not in [0, 1]"
                )));
            }
        }
        Ok(PuncturingPattern { rates })
    }

    /// No puncturing at all.
    pub fn none() -> Self {
        PuncturingPattern { rates: Vec::new() }
    }

    /// Every degree present in `lambda` punctured at the same rate.
    pub fn uniform(lambda: &DegreePolynomial<T>, pi: T) -> Result<Self> {
        Self::new(lambda.terms().iter().map(|&(d, _)| (d, pi)).collect())
    }

    pub fn rates(&self) -> &[(u32, T)] {
        &self.rates
    }

    pub fn is_empty(&self) -> bool {
        self.rates.iter().all(|&(_, pi)| pi == T::zero())
    }

    /// `pi_j`, zero for unlisted degrees.
    pub fn rate(&self, degree: u32) -> T {
        self.rates
            .iter()
            .find(|&&(d, _)| d == degree)
            .map_or(T::zero(), |&(_, pi)| pi)
    }

    fn check_support(&self, d: &DegreePolynomial<T>) -> Result<()> {
        for &(degree, _) in &self.rates {
            if d.coefficient(degree) <= T::zero() {
                return Err(Error::PatternMismatch { degree });
            }
        }
        Ok(())
    }

    fn weighted(&self, d: &DegreePolynomial<T>) -> Result<T> {
        self.check_support(d)?;
        Ok(self
            .rates
            .iter()
            .map(|&(degree, pi)| d.coefficient(degree) * pi)
            .sum())
    }

    /// Average fraction of punctured code bits `p0 = sum_j Lambda_j pi_j`.
    pub fn average_puncturing_rate(&self, lambda_node: &DegreePolynomial<T>) -> Result<T> {
        if lambda_node.perspective() != Perspective::Node {
            return Err(Error::Perspective { expected: "node" });
        }
        self.weighted(lambda_node)
    }

    /// Fraction of edges attached to punctured bits, `sum_j lambda_j pi_j`.
    pub fn edge_puncturing_rate(&self, lambda: &DegreePolynomial<T>) -> Result<T> {
        if lambda.perspective() != Perspective::Edge {
            return Err(Error::Perspective { expected: "edge" });
        }
        self.weighted(lambda)
    }
}

/// Free-function form of [`PuncturingPattern::average_puncturing_rate`].
pub fn average_puncturing_rate<T: Real>(
    pattern: &PuncturingPattern<T>,
    lambda_node: &DegreePolynomial<T>,
) -> Result<T> {
    pattern.average_puncturing_rate(lambda_node)
}

/// Design rate of the punctured code, `R'_d / (1 - p0)`.
pub fn punctured_design_rate<T: Real>(
    e: &EnsembleSpec<T>,
    pattern: &PuncturingPattern<T>,
) -> Result<T> {
    let p0 = pattern.average_puncturing_rate(&e.lambda_node())?;
    let rate = e.design_rate()? / (T::one() - p0);
    if !(rate > T::zero() && rate < T::one()) {
        return Err(Error::InvalidEnsemble(format!(
            "punctured design rate {rate} is not in (0, 1)"
        )));
    }
    Ok(rate)
}

fn require_plain<T: Real>(ch: &ChannelModel<T>) -> Result<()> {
    if ch.erasure_prefix() > T::zero() {
        return Err(Error::InvalidChannel(
            "decomposition takes the plain channel (erasure_prefix = 0)".into(),
        ));
    }
    Ok(())
}

/// One sub-channel per variable degree `j`: `p_j = Lambda_j`, `q_j = lambda_j`,
/// and the channel behind an erasure stage of probability `pi_j`.
pub fn ip_decomposition<T: Real>(
    e: &EnsembleSpec<T>,
    ch: &ChannelModel<T>,
    pattern: &PuncturingPattern<T>,
) -> Result<ParallelAssignment<T>> {
    require_plain(ch)?;
    pattern.check_support(e.lambda())?;
    let node = e.lambda_node();
    let entries = e
        .lambda()
        .terms()
        .iter()
        .map(|&(degree, q)| {
            Ok(ParallelEntry {
                p: node.coefficient(degree),
                q,
                channel: ch.with_erasure_prefix(pattern.rate(degree))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ParallelAssignment::new(entries)
}

/// Edge fraction attached to the a-priori selected bits in the random
/// puncturing model.
///
/// The selected set is not characterized by `(alpha, lambda)` alone, so this
/// is a reconstruction: the value for which the decomposition reproduces the
/// worst-case series argument `(1 - P_pct + xi) g_p` of the random-puncturing
/// rate bound, `1 - xi / P_pct`, or `alpha` when nothing is punctured.
pub fn rp_selected_edge_fraction<T: Real>(e: &EnsembleSpec<T>, alpha: T, p_pct: T) -> T {
    if p_pct == T::zero() {
        alpha
    } else {
        T::one() - rp_xi(e, alpha, p_pct) / p_pct
    }
}

/// Two sub-channels: the selected fraction `alpha` of bits behind an erasure
/// stage of probability `P_pct`, and the rest sent plainly. The second entry is
/// omitted when `alpha = 1`.
pub fn rp_decomposition<T: Real>(
    e: &EnsembleSpec<T>,
    ch: &ChannelModel<T>,
    alpha: T,
    p_pct: T,
) -> Result<ParallelAssignment<T>> {
    require_plain(ch)?;
    check_rp_params(alpha, p_pct)?;
    if alpha <= T::zero() {
        return Err(Error::domain("alpha", 0.0, "(0, 1]"));
    }
    let q_sel = rp_selected_edge_fraction(e, alpha, p_pct);
    let selected = ParallelEntry {
        p: alpha,
        q: q_sel,
        channel: ch.with_erasure_prefix(p_pct)?,
    };
    if alpha == T::one() {
        return ParallelAssignment::new(vec![selected]);
    }
    if !(q_sel > T::zero() && q_sel < T::one()) {
        return Err(Error::InvalidAssignment(format!(
            "selected edge fraction {q_sel} is not in (0, 1)"
        )));
    }
    ParallelAssignment::new(vec![
        selected,
        ParallelEntry {
            p: T::one() - alpha,
            q: T::one() - q_sel,
            channel: *ch,
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree_distributions::Side;

    fn table1() -> EnsembleSpec<f64> {
        EnsembleSpec::new(
            DegreePolynomial::new(
                vec![(2, 0.25105), (3, 0.30938), (4, 0.00104), (10, 0.43853)],
                Perspective::Edge,
                Side::Variable,
            )
            .unwrap(),
            DegreePolynomial::new(vec![(7, 0.63676), (8, 0.36324)], Perspective::Edge, Side::Check)
                .unwrap(),
        )
        .unwrap()
    }

    fn row2() -> PuncturingPattern<f64> {
        PuncturingPattern::new(vec![(2, 0.07886), (3, 0.01405), (4, 0.06081), (10, 0.07206)])
            .unwrap()
    }

    #[test]
    fn average_rates() {
        let e = table1();
        let node = e.lambda_node();
        assert_eq!(PuncturingPattern::none().average_puncturing_rate(&node).unwrap(), 0.0);
        let u = PuncturingPattern::uniform(e.lambda(), 0.3).unwrap();
        assert!((u.average_puncturing_rate(&node).unwrap() - 0.3).abs() < 1e-15);
        assert!((u.edge_puncturing_rate(e.lambda()).unwrap() - 0.3).abs() < 1e-15);
        assert!(u.average_puncturing_rate(e.lambda()).is_err());
    }

    #[test]
    fn row9_design_rate() {
        let e = table1();
        let p = PuncturingPattern::new(vec![(2, 0.52325), (3, 0.39074), (4, 0.01324), (10, 0.39436)])
            .unwrap();
        let r = punctured_design_rate(&e, &p).unwrap();
        assert!((r - 0.912).abs() < 2e-3, "{r}");
    }

    #[test]
    fn mismatched_pattern_is_rejected() {
        let e = table1();
        let p = PuncturingPattern::new(vec![(5, 0.1)]).unwrap();
        assert_eq!(
            p.average_puncturing_rate(&e.lambda_node()),
            Err(Error::PatternMismatch { degree: 5 })
        );
        let ch = ChannelModel::biawgn(1.0).unwrap();
        assert!(ip_decomposition(&e, &ch, &p).is_err());
    }

    #[test]
    fn pattern_validation() {
        assert!(PuncturingPattern::new(vec![(2, 1.2)]).is_err());
        assert!(PuncturingPattern::new(vec![(3, 0.1), (2, 0.1)]).is_err());
        assert!(PuncturingPattern::new(vec![(0, 0.1)]).is_err());
        assert!(PuncturingPattern::new(vec![(2, 1.0), (3, 0.0)]).is_ok());
    }

    #[test]
    fn empty_pattern_decomposition() {
        let e = table1();
        let ch = ChannelModel::biawgn(0.9).unwrap();
        let a = ip_decomposition(&e, &ch, &PuncturingPattern::none()).unwrap();
        assert_eq!(a.len(), 4);
        assert!(a.entries().iter().all(|x| x.channel.erasure_prefix() == 0.0));
    }

    #[test]
    fn row2_decomposition() {
        let e = table1();
        let ch = ChannelModel::biawgn(0.9).unwrap();
        let a = ip_decomposition(&e, &ch, &row2()).unwrap();
        let node = e.lambda_node();
        let prefixes: Vec<f64> = a.entries().iter().map(|x| x.channel.erasure_prefix()).collect();
        assert_eq!(prefixes, vec![0.07886, 0.01405, 0.06081, 0.07206]);
        for (x, &(d, lam)) in a.entries().iter().zip(e.lambda().terms()) {
            assert_eq!(x.q, lam);
            assert_eq!(x.p, node.coefficient(d));
        }
        let p0 = row2().average_puncturing_rate(&node).unwrap();
        let c = ch.capacity().value;
        assert!((a.average_capacity().value - (1.0 - p0) * c).abs() < 1e-12);
    }

    #[test]
    fn rp_edge_fraction() {
        let e = EnsembleSpec::<f64>::regular(3, 6).unwrap();
        let q = rp_selected_edge_fraction(&e, 0.5, 0.2);
        assert!((q - 2.0 / 3.0).abs() < 1e-15);
        assert!((rp_xi(&e, 0.5, 0.2) - 1.0 / 15.0).abs() < 1e-15);
        assert_eq!(rp_selected_edge_fraction(&e, 1.0, 0.2), 1.0);
        assert_eq!(rp_selected_edge_fraction(&e, 0.3, 0.0), 0.3);
    }

    #[test]
    fn rp_decomposition_shapes() {
        let e = EnsembleSpec::<f64>::regular(3, 6).unwrap();
        let ch = ChannelModel::biawgn(0.9).unwrap();
        let full = rp_decomposition(&e, &ch, 1.0, 0.2).unwrap();
        assert_eq!(full.len(), 1);
        let half = rp_decomposition(&e, &ch, 0.5, 0.2).unwrap();
        assert_eq!(half.len(), 2);
        let c = ch.capacity().value;
        assert!((half.average_capacity().value - (1.0 - 0.5 * 0.2) * c).abs() < 1e-12);
        assert!(rp_decomposition(&e, &ch, 0.0, 0.2).is_err());
        assert!(rp_decomposition(&e, &ch, 0.5, 1.0).is_err());
    }
}
