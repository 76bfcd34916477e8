//! Degree distributions of LDPC ensembles in edge and node perspective.
//!
//! A term `(i, c)` always refers to nodes of degree `i`. In edge perspective it
//! contributes `c x^(i-1)` to the polynomial, in node perspective `c x^i`.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Perspective {
    Edge,
    Node,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Variable,
    Check,
}

/// Sparse degree distribution with strictly positive coefficients summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreePolynomial<T> {
    terms: Vec<(u32, T)>,
    perspective: Perspective,
    side: Side,
}

impl<T: Real> DegreePolynomial<T> {
    /// Builds a distribution from `(degree, coefficient)` pairs.
    ///
    /// Zero coefficients are dropped. Degrees must be strictly increasing and at
    /// least 1. Coefficients must sum to one within `1e-12` (or the scalar's own
    /// resolution, if coarser); they are then renormalized exactly.
    pub fn new(terms: Vec<(u32, T)>, perspective: Perspective, side: Side) -> Result<Self> {
        let mut kept = Vec::with_capacity(terms.len());
        let mut last = 0u32;
        for (degree, coef) in terms {
            if degree == 0 {
                return Err(Error::InvalidDistribution("degree 0 is not allowed".into()));
            }
            if degree <= last {
                return Err(Error::InvalidDistribution(format!(
                    "degrees must be strictly increasing (saw {degree} after {last})"
                )));
            }
            last = degree;
            if !coef.is_finite() || coef < T::zero() {
                return Err(Error::InvalidDistribution(format!(
                    "coefficient {coef} of degree {degree} is negative or not finite"
                )));
            }
            if coef > T::zero() {
                kept.push((degree, coef));
            }
        }
        if kept.is_empty() {
            return Err(Error::InvalidDistribution("no positive coefficients".into()));
        }
        let total: T = kept.iter().map(|&(_, c)| c).sum();
        if (total - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::InvalidDistribution(format!(
                "coefficients sum to {total}, not 1"
            )));
        }
        for term in &mut kept {
            term.1 = term.1 / total;
        }
        Ok(DegreePolynomial {
            terms: kept,
            perspective,
            side,
        })
    }

    /// Single-term distribution, e.g. `regular(6, Edge, Check)` is `rho(x) = x^5`.
    pub fn regular(degree: u32, perspective: Perspective, side: Side) -> Result<Self> {
        Self::new(vec![(degree, T::one())], perspective, side)
    }

    pub fn terms(&self) -> &[(u32, T)] {
        &self.terms
    }

    pub fn perspective(&self) -> Perspective {
        self.perspective
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Coefficient attached to nodes of the given degree (zero when absent).
    pub fn coefficient(&self, degree: u32) -> T {
        self.terms
            .iter()
            .find(|&&(d, _)| d == degree)
            .map_or(T::zero(), |&(_, c)| c)
    }

    pub fn min_degree(&self) -> u32 {
        self.terms[0].0
    }

    pub fn max_degree(&self) -> u32 {
        self.terms[self.terms.len() - 1].0
    }

    fn exponent(&self, degree: u32) -> i32 {
        match self.perspective {
            Perspective::Edge => degree as i32 - 1,
            Perspective::Node => degree as i32,
        }
    }

    /// Evaluates the polynomial at `x` in `[0, 1]`.
    pub fn evaluate(&self, x: T) -> Result<T> {
        if !(x >= T::zero() && x <= T::one()) {
            return Err(Error::domain(
                "polynomial argument",
                x.to_f64().unwrap_or(f64::NAN),
                "[0, 1]",
            ));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: T) -> T {
        self.terms
            .iter()
            .map(|&(d, c)| c * x.powi(self.exponent(d)))
            .sum()
    }

    /// Lipschitz constant on `[0, 1]`, i.e. the derivative at 1.
    pub(crate) fn derivative_at_one(&self) -> T {
        self.terms
            .iter()
            .map(|&(d, c)| c * T::from_u32(self.exponent(d).max(0) as u32).unwrap())
            .sum()
    }

    /// `int_0^1 p(x) dx = sum_i c_i / i` for an edge-perspective distribution.
    pub fn integral(&self) -> Result<T> {
        self.require(Perspective::Edge)?;
        Ok(self.edge_integral())
    }

    fn edge_integral(&self) -> T {
        self.terms
            .iter()
            .map(|&(d, c)| c / T::from_u32(d).unwrap())
            .sum()
    }

    fn require(&self, expected: Perspective) -> Result<()> {
        if self.perspective != expected {
            return Err(Error::Perspective {
                expected: match expected {
                    Perspective::Edge => "edge",
                    Perspective::Node => "node",
                },
            });
        }
        Ok(())
    }

    /// Converts edge perspective to node perspective: `c_i / i` renormalized.
    pub fn to_node(&self) -> Result<Self> {
        self.require(Perspective::Edge)?;
        let norm = self.edge_integral();
        let terms = self
            .terms
            .iter()
            .map(|&(d, c)| (d, c / T::from_u32(d).unwrap() / norm))
            .collect();
        Ok(DegreePolynomial {
            terms,
            perspective: Perspective::Node,
            side: self.side,
        })
    }

    /// Converts node perspective to edge perspective: `i c_i` renormalized.
    pub fn to_edge(&self) -> Result<Self> {
        self.require(Perspective::Node)?;
        let norm: T = self
            .terms
            .iter()
            .map(|&(d, c)| c * T::from_u32(d).unwrap())
            .sum();
        let terms = self
            .terms
            .iter()
            .map(|&(d, c)| (d, c * T::from_u32(d).unwrap() / norm))
            .collect();
        Ok(DegreePolynomial {
            terms,
            perspective: Perspective::Edge,
            side: self.side,
        })
    }
}

/// Free-function form of [`DegreePolynomial::to_node`].
pub fn edge_to_node<T: Real>(d: &DegreePolynomial<T>) -> Result<DegreePolynomial<T>> {
    d.to_node()
}

/// Average number of edges per check node, `1 / int rho`.
pub fn average_right_degree<T: Real>(rho: &DegreePolynomial<T>) -> Result<T> {
    Ok(T::one() / rho.integral()?)
}

/// An LDPC ensemble `(lambda, rho)`, both in edge perspective.
///
/// Only asymptotic quantities are represented; there is no block length.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec<T> {
    lambda: DegreePolynomial<T>,
    rho: DegreePolynomial<T>,
}

impl<T: Real> EnsembleSpec<T> {
    pub fn new(lambda: DegreePolynomial<T>, rho: DegreePolynomial<T>) -> Result<Self> {
        if lambda.perspective != Perspective::Edge || rho.perspective != Perspective::Edge {
            return Err(Error::InvalidEnsemble(
                "lambda and rho must be edge-perspective".into(),
            ));
        }
        if lambda.side != Side::Variable || rho.side != Side::Check {
            return Err(Error::InvalidEnsemble(
                "lambda must be variable-side and rho check-side".into(),
            ));
        }
        let ens = EnsembleSpec { lambda, rho };
        ens.design_rate()?;
        Ok(ens)
    }

    /// The `(dv, dc)`-regular ensemble.
    pub fn regular(dv: u32, dc: u32) -> Result<Self> {
        Self::new(
            DegreePolynomial::regular(dv, Perspective::Edge, Side::Variable)?,
            DegreePolynomial::regular(dc, Perspective::Edge, Side::Check)?,
        )
    }

    pub fn lambda(&self) -> &DegreePolynomial<T> {
        &self.lambda
    }

    pub fn rho(&self) -> &DegreePolynomial<T> {
        &self.rho
    }

    /// Variable-node degree distribution from the node perspective.
    pub fn lambda_node(&self) -> DegreePolynomial<T> {
        self.lambda.to_node().expect("lambda is edge-perspective")
    }

    /// Check-node degree distribution from the node perspective.
    pub fn gamma_node(&self) -> DegreePolynomial<T> {
        self.rho.to_node().expect("rho is edge-perspective")
    }

    /// `1 - int rho / int lambda`; errors unless it lies in `(0, 1)`.
    pub fn design_rate(&self) -> Result<T> {
        design_rate(&self.lambda, &self.rho)
    }

    pub fn average_right_degree(&self) -> T {
        T::one() / self.rho.edge_integral()
    }
}

/// Design rate `1 - int rho / int lambda` of an edge-perspective pair.
pub fn design_rate<T: Real>(lambda: &DegreePolynomial<T>, rho: &DegreePolynomial<T>) -> Result<T> {
    let rate = T::one() - rho.integral()? / lambda.integral()?;
    if !(rate > T::zero() && rate < T::one()) {
        return Err(Error::InvalidEnsemble(format!(
            "design rate {rate} is not in (0, 1)"
        )));
    }
    Ok(rate)
}
