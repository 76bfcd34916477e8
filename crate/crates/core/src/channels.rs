//! Memoryless binary-input output-symmetric channels.
//!
//! Every channel may be preceded by an erasure stage: with probability
//! `erasure_prefix` the decoder sees LLR 0 instead of the channel output. This
//! is how a punctured bit looks to the decoder.
//!
//! LLR densities are conditioned on the input symbol `+1` (code bit 0), so the
//! mean LLR is positive. The BIAWGN LLR is Gaussian with mean `2/sigma^2` and
//! variance `4/sigma^2`.

use crate::error::{Error, Result};
use crate::quadrature;
use crate::scalar::{binary_entropy, gaussian_tail, Real};

/// A value computed numerically together with a bound on its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult<T> {
    pub value: T,
    pub error_bound: T,
    /// Number of series terms summed (0 when no series is involved).
    pub series_terms: usize,
    /// Set when a polynomial argument exceeded 1 and was clamped.
    pub argument_clamped: bool,
}

impl<T: Real> BoundResult<T> {
    pub fn exact(value: T) -> Self {
        BoundResult {
            value,
            error_bound: T::zero(),
            series_terms: 0,
            argument_clamped: false,
        }
    }

    pub fn approx(value: T, error_bound: T) -> Self {
        BoundResult {
            value,
            error_bound,
            series_terms: 0,
            argument_clamped: false,
        }
    }

    /// Multiplies by an exactly known factor.
    pub fn scale(self, factor: T) -> Self {
        BoundResult {
            value: self.value * factor,
            error_bound: self.error_bound * factor.abs(),
            ..self
        }
    }
}

/// The channel without its erasure stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelKind<T> {
    /// Binary erasure channel with erasure probability `epsilon`.
    Bec { epsilon: T },
    /// Binary symmetric channel with crossover probability `delta`.
    Bsc { delta: T },
    /// Binary-input AWGN channel with unit-energy antipodal inputs and noise std `sigma`.
    Biawgn { sigma: T },
}

/// A point mass of an LLR distribution. `llr` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMass<T> {
    pub llr: T,
    pub weight: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel<T> {
    kind: ChannelKind<T>,
    erasure_prefix: T,
}

/// Number of LLR standard deviations covered by the quadratures.
const TAIL_SIGMAS: f64 = 40.0;

impl<T: Real> ChannelModel<T> {
    pub fn bec(epsilon: T) -> Result<Self> {
        Self::new(ChannelKind::Bec { epsilon }, T::zero())
    }

    pub fn bsc(delta: T) -> Result<Self> {
        Self::new(ChannelKind::Bsc { delta }, T::zero())
    }

    pub fn biawgn(sigma: T) -> Result<Self> {
        Self::new(ChannelKind::Biawgn { sigma }, T::zero())
    }

    /// Validates parameters. Zero-capacity base channels (`epsilon = 1`,
    /// `delta = 0.5`) are rejected. A BEC behind an erasure stage is folded
    /// into a single BEC with `epsilon' = pi + (1 - pi) epsilon`.
    pub fn new(kind: ChannelKind<T>, erasure_prefix: T) -> Result<Self> {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        match kind {
            ChannelKind::Bec { epsilon } if !(epsilon >= T::zero() && epsilon < T::one()) => {
                return Err(Error::domain("BEC epsilon", f(epsilon), "[0, 1)"));
            }
            ChannelKind::Bsc { delta } if !(delta >= T::zero() && delta < T::lit(0.5)) => {
                return Err(Error::domain("BSC delta", f(delta), "[0, 0.5)"));
            }
            ChannelKind::Biawgn { sigma } if !(sigma > T::zero() && sigma.is_finite()) => {
                return Err(Error::domain("BIAWGN sigma", f(sigma), "(0, inf)"));
            }
            _ => {}
        }
        if !(erasure_prefix >= T::zero() && erasure_prefix <= T::one()) {
            return Err(Error::domain("erasure prefix", f(erasure_prefix), "[0, 1]"));
        }
        Ok(match kind {
            ChannelKind::Bec { epsilon } => ChannelModel {
                kind: ChannelKind::Bec {
                    epsilon: erasure_prefix + (T::one() - erasure_prefix) * epsilon,
                },
                erasure_prefix: T::zero(),
            },
            _ => ChannelModel {
                kind,
                erasure_prefix,
            },
        })
    }

    /// The same channel behind an erasure stage of probability `pi`
    /// (replacing any existing stage).
    pub fn with_erasure_prefix(&self, pi: T) -> Result<Self> {
        Self::new(self.kind, pi)
    }

    pub fn kind(&self) -> ChannelKind<T> {
        self.kind
    }

    pub fn erasure_prefix(&self) -> T {
        self.erasure_prefix
    }

    pub fn is_bec(&self) -> bool {
        matches!(self.kind, ChannelKind::Bec { .. })
    }

    /// The channel parameter (epsilon, delta or sigma).
    pub fn parameter(&self) -> T {
        match self.kind {
            ChannelKind::Bec { epsilon } => epsilon,
            ChannelKind::Bsc { delta } => delta,
            ChannelKind::Biawgn { sigma } => sigma,
        }
    }

    fn pass(&self) -> T {
        T::one() - self.erasure_prefix
    }

    /// Capacity in bits per channel use: `(1 - pi) C_base`.
    pub fn capacity(&self) -> BoundResult<T> {
        let base = match self.kind {
            ChannelKind::Bec { epsilon } => BoundResult::exact(T::one() - epsilon),
            ChannelKind::Bsc { delta } => BoundResult::exact(T::one() - binary_entropy(delta)),
            ChannelKind::Biawgn { sigma } => biawgn_capacity(sigma),
        };
        base.scale(self.pass())
    }

    /// `g_p = int_0^inf a(l) (1 + e^-l) tanh^(2p)(l/2) dl`, for `p >= 1`.
    ///
    /// The erased mass sits at `l = 0` where the integrand vanishes, so the
    /// erasure stage contributes the exact factor `1 - pi`.
    pub fn g_moment(&self, p: u32) -> Result<BoundResult<T>> {
        if p == 0 {
            return Err(Error::domain("moment order p", 0.0, "p >= 1"));
        }
        Ok(self.kind.g_base(p).scale(self.pass()))
    }

    /// `lim_{p -> inf} g_p`: the probability that the LLR is `+inf`.
    pub fn g_limit(&self) -> T {
        let base = match self.kind {
            ChannelKind::Bec { epsilon } => T::one() - epsilon,
            ChannelKind::Bsc { delta } if delta == T::zero() => T::one(),
            _ => T::zero(),
        };
        base * self.pass()
    }

    /// Continuous part of the LLR density at `l`.
    pub fn llr_density(&self, l: T) -> T {
        match self.kind {
            ChannelKind::Biawgn { sigma } => self.pass() * gaussian_llr_pdf(sigma, l),
            _ => T::zero(),
        }
    }

    /// Discrete part of the LLR distribution, including the erased mass at 0.
    pub fn point_masses(&self) -> Vec<PointMass<T>> {
        let pass = self.pass();
        let mut masses = Vec::new();
        match self.kind {
            ChannelKind::Bec { epsilon } => {
                masses.push(PointMass {
                    llr: T::infinity(),
                    weight: pass * (T::one() - epsilon),
                });
                masses.push(PointMass {
                    llr: T::zero(),
                    weight: pass * epsilon,
                });
            }
            ChannelKind::Bsc { delta } if delta == T::zero() => {
                masses.push(PointMass {
                    llr: T::infinity(),
                    weight: pass,
                });
            }
            ChannelKind::Bsc { delta } => {
                let l = ((T::one() - delta) / delta).ln();
                masses.push(PointMass {
                    llr: l,
                    weight: pass * (T::one() - delta),
                });
                masses.push(PointMass {
                    llr: -l,
                    weight: pass * delta,
                });
            }
            ChannelKind::Biawgn { .. } => {}
        }
        if self.erasure_prefix > T::zero() {
            masses.push(PointMass {
                llr: T::zero(),
                weight: self.erasure_prefix,
            });
        }
        masses.retain(|m| m.weight > T::zero());
        masses
    }
}

impl<T: Real> ChannelKind<T> {
    /// `g_p` of the channel without an erasure stage.
    pub fn g_base(&self, p: u32) -> BoundResult<T> {
        match *self {
            ChannelKind::Bec { epsilon } => BoundResult::exact(T::one() - epsilon),
            ChannelKind::Bsc { delta } => {
                BoundResult::exact((T::one() - T::lit(2.0) * delta).powi(2 * p as i32))
            }
            ChannelKind::Biawgn { sigma } => {
                let two_p = 2 * p as i32;
                biawgn_folded_integral(sigma, move |l| (l * T::lit(0.5)).tanh().powi(two_p), Some(p))
            }
        }
    }
}

impl<T: Real> ChannelKind<T> {
    /// [`ChannelKind::g_base`] for `p = first .. first + count`.
    pub(crate) fn g_base_block(&self, first: u32, count: usize) -> Vec<BoundResult<T>> {
        match *self {
            ChannelKind::Biawgn { sigma } => biawgn_moment_block(sigma, first, count),
            _ => (0..count as u32).map(|k| self.g_base(first + k)).collect(),
        }
    }
}

/// Gaussian LLR density of the BIAWGN channel given input `+1`.
pub fn gaussian_llr_pdf<T: Real>(sigma: T, l: T) -> T {
    let mean = T::lit(2.0) / (sigma * sigma);
    let sd = T::lit(2.0) / sigma;
    let z = (l - mean) / sd;
    (-T::lit(0.5) * z * z).exp() / (sd * (T::lit(2.0) * T::PI()).sqrt())
}

fn biawgn_capacity<T: Real>(sigma: T) -> BoundResult<T> {
    // Mutual information per symmetric pair {l, -l}: 1 - h2(1 / (1 + e^l)).
    let info = |l: T| T::one() - binary_entropy(T::one() / (T::one() + l.exp()));
    biawgn_folded_integral(sigma, info, None)
}

/// `int_0^inf a(l) (1 + e^-l) h(l) dl` for `0 <= h <= 1`, which by symmetry of
/// `a` equals the expectation of `h(|L|)`.
///
/// The integration range is `[0, mean + 40 sd]`; the neglected tail is at most
/// `2 Q(40)` and is added to the error.
fn biawgn_folded_integral<T: Real, H: Fn(T) -> T>(
    sigma: T,
    h: H,
    moment: Option<u32>,
) -> BoundResult<T> {
    let mean = T::lit(2.0) / (sigma * sigma);
    let sd = T::lit(2.0) / sigma;
    let upper = mean + T::lit(TAIL_SIGMAS) * sd;

    let mut breaks = vec![T::zero(), upper];
    for k in -10..=10 {
        breaks.push(mean + T::lit(k as f64) * sd);
    }
    if let Some(p) = moment {
        // tanh^(2p)(l/2) switches from ~0 to ~1 around l = ln(4p).
        let knee = T::lit(4.0 * p as f64).ln();
        for k in [-2.0, -1.0, 0.0, 1.0, 2.0, 4.0] {
            breaks.push(knee + T::lit(k));
        }
    }
    breaks.retain(|&b| b >= T::zero() && b <= upper);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();

    let integrand = |l: T| {
        let a = gaussian_llr_pdf(sigma, l);
        let mirror = gaussian_llr_pdf(sigma, -l);
        (a + mirror) * h(l)
    };
    let tol = T::tol(1e-14);
    let r = quadrature::integrate(integrand, &breaks, tol, 4000);
    let tail = T::lit(2.0) * gaussian_tail(T::lit(TAIL_SIGMAS));
    BoundResult::approx(r.value, r.error + tail)
}

/// Folded moments `g_p`, `p = first .. first + count`, of the BIAWGN channel
/// from one fixed grid of Kronrod panels shared by every order.
///
/// Series truncation needs thousands of consecutive moments on good channels;
/// reusing the density values makes that a few vector passes. Panels are at
/// most half a unit wide, so the `tanh^(2p)` knee (width ~1) stays resolved
/// for any `p`. The error is the per-panel Kronrod-Gauss difference plus
/// the `2 Q(12)` tail beyond `mean + 12 sd`.
pub(crate) fn biawgn_moment_block<T: Real>(sigma: T, first: u32, count: usize) -> Vec<BoundResult<T>> {
    const BLOCK_SIGMAS: f64 = 12.0;
    let mean = T::lit(2.0) / (sigma * sigma);
    let sd = T::lit(2.0) / sigma;
    let upper = mean + T::lit(BLOCK_SIGMAS) * sd;
    let width = T::lit(0.5).min(sd * T::lit(0.25));
    let panels = (upper / width).ceil().to_usize().unwrap_or(1).max(1);
    let h = upper / T::from_usize_lossy(panels);

    // Per node: density-weighted kronrod and gauss weights, and tanh^2(l/2).
    let mut wk = Vec::with_capacity(panels * 15);
    let mut wg = Vec::with_capacity(panels * 15);
    let mut t = Vec::with_capacity(panels * 15);
    for k in 0..panels {
        let a = h * T::from_usize_lossy(k);
        for (x, k_w, g_w) in quadrature::kronrod_panel(a, a + h) {
            let d = gaussian_llr_pdf(sigma, x) + gaussian_llr_pdf(sigma, -x);
            wk.push(k_w * d);
            wg.push(g_w * d);
            let th = (x * T::lit(0.5)).tanh();
            t.push(th * th);
        }
    }
    let mut pow: Vec<T> = t.iter().map(|&x| x.powi(first as i32)).collect();
    let tail = T::lit(2.0) * gaussian_tail(T::lit(BLOCK_SIGMAS));
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut value = T::zero();
        let mut diff = T::zero();
        let mut mag = T::zero();
        for panel in 0..panels {
            let r = panel * 15..panel * 15 + 15;
            let mut k_sum = T::zero();
            let mut g_sum = T::zero();
            for i in r {
                k_sum = k_sum + wk[i] * pow[i];
                g_sum = g_sum + wg[i] * pow[i];
            }
            value = value + k_sum;
            diff = diff + (k_sum - g_sum).abs();
            mag = mag + k_sum.abs();
        }
        let err = diff + T::lit(50.0) * T::epsilon() * mag + tail;
        out.push(BoundResult::approx(value.min(T::one()), err));
        for (pw, &x) in pow.iter_mut().zip(&t) {
            *pw = *pw * x;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_block_matches_adaptive_quadrature() {
        for &sigma in &[0.4f64, 0.6, 0.97, 1.5, 3.0] {
            let kind = ChannelKind::Biawgn { sigma };
            let block = kind.g_base_block(1, 300);
            for &p in &[1u32, 2, 7, 40, 300] {
                let a = kind.g_base(p);
                let b = block[p as usize - 1];
                assert!((a.value - b.value).abs() < 1e-12, "sigma {sigma} p {p}: {a:?} {b:?}");
                assert!(b.error_bound < 1e-10);
            }
            let late = kind.g_base_block(5000, 1)[0];
            assert!((late.value - kind.g_base(5000).value).abs() < 1e-12);
        }
    }

    #[test]
    fn bec_capacity_and_moments() {
        let ch = ChannelModel::bec(0.3f64).unwrap();
        assert_eq!(ch.capacity().value, 0.7);
        for p in 1..10 {
            assert_eq!(ch.g_moment(p).unwrap().value, 0.7);
        }
        assert!(ch.g_moment(0).is_err());
    }

    #[test]
    fn bsc_capacity() {
        let ch = ChannelModel::bsc(0.11f64).unwrap();
        let c = ch.capacity().value;
        let h = -(0.11f64 * 0.11f64.log2() + 0.89 * 0.89f64.log2());
        assert!((c - (1.0 - h)).abs() < 1e-15);
        assert!((c - 0.5).abs() < 1e-3);
    }

    #[test]
    fn noiseless_bsc_moments_are_one() {
        let ch = ChannelModel::bsc(0.0f64).unwrap();
        for p in [1, 5, 50] {
            assert_eq!(ch.g_moment(p).unwrap().value, 1.0);
        }
        assert_eq!(ch.g_limit(), 1.0);
    }

    #[test]
    fn bsc_moment_closed_form() {
        let ch = ChannelModel::bsc(0.1f64).unwrap();
        assert!((ch.g_moment(3).unwrap().value - 0.8f64.powi(6)).abs() < 1e-15);
    }

    #[test]
    fn biawgn_shannon_limit_rate_half() {
        // sigma for Eb/N0 = 0.187 dB at rate 1/2
        let sigma = (1.0 / (2.0 * 0.5 * 10f64.powf(0.0187))).sqrt();
        let c = ChannelModel::biawgn(sigma).unwrap().capacity();
        assert!((c.value - 0.5).abs() < 5e-4, "{c:?}");
        assert!(c.error_bound <= 1e-10);
    }

    #[test]
    fn biawgn_llr_density_values() {
        let ch = ChannelModel::biawgn(1.0f64).unwrap();
        let expected = 1.0 / (2.0 * (2.0 * std::f64::consts::PI).sqrt());
        assert!((ch.llr_density(2.0) - expected).abs() < 1e-15);
        assert!((ch.llr_density(2.0) - 0.19947).abs() < 1e-5);
        for &l in &[0.5, 1.0, 3.0] {
            let ratio = ch.llr_density(-l) / ch.llr_density(l);
            assert!((ratio - (-l).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn bsc_point_masses() {
        let ch = ChannelModel::bsc(0.1f64).unwrap();
        let m = ch.point_masses();
        assert_eq!(m.len(), 2);
        assert!((m[0].llr - 9f64.ln()).abs() < 1e-15 && (m[0].weight - 0.9).abs() < 1e-15);
        assert!((m[1].llr + 9f64.ln()).abs() < 1e-15 && (m[1].weight - 0.1).abs() < 1e-15);
        // symmetry on the two masses: w(-l) = e^{-l} w(l)
        assert!((m[1].weight - (-m[0].llr).exp() * m[0].weight).abs() < 1e-15);
    }

    #[test]
    fn erasure_prefix_behaviour() {
        let plain = ChannelModel::biawgn(0.9f64).unwrap();
        let pre = plain.with_erasure_prefix(0.25).unwrap();
        assert!((pre.capacity().value - 0.75 * plain.capacity().value).abs() < 1e-12);
        assert_eq!(pre.g_moment(2).unwrap().value, 0.75 * plain.g_moment(2).unwrap().value);
        let m = pre.point_masses();
        assert_eq!(m, vec![PointMass { llr: 0.0, weight: 0.25 }]);

        let bec = ChannelModel::new(ChannelKind::Bec { epsilon: 0.2f64 }, 0.5).unwrap();
        assert_eq!(bec.erasure_prefix(), 0.0);
        assert!((bec.parameter() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn rejects_zero_capacity_and_bad_parameters() {
        assert!(ChannelModel::bec(1.0f64).is_err());
        assert!(ChannelModel::bsc(0.5f64).is_err());
        assert!(ChannelModel::bsc(0.7f64).is_err());
        assert!(ChannelModel::biawgn(0.0f64).is_err());
        assert!(ChannelModel::biawgn(f64::NAN).is_err());
        assert!(ChannelModel::new(ChannelKind::Biawgn { sigma: 1.0f64 }, 1.5).is_err());
    }

    #[test]
    fn perfect_bec() {
        let ch = ChannelModel::bec(0.0f64).unwrap();
        assert_eq!(ch.capacity().value, 1.0);
        assert_eq!(ch.g_moment(1).unwrap().value, 1.0);
    }

    #[test]
    fn biawgn_moment_error_bound_is_small() {
        for &sigma in &[0.3f64, 0.8, 1.0, 2.5] {
            let ch = ChannelModel::biawgn(sigma).unwrap();
            for p in [1, 7, 100] {
                let g = ch.g_moment(p).unwrap();
                assert!(g.error_bound <= 1e-12, "sigma {sigma} p {p}: {g:?}");
                assert!(g.value > 0.0 && g.value < 1.0);
            }
        }
    }

    #[test]
    fn f32_channel_moments() {
        let ch = ChannelModel::biawgn(0.9f32).unwrap();
        let g64 = ChannelModel::biawgn(0.9f64).unwrap().g_moment(1).unwrap().value;
        assert!((ch.g_moment(1).unwrap().value as f64 - g64).abs() < 1e-5);
    }
}
