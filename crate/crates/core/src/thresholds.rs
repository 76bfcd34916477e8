//! Channel-parameter thresholds: the capacity limit, the lowest Eb/N0
//! compatible with the ML rate bound, and (in [`crate::density_evolution`])
//! the iterative-decoding threshold.
//!
//! Searches run on a family-specific coordinate: Eb/N0 in dB for BIAWGN
//! (larger is better), the erasure or crossover probability for BEC and BSC
//! (smaller is better). Eb/N0 always uses the rate of the transmitted
//! (punctured) code: `Eb/N0 = 1 / (2 R sigma^2)`.

use crate::channels::ChannelModel;
use crate::degree_distributions::EnsembleSpec;
use crate::error::{Error, Result};
use crate::puncturing::{punctured_design_rate, PuncturingPattern};
use crate::rate_bounds::ip_rate_bound;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelFamily {
    Bec,
    Bsc,
    Biawgn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdKind {
    CapacityLimit,
    MlLowerBound,
    IterativeDe,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult<T> {
    pub kind: ThresholdKind,
    pub family: ChannelFamily,
    /// Rate used for the Eb/N0 conversion.
    pub rate: T,
    /// sigma for BIAWGN, epsilon for BEC, delta for BSC.
    pub channel_param: T,
    /// Only defined for BIAWGN.
    pub eb_n0_db: Option<T>,
    /// Width of the final bisection bracket, in dB for BIAWGN and in channel
    /// parameter units otherwise.
    pub tolerance: T,
}

/// Default bisection resolution for BIAWGN searches (dB).
pub const DEFAULT_TOL_DB: f64 = 1e-3;
/// Default bisection resolution for BEC/BSC searches (channel parameter).
pub const DEFAULT_TOL_PARAM: f64 = 1e-5;

fn check_rate<T: Real>(rate: T) -> Result<()> {
    if !(rate > T::zero() && rate < T::one()) {
        return Err(Error::domain("rate", rate.to_f64().unwrap_or(f64::NAN), "(0, 1)"));
    }
    Ok(())
}

/// `10 log10(1 / (2 R sigma^2))`.
pub fn eb_n0_from_sigma<T: Real>(sigma: T, rate: T) -> Result<T> {
    if !(sigma > T::zero() && sigma.is_finite()) {
        return Err(Error::domain("sigma", sigma.to_f64().unwrap_or(f64::NAN), "(0, inf)"));
    }
    check_rate(rate)?;
    Ok(T::lit(10.0) * (T::one() / (T::lit(2.0) * rate * sigma * sigma)).log10())
}

/// Inverse of [`eb_n0_from_sigma`].
pub fn sigma_from_eb_n0<T: Real>(eb_n0_db: T, rate: T) -> Result<T> {
    if !eb_n0_db.is_finite() {
        return Err(Error::domain("Eb/N0", f64::NAN, "finite"));
    }
    check_rate(rate)?;
    let lin = T::lit(10.0).powf(eb_n0_db / T::lit(10.0));
    Ok((T::one() / (T::lit(2.0) * rate * lin)).sqrt())
}

impl ChannelFamily {
    /// Whether a larger search coordinate means a better channel.
    fn increasing(self) -> bool {
        matches!(self, ChannelFamily::Biawgn)
    }

    /// Channel at search coordinate `coord` (dB for BIAWGN at rate `rate`).
    pub fn channel_at<T: Real>(self, coord: T, rate: T) -> Result<ChannelModel<T>> {
        match self {
            ChannelFamily::Bec => ChannelModel::bec(coord),
            ChannelFamily::Bsc => ChannelModel::bsc(coord),
            ChannelFamily::Biawgn => ChannelModel::biawgn(sigma_from_eb_n0(coord, rate)?),
        }
    }

    fn default_tolerance<T: Real>(self) -> T {
        match self {
            ChannelFamily::Biawgn => T::lit(DEFAULT_TOL_DB),
            _ => T::lit(DEFAULT_TOL_PARAM),
        }
    }

    fn result<T: Real>(
        self,
        kind: ThresholdKind,
        coord: T,
        rate: T,
        tolerance: T,
    ) -> Result<ThresholdResult<T>> {
        let (param, db) = match self {
            ChannelFamily::Biawgn => (sigma_from_eb_n0(coord, rate)?, Some(coord)),
            _ => (coord, None),
        };
        Ok(ThresholdResult {
            kind,
            family: self,
            rate,
            channel_param: param,
            eb_n0_db: db,
            tolerance,
        })
    }
}

/// Bisects between a coordinate where `pred` fails and one where it holds
/// until they are within `tol`. Returns `(fail, pass)`.
pub(crate) fn bisect<T: Real, P: FnMut(T) -> Result<bool>>(
    mut fail: T,
    mut pass: T,
    tol: T,
    mut pred: P,
) -> Result<(T, T)> {
    let mut guard = 0;
    while (pass - fail).abs() > tol {
        let mid = T::lit(0.5) * (fail + pass);
        if mid == fail || mid == pass || guard > 200 {
            break;
        }
        if pred(mid)? {
            pass = mid;
        } else {
            fail = mid;
        }
        guard += 1;
    }
    Ok((fail, pass))
}

/// Starting from a coordinate where `pred` fails, steps toward better channels
/// until it holds. Returns `(fail, pass)`.
pub(crate) fn bracket_better<T: Real, P: FnMut(T) -> Result<bool>>(
    family: ChannelFamily,
    fail: T,
    mut pred: P,
) -> Result<(T, T)> {
    let mut fail = fail;
    if family.increasing() {
        let mut width = T::one();
        for _ in 0..6 {
            let pass = fail + width;
            if pred(pass)? {
                return Ok((fail, pass));
            }
            fail = pass;
            width = width * T::lit(2.0);
        }
    } else {
        let mut pass = fail * T::lit(0.5);
        while pass > T::lit(1e-9) {
            if pred(pass)? {
                return Ok((fail, pass));
            }
            fail = pass;
            pass = pass * T::lit(0.5);
        }
    }
    Err(Error::BracketFailure(format!(
        "no channel in the {family:?} family satisfies the criterion"
    )))
}

/// Channel parameter (and Eb/N0 for BIAWGN) at which the capacity equals `rate`.
pub fn capacity_limit_threshold<T: Real>(rate: T, family: ChannelFamily) -> Result<ThresholdResult<T>> {
    check_rate(rate)?;
    let kind = ThresholdKind::CapacityLimit;
    match family {
        ChannelFamily::Bec => family.result(kind, T::one() - rate, rate, T::zero()),
        ChannelFamily::Bsc => {
            // capacity decreases in delta on [0, 1/2)
            let cap = |d: T| Ok(ChannelModel::bsc(d)?.capacity().value >= rate);
            let (fail, pass) = bisect(T::lit(0.5) - T::epsilon(), T::zero(), T::tol(1e-15), cap)?;
            family.result(kind, pass, rate, (fail - pass).abs())
        }
        ChannelFamily::Biawgn => {
            // Bisect on ln(sigma) until the capacity matches the rate to 1e-9.
            let cap_at = |ls: T| Ok::<T, Error>(ChannelModel::biawgn(ls.exp())?.capacity().value);
            let mut lo = T::lit(-4.0);
            let mut hi = T::lit(4.0);
            if cap_at(lo)? < rate || cap_at(hi)? > rate {
                return Err(Error::BracketFailure(format!(
                    "rate {rate} not reachable on the BIAWGN channel"
                )));
            }
            for _ in 0..200 {
                let mid = T::lit(0.5) * (lo + hi);
                let c = cap_at(mid)?;
                if (c - rate).abs() <= T::tol(1e-11) || mid == lo || mid == hi {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if c > rate {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let sigma = (T::lit(0.5) * (lo + hi)).exp();
            let db = eb_n0_from_sigma(sigma, rate)?;
            let width = (eb_n0_from_sigma(lo.exp(), rate)? - eb_n0_from_sigma(hi.exp(), rate)?).abs();
            family.result(kind, db, rate, width)
        }
    }
}

/// Number of interior points at which bound monotonicity is spot-checked.
const MONOTONICITY_PROBES: usize = 8;

/// Lowest channel quality at which the intentionally punctured rate bound
/// still admits the punctured design rate; below it no decoder can succeed.
pub fn ml_threshold<T: Real>(
    e: &EnsembleSpec<T>,
    pattern: &PuncturingPattern<T>,
    family: ChannelFamily,
) -> Result<ThresholdResult<T>> {
    ml_threshold_with_tol(e, pattern, family, family.default_tolerance())
}

pub fn ml_threshold_with_tol<T: Real>(
    e: &EnsembleSpec<T>,
    pattern: &PuncturingPattern<T>,
    family: ChannelFamily,
    tol: T,
) -> Result<ThresholdResult<T>> {
    let rate = punctured_design_rate(e, pattern)?;
    let bound_at = |coord: T| -> Result<(T, T)> {
        let ch = family.channel_at(coord, rate)?;
        let b = ip_rate_bound(e, &ch, pattern)?;
        Ok((b.value, b.error_bound))
    };
    let holds = |coord: T| -> Result<bool> { Ok(bound_at(coord)?.0 >= rate) };

    let cap = capacity_limit_threshold(rate, family)?;
    let start = match family {
        ChannelFamily::Biawgn => cap.eb_n0_db.unwrap(),
        _ => cap.channel_param,
    };
    // The bound never exceeds the capacity, so it fails at the capacity limit;
    // step back once if quadrature noise says otherwise.
    let start = if holds(start)? {
        if family.increasing() {
            start - T::lit(0.1)
        } else {
            (start + T::lit(0.01)).min(T::lit(0.5) - T::epsilon())
        }
    } else {
        start
    };
    let (fail, pass) = bracket_better(family, start, holds)?;
    check_monotone(fail, pass, &bound_at)?;
    let (fail, pass) = bisect(fail, pass, tol, holds)?;
    family.result(ThresholdKind::MlLowerBound, pass, rate, (pass - fail).abs())
}

fn check_monotone<T: Real>(
    fail: T,
    pass: T,
    bound_at: &dyn Fn(T) -> Result<(T, T)>,
) -> Result<()> {
    let n = MONOTONICITY_PROBES + 1;
    let mut prev: Option<(T, T, T)> = None;
    for k in 0..=n {
        let coord = fail + (pass - fail) * T::from_usize_lossy(k) / T::from_usize_lossy(n);
        let (v, err) = bound_at(coord)?;
        if let Some((pc, pv, perr)) = prev {
            if v < pv - perr - err - T::tol(1e-12) {
                return Err(Error::NonMonotone(format!(
                    "rate bound drops from {pv} at {pc} to {v} at {coord} as the channel improves"
                )));
            }
        }
        prev = Some((coord, v, err));
    }
    Ok(())
}

/// `(ml - capacity) / (it - capacity)`: the share of the iterative decoder's
/// gap to capacity that no decoder can close.
pub fn fractional_gap<T: Real>(capacity_db: T, ml_db: T, it_db: T) -> Result<T> {
    if !(capacity_db <= ml_db && ml_db <= it_db) {
        return Err(Error::Ordering(format!(
            "expected capacity {capacity_db} <= ML {ml_db} <= IT {it_db} (dB)"
        )));
    }
    if ml_db == capacity_db {
        return Ok(T::zero());
    }
    Ok((ml_db - capacity_db) / (it_db - capacity_db))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eb_n0_conversions() {
        assert!(eb_n0_from_sigma(1.0f64, 0.5).unwrap().abs() < 1e-15);
        for &r in &[0.1f64, 0.5, 0.9] {
            let s = (1.0 / (2.0 * r)).sqrt();
            assert!(eb_n0_from_sigma(s, r).unwrap().abs() < 1e-12);
        }
        let s = sigma_from_eb_n0(0.187f64, 0.5).unwrap();
        assert!((s - 0.9787).abs() < 1e-4);
        assert!((eb_n0_from_sigma(s, 0.5).unwrap() - 0.187).abs() < 1e-12);
        assert!(eb_n0_from_sigma(0.0f64, 0.5).is_err());
        assert!(eb_n0_from_sigma(1.0f64, 1.0).is_err());
    }

    #[test]
    fn bec_capacity_limit_is_exact() {
        let t = capacity_limit_threshold(0.5f64, ChannelFamily::Bec).unwrap();
        assert_eq!(t.channel_param, 0.5);
        assert_eq!(t.eb_n0_db, None);
    }

    #[test]
    fn bsc_capacity_limit() {
        let t = capacity_limit_threshold(0.5f64, ChannelFamily::Bsc).unwrap();
        assert!((t.channel_param - 0.110_028).abs() < 1e-5, "{t:?}");
    }

    #[test]
    fn biawgn_capacity_limit_rate_half() {
        let t = capacity_limit_threshold(0.5f64, ChannelFamily::Biawgn).unwrap();
        assert!((t.eb_n0_db.unwrap() - 0.187).abs() < 3e-3, "{t:?}");
        assert!(t.tolerance <= 1e-3);
        let c = ChannelModel::biawgn(t.channel_param).unwrap().capacity().value;
        assert!((c - 0.5).abs() <= 1e-9);
    }

    #[test]
    fn fractional_gap_values() {
        let g = fractional_gap(0.187f64, 0.270, 0.393).unwrap();
        assert!((g - 0.403).abs() < 1e-3);
        assert_eq!(fractional_gap(0.187f64, 0.187, 0.393).unwrap(), 0.0);
        let g = fractional_gap(3.399f64, 3.607, 3.992).unwrap();
        assert!((g - 0.351).abs() < 1e-3);
        assert!(matches!(fractional_gap(0.3f64, 0.2, 0.4), Err(Error::Ordering(_))));
        assert!(matches!(fractional_gap(0.1f64, 0.5, 0.4), Err(Error::Ordering(_))));
    }

    #[test]
    fn bisect_finds_transition() {
        let (f, p) = bisect(0.0f64, 1.0, 1e-9, |x| Ok(x > 0.3)).unwrap();
        assert!(f <= 0.3 && p > 0.3 && p - f <= 1e-9);
        // decreasing direction
        let (f, p) = bisect(1.0f64, 0.0, 1e-9, |x| Ok(x < 0.6)).unwrap();
        assert!(f >= 0.6 && p < 0.6 && f - p <= 1e-9);
    }
}
