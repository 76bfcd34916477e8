//! Quantized density evolution for sum-product decoding of (intentionally
//! punctured) LDPC ensembles.
//!
//! Densities live on the LLR grid `k * step` for `|k| <= n = max_llr / step`;
//! the end bins absorb everything beyond `+-max_llr`. The variable-node rule
//! convolves densities with an FFT; the check-node rule works on the
//! sign/magnitude split of a density and combines two messages at a time
//! through a precomputed table of quantized `f(f(a) + f(b))`, with
//! `f(x) = ln((e^x + 1)/(e^x - 1))`. A saturated message is treated as
//! infinitely reliable, so erasure-type densities (supported on `{0, +max}`)
//! evolve exactly as on the BEC.

use std::fmt::Write as _;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::channels::{ChannelKind, ChannelModel};
use crate::degree_distributions::{DegreePolynomial, EnsembleSpec, Perspective};
use crate::error::{Error, Result};
use crate::puncturing::{punctured_design_rate, PuncturingPattern};
use crate::scalar::{gaussian_cdf, gaussian_tail, Real};
use crate::thresholds::{
    bisect, bracket_better, capacity_limit_threshold, ChannelFamily, ThresholdKind,
    ThresholdResult, DEFAULT_TOL_DB, DEFAULT_TOL_PARAM,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeConfig {
    /// Saturation level `L` of the LLR grid.
    pub max_llr: f64,
    /// Grid step `delta`; `max_llr / step` must be an integer.
    pub step: f64,
    pub max_iters: usize,
    /// Decoding succeeds once the error probability drops below this.
    pub target_error: f64,
    /// Give up after this many iterations without a new minimum.
    pub stall_window: usize,
}

impl Default for DeConfig {
    fn default() -> Self {
        DeConfig {
            max_llr: 30.0,
            step: 1.0 / 32.0,
            max_iters: 2000,
            target_error: 1e-9,
            stall_window: 200,
        }
    }
}

impl DeConfig {
    /// Number of positive grid points, `max_llr / step`.
    pub fn half_width(&self) -> Result<usize> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.max_llr) || !ok(self.step) || !ok(self.target_error) {
            return Err(Error::InvalidConfig(
                "max_llr, step and target_error must be positive".into(),
            ));
        }
        if self.max_iters == 0 || self.stall_window == 0 {
            return Err(Error::InvalidConfig(
                "max_iters and stall_window must be positive".into(),
            ));
        }
        let n = self.max_llr / self.step;
        if (n - n.round()).abs() > 1e-9 * n.max(1.0) || n.round() < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "max_llr / step = {n} is not a positive integer"
            )));
        }
        Ok(n.round() as usize)
    }
}

/// A probability distribution on the quantized LLR grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedDensity<T> {
    step: T,
    half: usize,
    masses: Vec<T>,
}

impl<T: Real> QuantizedDensity<T> {
    fn zeros(step: T, half: usize) -> Self {
        QuantizedDensity {
            step,
            half,
            masses: vec![T::zero(); 2 * half + 1],
        }
    }

    /// Unit mass at grid index `k` (`-half..=half`).
    pub fn point(step: T, half: usize, k: isize) -> Self {
        let mut d = Self::zeros(step, half);
        d.masses[(k + half as isize) as usize] = T::one();
        d
    }

    /// Builds a density from raw masses (`2 half + 1` of them, most negative
    /// first), which must be nonnegative and sum to 1 within `1e-9`.
    pub fn from_masses(step: T, masses: Vec<T>) -> Result<Self> {
        if masses.len().is_multiple_of(2) {
            return Err(Error::GridMismatch("a density needs an odd number of bins".into()));
        }
        if masses.iter().any(|&m| m.is_nan() || m < T::zero()) {
            return Err(Error::InvalidDistribution("negative or NaN mass".into()));
        }
        let total: T = masses.iter().copied().sum();
        if (total - T::one()).abs() > T::tol(1e-9) {
            return Err(Error::InvalidDistribution(format!("total mass {total} != 1")));
        }
        Ok(QuantizedDensity {
            step,
            half: masses.len() / 2,
            masses,
        })
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn half_width(&self) -> usize {
        self.half
    }

    /// Masses from `-half` to `+half`.
    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    /// Mass at grid index `k`.
    pub fn mass_at(&self, k: isize) -> T {
        self.masses[(k + self.half as isize) as usize]
    }

    pub fn total_mass(&self) -> T {
        self.masses.iter().copied().sum()
    }

    pub fn mean(&self) -> T {
        let h = self.half as isize;
        self.masses
            .iter()
            .enumerate()
            .map(|(i, &m)| m * T::lit((i as isize - h) as f64) * self.step)
            .sum()
    }

    /// Mass on negative LLRs plus half the mass at zero.
    pub fn error_probability(&self) -> T {
        let h = self.half;
        let neg: T = self.masses[..h].iter().copied().sum();
        neg + T::lit(0.5) * self.masses[h]
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.half != other.half || self.step != other.step {
            return Err(Error::GridMismatch(format!(
                "grid ({}, {}) vs ({}, {})",
                self.half, self.step, other.half, other.step
            )));
        }
        Ok(())
    }

    fn normalize(&mut self) {
        let total = self.total_mass();
        if total > T::zero() {
            for m in &mut self.masses {
                *m = *m / total;
            }
        }
    }
}

/// Probability that a normal variable falls in `[a, b]`, computed on the
/// side of the mean that avoids cancellation.
fn normal_mass<T: Real>(mean: T, sd: T, a: T, b: T) -> T {
    let za = (a - mean) / sd;
    let zb = (b - mean) / sd;
    if za >= T::zero() {
        gaussian_tail(za) - gaussian_tail(zb)
    } else if zb <= T::zero() {
        gaussian_cdf(zb) - gaussian_cdf(za)
    } else {
        T::one() - gaussian_cdf(za) - gaussian_tail(zb)
    }
    .max(T::zero())
}

fn grid_index<T: Real>(llr: T, step: T, half: usize) -> usize {
    let h = half as isize;
    if llr == T::infinity() {
        return 2 * half;
    }
    let k = (llr / step).round().to_isize().unwrap_or(h).clamp(-h, h);
    (k + h) as usize
}

/// Channel LLR density seen by a bit that is punctured with probability
/// `pi_j`: `pi_j` at zero plus `1 - pi_j` times the quantized channel density.
pub fn initial_density<T: Real>(ch: &ChannelModel<T>, pi_j: T, cfg: &DeConfig) -> Result<QuantizedDensity<T>> {
    if !(pi_j >= T::zero() && pi_j <= T::one()) {
        return Err(Error::domain("puncturing rate", pi_j.to_f64().unwrap_or(f64::NAN), "[0, 1]"));
    }
    let half = cfg.half_width()?;
    let step = T::lit(cfg.step);
    let mut d = QuantizedDensity::zeros(step, half);
    // Channel with the puncturing folded into its erasure stage.
    let erased = pi_j + (T::one() - pi_j) * ch.erasure_prefix();
    let pass = T::one() - erased;
    d.masses[half] = erased;
    match ch.kind() {
        ChannelKind::Biawgn { sigma } => {
            let mean = T::lit(2.0) / (sigma * sigma);
            let sd = T::lit(2.0) / sigma;
            let hs = T::lit(0.5) * step;
            let last = 2 * half;
            for (i, m) in d.masses.iter_mut().enumerate() {
                let l = T::lit(i as f64 - half as f64) * step;
                let lo = if i == 0 { T::neg_infinity() } else { l - hs };
                let hi = if i == last { T::infinity() } else { l + hs };
                let mass = if lo == T::neg_infinity() {
                    gaussian_cdf((hi - mean) / sd)
                } else if hi == T::infinity() {
                    gaussian_tail((lo - mean) / sd)
                } else {
                    normal_mass(mean, sd, lo, hi)
                };
                *m = *m + pass * mass;
            }
        }
        ChannelKind::Bec { epsilon } => {
            d.masses[half] = d.masses[half] + pass * epsilon;
            d.masses[2 * half] = d.masses[2 * half] + pass * (T::one() - epsilon);
        }
        ChannelKind::Bsc { delta } => {
            if delta == T::zero() {
                d.masses[2 * half] = d.masses[2 * half] + pass;
            } else {
                let l = ((T::one() - delta) / delta).ln();
                let plus = grid_index(l, step, half);
                let minus = grid_index(-l, step, half);
                d.masses[plus] = d.masses[plus] + pass * (T::one() - delta);
                d.masses[minus] = d.masses[minus] + pass * delta;
            }
        }
    }
    d.normalize();
    Ok(d)
}

/// Quantized `f(f(a) + f(b))` for grid magnitudes `a <= b`.
///
/// Row `i` stores the outputs for `j = i .. i + len`; for every larger `j` the
/// output is `i` (the weaker input dominates). Index 0 (an erasure) is handled
/// by the caller.
#[derive(Debug, Clone)]
pub struct CheckTable {
    half: usize,
    rows: Vec<Vec<u32>>,
}

impl CheckTable {
    pub fn new(step: f64, half: usize) -> Self {
        // f is an involution on (0, inf]; the saturated bin means f = 0.
        let f = |x: f64| {
            if x == 0.0 {
                f64::INFINITY
            } else {
                (2.0 / x.exp_m1()).ln_1p()
            }
        };
        let phi: Vec<f64> = (0..=half)
            .map(|k| if k == half { 0.0 } else { f(k as f64 * step) })
            .collect();
        let out = |i: usize, j: usize| -> u32 {
            let v = f(phi[i] + phi[j]);
            if v.is_infinite() {
                half as u32
            } else {
                ((v / step).round() as usize).min(half) as u32
            }
        };
        let mut rows = vec![Vec::new(); half + 1];
        for (i, row) in rows.iter_mut().enumerate().skip(1) {
            let mut end = half + 1;
            while end > i + 1 && out(i, end - 1) == i as u32 {
                end -= 1;
            }
            *row = (i..end).map(|j| out(i, j)).collect();
        }
        CheckTable { half, rows }
    }

    pub fn half_width(&self) -> usize {
        self.half
    }
}

/// A density as `s_k = P(|L| = k)` and `d_k = P(L = k) - P(L = -k)`.
#[derive(Debug, Clone)]
struct Magnitudes<T> {
    s: Vec<T>,
    d: Vec<T>,
}

impl<T: Real> Magnitudes<T> {
    fn from_density(x: &QuantizedDensity<T>) -> Self {
        let h = x.half;
        let mut s = vec![T::zero(); h + 1];
        let mut d = vec![T::zero(); h + 1];
        s[0] = x.masses[h];
        for k in 1..=h {
            let (p, n) = (x.masses[h + k], x.masses[h - k]);
            s[k] = p + n;
            d[k] = p - n;
        }
        Magnitudes { s, d }
    }

    fn zero(half: usize) -> Self {
        Magnitudes {
            s: vec![T::zero(); half + 1],
            d: vec![T::zero(); half + 1],
        }
    }

    fn to_density(&self, step: T) -> QuantizedDensity<T> {
        let h = self.s.len() - 1;
        let mut out = QuantizedDensity::zeros(step, h);
        let half = T::lit(0.5);
        out.masses[h] = self.s[0].max(T::zero());
        for k in 1..=h {
            out.masses[h + k] = (half * (self.s[k] + self.d[k])).max(T::zero());
            out.masses[h - k] = (half * (self.s[k] - self.d[k])).max(T::zero());
        }
        out.normalize();
        out
    }

    fn add_scaled(&mut self, other: &Self, w: T) {
        for (a, b) in self.s.iter_mut().zip(&other.s) {
            *a = *a + w * *b;
        }
        for (a, b) in self.d.iter_mut().zip(&other.d) {
            *a = *a + w * *b;
        }
    }

    /// Density of the check-node combination of independent messages `a`, `b`.
    fn combine(a: &Self, b: &Self, table: &CheckTable) -> Self {
        let h = table.half;
        let suffix = |v: &[T]| {
            let mut out = vec![T::zero(); h + 2];
            for k in (1..=h).rev() {
                out[k] = out[k + 1] + v[k];
            }
            out
        };
        let (tsa, tda, tsb, tdb) = (suffix(&a.s), suffix(&a.d), suffix(&b.s), suffix(&b.d));
        let mut out = Self::zero(h);
        // Anything combined with an erasure is an erasure.
        let tot_a = a.s[0] + tsa[1];
        let tot_b = b.s[0] + tsb[1];
        out.s[0] = a.s[0] * tot_b + b.s[0] * tot_a - a.s[0] * b.s[0];
        for i in 1..=h {
            let row = &table.rows[i];
            let (sa, da, sb, db) = (a.s[i], a.d[i], b.s[i], b.d[i]);
            let k = row[0] as usize;
            out.s[k] = out.s[k] + sa * sb;
            out.d[k] = out.d[k] + da * db;
            for (off, &k) in row.iter().enumerate().skip(1) {
                let j = i + off;
                let k = k as usize;
                out.s[k] = out.s[k] + sa * b.s[j] + a.s[j] * sb;
                out.d[k] = out.d[k] + da * b.d[j] + a.d[j] * db;
            }
            let end = i + row.len();
            out.s[i] = out.s[i] + sa * tsb[end] + sb * tsa[end];
            out.d[i] = out.d[i] + da * tdb[end] + db * tda[end];
        }
        out.d[0] = T::zero();
        out
    }
}

fn check_mixture<T: Real>(
    msg: &QuantizedDensity<T>,
    rho: &[(u32, T)],
    table: &CheckTable,
) -> QuantizedDensity<T> {
    let h = table.half;
    let m = Magnitudes::from_density(msg);
    let mut acc = Magnitudes::zero(h);
    // Binary powers m, m^2, m^4, ... built on demand; the (d-1)-fold
    // combinations are assembled from them and from the previous degree.
    let mut squares = vec![m];
    let mut prev: Option<(usize, Magnitudes<T>)> = None;
    for &(deg, w) in rho {
        let k = deg as usize - 1;
        if k == 0 {
            // Degree-one checks know their bit: a saturated message.
            acc.s[h] = acc.s[h] + w;
            acc.d[h] = acc.d[h] + w;
            continue;
        }
        let (mut have, mut power) = match prev.take() {
            Some((n, p)) => (n, Some(p)),
            None => (0, None),
        };
        let mut missing = k - have;
        let mut bit = 0;
        while missing > 0 {
            if bit == squares.len() {
                let last = squares.last().unwrap();
                let sq = Magnitudes::combine(last, last, table);
                squares.push(sq);
            }
            if missing & 1 == 1 {
                power = Some(match power {
                    None => squares[bit].clone(),
                    Some(p) => Magnitudes::combine(&p, &squares[bit], table),
                });
                have += 1 << bit;
            }
            missing >>= 1;
            bit += 1;
        }
        let power = power.expect("k >= 1");
        acc.add_scaled(&power, w);
        prev = Some((have, power));
    }
    acc.to_density(msg.step)
}

/// Check-node update `sum_d rho_d * (d-1)-fold box-plus of var_msg`.
///
/// Builds the quantization table on every call; [`DensityEvolution`] caches it.
pub fn check_update<T: Real>(
    var_msg: &QuantizedDensity<T>,
    rho: &DegreePolynomial<T>,
) -> Result<QuantizedDensity<T>> {
    if rho.perspective() != Perspective::Edge {
        return Err(Error::Perspective { expected: "edge" });
    }
    let step = var_msg.step.to_f64().unwrap_or(f64::NAN);
    let table = CheckTable::new(step, var_msg.half);
    Ok(check_mixture(var_msg, rho.terms(), &table))
}

/// Circular convolution engine on a power-of-two grid wide enough to hold
/// the largest variable-node sum without wrap-around.
struct Convolver<T: Real> {
    len: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

/// A density split into its positive saturated bin and the spectrum of the
/// remaining bins.
struct Split<T> {
    sat: T,
    rest: T,
    spectrum: Vec<Complex<T>>,
}

impl<T: Real> Convolver<T> {
    fn new(half: usize, max_degree: usize) -> Self {
        let len = (2 * max_degree.max(1) * half + 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        Convolver {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    fn split(&self, x: &QuantizedDensity<T>) -> Split<T> {
        let h = x.half as isize;
        let n = x.masses.len();
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.len];
        let mut rest = T::zero();
        for (i, &m) in x.masses.iter().enumerate().take(n - 1) {
            let pos = (i as isize - h).rem_euclid(self.len as isize) as usize;
            buf[pos] = Complex::new(m, T::zero());
            rest = rest + m;
        }
        self.forward.process(&mut buf);
        Split {
            sat: x.masses[n - 1],
            rest,
            spectrum: buf,
        }
    }

    /// Inverse transform, saturated back onto the grid (not normalized).
    /// Values no larger than the deepest negative excursion are roundoff and
    /// are dropped; keeping their positive half would seed wrong-sign mass.
    fn density(&self, mut spec: Vec<Complex<T>>, step: T, half: usize) -> QuantizedDensity<T> {
        self.inverse.process(&mut spec);
        let scale = T::one() / T::from_usize_lossy(self.len);
        let noise = spec.iter().fold(T::zero(), |m, c| m.max(-c.re * scale));
        let h = half as isize;
        let mut out = QuantizedDensity::zeros(step, half);
        for (pos, c) in spec.iter().enumerate() {
            let v = c.re * scale;
            if v <= noise {
                continue;
            }
            let l = if pos <= self.len / 2 {
                pos as isize
            } else {
                pos as isize - self.len as isize
            };
            out.masses[(l.clamp(-h, h) + h) as usize] = out.masses[(l.clamp(-h, h) + h) as usize] + v;
        }
        out
    }
}

/// `sum_i w_i C_i M^(d_i - 1)` over the spectra, for degrees in increasing
/// order. Only the nonnegative frequencies are computed; the rest follow by
/// conjugate symmetry of real sequences.
fn mix_spectra<'a, T: Real>(
    conv: &Convolver<T>,
    msg: &[Complex<T>],
    terms: impl Iterator<Item = (u32, T, &'a [Complex<T>])>,
) -> Vec<Complex<T>> {
    let n = conv.len;
    let top = n / 2;
    let zero = Complex::new(T::zero(), T::zero());
    let mut acc = vec![zero; n];
    let mut power = vec![Complex::new(T::one(), T::zero()); top + 1];
    let mut have = 0u32;
    for (deg, w, ch) in terms {
        let step = deg - 1 - have;
        if step > 0 {
            for (p, m) in power.iter_mut().zip(msg) {
                *p = *p * m.powu(step);
            }
            have = deg - 1;
        }
        for ((a, c), p) in acc.iter_mut().zip(ch).zip(&power) {
            *a = *a + *c * *p * w;
        }
    }
    for k in 1..top {
        acc[n - k] = acc[k].conj();
    }
    acc
}

/// Variable-node sum in which the positive saturated bin absorbs: any input
/// there puts the output there. Only the remaining parts are convolved, with
/// sums beyond the grid clamped into the end bins. The negative end bin must
/// not absorb, since wrong-sign saturated mass would then feed itself through
/// degree-two nodes.
fn variable_sum<'a, T: Real>(
    conv: &Convolver<T>,
    msg: &Split<T>,
    terms: impl Iterator<Item = (u32, T, &'a Split<T>)> + Clone,
    step: T,
    half: usize,
) -> QuantizedDensity<T> {
    let acc = mix_spectra(conv, &msg.spectrum, terms.clone().map(|(d, w, c)| (d, w, c.spectrum.as_slice())));
    let mut out = conv.density(acc, step, half);
    let mut sat = T::zero();
    for (d, w, c) in terms {
        let k = d as i32 - 1;
        let all = (c.rest + c.sat) * (msg.rest + msg.sat).powi(k);
        sat = sat + w * (all - c.rest * msg.rest.powi(k));
    }
    let n = out.masses.len();
    out.masses[n - 1] = out.masses[n - 1] + sat;
    out.normalize();
    out
}

/// Variable-node update `sum_i lambda_i * (channel_i * check_msg^(i-1))`,
/// with `*` the convolution of LLR densities and the positive end bin
/// treated as infinite reliability. `channel_by_degree` maps each degree of `lambda` to
/// the channel density of its bits.
pub fn variable_update<T: Real>(
    channel_by_degree: &[(u32, QuantizedDensity<T>)],
    check_msg: &QuantizedDensity<T>,
    lambda: &DegreePolynomial<T>,
) -> Result<QuantizedDensity<T>> {
    if lambda.perspective() != Perspective::Edge {
        return Err(Error::Perspective { expected: "edge" });
    }
    let mut channels = Vec::with_capacity(lambda.terms().len());
    for &(deg, w) in lambda.terms() {
        let ch = channel_by_degree
            .iter()
            .find(|(d, _)| *d == deg)
            .map(|(_, c)| c)
            .ok_or(Error::PatternMismatch { degree: deg })?;
        ch.same_grid(check_msg)?;
        channels.push((deg, w, ch));
    }
    let conv = Convolver::new(check_msg.half, lambda.max_degree() as usize);
    let splits: Vec<_> = channels.iter().map(|(d, w, c)| (*d, *w, conv.split(c))).collect();
    Ok(variable_sum(
        &conv,
        &conv.split(check_msg),
        splits.iter().map(|(d, w, c)| (*d, *w, c)),
        check_msg.step,
        check_msg.half,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeOutcome<T> {
    /// The error probability reached the target.
    Converged { iterations: usize, error: T },
    /// No new minimum for `stall_window` iterations.
    Stalled { iterations: usize, error: T },
    MaxIterations { error: T },
}

impl<T> DeOutcome<T> {
    pub fn converged(&self) -> bool {
        matches!(self, DeOutcome::Converged { .. })
    }
}

/// Density evolution for one ensemble and puncturing pattern. Construction
/// builds the check table and FFT plans; [`DensityEvolution::set_channel`]
/// can then be called repeatedly.
pub struct DensityEvolution<T: Real> {
    cfg: DeConfig,
    step: T,
    half: usize,
    lambda: Vec<(u32, T)>,
    rho: Vec<(u32, T)>,
    puncturing: Vec<T>,
    table: CheckTable,
    conv: Convolver<T>,
    channel_splits: Vec<Split<T>>,
}

impl<T: Real> DensityEvolution<T> {
    pub fn new(e: &EnsembleSpec<T>, pattern: &PuncturingPattern<T>, cfg: DeConfig) -> Result<Self> {
        let half = cfg.half_width()?;
        let lambda = e.lambda().terms().to_vec();
        let puncturing = lambda.iter().map(|&(d, _)| pattern.rate(d)).collect();
        // validates that the pattern only names degrees of lambda
        pattern.average_puncturing_rate(&e.lambda_node())?;
        let table = CheckTable::new(cfg.step, half);
        let conv = Convolver::new(half, e.lambda().max_degree() as usize);
        Ok(DensityEvolution {
            cfg,
            step: T::lit(cfg.step),
            half,
            lambda,
            rho: e.rho().terms().to_vec(),
            puncturing,
            table,
            conv,
            channel_splits: Vec::new(),
        })
    }

    pub fn config(&self) -> &DeConfig {
        &self.cfg
    }

    pub fn set_channel(&mut self, ch: &ChannelModel<T>) -> Result<()> {
        self.channel_splits = self
            .puncturing
            .iter()
            .map(|&pi| Ok(self.conv.split(&initial_density(ch, pi, &self.cfg)?)))
            .collect::<Result<_>>()?;
        Ok(())
    }

    fn ensure_channel(&self) -> Result<()> {
        if self.channel_splits.is_empty() {
            return Err(Error::InvalidConfig("no channel set".into()));
        }
        Ok(())
    }

    /// Variable-to-check density before any check message has arrived.
    pub fn initial_message(&self) -> Result<QuantizedDensity<T>> {
        self.ensure_channel()?;
        let erasure = QuantizedDensity::point(self.step, self.half, 0);
        Ok(self.variable_step(&erasure))
    }

    fn variable_step(&self, check_msg: &QuantizedDensity<T>) -> QuantizedDensity<T> {
        variable_sum(
            &self.conv,
            &self.conv.split(check_msg),
            self.lambda.iter().zip(&self.channel_splits).map(|(&(d, w), c)| (d, w, c)),
            self.step,
            self.half,
        )
    }

    /// One decoding iteration: check update followed by variable update.
    pub fn iterate(&self, var_msg: &QuantizedDensity<T>) -> Result<QuantizedDensity<T>> {
        self.ensure_channel()?;
        if var_msg.half != self.half {
            return Err(Error::GridMismatch("message is not on the engine grid".into()));
        }
        let check = check_mixture(var_msg, &self.rho, &self.table);
        Ok(self.variable_step(&check))
    }

    /// Runs to convergence, stall or the iteration cap. When `trace` is given
    /// it receives `(iteration, error probability)` for iteration 0 onwards.
    pub fn run(&self, mut trace: Option<&mut Vec<(usize, T)>>) -> Result<DeOutcome<T>> {
        let target = T::lit(self.cfg.target_error);
        let mut msg = self.initial_message()?;
        let mut err = msg.error_probability();
        if let Some(t) = trace.as_deref_mut() {
            t.push((0, err));
        }
        if err <= target {
            return Ok(DeOutcome::Converged { iterations: 0, error: err });
        }
        let mut best = err;
        let mut since_best = 0;
        for it in 1..=self.cfg.max_iters {
            msg = self.iterate(&msg)?;
            err = msg.error_probability();
            if let Some(t) = trace.as_deref_mut() {
                t.push((it, err));
            }
            if err <= target {
                return Ok(DeOutcome::Converged { iterations: it, error: err });
            }
            if err < best * (T::one() - T::lit(1e-9)) {
                best = err;
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= self.cfg.stall_window {
                    return Ok(DeOutcome::Stalled { iterations: it, error: err });
                }
            }
        }
        Ok(DeOutcome::MaxIterations { error: err })
    }
}

/// CSV `iteration,error_probability` for a run trace.
pub fn trace_csv<T: Real>(trace: &[(usize, T)]) -> String {
    let mut out = String::from("iteration,error_probability\n");
    for (it, e) in trace {
        let _ = writeln!(out, "{it},{e:e}");
    }
    out
}

/// Iterative-decoding threshold by bisection on the channel coordinate:
/// Eb/N0 (dB, punctured design rate) for BIAWGN, `epsilon` for BEC and
/// `delta` for BSC.
pub fn de_threshold<T: Real>(
    e: &EnsembleSpec<T>,
    pattern: &PuncturingPattern<T>,
    family: ChannelFamily,
    cfg: &DeConfig,
) -> Result<ThresholdResult<T>> {
    let tol = match family {
        ChannelFamily::Biawgn => T::lit(DEFAULT_TOL_DB),
        _ => T::lit(DEFAULT_TOL_PARAM),
    };
    de_threshold_with_tol(e, pattern, family, cfg, tol)
}

pub fn de_threshold_with_tol<T: Real>(
    e: &EnsembleSpec<T>,
    pattern: &PuncturingPattern<T>,
    family: ChannelFamily,
    cfg: &DeConfig,
    tol: T,
) -> Result<ThresholdResult<T>> {
    let rate = punctured_design_rate(e, pattern)?;
    let mut engine = DensityEvolution::new(e, pattern, *cfg)?;
    let mut decodes = |coord: T| -> Result<bool> {
        engine.set_channel(&family.channel_at(coord, rate)?)?;
        Ok(engine.run(None)?.converged())
    };
    // No iterative decoder beats capacity, so the capacity limit fails.
    let cap = capacity_limit_threshold(rate, family)?;
    let start = match family {
        ChannelFamily::Biawgn => cap.eb_n0_db.unwrap(),
        _ => cap.channel_param,
    };
    let (fail, pass) = bracket_better(family, start, &mut decodes)?;
    let (fail, pass) = bisect(fail, pass, tol, &mut decodes)?;
    let (param, db) = match family {
        ChannelFamily::Biawgn => (crate::thresholds::sigma_from_eb_n0(pass, rate)?, Some(pass)),
        _ => (pass, None),
    };
    Ok(ThresholdResult {
        kind: ThresholdKind::IterativeDe,
        family,
        rate,
        channel_param: param,
        eb_n0_db: db,
        tolerance: (pass - fail).abs(),
    })
}
