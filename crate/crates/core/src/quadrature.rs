//! Globally adaptive Gauss-Kronrod (G7/K15) quadrature on finite intervals.
//!
//! The interval with the largest local error estimate is bisected until the
//! summed estimate drops below the requested absolute tolerance. The local
//! estimate is the raw `|K15 - G7|` difference, which overstates the error of
//! the Kronrod value on smooth integrands.

use crate::scalar::Real;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod abscissae XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Value of a definite integral with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: T,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
    roundoff: T,
}

fn kronrod15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Segment<T> {
    let center = T::lit(0.5) * (a + b);
    let half = T::lit(0.5) * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    let mut abs_sum = kronrod.abs();
    for k in 0..7 {
        let dx = half * T::lit(XGK[k]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod = kronrod + T::lit(WGK[k]) * (f1 + f2);
        abs_sum = abs_sum + T::lit(WGK[k]) * (f1.abs() + f2.abs());
        if k % 2 == 1 {
            gauss = gauss + T::lit(WG[k / 2]) * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let roundoff = T::lit(50.0) * T::epsilon() * abs_sum * half.abs();
    let error = ((kronrod - gauss) * half).abs();
    Segment {
        a,
        b,
        value,
        error,
        roundoff,
    }
}

/// Nodes of the 15-point Kronrod rule on `[a, b]` as `(x, kronrod weight,
/// gauss weight)`; the gauss weight is zero at the eight non-Gauss nodes.
pub(crate) fn kronrod_panel<T: Real>(a: T, b: T) -> [(T, T, T); 15] {
    let center = T::lit(0.5) * (a + b);
    let half = T::lit(0.5) * (b - a);
    let mut out = [(center, half * T::lit(WGK[7]), half * T::lit(WG[3])); 15];
    for k in 0..7 {
        let dx = half * T::lit(XGK[k]);
        let wk = half * T::lit(WGK[k]);
        let wg = if k % 2 == 1 { half * T::lit(WG[k / 2]) } else { T::zero() };
        out[2 * k] = (center - dx, wk, wg);
        out[2 * k + 1] = (center + dx, wk, wg);
    }
    out
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting from the segments
/// delimited by `breaks` (sorted, at least two points; duplicates are skipped).
///
/// Refinement stops when the total error estimate is below `abs_tol` or after
/// `max_segments` segments; the returned error is the estimate either way.
pub fn integrate<T: Real, F: Fn(T) -> T>(
    f: F,
    breaks: &[T],
    abs_tol: T,
    max_segments: usize,
) -> Integral<T> {
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut segments: Vec<Segment<T>> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod15(&f, w[0], w[1]))
        .collect();
    if segments.is_empty() {
        return Integral {
            value: T::zero(),
            error: T::zero(),
            intervals: 0,
        };
    }

    loop {
        let total_err: T = segments.iter().map(|s| s.error).sum();
        let noise: T = segments.iter().map(|s| s.roundoff).sum();
        // Refining below the rounding floor only burns evaluations.
        if total_err <= abs_tol.max(noise) || segments.len() >= max_segments {
            break;
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |(bi, be), (i, s)| {
                if s.error > be {
                    (i, s.error)
                } else {
                    (bi, be)
                }
            });
        let seg = segments.swap_remove(worst);
        let mid = T::lit(0.5) * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval cannot be split further at this precision.
            segments.push(seg);
            break;
        }
        segments.push(kronrod15(&f, seg.a, mid));
        segments.push(kronrod15(&f, mid, seg.b));
    }

    // Sum small contributions first.
    segments.sort_by(|x, y| x.value.abs().partial_cmp(&y.value.abs()).unwrap());
    Integral {
        value: segments.iter().map(|s| s.value).sum(),
        error: segments.iter().map(|s| s.error + s.roundoff).sum(),
        intervals: segments.len(),
    }
}
