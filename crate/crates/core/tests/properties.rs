use proptest::prelude::*;

use ldpcbound::channels::ChannelModel;
use ldpcbound::complexity_bounds::{
    decoding_complexity, generic_complexity_bound, ip_complexity_bound, parallel_complexity_bound,
    rp_complexity_bound,
};
use ldpcbound::degree_distributions::{
    average_right_degree, DegreePolynomial, EnsembleSpec, Perspective, Side,
};
use ldpcbound::density_evolution::{de_threshold_with_tol, DeConfig, DensityEvolution};
use ldpcbound::io::bundled_table1;
use ldpcbound::puncturing::{
    average_puncturing_rate, ip_decomposition, punctured_design_rate, rp_decomposition,
    PuncturingPattern,
};
use ldpcbound::rate_bounds::{
    bec_rate_bound, ip_rate_bound, parallel_rate_bound, parallel_rate_bound_with,
    ParallelAssignment, ParallelEntry, SeriesConfig,
};
use ldpcbound::thresholds::{eb_n0_from_sigma, ml_threshold, ChannelFamily};

fn table() -> (EnsembleSpec<f64>, Vec<PuncturingPattern<f64>>) {
    bundled_table1().unwrap()
}

/// Sparse (degree, weight) lists with distinct increasing degrees.
fn degree_terms(max_degree: u32) -> impl Strategy<Value = Vec<(u32, f64)>> {
    prop::collection::btree_map(1..=max_degree, 0.01f64..1.0, 1..6).prop_map(|m| {
        let total: f64 = m.values().sum();
        m.into_iter().map(|(d, w)| (d, w / total)).collect()
    })
}

fn any_channel() -> impl Strategy<Value = ChannelModel<f64>> {
    prop_oneof![
        (0.0f64..0.95).prop_map(|e| ChannelModel::bec(e).unwrap()),
        (0.0f64..0.45).prop_map(|d| ChannelModel::bsc(d).unwrap()),
        (0.3f64..2.5).prop_map(|s| ChannelModel::biawgn(s).unwrap()),
    ]
}

fn positive_channel() -> impl Strategy<Value = ChannelModel<f64>> {
    prop_oneof![
        (0.01f64..0.95).prop_map(|e| ChannelModel::bec(e).unwrap()),
        (0.01f64..0.45).prop_map(|d| ChannelModel::bsc(d).unwrap()),
        (0.3f64..2.5).prop_map(|s| ChannelModel::biawgn(s).unwrap()),
    ]
}

/// Random assignment; `p` and `q` come from independent weight vectors.
fn assignment<S: Strategy<Value = ChannelModel<f64>>>(
    channel: S,
) -> impl Strategy<Value = ParallelAssignment<f64>> {
    prop::collection::vec((0.05f64..1.0, 0.05f64..1.0, channel), 1..5).prop_map(|v| {
        let sp: f64 = v.iter().map(|x| x.0).sum();
        let sq: f64 = v.iter().map(|x| x.1).sum();
        ParallelAssignment::new(
            v.into_iter()
                .map(|(p, q, channel)| ParallelEntry {
                    p: p / sp,
                    q: q / sq,
                    channel,
                })
                .collect(),
        )
        .unwrap()
    })
}

fn gamma6() -> DegreePolynomial<f64> {
    DegreePolynomial::regular(6, Perspective::Node, Side::Check).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn edge_node_round_trip(terms in degree_terms(30)) {
        let d = DegreePolynomial::new(terms.clone(), Perspective::Edge, Side::Variable).unwrap();
        let back = d.to_node().unwrap().to_edge().unwrap();
        prop_assert_eq!(back.terms().len(), terms.len());
        for ((da, a), (db, b)) in d.terms().iter().zip(back.terms()) {
            prop_assert_eq!(da, db);
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn evaluation_is_monotone(terms in degree_terms(20), xs in prop::collection::vec(0.0f64..=1.0, 2..20)) {
        let d = DegreePolynomial::new(terms, Perspective::Edge, Side::Check).unwrap();
        let mut xs = xs;
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ys: Vec<f64> = xs.iter().map(|&x| d.evaluate(x).unwrap()).collect();
        for w in ys.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn average_right_degree_within_support(terms in degree_terms(25)) {
        let rho = DegreePolynomial::new(terms, Perspective::Edge, Side::Check).unwrap();
        let a = average_right_degree(&rho).unwrap();
        prop_assert!(a >= rho.min_degree() as f64 - 1e-12);
        prop_assert!(a <= rho.max_degree() as f64 + 1e-12);
    }

    #[test]
    fn identical_distributions_are_rejected(terms in degree_terms(12)) {
        let lam = DegreePolynomial::new(terms.clone(), Perspective::Edge, Side::Variable).unwrap();
        let rho = DegreePolynomial::new(terms, Perspective::Edge, Side::Check).unwrap();
        prop_assert!(EnsembleSpec::new(lam, rho).is_err());
    }

    #[test]
    fn moments_are_nonincreasing_and_bounded(ch in any_channel()) {
        let mut prev = 1.0;
        for p in 1..=20 {
            let g = ch.g_moment(p).unwrap();
            prop_assert!(g.value >= -g.error_bound && g.value <= 1.0 + g.error_bound);
            prop_assert!(g.value <= prev + 2.0 * g.error_bound + 1e-15);
            prev = g.value;
        }
    }

    #[test]
    fn erasure_stage_scales_moments_and_capacity(ch in any_channel(), pi in 0.0f64..=1.0, p in 1u32..30) {
        let pre = ch.with_erasure_prefix(pi).unwrap();
        let scaled = (1.0 - pi) * ch.g_moment(p).unwrap().value;
        if ch.is_bec() {
            // folded into a single BEC; equal up to rounding
            prop_assert!((pre.g_moment(p).unwrap().value - scaled).abs() <= 1e-15);
        } else {
            prop_assert_eq!(pre.g_moment(p).unwrap().value, scaled);
        }
        let c = pre.capacity().value - (1.0 - pi) * ch.capacity().value;
        prop_assert!(c.abs() <= 1e-10);
    }

    #[test]
    fn bec_moments_are_constant(eps in 0.0f64..0.99) {
        let ch = ChannelModel::bec(eps).unwrap();
        for p in 1..40 {
            prop_assert_eq!(ch.g_moment(p).unwrap().value, 1.0 - eps);
        }
    }

    #[test]
    fn bec_bound_matches_parallel_bound(a in assignment((0.0f64..0.95).prop_map(|e| ChannelModel::bec(e).unwrap()))) {
        let closed = bec_rate_bound(&a, &gamma6()).unwrap();
        let generic = parallel_rate_bound(&a, &gamma6()).unwrap();
        prop_assert!((closed.value - generic.value).abs() <= 1e-10);
    }

    #[test]
    fn complexity_bound_properties(a in assignment(positive_channel()), eps in 1e-6f64..1.0) {
        let b = parallel_complexity_bound(&a).unwrap();
        prop_assert!(b.k2 > 0.0);
        let growth = b.at(eps / std::f64::consts::E).unwrap() - b.at(eps).unwrap();
        prop_assert!((growth - b.k2).abs() <= 1e-12 * (1.0 + b.k2.abs() + b.k1.abs() + b.at(eps).unwrap().abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn doubling_series_terms_stays_within_error(ch in any_channel(), terms in 5usize..120) {
        let a = ParallelAssignment::single(ch);
        let cfg = |n| SeriesConfig { fixed_terms: Some(n), ..SeriesConfig::default() };
        let Ok(short) = parallel_rate_bound_with(&a, &gamma6(), &cfg(terms)) else { return Ok(()) };
        let long = parallel_rate_bound_with(&a, &gamma6(), &cfg(2 * terms)).unwrap();
        prop_assert!((short.value - long.value).abs() <= short.error_bound + 1e-14,
            "{short:?} vs {long:?}");
    }

    #[test]
    fn decompositions_preserve_capacity(
        rates in prop::collection::vec(0.0f64..0.9, 4),
        alpha in 0.05f64..1.0,
        ppct in 0.0f64..0.9,
        sigma in 0.5f64..1.5,
    ) {
        let (e, _) = table();
        let ch = ChannelModel::biawgn(sigma).unwrap();
        let c = ch.capacity().value;
        let degrees = [2u32, 3, 4, 10];
        let pattern = PuncturingPattern::new(degrees.iter().copied().zip(rates.iter().copied()).collect()).unwrap();
        let p0 = average_puncturing_rate(&pattern, &e.lambda_node()).unwrap();
        let ip = ip_decomposition(&e, &ch, &pattern).unwrap();
        prop_assert!((ip.average_capacity().value - (1.0 - p0) * c).abs() <= 1e-10);

        // More puncturing on one degree never raises the average capacity.
        let mut more = rates.clone();
        more[0] = (more[0] + 0.05).min(1.0);
        let more = PuncturingPattern::new(degrees.iter().copied().zip(more).collect()).unwrap();
        let ip_more = ip_decomposition(&e, &ch, &more).unwrap();
        prop_assert!(ip_more.average_capacity().value <= ip.average_capacity().value + 1e-15);

        if let Ok(rp) = rp_decomposition(&e, &ch, alpha, ppct) {
            prop_assert!((rp.average_capacity().value - (1.0 - alpha * ppct) * c).abs() <= 1e-10);
        }
    }
}

#[test]
fn rate_bound_is_monotone_in_sigma() {
    let (e, patterns) = table();
    for pattern in [&patterns[0], &patterns[4]] {
        let mut prev = f64::INFINITY;
        for k in 0..25 {
            let sigma = 0.5 + 0.05 * k as f64;
            let ch = ChannelModel::biawgn(sigma).unwrap();
            let b = ip_rate_bound(&e, &ch, pattern).unwrap();
            assert!(b.value <= prev + b.error_bound, "sigma {sigma}: {} > {prev}", b.value);
            prev = b.value;
        }
    }
}

#[test]
fn ip_bound_exceeds_punctured_rate_above_ml_threshold() {
    let (e, patterns) = table();
    for (i, p) in patterns.iter().enumerate().step_by(2) {
        let t = ml_threshold(&e, p, ChannelFamily::Biawgn).unwrap();
        let rate = punctured_design_rate(&e, p).unwrap();
        for delta in [0.002, 0.05, 0.5] {
            let ch = ChannelFamily::Biawgn.channel_at(t.eb_n0_db.unwrap() + delta, rate).unwrap();
            let b = ip_rate_bound(&e, &ch, p).unwrap();
            assert!(b.value >= rate, "row {}: {} < {rate}", i + 1, b.value);
        }
    }
}

#[test]
fn complexity_bec_variant_exceeds_generic() {
    for k in 1..20 {
        let eps = 0.05 * k as f64;
        let a = ParallelAssignment::single(ChannelModel::bec(eps).unwrap());
        let bec = parallel_complexity_bound(&a).unwrap();
        let generic = generic_complexity_bound(&a).unwrap();
        assert!(bec.k1 > generic.k1, "eps {eps}");
        assert_eq!(bec.k2, generic.k2);
    }
}

#[test]
fn punctured_complexity_bounds_match_their_decompositions() {
    let (e, patterns) = table();
    let ch = ChannelModel::biawgn(0.9).unwrap();
    for p in &patterns {
        let direct = ip_complexity_bound(&e, &ch, p).unwrap();
        let via = parallel_complexity_bound(&ip_decomposition(&e, &ch, p).unwrap()).unwrap();
        assert_eq!((direct.k1, direct.k2), (via.k1, via.k2));
    }
    let direct = rp_complexity_bound(&e, &ch, 0.4, 0.3).unwrap();
    let via = parallel_complexity_bound(&rp_decomposition(&e, &ch, 0.4, 0.3).unwrap()).unwrap();
    assert_eq!((direct.k1, direct.k2), (via.k1, via.k2));

    // Without puncturing both collapse to the single-channel bound.
    let single = parallel_complexity_bound(&ParallelAssignment::single(ch)).unwrap();
    let ip = ip_complexity_bound(&e, &ch, &PuncturingPattern::none()).unwrap();
    let rp = rp_complexity_bound(&e, &ch, 0.5, 0.0).unwrap();
    for b in [ip, rp] {
        assert!((b.k1 - single.k1).abs() < 1e-12 && (b.k2 - single.k2).abs() < 1e-12);
    }
}

#[test]
fn table_ensembles_respect_the_complexity_bound() {
    let (e, patterns) = table();
    let chi = decoding_complexity(&e).unwrap();
    for p in &patterns {
        let t = ml_threshold(&e, p, ChannelFamily::Biawgn).unwrap();
        let ch = ChannelModel::biawgn(t.channel_param).unwrap();
        let b = ip_complexity_bound(&e, &ch, p).unwrap();
        let eps = 1.0 - t.rate / ch.capacity().value;
        assert!(eps > 0.0);
        assert!(chi >= b.at(eps).unwrap(), "chi {chi} < bound {}", b.at(eps).unwrap());
    }
}

#[test]
fn error_probability_decreases_below_threshold() {
    let e = EnsembleSpec::<f64>::regular(3, 6).unwrap();
    let mut de = DensityEvolution::new(&e, &PuncturingPattern::none(), DeConfig::default()).unwrap();
    de.set_channel(&ChannelModel::biawgn(0.86).unwrap()).unwrap();
    let mut trace = Vec::new();
    assert!(de.run(Some(&mut trace)).unwrap().converged());
    for w in trace.windows(2) {
        assert!(w[1].1 <= w[0].1 * (1.0 + 1e-9) + 1e-16, "{:?}", w);
    }
}

#[test]
fn more_puncturing_never_lowers_the_de_threshold() {
    let coarse = DeConfig {
        max_llr: 15.0,
        step: 0.125,
        ..DeConfig::default()
    };
    let e = EnsembleSpec::<f64>::regular(3, 6).unwrap();
    let mut prev = f64::NEG_INFINITY;
    for pi in [0.0, 0.05, 0.1] {
        let p = PuncturingPattern::new(vec![(3, pi)]).unwrap();
        let t = de_threshold_with_tol(&e, &p, ChannelFamily::Biawgn, &coarse, 0.01).unwrap();
        let db = t.eb_n0_db.unwrap();
        assert!(db >= prev - 0.01, "pi {pi}: {db} < {prev}");
        prev = db;
    }
}

#[test]
fn single_precision_tracks_double() {
    let e32 = EnsembleSpec::<f32>::regular(3, 6).unwrap();
    let e64 = EnsembleSpec::<f64>::regular(3, 6).unwrap();
    let b32 = parallel_rate_bound(&ParallelAssignment::single(ChannelModel::biawgn(0.9f32).unwrap()), &e32.gamma_node()).unwrap();
    let b64 = parallel_rate_bound(&ParallelAssignment::single(ChannelModel::biawgn(0.9f64).unwrap()), &e64.gamma_node()).unwrap();
    assert!((b32.value as f64 - b64.value).abs() < 1e-4);
    let db32 = eb_n0_from_sigma(0.9f32, 0.5).unwrap();
    assert!((db32 as f64 - eb_n0_from_sigma(0.9f64, 0.5).unwrap()).abs() < 1e-5);
}

#[test]
fn no_error_floor_far_above_threshold() {
    let (e, patterns) = table();
    let cfg = DeConfig {
        max_llr: 40.0,
        step: 1.0 / 16.0,
        target_error: 1e-14,
        ..DeConfig::default()
    };
    let rate = punctured_design_rate(&e, &patterns[4]).unwrap();
    let mut de = DensityEvolution::new(&e, &patterns[4], cfg).unwrap();
    de.set_channel(&ChannelFamily::Biawgn.channel_at(2.0, rate).unwrap()).unwrap();
    let out = de.run(None).unwrap();
    assert!(out.converged(), "{out:?}");
}
