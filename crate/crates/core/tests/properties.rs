mod common;

use common::*;
use num_complex::Complex64;
use numid_core::blind_id::{
    cp_correlation_metric, estimate_type, find_peak_pair, folded_correlation_metric, period_profile,
};
use numid_core::channel::{apply_channel, combine_users};
use numid_core::fft::{dft, idft};
use numid_core::metrics::{aggregate, ber_awgn_bpsk, ber_rayleigh_bpsk, Tally, TrialOutcome};
use numid_core::numerology::{derive_numerology, BaseParams};
use numid_core::waveform::add_cp;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-100.0f64..100.0, -100.0f64..100.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn signal(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(complex(), len)
}

fn pow2_signal() -> impl Strategy<Value = Vec<Complex64>> {
    (0u32..=9).prop_flat_map(|log| prop::collection::vec(complex(), 1usize << log))
}

fn outcome() -> impl Strategy<Value = TrialOutcome> {
    (any::<bool>(), any::<bool>(), 0u64..=2048, 0u64..=2048, any::<bool>()).prop_map(|(t, l, eb, en, skip)| {
        TrialOutcome {
            snr_index: 0,
            trial_index: 0,
            stream: 0,
            type_correct: (!skip).then_some(t),
            location_correct: (!skip).then_some(t && l),
            bit_errors_blind: (!skip).then_some(eb),
            bit_errors_nonblind: Some(en),
            total_bits: 2048,
        }
    })
}

proptest! {
    #[test]
    fn parseval(x in pow2_signal()) {
        let e_t: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let e_f: f64 = dft(&x).unwrap().iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((e_t - e_f).abs() <= 1e-9 * e_t.max(1.0));
    }

    #[test]
    fn idft_inverts_dft(x in pow2_signal()) {
        let back = idft(&dft(&x).unwrap()).unwrap();
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).norm() <= 1e-9 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn dft_is_linear(x in prop::collection::vec((complex(), complex()), 64), a in complex(), b in complex()) {
        let (u, v): (Vec<_>, Vec<_>) = x.into_iter().unzip();
        let mix: Vec<Complex64> = u.iter().zip(&v).map(|(p, q)| a * p + b * q).collect();
        let lhs = dft(&mix).unwrap();
        let (fu, fv) = (dft(&u).unwrap(), dft(&v).unwrap());
        for i in 0..64 {
            let rhs = a * fu[i] + b * fv[i];
            prop_assert!((lhs[i] - rhs).norm() <= 1e-7 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn channel_is_linear(x in signal(1..100), a in complex(), b in complex(), h in signal(1..10)) {
        let y: Vec<Complex64> = x.iter().rev().copied().collect();
        let mix: Vec<Complex64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let lhs = apply_channel(&mix, &h);
        let (cx, cy) = (apply_channel(&x, &h), apply_channel(&y, &h));
        for i in 0..x.len() {
            let rhs = a * cx[i] + b * cy[i];
            prop_assert!((lhs[i] - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn combining_commutes_and_associates(v in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3, -1e3f64..1e3), 1..50)) {
        let col = |f: fn(&(f64, f64, f64)) -> f64| v.iter().map(|t| Complex64::new(f(t), 0.0)).collect::<Vec<_>>();
        let (a, b, c) = (col(|t| t.0), col(|t| t.1), col(|t| t.2));
        prop_assert_eq!(combine_users(&[a.clone(), b.clone()]).unwrap(), combine_users(&[b.clone(), a.clone()]).unwrap());
        let left = combine_users(&[combine_users(&[a.clone(), b.clone()]).unwrap(), c.clone()]).unwrap();
        let right = combine_users(&[a, combine_users(&[b, c]).unwrap()]).unwrap();
        for (l, r) in left.iter().zip(&right) {
            prop_assert!((l - r).norm() <= 1e-9);
        }
    }

    #[test]
    fn cp_is_a_copy_of_the_tail(x in signal(1..300), frac in 0.0f64..1.0) {
        let cp = (frac * x.len() as f64) as usize;
        let s = add_cp(&x, cp).unwrap();
        prop_assert_eq!(s.len(), x.len() + cp);
        prop_assert_eq!(&s[..cp], &x[x.len() - cp..]);
        prop_assert_eq!(&s[cp..], &x[..]);
    }

    #[test]
    fn metric_lies_in_unit_interval(x in signal(40..200), zero_from in 0usize..200, spike in 0usize..200) {
        let mut x = x;
        let len = x.len();
        x[zero_from.min(len - 1)..].iter_mut().step_by(2).for_each(|v| *v = Complex64::new(0.0, 0.0));
        x[spike % len] *= 1e6;
        let cfg = custom_config(16, 4);
        for v in cp_correlation_metric(&x, &cfg).unwrap().values {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        for v in folded_correlation_metric(&x, &cfg).unwrap().values {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn metric_is_scale_invariant(x in signal(60..200), c in complex()) {
        prop_assume!(c.norm() > 1e-3);
        let cfg = custom_config(32, 8);
        let scaled: Vec<Complex64> = x.iter().map(|v| v * c).collect();
        let a = cp_correlation_metric(&x, &cfg).unwrap().values;
        let b = cp_correlation_metric(&scaled, &cfg).unwrap().values;
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).abs() <= 1e-9);
        }
    }

    #[test]
    fn peak_pair_stays_in_its_windows(v in prop::collection::vec(0.0f64..1.0, 0..300)) {
        let cfg = custom_config(64, 16);
        let p = find_peak_pair(&v, &cfg);
        prop_assert!(p.i_p1 < 40);
        prop_assert!((40..80).contains(&p.i_p2));
        prop_assert_eq!(p.estimated_size, p.i_p2 - p.i_p1);
    }

    #[test]
    fn type_verdicts_survive_scaling(seed in any::<u64>(), c in complex()) {
        prop_assume!(c.norm() > 1e-3);
        let base = BaseParams { n_fft0: 256, m_active0: 64, ..BaseParams::default() };
        let cands: Vec<_> = (0..3).map(|k| derive_numerology(k, &base).unwrap()).collect();
        let y = random_signal(&mut rng(seed), 3 * 272);
        let scaled: Vec<Complex64> = y.iter().map(|v| v * c).collect();
        let a = estimate_type(&y, &cands);
        let b = estimate_type(&scaled, &cands);
        for (p, q) in a.iter().zip(&b) {
            prop_assert_eq!(p.peaks, q.peaks);
            prop_assert_eq!(p.matched, q.matched);
        }
    }

    #[test]
    fn profile_mirrors_prefix_onto_tail(x in signal(300..600)) {
        let cfg = custom_config(64, 16);
        let folded = folded_correlation_metric(&x, &cfg).unwrap().values;
        let prof = period_profile(&folded, &cfg);
        prop_assert_eq!(prof.len(), 80);
        prop_assert_eq!(&prof[..64], &folded[..64]);
        prop_assert_eq!(&prof[64..], &folded[..16]);
    }

    #[test]
    fn aggregate_ignores_order(mut v in prop::collection::vec(outcome(), 1..60), seed in any::<u64>()) {
        let a = aggregate(1.0, &v).unwrap();
        use rand::seq::SliceRandom;
        v.shuffle(&mut rng(seed));
        let b = aggregate(1.0, &v).unwrap();
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn merge_is_associative(a in prop::collection::vec(outcome(), 0..20),
                            b in prop::collection::vec(outcome(), 0..20),
                            c in prop::collection::vec(outcome(), 0..20)) {
        let t = |v: &Vec<TrialOutcome>| v.iter().cloned().collect::<Tally>();
        let (ta, tb, tc) = (t(&a), t(&b), t(&c));
        prop_assert_eq!(ta.merge(tb).merge(tc), ta.merge(tb.merge(tc)));
        prop_assert_eq!(ta.merge(tb), tb.merge(ta));
        let all: Vec<_> = a.iter().chain(&b).chain(&c).cloned().collect();
        prop_assert_eq!(t(&all), ta.merge(tb).merge(tc));
    }

    #[test]
    fn aggregate_rates_are_consistent(v in prop::collection::vec(outcome(), 1..60)) {
        let r = aggregate(0.0, &v).unwrap();
        if !r.joint_success_rate.is_nan() {
            prop_assert!(r.joint_success_rate <= r.type_success_rate.min(r.location_success_rate));
            prop_assert!((0.0..=1.0).contains(&r.type_success_rate));
        }
        prop_assert!((0.0..=1.0).contains(&r.ber_nonblind));
    }

    #[test]
    fn fading_costs_more_than_awgn(snr in 0.0f64..1e6) {
        prop_assert!(ber_rayleigh_bpsk(snr).unwrap() >= ber_awgn_bpsk(snr).unwrap());
    }

    #[test]
    fn bers_decrease_with_snr(a in 0.0f64..100.0, d in 1e-6f64..10.0) {
        prop_assert!(ber_awgn_bpsk(a + d).unwrap() < ber_awgn_bpsk(a).unwrap());
        prop_assert!(ber_rayleigh_bpsk(a + d).unwrap() < ber_rayleigh_bpsk(a).unwrap());
    }
}
