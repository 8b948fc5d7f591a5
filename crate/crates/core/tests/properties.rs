use proptest::prelude::*;

use senscap_core::capacity::{self, CapacityQuery};
use senscap_core::montecarlo::{self, hamming_distortion, wilson_interval};
use senscap_core::mrf::{self, MrfModel, TargetField};
use senscap_core::sensing::{self, NoiseChannel, SensingFunction};
use senscap_core::types::{self, JointType, PatternSpace};

fn field(k: usize) -> impl Strategy<Value = TargetField> {
    prop::collection::vec(0u8..2, k * k).prop_map(move |bits| TargetField::new(k, bits).unwrap())
}

fn sized_field() -> impl Strategy<Value = TargetField> {
    (3usize..7).prop_flat_map(field)
}

fn field_pair() -> impl Strategy<Value = (TargetField, TargetField)> {
    (3usize..6).prop_flat_map(|k| (field(k), field(k)))
}

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n).prop_map(|v| {
        let v: Vec<f64> = v.into_iter().map(|x| x + 1e-6).collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn model() -> impl Strategy<Value = MrfModel> {
    (0.05f64..0.95, 0.05f64..0.95, 0.05f64..0.95)
        .prop_map(|(a, b, c)| MrfModel::new([a, 1.0 - a], [[b, 1.0 - c], [1.0 - b, c]]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn torus_shifts_preserve_type_and_probability(
        f in sized_field(), dr in -6i64..6, dc in -6i64..6, m in model()
    ) {
        let g = f.shifted(dr, dc);
        prop_assert_eq!(mrf::field_type(&f), mrf::field_type(&g));
        prop_assert!((mrf::log_prob_unnorm(&f, &m) - mrf::log_prob_unnorm(&g, &m)).abs() < 1e-9);
    }

    #[test]
    fn factorized_and_type_forms_agree(f in sized_field(), m in model()) {
        let a = mrf::log_prob_unnorm(&f, &m);
        let b = mrf::log_prob_unnorm_from_type(&mrf::field_type(&f), &m);
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn field_type_is_a_lattice_distribution(f in sized_field()) {
        let phi = mrf::field_type(&f);
        let k2 = (f.k() * f.k()) as u64;
        prop_assert_eq!(phi.total(), k2);
        prop_assert_eq!(phi.counts().iter().sum::<u64>(), k2);
    }

    #[test]
    fn joint_types_marginalize_to_sensor_types((fi, fj) in field_pair(), c in 0u32..2) {
        let lambda = types::joint_sensor_type(&fi, &fj, c).unwrap();
        let (rows, cols) = lambda.marginal_counts().unwrap();
        let (gi, gj) = (types::sensor_type(&fi, c).unwrap(), types::sensor_type(&fj, c).unwrap());
        prop_assert_eq!(rows.as_slice(), gi.hist().counts());
        prop_assert_eq!(cols.as_slice(), gj.hist().counts());
        let pair = types::center_pair_counts(&lambda).unwrap();
        let d = hamming_distortion(&fi, &fj).unwrap();
        prop_assert_eq!((pair[0][1] + pair[1][0]) as f64 / (fi.k() * fi.k()) as f64, d);
    }

    #[test]
    fn hamming_is_a_metric((a, b) in field_pair(), seed in any::<u64>()) {
        let k = a.k();
        let c = TargetField::random_uniform(k, &mut senscap_core::rng::stream(seed, 0)).unwrap();
        let ab = hamming_distortion(&a, &b).unwrap();
        prop_assert_eq!(ab, hamming_distortion(&b, &a).unwrap());
        prop_assert_eq!(hamming_distortion(&a, &a).unwrap(), 0.0);
        prop_assert!(ab <= hamming_distortion(&a, &c).unwrap() + hamming_distortion(&c, &b).unwrap() + 1e-15);
        prop_assert!((hamming_distortion(&a, &b.complement()).unwrap() - (1.0 - ab)).abs() < 1e-15);
    }

    #[test]
    fn denominator_forms_agree(mu in simplex(32 * 32), m in model()) {
        let mu = JointType::relaxed(PatternSpace::Quintuplet, mu).unwrap();
        let phi = capacity::typical_field_type(&m);
        let a = capacity::denom_t2(&mu, &phi).unwrap();
        let b = capacity::denom_t2_divergence_form(&mu, &phi).unwrap();
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn exponent_vanishes_at_zero_and_on_useless_channels(
        lambda in simplex(4), rho in 0.0f64..1.0
    ) {
        let lambda = JointType::relaxed(PatternSpace::Footprint(sensing::Coverage::new(0)), lambda).unwrap();
        let psi = SensingFunction::identity();
        let bsc = NoiseChannel::bsc(0.1).unwrap();
        prop_assert_eq!(capacity::exponent_e(0.0, &lambda, &psi, &bsc).unwrap(), 0.0);
        let flat = NoiseChannel::bsc(0.5).unwrap();
        prop_assert!(capacity::exponent_e(rho, &lambda, &psi, &flat).unwrap().abs() < 1e-12);
    }

    #[test]
    fn wilson_interval_brackets_the_estimate(trials in 1usize..5000, frac in 0.0f64..=1.0) {
        let failures = ((trials as f64) * frac).floor() as usize;
        let (lo, hi) = wilson_interval(failures, trials);
        let p = failures as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn map_beats_every_other_field(seed in any::<u64>(), n in 1usize..12, q in 0.01f64..0.45) {
        let m = MrfModel::symmetric(0.7).unwrap();
        let ch = NoiseChannel::bsc(q).unwrap();
        let net = sensing::generate_network(3, n, 0, SensingFunction::identity(), ch.clone(), seed).unwrap();
        let f = mrf::gibbs_sample(&m, 3, 5, seed).unwrap();
        let y = sensing::noisy_output(&sensing::ideal_output(&net, &f).unwrap(), &ch, seed).unwrap();
        let best = montecarlo::map_decode(&y, &net, &m).unwrap();
        let top = montecarlo::posterior_score(&best, &y, &net, &m).unwrap();
        for idx in 0..512 {
            let g = TargetField::from_index(3, idx).unwrap();
            prop_assert!(montecarlo::posterior_score(&g, &y, &net, &m).unwrap() <= top + 1e-9);
        }
    }

    #[test]
    fn bound_is_nonnegative_and_certified(p in 0.5f64..0.95, d in 0.02f64..0.5, q in 0.02f64..0.3) {
        let query = CapacityQuery::new(
            MrfModel::symmetric(p).unwrap(), 0, SensingFunction::identity(), NoiseChannel::bsc(q).unwrap(), d,
        );
        let r = capacity::clb(&query).unwrap();
        prop_assert!(r.value >= 0.0);
        prop_assert!(r.certificate.abs() <= query.options.inner_tol);
        let w = r.witness.unwrap();
        prop_assert!(w.distortion >= d - 1e-8);
    }
}
