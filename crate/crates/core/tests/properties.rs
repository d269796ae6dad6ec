use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use tclock::clock::MeasurementEnsemble;
use tclock::dynamics::static_variance_closed;
use tclock::rational::{is_integer_multiple, nearest_rational, rational, to_f64};
use tclock::{
    assemble, build_hamiltonian, build_time_operator, ccr_residual, evolve_state, expectation, expectation_t_closed,
    heisenberg_t, invariant_set, membership_test, pair_set, pair_vector, project_pair, rational_gcd, variance,
    variance_t_closed, Commensurability, OperatorMatrix, ProjectedClock, Rational, Spectrum, StateVector,
};

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn normalized_state(dim: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec(complex(), dim)
        .prop_filter("nonzero", |v| v.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-6)
        .prop_map(|v| StateVector::new(v).normalized())
}

fn hermitian(dim: usize) -> impl Strategy<Value = OperatorMatrix> {
    prop::collection::vec(complex(), dim * dim).prop_map(move |raw| {
        OperatorMatrix::from_fn(dim, |r, c| match r.cmp(&c) {
            std::cmp::Ordering::Less => raw[r * dim + c],
            std::cmp::Ordering::Equal => Complex64::new(raw[r * dim + c].re, 0.0),
            std::cmp::Ordering::Greater => raw[c * dim + r].conj(),
        })
    })
}

fn pair(max: usize) -> impl Strategy<Value = (usize, usize)> {
    (1..=max).prop_flat_map(|k| (Just(k), 0..k))
}

fn positive_rationals() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((1i64..1000, 1i64..100), 1..12)
        .prop_map(|v| v.into_iter().map(|(n, d)| rational(n, d)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn variance_is_nonnegative((a, phi) in (1usize..8).prop_flat_map(|d| (hermitian(d), normalized_state(d)))) {
        prop_assert!(variance(&a, &phi).unwrap() >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ccr_exact_on_zero_sum_vectors(n in 2usize..64, extra in 0usize..192, raw in prop::collection::vec(complex(), 64)) {
        let m = n + extra;
        let s = Spectrum::harmonic(1.0, m).unwrap();
        let t = build_time_operator(&s, m).unwrap();
        let h = build_hamiltonian(&s, m).unwrap();
        let mut v = raw[..n].to_vec();
        let mean = v.iter().sum::<Complex64>() / n as f64;
        v.iter_mut().for_each(|c| *c -= mean);
        v.resize(m, Complex64::new(0.0, 0.0));
        prop_assert!(ccr_residual(&t, &h, &StateVector::new(v), 1.0).unwrap() <= 1e-12);
        prop_assert_eq!(t.hermiticity_defect(), 0.0);
    }

    #[test]
    fn assembled_vectors_satisfy_ccr(
        entries in prop::collection::btree_map(pair(30), complex(), 1..8),
        extra in 0usize..20,
    ) {
        let support = entries.keys().map(|&(k, _)| k + 1).max().unwrap();
        let m = support + extra;
        let s = Spectrum::particle_in_box(1.0, m).unwrap();
        let phi = assemble(entries.into_iter().collect::<BTreeMap<_, _>>(), m).unwrap();
        prop_assert_eq!(phi.support(), support);
        let t = build_time_operator(&s, m).unwrap();
        let h = build_hamiltonian(&s, m).unwrap();
        prop_assert!(ccr_residual(&t, &h, phi.state(), 1.0).unwrap() <= 1e-12);
        prop_assert!(membership_test(phi.state(), 1e-10).in_domain);
    }

    #[test]
    fn projected_ccr_only_on_pair_vector((k, l) in pair(12), hbar in 0.5..2.0f64) {
        let s = Spectrum::custom(1.3, hbar, Spectrum::harmonic(1.0, 13).unwrap().levels().to_vec(), Commensurability::Commensurable).unwrap();
        let t = project_pair(&build_time_operator(&s, 13).unwrap(), k, l).unwrap();
        let h = project_pair(&build_hamiltonian(&s, 13).unwrap(), k, l).unwrap();
        let minus = StateVector::from_real(&[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]);
        let plus = StateVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        prop_assert!(ccr_residual(&t, &h, &minus, hbar).unwrap() <= 1e-12);
        prop_assert!(ccr_residual(&t, &h, &plus, hbar).unwrap() > 0.5 * hbar);
    }

    #[test]
    fn membership_on_lattice_not_at_half_period((k, l) in pair(8), j in 1i64..=5) {
        let s = Spectrum::harmonic(1.0, 9).unwrap();
        let phi = pair_vector(k, l, 9).unwrap();
        let p = pair_set(&s, k, l).unwrap().base_period().unwrap();
        let on = evolve_state(&s, &phi, j as f64 * p).unwrap();
        let half = evolve_state(&s, &phi, (j as f64 - 0.5) * p).unwrap();
        prop_assert!(membership_test(&on, 1e-10).in_domain);
        prop_assert!(!membership_test(&half, 1e-10).in_domain);
    }

    #[test]
    fn full_lattice_returns_every_pair(n in 2usize..=7, (k, l) in pair(6), j in -3i64..=3) {
        prop_assume!(k < n);
        let s = Spectrum::particle_in_box(1.0, n).unwrap();
        let set = invariant_set(&s, n).unwrap();
        prop_assert_eq!(set.element_returns_pair(&s, j, k, l), Some(true));
        let evolved = evolve_state(&s, &pair_vector(k, l, n).unwrap(), set.element(j).unwrap()).unwrap();
        prop_assert!(membership_test(&evolved, 1e-10).in_domain);
    }

    #[test]
    fn gcd_is_order_independent(values in positive_rationals(), seed in any::<u64>()) {
        let g = rational_gcd(values.iter()).unwrap();
        let mut shuffled = values.clone();
        let len = shuffled.len();
        for i in (1..len).rev() {
            shuffled.swap(i, (seed.wrapping_mul(i as u64 + 7) % (i as u64 + 1)) as usize);
        }
        shuffled.reverse();
        prop_assert_eq!(&rational_gcd(shuffled.iter()).unwrap(), &g);
        for v in &values {
            prop_assert!(is_integer_multiple(v, &g));
            let q = v / &g;
            prop_assert!(q.is_integer() && q > Rational::from_integer(0.into()));
        }
    }

    #[test]
    fn levels_survive_float_round_trip(n in 2usize..200) {
        for s in [Spectrum::harmonic(1.0, n).unwrap(), Spectrum::particle_in_box(1.0, n).unwrap()] {
            for level in s.levels() {
                let exact = level.exact().unwrap();
                prop_assert_eq!(&nearest_rational(to_f64(exact), 1e-12).unwrap(), exact);
            }
        }
    }

    #[test]
    fn evolution_is_unitary(phi in normalized_state(12), t in -50.0..50.0f64) {
        let s = Spectrum::particle_in_box(0.7, 12).unwrap();
        prop_assert!((evolve_state(&s, &phi, t).unwrap().norm() - phi.norm()).abs() <= 1e-12);
    }

    #[test]
    fn heisenberg_matches_schrodinger(phi in normalized_state(16), t in -20.0..20.0f64) {
        let s = Spectrum::harmonic(1.0, 16).unwrap();
        let op = build_time_operator(&s, 16).unwrap();
        let heisenberg = expectation(&heisenberg_t(&op, &s, t).unwrap(), &phi).unwrap();
        let schrodinger = expectation(&op, &evolve_state(&s, &phi, t).unwrap()).unwrap();
        prop_assert!((heisenberg - schrodinger).abs() <= 1e-12);
    }

    #[test]
    fn closed_forms_are_periodic((k, l) in pair(6), tau in -10.0..10.0f64) {
        let s = Spectrum::harmonic(1.0, 32).unwrap();
        let period = TAU / s.transition_frequency(k, l);
        let e = expectation_t_closed(k, l, tau, &s).unwrap();
        let v = variance_t_closed(k, l, tau, &s, 32).unwrap();
        prop_assert!((e - expectation_t_closed(k, l, tau + period, &s).unwrap()).abs() <= 1e-12);
        prop_assert!((v - variance_t_closed(k, l, tau + period, &s, 32).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn variance_grows_with_truncation((k, l) in pair(5), m in 7usize..120, tau in 0.0..TAU) {
        let s = Spectrum::harmonic(1.0, 121).unwrap();
        prop_assert!(static_variance_closed(k, l, &s, m + 1).unwrap() >= static_variance_closed(k, l, &s, m).unwrap());
        prop_assert!(variance_t_closed(k, l, tau, &s, m + 1).unwrap() >= variance_t_closed(k, l, tau, &s, m).unwrap());
    }

    #[test]
    fn clock_state_group_property((k, l) in pair(5), tau in -5.0..5.0f64, t in -5.0..5.0f64) {
        let s = Spectrum::harmonic(1.0, 6).unwrap();
        let clock = ProjectedClock::new(&s, k, l).unwrap();
        let evolved = clock.evolve(&clock.clock_state(tau), t).unwrap();
        prop_assert!(evolved.max_abs_diff(&clock.clock_state(tau + t)).unwrap() <= 1e-12);
    }

    #[test]
    fn readout_near_ticks((k, l) in pair(5), x in -0.1..0.1f64) {
        let s = Spectrum::harmonic(1.0, 6).unwrap();
        let clock = ProjectedClock::new(&s, k, l).unwrap();
        let w = clock.omega_kl();
        let tau = x / w;
        let r = clock.read_time(&clock.clock_state(tau), 0, 0, 0).unwrap();
        prop_assert!((r.tau_arcsin - tau).abs() <= 1e-12);
        prop_assert!((r.tau_linear - tau).abs() <= (w * tau).abs().powi(3) / (6.0 * w) * (1.0 + 1e-6) + 1e-15);
        prop_assert!(r.uncertainty_product <= 0.5 + 1e-12 && r.uncertainty_product >= 0.0);
    }

    #[test]
    fn saturation_on_ticks((k, l) in pair(5), j in -2i64..=2) {
        let s = Spectrum::harmonic(1.0, 6).unwrap();
        let clock = ProjectedClock::new(&s, k, l).unwrap();
        let product = clock.uncertainty_product(j as f64 * clock.period()).unwrap();
        prop_assert!((product - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn sampling_is_reproducible(p in 0.0..=1.0f64, shots in 1u64..200_000, seed in any::<u64>()) {
        let a = MeasurementEnsemble::sample(p, shots, seed);
        prop_assert_eq!(a, MeasurementEnsemble::sample(p, shots, seed));
        prop_assert_eq!(a.plus + a.minus, shots);
    }
}

#[test]
fn readout_coverage_at_ten_thousand_shots() {
    let s = Spectrum::larmor(1.0, 1.0).unwrap();
    let clock = ProjectedClock::new(&s, 1, 0).unwrap();
    let tau = 0.01;
    let state = clock.clock_state(tau);
    let covered = (0..100)
        .filter(|&seed| {
            let r = clock.read_time(&state, 10_000, seed, 0).unwrap();
            (r.tau_arcsin - tau).abs() <= 3.0 * r.std_error.unwrap() / tau.cos()
        })
        .count();
    assert!(covered >= 95, "coverage {covered}/100");
}
