use bornlab_core::numerics::{haar_unitary, RealMatrix, RngStream};
use bornlab_core::phase_recovery::{gradient, objective, recover, RecoverySettings, RecoveryStatus};
use bornlab_core::stochastic::{
    build_sigma, chain_link_3x3, classify, extract_probability, is_bistochastic, sample_bistochastic,
    singular_value_profile, validate_stochastic, ClassKind, ProbabilityMatrix,
};
use proptest::prelude::*;
use rand::Rng;

/// Positive rows normalized to one: stochastic, generally not bistochastic.
fn random_stochastic(n: usize, seed: u64) -> ProbabilityMatrix {
    let mut gen = RngStream::new(seed, 11).generator();
    let mut m = RealMatrix::from_fn(n, n, |_, _| gen.random::<f64>());
    for i in 0..n {
        let s: f64 = m.row(i).iter().sum();
        for j in 0..n {
            m[(i, j)] /= s;
        }
    }
    ProbabilityMatrix::new(m).unwrap()
}

fn random_phases(n: usize, seed: u64) -> RealMatrix {
    let mut gen = RngStream::new(seed, 12).generator();
    RealMatrix::from_fn(n, n, |_, _| gen.random_range(-4.0..4.0))
}

fn unistochastic(n: usize, seed: u64) -> ProbabilityMatrix {
    ProbabilityMatrix::from_unitary(&haar_unitary(n, &RngStream::new(seed, 13))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sigma_reassembles_probabilities(n in 1usize..=6, seed in any::<u64>()) {
        let m = random_stochastic(n, seed);
        prop_assert!(validate_stochastic(&m));
        let sigma = build_sigma(&m, &random_phases(n, seed)).unwrap();
        prop_assert!(sigma.probabilities().max_abs_diff(&m) <= 1e-12);
        for i in 0..n {
            for j in 0..n {
                prop_assert!((extract_probability(&sigma, i, j).unwrap() - m.get(i, j)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn squared_singular_values_sum_to_n(n in 1usize..=7, seed in any::<u64>()) {
        let m = random_stochastic(n, seed);
        let sigma = build_sigma(&m, &random_phases(n, seed)).unwrap();
        let total: f64 = singular_value_profile(&sigma).iter().map(|s| s * s).sum();
        prop_assert!((total - n as f64).abs() <= 1e-9);
    }

    #[test]
    fn unit_singular_values_iff_unitary_sigma(n in 2usize..=6, seed in any::<u64>()) {
        let agree = |sigma: &bornlab_core::stochastic::PhaseMatrix| {
            let unit = singular_value_profile(sigma).iter().all(|s| (s - 1.0).abs() <= 1e-9);
            let unitary = sigma.sigma().unitarity_deviation() < 1e-8;
            (unit, unitary)
        };
        let u = haar_unitary(n, &RngStream::new(seed, 14));
        let phases = RealMatrix::from_fn(n, n, |i, j| u[(i, j)].arg());
        let m = ProbabilityMatrix::from_unitary(&u).unwrap();
        prop_assert_eq!(agree(&build_sigma(&m, &phases).unwrap()), (true, true));
        let generic = build_sigma(&random_stochastic(n, seed), &random_phases(n, seed)).unwrap();
        prop_assert_eq!(agree(&generic), (false, false));
    }

    #[test]
    fn unitary_moduli_are_bistochastic(n in 2usize..=6, seed in any::<u64>()) {
        prop_assert!(is_bistochastic(&unistochastic(n, seed)));
    }

    #[test]
    fn sinkhorn_output_is_bistochastic(n in 2usize..=6, seed in any::<u64>()) {
        let m = sample_bistochastic(n, &RngStream::new(seed, 0), 10_000).unwrap();
        prop_assert!(is_bistochastic(&m));
    }

    #[test]
    fn chain_link_accepts_unistochastic(seed in any::<u64>()) {
        let m = unistochastic(3, seed);
        let c = chain_link_3x3(&m).unwrap();
        prop_assert_eq!(c.kind, ClassKind::Unistochastic);
        let w = c.witness.unwrap();
        prop_assert!(w.unitarity_deviation() < 1e-10);
        prop_assert!(ProbabilityMatrix::from_unitary(&w).unwrap().max_abs_diff(&m) <= 1e-8);
    }

    #[test]
    fn chain_link_verdicts_carry_evidence(seed in any::<u64>()) {
        let m = sample_bistochastic(3, &RngStream::new(seed, 1), 10_000).unwrap();
        let c = chain_link_3x3(&m).unwrap();
        match c.kind {
            ClassKind::Unistochastic => {
                let w = c.witness.unwrap();
                prop_assert!(w.unitarity_deviation() < 1e-10);
                prop_assert!(ProbabilityMatrix::from_unitary(&w).unwrap().max_abs_diff(&m) <= 1e-8);
            }
            ClassKind::NotUnistochastic => prop_assert!(c.certificate.is_some()),
            other => prop_assert!(false, "unexpected verdict {:?}", other),
        }
    }

    #[test]
    fn gradient_matches_finite_differences(n in 2usize..=5, seed in any::<u64>()) {
        let m = unistochastic(n, seed);
        let phases = random_phases(n, seed);
        let g = gradient(&m, &phases).unwrap();
        let h = 1e-6;
        let mut err = 0.0f64;
        let mut norm = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut up = phases.clone();
                let mut down = phases.clone();
                up[(i, j)] += h;
                down[(i, j)] -= h;
                let fd = (objective(&m, &up).unwrap() - objective(&m, &down).unwrap()) / (2.0 * h);
                err += (fd - g[(i, j)]).powi(2);
                norm += g[(i, j)].powi(2);
            }
        }
        prop_assert!(err.sqrt() <= 1e-5 * norm.sqrt().max(1e-3));
    }

    #[test]
    fn objective_is_gauge_invariant(n in 2usize..=5, seed in any::<u64>(), row in 0usize..5, shift in -3.0f64..3.0) {
        let m = unistochastic(n, seed);
        let phases = random_phases(n, seed);
        let mut moved = phases.clone();
        let r = row % n;
        for j in 0..n {
            moved[(r, j)] += shift;
        }
        let a = objective(&m, &phases).unwrap();
        let b = objective(&m, &moved).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn recovery_is_sound(n in 3usize..=5, seed in any::<u64>()) {
        let m = unistochastic(n, seed);
        let r = recover(&m, &RecoverySettings::default(), &RngStream::new(seed, 0)).unwrap();
        if r.status == RecoveryStatus::Success {
            let w = r.witness.unwrap();
            prop_assert!(w.unitarity_deviation() < 1e-8);
            prop_assert!(ProbabilityMatrix::from_unitary(&w).unwrap().max_abs_diff(&m) <= 1e-8);
        }
    }

    #[test]
    fn classify_decides_born_matrices(n in 2usize..=5, seed in any::<u64>()) {
        let m = unistochastic(n, seed);
        let c = classify(&m, &RecoverySettings::default(), &RngStream::new(seed, 1)).unwrap();
        prop_assert_eq!(c.kind, ClassKind::Unistochastic);
        let w = c.witness.unwrap();
        prop_assert!(ProbabilityMatrix::from_unitary(&w).unwrap().max_abs_diff(&m) <= 1e-8);
    }
}

#[test]
fn recovery_is_deterministic() {
    let m = unistochastic(4, 5);
    let a = recover(&m, &RecoverySettings::default(), &RngStream::new(3, 0)).unwrap();
    let b = recover(&m, &RecoverySettings::default(), &RngStream::new(3, 0)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn chain_link_and_recovery_agree_on_rejections() {
    let circulant =
        ProbabilityMatrix::from_rows(&[[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]]).unwrap();
    assert_eq!(
        chain_link_3x3(&circulant).unwrap().kind,
        ClassKind::NotUnistochastic
    );
    let r = recover(&circulant, &RecoverySettings::default(), &RngStream::new(0, 0)).unwrap();
    assert_eq!(r.status, RecoveryStatus::Exhausted);
    assert!(r.witness.is_none());
    assert_eq!(r.restarts_used, RecoverySettings::default().restarts);
}
