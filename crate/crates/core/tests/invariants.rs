use bec_dephasing::correlations::{
    concurrence, concurrence_werner, discord_bell_diagonal, discord_bruteforce, mutual_information, wootters_lambdas,
    wootters_trace, DiscordGrid,
};
use bec_dephasing::decoherence::{bracket_factor, factors, Channel, Geometry};
use bec_dephasing::dynamics::apply_factors;
use bec_dephasing::state::{make_werner, Mat4, Sign};
use bec_dephasing::{ReservoirParams, TwoQubitState};
use nalgebra::Matrix2;
use num_complex::Complex64;
use proptest::prelude::*;

const TOL: f64 = 1e-8;

fn params() -> impl Strategy<Value = ReservoirParams> {
    (0.01f64..5.0, 0.1f64..3.0, 0.0f64..0.5, 0.3f64..3.0, 1.2f64..8.0, any::<bool>()).prop_map(
        |(u, g, theta, l, ratio, far)| {
            let d = if far { f64::INFINITY } else { l * ratio };
            ReservoirParams::new(u, g, 1.0, theta, l, d).unwrap()
        },
    )
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b))
}

fn mixed_state() -> impl Strategy<Value = TwoQubitState> {
    prop::collection::vec(complex(), 16).prop_map(|v| {
        let a = Mat4::from_iterator(v);
        let m = a * a.adjoint();
        let tr = m.trace();
        TwoQubitState::from_matrix(m / tr).unwrap()
    })
}

fn qubit_unitary() -> impl Strategy<Value = Matrix2<Complex64>> {
    (0.0f64..std::f64::consts::PI, 0.0f64..std::f64::consts::PI, 0.0f64..6.3).prop_map(|(a, th, ph)| {
        let n = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
        let (s, c) = a.sin_cos();
        let i = Complex64::new(0.0, 1.0);
        // exp(i a n·σ)
        Matrix2::new(
            c + i * s * n[2],
            i * s * Complex64::new(n[0], -n[1]),
            i * s * Complex64::new(n[0], n[1]),
            c - i * s * n[2],
        )
    })
}

fn local(rho: &TwoQubitState, ua: &Matrix2<Complex64>, ub: &Matrix2<Complex64>) -> TwoQubitState {
    let u = Mat4::from_fn(|r, c| ua[(r / 2, c / 2)] * ub[(r % 2, c % 2)]);
    let m = u * rho.matrix() * u.adjoint();
    TwoQubitState::from_matrix((m + m.adjoint()) * Complex64::new(0.5, 0.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decoherence_factors_are_nonnegative(p in params(), t in 0.0f64..30.0) {
        let f = factors(t, &p, TOL).unwrap();
        let scale = f.gamma0.abs().max(1e-12);
        prop_assert!(f.gamma0 >= 0.0);
        prop_assert!(f.gamma(Channel::Plus) >= -1e-7 * scale);
        prop_assert!(f.gamma(Channel::Minus) >= -1e-7 * scale);
    }

    #[test]
    fn brackets_are_nonnegative_and_match(p in params(), t in 0.1f64..20.0) {
        let f = factors(t, &p, TOL).unwrap();
        let plus = bracket_factor(t, &p, TOL, Geometry::Plus).unwrap();
        let minus = bracket_factor(t, &p, TOL, Geometry::Minus).unwrap();
        prop_assert!(plus >= 0.0 && minus >= 0.0);
        let scale = f.gamma0.max(1e-12);
        prop_assert!((plus - f.gamma(Channel::Plus)).abs() <= 1e-6 * scale);
        prop_assert!((minus - f.gamma(Channel::Minus)).abs() <= 1e-6 * scale);
    }

    #[test]
    fn map_keeps_states_valid(rho in mixed_state(), g0 in 0.0f64..3.0, x in 0.0f64..1.0, pi in -10.0f64..10.0) {
        // any Γ± = 2Γ₀ ± δ with |δ| ≤ 2Γ₀
        let d = (2.0 * x - 1.0) * 2.0 * g0;
        let out = apply_factors(&rho, g0, 2.0 * g0 + d, 2.0 * g0 - d, pi);
        prop_assert!(out.report().passed(), "{}", out.report());
        prop_assert_eq!(out.populations(), rho.populations());
    }

    #[test]
    fn werner_concurrence_closed_form(c in 0.0f64..1.0, g in 0.0f64..4.0) {
        for (sign, gp, gm) in [(Sign::Plus, 0.3, g), (Sign::Minus, g, 0.3)] {
            let rho = apply_factors(&make_werner(c, sign).unwrap(), 0.1, gp, gm, 0.7);
            let expect = concurrence_werner(c, g);
            prop_assert!((concurrence(&rho).unwrap() - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn wootters_spectrum_sanity(rho in mixed_state()) {
        let l = wootters_lambdas(&rho);
        prop_assert!(l.iter().all(|&x| x >= -1e-10));
        let sum: f64 = l.iter().map(|x| x * x).sum();
        prop_assert!((sum - wootters_trace(&rho)).abs() < 1e-9);
    }

    #[test]
    fn local_unitary_invariance(rho in mixed_state(), ua in qubit_unitary(), ub in qubit_unitary()) {
        let moved = local(&rho, &ua, &ub);
        prop_assert!((concurrence(&rho).unwrap() - concurrence(&moved).unwrap()).abs() < 1e-9);
        prop_assert!((mutual_information(&rho) - mutual_information(&moved)).abs() < 1e-9);
        let grid = DiscordGrid { n_theta: 40, n_phi: 80 };
        let a = discord_bruteforce(&rho, grid).unwrap();
        let b = discord_bruteforce(&moved, grid).unwrap();
        prop_assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }

    #[test]
    fn discord_bounded_by_mutual_information(rho in mixed_state()) {
        let q = discord_bruteforce(&rho, DiscordGrid { n_theta: 40, n_phi: 80 }).unwrap();
        prop_assert!(q >= -1e-9);
        prop_assert!(q <= mutual_information(&rho) + 1e-9);
    }

    #[test]
    fn bell_diagonal_discord_under_dephasing(c in 0.0f64..1.0, g in 0.0f64..3.0) {
        let rho = apply_factors(&make_werner(c, Sign::Minus).unwrap(), 0.0, g, 0.0, 0.0);
        let q = discord_bell_diagonal(&rho).unwrap();
        prop_assert!(q >= 0.0 && q <= mutual_information(&rho) + 1e-12);
    }
}
