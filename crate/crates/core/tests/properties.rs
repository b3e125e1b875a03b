use proptest::prelude::*;

use rabicat_core::adiabatic::{
    approximant, biased_spin_vector, polaron_identity_residual, polaron_unitary, xi0, xi1,
    ApproxModel, ApproximantFamily, Branch,
};
use rabicat_core::dump::{dump_operator, dump_state, parse_operator, parse_state};
use rabicat_core::fock::{
    displacement, number, spin_only, squeeze, LinearOperator, SpinOp, StateVector, Truncation,
};
use rabicat_core::models::{
    build_a2, build_gqr, build_gqr_sigma_x, build_van_hove, parity_operator, CouplingPolicy,
    ModelParams, Sign,
};
use rabicat_core::renormalization::{renormalize, renormalized_frequencies};
use rabicat_core::spectra::{
    diagonalize, dressed_photon_threshold, entanglement_entropy, fidelity, n0_app_from_coupling,
    photon_number_matrix_expectation, Verdict,
};
use rabicat_core::C64;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn params(omega_c: f64, omega_a: f64, epsilon: f64, g: f64) -> ModelParams {
    ModelParams::new(omega_c, omega_a, epsilon, g).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn displacement_is_unitary_on_low_block(beta in -2.5f64..2.5) {
        let t = Truncation::fixed(60);
        let d = displacement(beta, &t).unwrap();
        prop_assert!(d.unitarity_deviation(48) <= 1e-8);
    }

    #[test]
    fn squeeze_is_unitary_on_low_block(r in -0.4f64..0.4) {
        let t = Truncation::fixed(80);
        let s = squeeze(r, &t).unwrap();
        // The truncated generator is anti-hermitian, so exp is unitary on
        // the whole space.
        prop_assert!(s.unitarity_deviation(t.photon_dim()) <= 1e-10);
    }

    #[test]
    fn polaron_unitary_is_unitary(big_g in -2.0f64..2.0) {
        let t = Truncation::fixed(50);
        let u = polaron_unitary(big_g, &t).unwrap();
        prop_assert!(u.unitarity_deviation(40) <= 1e-8);
    }

    #[test]
    fn displacements_compose(b1 in -1.5f64..1.5, b2 in -1.5f64..1.5) {
        let t = Truncation::fixed(70);
        let lhs = &displacement(b1, &t).unwrap() * &displacement(b2, &t).unwrap();
        let rhs = displacement(b1 + b2, &t).unwrap();
        prop_assert!(lhs.block_deviation(&rhs, 30).unwrap() <= 1e-8);
    }

    #[test]
    fn number_spectrum_is_exact(n_max in 2usize..40) {
        let t = Truncation::fixed(n_max);
        let dec = diagonalize(&number(&t), n_max + 1, &t).unwrap();
        for (k, e) in dec.eigenvalues.iter().enumerate() {
            // Exact up to eigensolver roundoff.
            prop_assert!((e - k as f64).abs() <= 8.0 * f64::EPSILON * n_max as f64);
        }
    }

    #[test]
    fn builders_are_hermitian(
        wa in 0.1f64..3.0, eps in -2.0f64..2.0, g in -4.0f64..4.0, c in 0.0f64..2.0,
    ) {
        let t = Truncation::fixed(20);
        let p = params(1.0, wa, eps, g.abs()).with_coupling(CouplingPolicy::Linear { c });
        let ops = [
            build_gqr(&p, 1.0, g, &t),
            build_gqr_sigma_x(&p, &t),
            build_a2(&p, &t).unwrap(),
            build_van_hove(Sign::Plus, &p, &t),
            build_van_hove(Sign::Minus, &p, &t),
            parity_operator(&t),
        ];
        for op in &ops {
            let scale = op.max_abs().max(1.0);
            prop_assert!(op.hermiticity_residual() <= 1e-12 * scale);
            prop_assert!(op.is_hermitian());
        }
    }

    #[test]
    fn sigma_x_form_is_unitarily_equivalent(
        wa in 0.1f64..2.0, eps in -1.0f64..1.0, g in 0.0f64..2.0,
    ) {
        let t = Truncation::fixed(30);
        let p = params(1.0, wa, eps, g);
        let a = diagonalize(&build_gqr(&p, 1.0, g, &t), 20, &t).unwrap();
        let b = diagonalize(&build_gqr_sigma_x(&p, &t), 20, &t).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0));
        }
    }

    #[test]
    fn spectrum_is_even_in_g(wa in 0.1f64..2.0, eps in -1.0f64..1.0, g in 0.0f64..2.0) {
        let t = Truncation::fixed(60);
        let p = params(1.0, wa, eps, g);
        let a = diagonalize(&build_gqr(&p, 1.0, g, &t), 10, &t).unwrap();
        let b = diagonalize(&build_gqr(&p, 1.0, -g, &t), 10, &t).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0));
        }
    }

    #[test]
    fn xi_pieces_sum_to_sigma_x(big_g in -2.0f64..2.0) {
        let t = Truncation::fixed(30);
        let sum = xi0(big_g, &t).unwrap().try_add(&xi1(big_g, &t).unwrap()).unwrap();
        let sx = spin_only(&SpinOp::sigma_x(), &t);
        prop_assert!(sum.try_sub(&sx).unwrap().max_abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn polaron_identity_for_any_frequency(
        omega in 0.5f64..3.0, g in -2.0f64..2.0, eps in -1.0f64..1.0,
    ) {
        // D(±2G) moves the 20-level block out to about (√20 + 2|G|)².
        let reach = 20f64.sqrt() + 2.0 * (g / omega).abs() + 6.0;
        let t = Truncation::fixed((reach * reach).ceil().max(60.0) as usize);
        let p = params(1.0, 0.7, eps, g.abs());
        let res = polaron_identity_residual(&p, omega, g, 20, &t).unwrap();
        prop_assert!(res <= 1e-8, "residual {res}");
    }

    #[test]
    fn biased_branches_are_orthogonal(
        g in 0.5f64..6.0, eps in prop_oneof![-1.5f64..-0.01, 0.01f64..1.5], n in 0usize..3,
    ) {
        let t = Truncation::fixed(80);
        let p = params(1.0, 1.0, eps, g).with_coupling(CouplingPolicy::Linear { c: 1.0 });
        let fam = |b| ApproximantFamily::for_params(ApproxModel::A2Renormalized, b, n, eps);
        let plus = approximant(fam(Branch::Plus), &p, &t).unwrap();
        let minus = approximant(fam(Branch::Minus), &p, &t).unwrap();
        prop_assert!(plus.state.inner(&minus.state).unwrap().norm() <= 1e-10);
        prop_assert!(plus.energy < minus.energy);
        let (plus_v, _) = biased_spin_vector(1.0, eps, Branch::Plus).unwrap();
        let (minus_v, _) = biased_spin_vector(1.0, eps, Branch::Minus).unwrap();
        prop_assert!((plus_v[0] * minus_v[0] + plus_v[1] * minus_v[1]).abs() <= 1e-12);
    }

    #[test]
    fn renormalized_detuning_within_small_delta(g in 0.2f64..30.0, c in 0.05f64..3.0) {
        let p = params(1.0, 1.0, 0.0, g).with_coupling(CouplingPolicy::Linear { c });
        let gc = g * g * c;
        prop_assume!(((1.0 / gc).sqrt() - 2.0).abs() > 1e-6);
        let rp = renormalize(&p).unwrap();
        let detune = (1.0 - (rp.omega_g - rp.delta_g)).abs();
        prop_assert!(detune <= rp.small_delta_g * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn threshold_forms_agree(g in 0.1f64..50.0, c_g in 1e-3f64..10.0) {
        let p = params(1.0, 1.0, 0.0, g).with_coupling(CouplingPolicy::constant(c_g));
        let th = dressed_photon_threshold(&p).unwrap();
        prop_assert!((th.n0_app - n0_app_from_coupling(1.0, g, c_g)).abs() <= 1e-12 * th.n0_app.max(1.0));
        // Away from the boundary the two predicates must agree exactly.
        if (th.n0_app - 1.0).abs() > 1e-9 {
            prop_assert!(th.consistent());
            prop_assert_ne!(th.verdict, Verdict::Equal);
        }
    }

    #[test]
    fn approximant_photon_number_matches_closed_form(
        g in 0.5f64..10.0, eps in -1.0f64..1.0,
    ) {
        let p = params(1.0, 1.0, eps, g).with_coupling(CouplingPolicy::Linear { c: 1.0 });
        let (omega_g, g_tilde) = renormalized_frequencies(&p).unwrap();
        let n0_app = (g_tilde / omega_g).powi(2);
        let t = Truncation::fixed(40);
        let fam = ApproximantFamily::for_params(ApproxModel::A2Renormalized, Branch::Plus, 0, eps);
        let state = approximant(fam, &p, &t).unwrap().state;
        let n = photon_number_matrix_expectation(&state).unwrap();
        prop_assert!((n - n0_app).abs() <= 1e-8, "{n} vs {n0_app}");
    }

    #[test]
    fn fidelity_and_entropy_stay_in_range(
        amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2 * 6),
        other in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2 * 6),
    ) {
        let t = Truncation::fixed(5);
        let to_state = |v: &[(f64, f64)]| {
            let s = StateVector::from_amplitudes(
                rabicat_core::fock::Basis::SpinPhoton(t.n_max),
                v.iter().map(|&(re, im)| C64::new(re, im)).collect(),
            ).unwrap();
            s.normalized()
        };
        let (a, b) = (to_state(&amps), to_state(&other));
        prop_assume!(a.norm() > 0.5 && b.norm() > 0.5);
        let f = fidelity(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        let s = entanglement_entropy(&a).unwrap();
        prop_assert!((0.0..=std::f64::consts::LN_2).contains(&s));
    }

    #[test]
    fn dumps_parse_back_exactly(
        entries in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 16),
    ) {
        let basis = rabicat_core::fock::Basis::SpinPhoton(1);
        let op = LinearOperator::from_fn(basis, |i, j| {
            let (re, im) = entries[4 * i + j];
            C64::new(re, im)
        });
        let back = parse_operator(&dump_operator(&op)).unwrap();
        prop_assert_eq!(back.entries(), op.entries());
        let st = StateVector::from_amplitudes(
            basis,
            entries[..4].iter().map(|&(re, im)| C64::new(re, im)).collect(),
        ).unwrap();
        prop_assert_eq!(parse_state(&dump_state(&st)).unwrap(), st);
    }
}

#[test]
fn linear_policy_growth_assumptions() {
    // g·C_g and g^{−1/3}·C_g grow without bound; C_g/g stays at C.
    let policy = CouplingPolicy::Linear { c: 0.7 };
    let grid = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
    let mut last = (0.0, 0.0);
    for &g in &grid {
        let c_g = policy.c_g(g).unwrap();
        let cur = (g * c_g, g.powf(-1.0 / 3.0) * c_g);
        assert!(cur.0 > last.0 && cur.1 > last.1);
        assert!((c_g / g - 0.7).abs() < 1e-15);
        last = cur;
    }
}

#[test]
fn small_delta_decreases_for_linear_policy() {
    let p = params(1.0, 1.0, 0.0, 4.0).with_coupling(CouplingPolicy::Linear { c: 1.0 });
    let deltas: Vec<f64> = [4.0, 6.0, 8.0, 16.0, 32.0, 64.0]
        .iter()
        .map(|&g| renormalize(&p.with_g(g)).unwrap().small_delta_g)
        .collect();
    assert!(deltas.windows(2).all(|w| w[1] < w[0]));
    assert!(*deltas.last().unwrap() < 0.02);
}

#[test]
fn qr_eigenstates_have_definite_parity() {
    let t = Truncation::fixed(80);
    let parity = parity_operator(&t);
    for g in [0.0, 1.0, 3.0] {
        let p = params(1.0, 1.0, 0.0, g);
        let h = build_gqr(&p, 1.0, g, &t);
        assert!(h.commutator(&parity).max_abs() < 1e-12);
        let dec = diagonalize(&h, 10, &t).unwrap();
        for (k, v) in dec.eigenvectors.iter().enumerate() {
            if dec.level_converged[k] {
                let e = parity.expectation(v).unwrap().re;
                assert!((e.abs() - 1.0).abs() < 1e-8, "g={g} level {k}: {e}");
            }
        }
    }
}

#[test]
fn polaron_identity_at_largest_displacement() {
    let reach = 20f64.sqrt() + 8.0 + 6.0;
    let t = Truncation::fixed((reach * reach).ceil() as usize);
    for g in [-2.0, 2.0] {
        let p = params(1.0, 0.7, -1.0, 2.0);
        let res = polaron_identity_residual(&p, 0.5, g, 20, &t).unwrap();
        assert!(res <= 1e-8, "g = {g}: residual {res}");
    }
}
