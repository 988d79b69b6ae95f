use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use qeraser::hilbert::{
    apply_local, born_probability, check_orthonormal, expand_in_basis, post_select, reduced_purity,
    Ket, LocalOperator, PathStage, StateVector, Subsystem,
};
use qeraser::mz_eraser::{correlation_table, MzConfig};
use qeraser::optics::{
    beam_splitter, conditional_pol_flip, mub_pair, path_phase, path_phase_radians, pbs_route,
    BasisFamily, Outcome,
};
use qeraser::two_slit::{pattern, pattern_from_amplitudes, visibility, TwoSlitConfig};

const TOL: f64 = 1e-12;
const LAYOUT: [Subsystem; 3] = [
    Subsystem::SignalPol,
    Subsystem::IdlerPol,
    Subsystem::SignalPath,
];

fn state_from(parts: &[f64]) -> Option<StateVector> {
    let amps: Vec<C64> = parts.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-3 {
        return None;
    }
    StateVector::normalized(LAYOUT.to_vec(), amps).ok()
}

fn random_state() -> impl Strategy<Value = StateVector> {
    prop::collection::vec(-1.0f64..1.0, 16)
        .prop_filter_map("degenerate amplitudes", |v| state_from(&v))
}

/// An orthonormal qubit basis: a random unit ket and its complement.
fn random_basis() -> impl Strategy<Value = [Ket; 2]> {
    prop::collection::vec(-1.0f64..1.0, 4).prop_filter_map("degenerate ket", |v| {
        let a = C64::new(v[0], v[1]);
        let b = C64::new(v[2], v[3]);
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        (n > 1e-3).then(|| {
            let (a, b) = (a / n, b / n);
            [Ket([a, b]), Ket([-b.conj(), a.conj()])]
        })
    })
}

fn subsystem() -> impl Strategy<Value = Subsystem> {
    prop::sample::select(LAYOUT.to_vec())
}

fn elements(x: f64) -> Vec<LocalOperator> {
    vec![
        pbs_route(),
        conditional_pol_flip(),
        path_phase(x, 1.0).unwrap(),
        beam_splitter(),
    ]
}

fn at_required_stage(op: &LocalOperator, s: &StateVector) -> StateVector {
    s.clone()
        .with_stage(op.required_stage().unwrap_or(PathStage::Source))
}

fn max_amp_gap(a: &StateVector, b: &StateVector) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn elements_preserve_norm(s in random_state(), x in -5.0f64..5.0) {
        for op in elements(x) {
            let out = apply_local(&op, &at_required_stage(&op, &s)).unwrap();
            prop_assert!((out.norm() - 1.0).abs() < TOL);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn born_probabilities_are_complete(s in random_state(), sub in subsystem(), basis in random_basis()) {
        let total: f64 = basis
            .iter()
            .map(|k| born_probability(&s, &[(sub, *k)]).unwrap())
            .sum();
        prop_assert!((total - 1.0).abs() < TOL);
    }

    #[test]
    fn post_selection_matches_born_rule(s in random_state(), sub in subsystem(), basis in random_basis()) {
        let c = post_select(&s, sub, &basis[0]).unwrap();
        let p = born_probability(&s, &[(sub, basis[0])]).unwrap();
        prop_assert!((c.probability - p).abs() < TOL);
        if let Some(post) = c.state {
            prop_assert!((post.norm() - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn reduced_purity_is_bounded(s in random_state(), sub in subsystem()) {
        let p = reduced_purity(&s, sub).unwrap();
        prop_assert!((0.5 - TOL..=1.0 + TOL).contains(&p), "purity {}", p);
    }

    #[test]
    fn expansion_reconstructs_input(s in random_state(), sub in subsystem(), basis in random_basis()) {
        let e = expand_in_basis(&s, sub, &basis).unwrap();
        let back = e.reconstruct().unwrap().reordered(&LAYOUT).unwrap();
        prop_assert!(max_amp_gap(&back, &s) < TOL);
    }

    #[test]
    fn flip_commutes_with_phase(s in random_state(), x in -5.0f64..5.0) {
        let s = s.with_stage(PathStage::Arms);
        let flip = conditional_pol_flip();
        let phase = path_phase(x, 1.0).unwrap();
        let a = apply_local(&phase, &apply_local(&flip, &s).unwrap()).unwrap();
        let b = apply_local(&flip, &apply_local(&phase, &s).unwrap()).unwrap();
        prop_assert!(max_amp_gap(&a, &b) < TOL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn angle_families_are_orthonormal_and_unbiased(theta in -10.0f64..10.0) {
        for (family, reference) in [
            (BasisFamily::PolarizationPQ, BasisFamily::LinearHV),
            (BasisFamily::DetectorPM, BasisFamily::LinearHV),
        ] {
            let pair = mub_pair(family, theta).unwrap();
            check_orthonormal(pair.kets()).unwrap();
            let standard = mub_pair(reference, 0.0).unwrap();
            for a in pair.kets() {
                for b in standard.kets() {
                    prop_assert!((a.inner(b).norm_sqr() - 0.5).abs() < TOL);
                }
            }
        }
    }

    #[test]
    fn element_matrices_are_unitary(phi in -20.0f64..20.0) {
        for op in [pbs_route(), conditional_pol_flip(), path_phase_radians(phi).unwrap(), beam_splitter()] {
            prop_assert!(op.unitarity_deviation() < TOL);
        }
    }

    #[test]
    fn screen_sum_rule(theta in 0.0f64..TAU, sigma in 1.0f64..8.0) {
        let grid: Vec<f64> = (0..201).map(|k| -20.0 + 0.2 * k as f64).collect();
        let cfg = TwoSlitConfig::new(1.0, 1000.0, 0.001, Some(sigma), grid).unwrap();
        for (a, b) in pattern(&cfg, theta).iter().zip(pattern_from_amplitudes(&cfg, theta)) {
            prop_assert!((a.p_plus + a.p_minus - 2.0 * cfg.envelope(a.x)).abs() < TOL);
            prop_assert!((a.p_plus - b.p_plus).abs() < TOL);
            prop_assert!((a.p_minus - b.p_minus).abs() < TOL);
        }
    }

    #[test]
    fn fringes_have_unit_visibility(theta in 0.0f64..TAU, order in -3i32..=3) {
        // One period starting on a maximum of p₊, with the minimum at the midpoint.
        let (d, screen, lambda) = (1.0, 1000.0, 0.001);
        let period = lambda * screen / d;
        let start = (theta + TAU * order as f64) / TAU * period;
        let grid: Vec<f64> = (0..=1000).map(|k| start + period * k as f64 / 1000.0).collect();
        let cfg = TwoSlitConfig::new(d, screen, lambda, None, grid).unwrap();
        let ratios: Vec<f64> = pattern(&cfg, theta).iter().map(|s| s.p_plus / s.envelope).collect();
        prop_assert!((visibility(&ratios) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn basis_shift_translates_the_pattern(theta in 0.0f64..TAU, x in -10.0f64..10.0) {
        let (d, screen, lambda) = (1.0, 1000.0, 0.001);
        let shift = theta * lambda * screen / (TAU * d);
        let here = TwoSlitConfig::new(d, screen, lambda, None, vec![x]).unwrap();
        let there = TwoSlitConfig::new(d, screen, lambda, None, vec![x - shift]).unwrap();
        let a = pattern(&here, theta)[0];
        let b = pattern(&there, 0.0)[0];
        prop_assert!((a.p_plus / a.envelope - b.p_plus / b.envelope).abs() < 1e-9);
        prop_assert!((a.p_minus / a.envelope - b.p_minus / b.envelope).abs() < 1e-9);
    }
}

#[test]
fn pq_tables_depend_only_on_phase_difference() {
    let lambda = 1.0;
    for i in 0..20 {
        let x = i as f64 / 20.0 * 1.5 - 0.25;
        let phi = TAU * x / lambda;
        for j in 0..20 {
            let theta = j as f64 / 20.0 * TAU;
            let cfg = MzConfig::new(x, lambda).unwrap();
            let table =
                correlation_table(&cfg, &mub_pair(BasisFamily::PolarizationPQ, theta).unwrap())
                    .unwrap();
            // Same φ − θ reached from x = 0.
            let origin = MzConfig::new(0.0, lambda).unwrap();
            let shifted = mub_pair(BasisFamily::PolarizationPQ, theta - phi).unwrap();
            let reference = correlation_table(&origin, &shifted).unwrap();
            assert!(
                table.max_deviation(&reference.entries) < TOL,
                "x={x} theta={theta}"
            );
        }
    }
}

#[test]
fn outcome_probabilities_cover_both_idler_results() {
    let cfg = MzConfig::new(0.37, 1.0).unwrap();
    let table = correlation_table(&cfg, &mub_pair(BasisFamily::CircularRL, 0.0).unwrap()).unwrap();
    for o in Outcome::ALL {
        assert!((table.outcome_marginal(o) - 0.5).abs() < TOL);
    }
}
