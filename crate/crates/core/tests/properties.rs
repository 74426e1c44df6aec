//! Property tests over randomly weighted reversible chains.

use nalgebra::DMatrix;
use proptest::prelude::*;

use qwalk::cg_prime::{diagnostics, lemma_bracketing, run_cg_prime};
use qwalk::chain::{ensure_lazy, make_lazy, StochasticChain};
use qwalk::edge::{build_reduced, dense_parts, Completion};
use qwalk::graphs::{from_adjacency, generate, FamilySpec};
use qwalk::hitting::{extended_hitting_time, hitting_time, interpolated_hitting_time};
use qwalk::interpolated::{averaged_success, required_time, s_star, PhaseRandomSetup};

/// Symmetric weights with a random sparsity pattern on top of a spanning path.
fn weighted_graph() -> impl Strategy<Value = DMatrix<f64>> {
    (3usize..=8).prop_flat_map(|n| {
        let pairs = n * (n + 1) / 2;
        (Just(n), prop::collection::vec(prop_oneof![Just(0.0), 0.05f64..1.0], pairs))
    })
    .prop_map(|(n, w)| {
        let mut a = DMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                a[(i, j)] = w[k];
                a[(j, i)] = w[k];
                k += 1;
            }
        }
        for i in 0..n - 1 {
            a[(i, i + 1)] += 0.1;
            a[(i + 1, i)] += 0.1;
        }
        a
    })
}

fn lazy_chain() -> impl Strategy<Value = (StochasticChain, usize)> {
    weighted_graph().prop_flat_map(|a| {
        let chain = ensure_lazy(&from_adjacency(&a).unwrap());
        let n = chain.n();
        (Just(chain), 0..n)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lazification_keeps_stationary_distribution(a in weighted_graph()) {
        let chain = from_adjacency(&a).unwrap();
        let lazy = make_lazy(&chain);
        for (x, y) in chain.pi().iter().zip(lazy.pi()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!(lazy.lazy_applied());
    }

    #[test]
    fn hitting_identity_over_s((chain, w) in lazy_chain()) {
        let chain = chain.with_marked(&[w]).unwrap();
        let p_m = chain.p_m();
        let ht_plus = extended_hitting_time(&chain).unwrap();
        for s in [0.0, 0.25, 0.5, 0.75, 0.95] {
            let ht_s = interpolated_hitting_time(&chain, s).unwrap();
            let predicted = ht_plus * p_m * p_m / (1.0 - s * (1.0 - p_m)).powi(2);
            prop_assert!((ht_s - predicted).abs() <= 1e-8 * predicted.max(1e-12), "s = {s}: {ht_s} vs {predicted}");
        }
    }

    #[test]
    fn edge_images_are_orthonormal((chain, _w) in lazy_chain(), seed in 0u64..1000) {
        for completion in [Completion::Householder, Completion::Randomized(seed)] {
            let v = dense_parts(&chain, 0.0, completion).unwrap().v;
            let n2 = v.nrows();
            let dev = (v.transpose() * &v - DMatrix::<f64>::identity(n2, n2)).amax();
            prop_assert!(dev < 1e-12);
        }
        let red = build_reduced(&chain, 0.0).unwrap();
        let images = red.edge_images.clone().unwrap();
        let g = images.transpose() * &images;
        let dim = g.nrows();
        prop_assert!((g - DMatrix::<f64>::identity(dim, dim)).amax() < 1e-10);
    }

    #[test]
    fn search_parameter_bounds((chain, w) in lazy_chain()) {
        let d = diagnostics(&chain, w).unwrap();
        prop_assert!(d.mu >= d.s1.sqrt() * (1.0 - 1e-12));
        prop_assert!(d.mu <= (2.0 * d.s1).sqrt() * (1.0 + 1e-12));
        prop_assert!(d.mu * d.coupling_norm_formula >= 2.0 * (1.0 - d.epsilon_overlap) * (1.0 - 1e-12));
        prop_assert!((d.coupling_norm_formula - 2f64.sqrt() * d.coupling_norm_numeric).abs() < 1e-12);
    }

    #[test]
    fn search_decouples_and_stays_unitary((chain, w) in lazy_chain()) {
        let chain = chain.with_marked(&[w]).unwrap();
        let r = run_cg_prime(&chain, w).unwrap();
        prop_assert!(r.decoupling_residual <= 1e-10);
        prop_assert!(r.norm_drift <= 1e-9);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&r.nu_final));
    }

    #[test]
    fn phase_randomised_invariants((chain, w) in lazy_chain(), t in 0.0f64..200.0) {
        let chain = chain.with_marked(&[w]).unwrap();
        prop_assume!(chain.p_m() < 0.25);
        let r = averaged_success(&chain, t).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&r.success_probability));
        let setup = PhaseRandomSetup::new(&chain).unwrap();
        if t > 1e-6 {
            prop_assert!(setup.dephasing_error(t) <= setup.dephasing_envelope(t) + 1e-12);
        }
        // HT(s*) = HT+ / 4
        let s = s_star(chain.p_m()).unwrap();
        let ht_s = interpolated_hitting_time(&chain, s).unwrap();
        prop_assert!((ht_s - r.ht_plus / 4.0).abs() <= 1e-9 * r.ht_plus);
        let t_auto = required_time(&chain, 0.1).unwrap();
        let auto = averaged_success(&chain, t_auto).unwrap();
        prop_assert!(auto.success_probability >= auto.lower_bound - 1e-12);
        prop_assert!(auto.success_probability >= 0.15);
    }

    #[test]
    fn single_marked_extended_equals_plain(seed in 0u64..10_000, w in 0usize..12) {
        let spec = FamilySpec::RandomReversible { n: 12, seed, edge_prob: 0.4 };
        let chain = ensure_lazy(&generate(&spec).unwrap()).with_marked(&[w]).unwrap();
        let ht = hitting_time(&chain).unwrap();
        let ht_plus = extended_hitting_time(&chain).unwrap();
        prop_assert!((ht - ht_plus).abs() <= 1e-6 * ht);
    }

    #[test]
    fn bracketing_eta_follows_the_condition((chain, w) in lazy_chain()) {
        let d = diagnostics(&chain, w).unwrap();
        prop_assume!(d.overlaps.iter().take(d.n - 1).any(|a| a.abs() > 1e-8));
        let b = lemma_bracketing(&chain, w).unwrap();
        // eta = 2 ratio^2 gap / (1 - lambda_max^2); with lambda >= 0 this is at most 2 ratio^2
        let lambda = d.lambdas[d.n - 2];
        let expected = 2.0 * d.condition_ratio.powi(2) * d.gap / (1.0 - lambda * lambda);
        prop_assert!((b.eta - expected).abs() <= 1e-9 * expected.max(1e-12));
        prop_assert!(b.eta <= 2.0 * d.condition_ratio.powi(2) * (1.0 + 1e-12));
    }
}
