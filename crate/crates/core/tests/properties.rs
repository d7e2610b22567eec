use netrecon_core::dynamics::{
    eval_simple, simulate, step_with_uniforms, ContagionFunction, DynamicsParams, StateMatrix,
};
use netrecon_core::inference::{
    edge_probability_matrix, sufficient_statistics, FlipState, Hyperparameters, TraceIndex,
};
use netrecon_core::metrics::{auroc, auroc_scores, density_quality, kcore, spectral_radius};
use netrecon_core::netgen::erdos_renyi;
use netrecon_core::rng::seeded;
use netrecon_core::Adjacency;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn graph(max_n: usize) -> impl Strategy<Value = Adjacency> {
    (2..=max_n, any::<u64>(), 0.0..=1.0f64)
        .prop_map(|(n, seed, p)| erdos_renyi(n, p, &mut seeded(seed)).unwrap())
}

fn graph_and_trace(max_n: usize) -> impl Strategy<Value = (Adjacency, StateMatrix)> {
    (graph(max_n), 1..40usize, any::<u64>(), 0.05..0.9f64, 0.05..0.9f64).prop_map(
        |(a, t, seed, beta, gamma)| {
            let p = DynamicsParams::new(gamma, ContagionFunction::simple(beta).unwrap()).unwrap();
            let n = a.node_count();
            let x0: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
            let x = simulate(&a, &p, &x0, t, &mut seeded(seed)).unwrap();
            (a, x)
        },
    )
}

proptest! {
    #[test]
    fn simple_contagion_is_monotone(nu in 0..60usize, b1 in 0.0..=1.0f64, b2 in 0.0..=1.0f64) {
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        prop_assert!(eval_simple(nu, lo).unwrap() <= eval_simple(nu, hi).unwrap());
        prop_assert!(eval_simple(nu, lo).unwrap() <= eval_simple(nu + 1, lo).unwrap());
    }

    #[test]
    fn update_ignores_node_order(a in graph(12), seed in any::<u64>(), beta in 0.0..=1.0f64) {
        // Each node sees only the old state, so relabeling nodes and their
        // draws relabels the output.
        let n = a.node_count();
        let mut rng = seeded(seed);
        let x: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let u: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let p = DynamicsParams::new(0.3, ContagionFunction::simple(beta).unwrap()).unwrap();
        let perm: Vec<usize> = (0..n).rev().collect();
        let b = a.permuted(&perm);
        let mut xp = vec![0; n];
        let mut up = vec![0.0; n];
        for i in 0..n {
            xp[perm[i]] = x[i];
            up[perm[i]] = u[i];
        }
        let out = step_with_uniforms(&a, &x, &p, &u).unwrap();
        let outp = step_with_uniforms(&b, &xp, &p, &up).unwrap();
        for i in 0..n {
            prop_assert_eq!(out[i], outp[perm[i]]);
        }
    }

    #[test]
    fn threshold_traces_never_infect_below_tau(a in graph(15), seed in any::<u64>(), tau in 1..4usize) {
        let p = DynamicsParams::new(0.2, ContagionFunction::threshold(0.7, tau).unwrap()).unwrap();
        let x = simulate(&a, &p, &vec![1; a.node_count()], 30, &mut seeded(seed)).unwrap();
        let s = sufficient_statistics(&x, &a).unwrap();
        prop_assert!(s.m[..tau.min(s.m.len())].iter().all(|&m| m == 0));
    }

    #[test]
    fn flips_conserve_exposures((a, x) in graph_and_trace(10), flips in prop::collection::vec((0..10usize, 0..10usize), 1..40)) {
        let n = a.node_count();
        let hyper = Hyperparameters::uniform(n);
        let trace = TraceIndex::new(&x);
        let before = sufficient_statistics(&x, &a).unwrap();
        let mut state = FlipState::new(&trace, &hyper, a).unwrap();
        for (i, j) in flips {
            let (i, j) = (i % n, j % n);
            if i != j {
                state.flip(i, j);
            }
        }
        let after = state.stats();
        prop_assert_eq!(after.susceptible_exposures(), before.susceptible_exposures());
        prop_assert_eq!((after.g, after.h), (before.g, before.h));
        prop_assert_eq!(after, sufficient_statistics(&x, state.graph()).unwrap());
    }

    #[test]
    fn q_is_symmetric_with_unit_range(seeds in prop::collection::vec(any::<u64>(), 1..20), n in 2..12usize) {
        let graphs: Vec<Adjacency> = seeds.iter().map(|&s| erdos_renyi(n, 0.4, &mut seeded(s)).unwrap()).collect();
        let q = edge_probability_matrix(graphs.iter()).unwrap();
        for i in 0..n {
            prop_assert_eq!(q.get(i, i), 0.0);
            for j in 0..n {
                prop_assert_eq!(q.get(i, j), q.get(j, i));
                prop_assert!((0.0..=1.0).contains(&q.get(i, j)));
            }
        }
    }

    #[test]
    fn auroc_ignores_monotone_transforms(
        scores in prop::collection::vec(0.0..1.0f64, 4..60),
        flags in prop::collection::vec(any::<bool>(), 60),
    ) {
        let mut labels: Vec<bool> = flags[..scores.len()].to_vec();
        labels[0] = true;
        labels[1] = false;
        let base = auroc_scores(&scores, &labels).unwrap().auroc;
        let exp: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp()).collect();
        let affine: Vec<f64> = scores.iter().map(|s| 2.0 * s - 7.0).collect();
        prop_assert!((auroc_scores(&exp, &labels).unwrap().auroc - base).abs() < 1e-12);
        prop_assert!((auroc_scores(&affine, &labels).unwrap().auroc - base).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&base));
    }

    #[test]
    fn auroc_of_truth_is_one(a in graph(14)) {
        prop_assume!(a.edge_count() > 0 && a.edge_count() < a.pair_count());
        let q = edge_probability_matrix([&a]).unwrap();
        prop_assert_eq!(auroc(&q, &a).unwrap().auroc, 1.0);
    }

    #[test]
    fn density_quality_at_most_one(rho in prop::collection::vec(0.0..=1.0f64, 1..30), truth in 0.0..=1.0f64) {
        prop_assert!(density_quality(&rho, truth).unwrap() <= 1.0);
    }

    #[test]
    fn kcore_is_permutation_equivariant(a in graph(20), seed in any::<u64>()) {
        let n = a.node_count();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut seeded(seed));
        let core = kcore(&a);
        let core_p = kcore(&a.permuted(&perm));
        for i in 0..n {
            prop_assert_eq!(core.as_slice()[i], core_p.as_slice()[perm[i]]);
            prop_assert!(core.as_slice()[i] <= a.degree(i));
        }
    }

    #[test]
    fn spectral_radius_between_mean_and_max_degree(a in graph(25)) {
        let sigma = spectral_radius(&a).unwrap();
        let degrees = a.degrees();
        let mean = degrees.iter().sum::<usize>() as f64 / degrees.len() as f64;
        let max = *degrees.iter().max().unwrap() as f64;
        prop_assert!(sigma >= mean - 1e-8, "{} < {}", sigma, mean);
        prop_assert!(sigma <= max + 1e-8, "{} > {}", sigma, max);
    }

    #[test]
    fn identical_seeds_identical_traces(a in graph(10), seed in any::<u64>()) {
        let p = DynamicsParams::new(0.1, ContagionFunction::simple(0.3).unwrap()).unwrap();
        let x0 = vec![1; a.node_count()];
        let x = simulate(&a, &p, &x0, 25, &mut seeded(seed)).unwrap();
        let y = simulate(&a, &p, &x0, 25, &mut seeded(seed)).unwrap();
        prop_assert_eq!(x, y);
    }
}
