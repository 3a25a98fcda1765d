mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use switchsim::bench::Preset;
use switchsim::fluid::{
    certify_l_drift, integrate_multihop, integrate_single_hop, lemma1_check, lyapunov_h,
    pinsker_lower_bound, relative_entropy, FluidOptions,
};
use switchsim::model::{QueueState, ScheduleSet};
use switchsim::policy::{alpha_g_policy, hypergeometric_draw};
use switchsim::program::{
    caratheodory_decompose, solve_program, Decomposition, Objective, SolverOptions, Utility,
};

fn iq3() -> ScheduleSet {
    Preset::IqSwitch { n: 3 }.build(0.9).unwrap().set.unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decomposition_invariants(raw in prop::collection::vec(0.0f64..1.0, 34)) {
        let set = iq3();
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-6);
        let mut point = vec![0.0; set.dim()];
        for (w, a) in raw.iter().zip(set.atoms()) {
            for (p, &x) in point.iter_mut().zip(a) {
                *p += w / total * f64::from(x);
            }
        }
        let d = Decomposition::from_point(&point, &set).unwrap();
        let wsum: f64 = d.atoms().iter().map(|(w, _)| w).sum();
        prop_assert!((wsum - 1.0).abs() <= 1e-12);
        prop_assert!(d.len() <= set.dim() + 1);
        for (m, p) in d.mean().iter().zip(&point) {
            prop_assert!((m - p).abs() <= 1e-9);
        }
        for (_, a) in d.atoms() {
            prop_assert!(set.index_of(a).is_some());
        }
    }

    #[test]
    fn argmax_is_scale_invariant(
        q in prop::collection::vec(0.05f64..5.0, 9),
        beta in 0.2f64..3.0,
        alpha in 0.5f64..3.0,
    ) {
        let set = iq3();
        let opts = SolverOptions::fluid();
        for u in [Utility::Log, Utility::Power { beta }] {
            let obj = Objective::new(alpha, u).unwrap();
            let base = solve_program(&obj, &q, &set, &opts).unwrap();
            for c in [0.1, 10.0] {
                let scaled: Vec<f64> = q.iter().map(|v| v * c).collect();
                let s = solve_program(&obj, &scaled, &set, &opts).unwrap();
                for (a, b) in s.s.iter().zip(&base.s) {
                    prop_assert!((a - b).abs() <= 1e-6, "{u:?} c={c}: {:?} vs {:?}", s.s, base.s);
                }
            }
        }
    }

    #[test]
    fn policy_never_serves_absent_packets(q in prop::collection::vec(0u64..4, 9), seed in any::<u64>()) {
        let set = iq3();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = alpha_g_policy(&QueueState::new(q.clone()), &Objective::proportional(), &set, &mut rng).unwrap();
        for (s, x) in a.sigma.iter().zip(&q) {
            prop_assert!(s <= x);
        }
    }

    #[test]
    fn decomposed_mean_matches_solver(q in prop::collection::vec(0.1f64..5.0, 9)) {
        let set = iq3();
        let ms = solve_program(&Objective::proportional(), &q, &set, &SolverOptions::fluid()).unwrap();
        let d = caratheodory_decompose(&ms, &set).unwrap();
        for (m, s) in d.mean().iter().zip(&ms.s) {
            prop_assert!((m - s).abs() <= 1e-9);
        }
    }

    #[test]
    fn hypergeometric_draw_is_a_subset(counts in prop::collection::vec(0u64..6, 1..6), frac in 0.0f64..=1.0, seed in any::<u64>()) {
        let total: u64 = counts.iter().sum();
        let k = (frac * total as f64).floor() as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = hypergeometric_draw(&counts, k, &mut rng);
        prop_assert_eq!(d.iter().sum::<u64>(), k);
        for (x, c) in d.iter().zip(&counts) {
            prop_assert!(x <= c);
        }
    }

    #[test]
    fn entropy_dominates_pinsker(p in prop::collection::vec(0.01f64..1.0, 2..8), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q: Vec<f64> = p.iter().map(|_| rand::Rng::random_range(&mut rng, 0.01..1.0)).collect();
        let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
        let q: Vec<f64> = q.iter().map(|v| v * sp / sq).collect();
        prop_assert!(relative_entropy(&p, &q) >= pinsker_lower_bound(&p, &q) - 1e-12);
    }

    #[test]
    fn class_split_identity(x in prop::collection::vec(0.01f64..5.0, 1..6), sigma in 0.1f64..4.0) {
        let r = lemma1_check(&x, sigma).unwrap();
        prop_assert!((r.lhs - r.rhs).abs() <= 1e-9 * (1.0 + r.lhs.abs()));
        let gsum: f64 = r.gamma.iter().sum();
        prop_assert!((gsum - sigma).abs() <= 1e-12 * sigma);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn h_is_nonnegative_and_vanishes_only_at_zero(seed in any::<u64>(), k in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (net, set) = common::random_line(&mut rng, k, 0.9);
        let n = net.stations().len();
        let opts = SolverOptions::fluid();
        let x: Vec<f64> = (0..n).map(|_| rand::Rng::random_range(&mut rng, 0.0..1.0)).collect();
        prop_assume!(x.iter().sum::<f64>() > 1e-3);
        prop_assert!(lyapunov_h(&net, &x, &set, &opts).unwrap() > 0.0);
        prop_assert_eq!(lyapunov_h(&net, &vec![0.0; n], &set, &opts).unwrap(), 0.0);
    }

    #[test]
    fn multihop_mass_balance(seed in any::<u64>(), k in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (net, set) = common::random_line(&mut rng, k, 0.9);
        let n = net.stations().len();
        let x0: Vec<f64> = (0..n).map(|_| rand::Rng::random_range(&mut rng, 0.0..1.0)).collect();
        let traj = integrate_multihop(&net, &x0, &set, &FluidOptions::new(1e-2, 3.0)).unwrap();
        let inflow: f64 = net.route_rates().iter().sum();
        for i in 0..traj.len() - 1 {
            let m1: f64 = traj.x[i + 1].iter().sum();
            if m1 == 0.0 {
                continue;
            }
            let m0: f64 = traj.x[i].iter().sum();
            let h = traj.t[i + 1] - traj.t[i];
            prop_assert!(((m1 - m0) - (inflow - traj.outflow[i]) * h).abs() <= 1e-12);
        }
    }

    #[test]
    fn l_is_monotone_on_single_hop(q0 in prop::collection::vec(0.0f64..1.0, 2), load in 0.5f64..0.95) {
        let total: f64 = q0.iter().sum();
        prop_assume!(total > 1e-3);
        let q0: Vec<f64> = q0.iter().map(|v| v / total).collect();
        let b = Preset::Simplex2.build(load).unwrap();
        let set = b.set.unwrap();
        let obj = Objective::proportional();
        let a = b.net.link_loads().to_vec();
        let traj = integrate_single_hop(&q0, &a, &obj, &set, &FluidOptions::new(1e-2, 60.0)).unwrap();
        let cert = certify_l_drift(&traj, &obj, &a, &set).unwrap();
        prop_assert!(cert.monotone.passed());
        prop_assert!(cert.envelope.passed());
    }
}
