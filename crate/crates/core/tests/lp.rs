mod common;

use common::{program, random_program, vertex_minimum};
use kamlab::lp::{solve_lp, LpStatus};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let (c, a, b) = random_program(&mut rng);
        let oracle = vertex_minimum(&c, &a, &b).expect("feasible by construction");
        let s = solve_lp(&program(&c, &a, &b)).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value - oracle).abs() <= 1e-9, "simplex {} vs oracle {}", s.value, oracle);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn strong_duality_and_slackness(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c, a, b) = random_program(&mut rng);
        let lp = program(&c, &a, &b);
        let s = solve_lp(&lp).unwrap().optimal().unwrap();
        let bmax = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        prop_assert!(lp.primal_residual(&s.primal) <= 1e-9 * (1.0 + bmax));
        prop_assert!((s.value - s.dual_value(&lp)).abs() <= 1e-8 * (1.0 + s.value.abs()));
        let d = s.reduced_costs(&lp);
        for (x, dj) in s.primal.iter().zip(&d) {
            prop_assert!(*dj >= -1e-8);
            prop_assert!((x * dj).abs() <= 1e-8);
        }
    }

    #[test]
    fn objective_scaling(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c, a, b) = random_program(&mut rng);
        let s1 = solve_lp(&program(&c, &a, &b)).unwrap().optimal().unwrap();
        let cs: Vec<f64> = c.iter().map(|v| v * scale).collect();
        let s2 = solve_lp(&program(&cs, &a, &b)).unwrap().optimal().unwrap();
        prop_assert!((s2.value - scale * s1.value).abs() <= 1e-8 * (1.0 + s2.value.abs()));
    }
}
