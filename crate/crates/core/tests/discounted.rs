mod common;

use common::*;
use kamlab::discounted::*;
use kamlab::grid::EdgeGraph;
use kamlab::mather::{discounted_occupation, tv_distance_to_polytope};
use kamlab::models::{ContactModel, LagrangianModel, Potential, PotentialSpec};
use kamlab::weakkam::{all_barriers, critical_value_karp, reduced_costs, BarrierWindow};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const TOL: f64 = 1e-10;

struct Setup {
    graph: EdgeGraph,
    costs: Vec<f64>,
    c0: f64,
    reduced: Vec<f64>,
}

fn setup(n: usize, spec: PotentialSpec) -> Setup {
    let graph = graph_1d(n, 3);
    let model = mechanical(&graph, spec);
    let costs = model.edge_costs(&graph);
    let c0 = critical_value_karp(&graph, &model).c0;
    let reduced = reduced_costs(&costs, c0);
    Setup { graph, costs, c0, reduced }
}

fn sample(graph: &EdgeGraph, spec: PotentialSpec) -> Vec<f64> {
    Potential::new(spec, graph.grid()).unwrap().sample()
}

fn sign_changing() -> PotentialSpec {
    PotentialSpec::cosine(1.0, 1.0, 0.0, 0.5)
}

#[test]
fn backward_step_examples() {
    let graph = graph_1d(64, 3);
    let eik = LagrangianModel::EikonalQuadratic.edge_costs(&graph);
    let ones = vec![1.0; 64];
    let zero = vec![0.0; 64];
    assert_eq!(backward_step_linear(&graph, &zero, 0.1, &ones, &eik).unwrap(), zero);

    let s = setup(64, cos_potential());
    let (lambda, dt, k) = (0.1, graph.dt(), 3.7);
    let step = backward_step_linear(&graph, &vec![k; 64], lambda, &ones, &s.reduced).unwrap();
    let top = s.reduced.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(step.iter().all(|v| *v <= (-lambda * dt).exp() * k + dt * top + 1e-12));

    // node x = 0.5 from u ≡ 0: enumerate the seven incoming hops by hand
    let a = sample(&graph, sign_changing());
    let step = backward_step_linear(&graph, &zero, lambda, &a, &s.reduced).unwrap();
    let mut best = f64::INFINITY;
    for hop in -3i32..=3 {
        let y = (32 - hop).rem_euclid(64) as f64 / 64.0;
        let l = 0.5 * (hop as f64).powi(2) - (2.0 * PI * y).cos();
        let weight = (-lambda * ((2.0 * PI * y).cos() + 0.5) * dt).exp();
        best = best.min(weight * dt * (l + 1.0));
    }
    assert!((step[32] - best).abs() <= 1e-14);
    assert!((best - (0.5 * lambda * dt).exp() * 2.0 * dt).abs() <= 1e-15);

    assert!(backward_step_linear(&graph, &zero, 40.0, &a, &s.reduced).is_err());
    assert!(backward_step_linear(&graph, &zero, 0.0, &a, &s.reduced).is_err());
}

#[test]
fn residual_examples() {
    let graph = graph_1d(64, 3);
    let eik = LagrangianModel::EikonalQuadratic.edge_costs(&graph);
    let lambda = 0.1;
    let op = AffineBellman::linear(&graph, lambda, &[1.0; 64], &eik);
    assert_eq!(residual(&[0.0; 64], |u| op.backward(u)), 0.0);
    let shifted = op.residual(&[1.0; 64]);
    assert!((shifted - (1.0 - (-lambda * graph.dt()).exp())).abs() <= 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let u: Vec<f64> = (0..64).map(|_| rng.gen_range(-5.0..5.0)).collect();
        assert!(op.residual(&u) >= 0.0);
    }
}

#[test]
fn sin_contact_constants() {
    let graph = graph_1d(64, 3);
    let model = ContactModel::SinContact;
    for lambda in [0.1, 0.01] {
        let op = ContactBellman::new(&graph, &model, lambda, 0.0);
        for level in [0.0, PI / lambda, -PI / lambda] {
            let u = vec![level; 64];
            assert!(op.residual(&u) <= 1e-10, "λ = {lambda}, level {level}");
            let report = solve_general_contact(&op, &u, TOL, 1000).unwrap();
            assert!(report.converged() && !report.damped);
            assert!(report.u.sup_distance(&kamlab::field::GridField::constant(*graph.grid(), level)) <= 1e-10);
        }
    }
    let op = ContactBellman::new(&graph, &model, 0.1, 0.0);
    let zero = solve_general_contact(&op, &[0.0; 64], TOL, 1000).unwrap();
    assert_eq!(zero.residual, 0.0);
}

#[test]
fn monotone_two_sided_agreement() {
    let s = setup(64, cos_potential());
    for spec in [PotentialSpec::constant(1.0), PotentialSpec::cosine(0.5, 1.0, 0.0, 1.0)] {
        let a = sample(&s.graph, spec);
        for lambda in [0.1, 0.5] {
            let op = AffineBellman::linear(&s.graph, lambda, &a, &s.reduced);
            let c = oscillation_estimate(&s.graph, &s.reduced);
            let hi = iterate_backward(&op, &vec![10.0 * c; 64], None, TOL, DEFAULT_MAX_ITERS).unwrap();
            let lo = iterate_backward(&op, &vec![-10.0 * c; 64], None, TOL, DEFAULT_MAX_ITERS).unwrap();
            assert!(hi.converged() && lo.converged());
            assert!(hi.u.sup_distance(&lo.u) <= 1e-6);
            let max = solve_maximal(&op, default_upper_level(&s.graph, &s.reduced), TOL, DEFAULT_MAX_ITERS).unwrap();
            assert!(max.u.sup_distance(&hi.u) <= 1e-6);
        }
    }
}

#[test]
fn maximal_eikonal_is_zero() {
    let graph = graph_1d(32, 2);
    let eik = LagrangianModel::EikonalQuadratic.edge_costs(&graph);
    for lambda in [0.5, 0.1] {
        let op = AffineBellman::linear(&graph, lambda, &[1.0; 32], &eik);
        let report = solve_maximal(&op, default_upper_level(&graph, &eik), TOL, DEFAULT_MAX_ITERS).unwrap();
        assert!(report.converged());
        assert!(report.u.sup_norm() <= 1e-6);
        assert!(report.residual <= TOL);
    }
}

#[test]
fn maximal_family_equi_bounded() {
    let s = setup(64, cos_potential());
    let a = vec![1.0; 64];
    let upper = default_upper_level(&s.graph, &s.reduced);
    let mut worst: f64 = 0.0;
    for k in 0..4 {
        let lambda = 0.1 / 2f64.powi(k);
        let report = solve_maximal(&AffineBellman::linear(&s.graph, lambda, &a, &s.reduced), upper, TOL, DEFAULT_MAX_ITERS).unwrap();
        assert!(report.converged() && report.residual <= TOL);
        worst = worst.max(report.u.sup_norm());
    }
    // measured 0.6537 over λ = 0.1 … 0.0125
    assert!(worst <= 0.6546, "{worst}");
}

#[test]
fn strict_subsolution_examples() {
    let s = setup(64, cos_potential());
    let a = sample(&s.graph, sign_changing());
    let lambda = 0.01;
    let op = AffineBellman::linear(&s.graph, lambda, &a, &s.reduced);
    let hood = aubry_neighborhood(&s.graph, &[0]);
    assert_eq!(hood, vec![0, 1, 63]);
    let strict = strict_subsolution(&op, &[0.0; 64], lambda, &hood).unwrap();
    assert!(strict.phi.values().iter().all(|v| *v == -10.0));
    assert!(strict.strict_slack > 0.0 && strict.min_slack >= 0.0);

    let critical = AffineBellman::critical(&s.graph, &s.reduced);
    let dt = s.graph.dt();
    let rest = s.graph.rest_edge(32);
    assert!((critical.edge_slack(&[-10.0; 64])[rest] - 2.0 * dt).abs() <= 1e-15);
    let slack = op.edge_slack(strict.phi.values())[rest];
    assert!(slack > 0.0 && (slack - 2.0 * dt).abs() <= 1e-3);

    // far from Aubry the forward step strictly decreases φ_λ
    let f = op.forward(strict.phi.values());
    for y in 0..64 {
        if !hood.contains(&y) {
            assert!(f[y] < strict.phi.get(y));
        }
    }

    // a > 0 on Aubry makes even the Aubry rest loop strict for λ > 0
    assert!(strict_subsolution(&op, &[0.0; 64], lambda, &[]).is_ok());
    assert!(strict_subsolution(&critical, &[0.0; 64], lambda, &[]).is_err());
    assert!(strict_subsolution(&critical, &[0.0; 64], lambda, &hood).is_ok());
}

#[test]
fn sign_changing_dichotomy() {
    let s = setup(64, cos_potential());
    let a = sample(&s.graph, sign_changing());
    let hood = aubry_neighborhood(&s.graph, &[0]);
    let upper = default_upper_level(&s.graph, &s.reduced);
    let a_plus = harnack_constant(
        &s.graph,
        &ContactModel::Linear {
            base: mechanical(&s.graph, cos_potential()),
            coefficient: Potential::new(sign_changing(), s.graph.grid()).unwrap(),
        },
        s.c0,
    );
    for lambda in [0.1, 0.01] {
        let op = AffineBellman::linear(&s.graph, lambda, &a, &s.reduced);
        let max = solve_maximal(&op, upper, TOL, DEFAULT_MAX_ITERS).unwrap();
        assert!(max.converged() && max.residual <= TOL);
        let phi = strict_subsolution(&op, &[0.0; 64], lambda, &hood).unwrap();
        let div = solve_diverging_family(&op, phi.phi.values(), TOL, DEFAULT_MAX_ITERS).unwrap();
        assert!(div.v.converged(), "{:?}", div.v.status);
        assert!(div.v.residual <= 1e-9);
        assert!(div.v.u.min() <= -1.0 / (2.0 * lambda.sqrt()));
        assert!(div.v.u.sup_distance(&max.u) >= 1.0);
        assert!(div.touching_gap <= TOL);
        // maximality
        assert!(div.v.u.values().iter().zip(max.u.values()).all(|(v, u)| v <= &(u + 1e-6)));
        // v₊ is a forward fixed point below φ_λ
        assert!(div.forward_residual <= 1e-9);
        assert!(div.v_plus.values().iter().zip(phi.phi.values()).all(|(v, p)| v <= &(p + 1e-12)));
        // non-maximal solutions sit below min φ_λ
        assert!(div.v.u.min() <= phi.phi.min());
        for w in [&max.u, &div.v.u, &phi.phi] {
            assert!(harnack_holds(w, lambda, a_plus));
        }
    }
    let op = AffineBellman::linear(&s.graph, 0.01, &a, &s.reduced);
    let div = solve_diverging_family(&op, &[-10.0; 64], TOL, DEFAULT_MAX_ITERS).unwrap();
    assert!(div.v.u.min() <= -5.0);
}

#[test]
fn maximal_family_blows_up_without_a1() {
    // Aubry at x = 0.5 where a = -1: condition (a1) fails, u_λ grows like 2/λ
    let s = setup(32, PotentialSpec::cosine(1.0, 1.0, 0.5, 0.0));
    let a = sample(&s.graph, PotentialSpec::cosine(1.0, 1.0, 0.0, 0.0));
    let upper = default_upper_level(&s.graph, &s.reduced);
    for lambda in [0.1, 0.05, 0.025] {
        let op = AffineBellman::linear(&s.graph, lambda, &a, &s.reduced);
        let report = solve_maximal(&op, upper, TOL, DEFAULT_MAX_ITERS).unwrap();
        assert!(report.converged());
        assert!((lambda * report.u.min() - 2.0).abs() <= 0.01);
    }
}

#[test]
fn occupation_measure_near_mather() {
    let s = setup(64, cos_potential());
    let lambda = 1e-2;
    let op = AffineBellman::linear(&s.graph, lambda, &[1.0; 64], &s.reduced);
    let report = solve_maximal(&op, default_upper_level(&s.graph, &s.reduced), TOL, DEFAULT_MAX_ITERS).unwrap();
    assert!(report.converged());
    let steps = (8.0 / (lambda * s.graph.dt())) as usize;
    let dlg = vec![-1.0; s.graph.edge_count()];
    for x in [16, 40] {
        let traj = report.trajectory(&s.graph, x, steps);
        let mu = discounted_occupation(&s.graph, &traj, lambda, &dlg).unwrap();
        assert!((mu.mass() - 1.0).abs() <= 1e-12);
        let tv = tv_distance_to_polytope(&s.graph, &s.costs, s.c0, &mu).unwrap();
        assert!(tv <= 0.1, "x = {x}: {tv}");
    }
}

#[test]
fn harnack_on_barriers_and_sin_constants() {
    let s = setup(64, cos_potential());
    let model = ContactModel::Linear {
        base: mechanical(&s.graph, cos_potential()),
        coefficient: Potential::new(PotentialSpec::constant(1.0), s.graph.grid()).unwrap(),
    };
    let a_plus = harnack_constant(&s.graph, &model, s.c0);
    // C = 1/2 + 2 on unit hops, K = 1
    assert!((a_plus - 2.5 * 0.5 * 0.5f64.exp()).abs() <= 1e-12);
    let bars = all_barriers(&s.graph, &s.reduced, BarrierWindow::for_nodes(64)).unwrap();
    for y in [0, 17, 32] {
        let h = bars.barrier(&s.graph, y).unwrap().h;
        assert!(harnack_holds(&h, 0.0, a_plus));
    }
    let sin = ContactModel::SinContact;
    let a_sin = harnack_constant(&s.graph, &sin, 0.0);
    for lambda in [0.1, 0.01] {
        for level in [0.0, PI / lambda, -PI / lambda] {
            assert!(harnack_holds(&kamlab::field::GridField::constant(*s.graph.grid(), level), lambda, a_sin));
        }
    }
}

#[test]
fn semigroup_ordering_on_random_subsolutions() {
    let s = setup(32, cos_potential());
    let a = vec![1.0; 32];
    let lambda = 0.2;
    let disc = AffineBellman::linear(&s.graph, lambda, &a, &s.reduced);
    let fixed = solve_maximal(&disc, default_upper_level(&s.graph, &s.reduced), TOL, DEFAULT_MAX_ITERS).unwrap();
    let crit = AffineBellman::critical(&s.graph, &s.reduced);
    let bars = all_barriers(&s.graph, &s.reduced, BarrierWindow::for_nodes(32)).unwrap();
    let rows: Vec<Vec<f64>> = (0..32).step_by(3).map(|y| bars.row(y).to_vec()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..50 {
        let (op, u) = if trial % 2 == 0 {
            (&crit, random_subsolution(&mut rng, &rows))
        } else {
            let base = vec![fixed.u.values().to_vec(), fixed.u.values().iter().map(|v| v - 3.0).collect()];
            (&disc, random_subsolution(&mut rng, &base))
        };
        let b = op.backward(&u);
        let f = op.forward(&u);
        for x in 0..32 {
            assert!(f[x] <= u[x] + 1e-12 && u[x] <= b[x] + 1e-12, "trial {trial}, node {x}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forward_is_the_order_adjoint(seed in any::<u64>(), lambda in 0.01..2.0f64) {
        let graph = graph_1d(8, 1);
        let costs = random_costs(&graph, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a);
        let a: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let op = AffineBellman::linear(&graph, lambda, &a, &costs);
        let w: Vec<f64> = (0..8).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let bw = op.backward(&w);
        // F[B[w]] <= w and the largest u with F[u] <= w is B[w]
        let fbw = op.forward(&bw);
        for y in 0..8 {
            prop_assert!(fbw[y] <= w[y] + 1e-9);
        }
        let u: Vec<f64> = bw.iter().map(|v| v + 1e-6).collect();
        let fu = op.forward(&u);
        prop_assert!(fu.iter().zip(&w).any(|(a, b)| *a > *b));
    }

    #[test]
    fn backward_is_monotone_for_nonnegative_a(seed in any::<u64>()) {
        let graph = graph_1d(8, 1);
        let costs = random_costs(&graph, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..8).map(|_| rng.gen_range(0.0..2.0)).collect();
        let op = AffineBellman::linear(&graph, 0.3, &a, &costs);
        let u: Vec<f64> = (0..8).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let v: Vec<f64> = u.iter().map(|x| x + rng.gen_range(0.0..1.0)).collect();
        let (bu, bv) = (op.backward(&u), op.backward(&v));
        prop_assert!(bu.iter().zip(&bv).all(|(a, b)| a <= b));
    }
}
