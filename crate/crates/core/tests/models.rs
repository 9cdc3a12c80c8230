mod common;

use common::*;
use kamlab::grid::{build_edge_graph, make_grid};
use kamlab::models::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mech_2d() -> (LagrangianModel, kamlab::grid::TorusGrid) {
    let g = make_grid(2, 8).unwrap();
    let spec = PotentialSpec::SumOfCosines { amplitude: 1.0, frequency: 1.0, phase: 0.0, offset: 0.0 };
    (LagrangianModel::Mechanical { potential: Potential::new(spec, &g).unwrap() }, g)
}

#[test]
fn fenchel_inequality_on_random_triples() {
    let graph = graph_1d(64, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let models = [mechanical(&graph, cos_potential()), LagrangianModel::EikonalQuadratic];
    for model in &models {
        let mut worst = f64::INFINITY;
        for _ in 0..1000 {
            let x = [rng.gen_range(0.0..1.0)];
            let v = [rng.gen_range(-3.0..3.0)];
            let p = [rng.gen_range(-8.0..8.0)];
            worst = worst.min(fenchel_gap(model, &x, &v, &p));
        }
        assert!(worst >= -1e-9, "worst gap {worst}");
    }
    let (model, _) = mech_2d();
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..1.0)).collect();
        let v: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p: Vec<f64> = (0..2).map(|_| rng.gen_range(-4.0..4.0)).collect();
        worst = worst.min(fenchel_gap(&model, &x, &v, &p));
    }
    assert!(worst >= -1e-9);
}

#[test]
fn fenchel_equality_at_the_legendre_momentum() {
    let graph = graph_1d(64, 3);
    let model = mechanical(&graph, cos_potential());
    for &(x, v) in &[(0.0, 1.0), (0.3, -2.0), (0.8, 0.25)] {
        assert!(fenchel_gap(&model, &[x], &[v], &[v]).abs() <= 1e-12);
        assert!(fenchel_gap(&LagrangianModel::EikonalQuadratic, &[x], &[v], &[v / 2.0]).abs() <= 1e-12);
    }
}

#[test]
fn double_conjugacy() {
    let graph = graph_1d(64, 3);
    let dp = 0.05;
    let models = [mechanical(&graph, cos_potential()), LagrangianModel::EikonalQuadratic];
    for model in &models {
        for &(x, p) in &[(0.0, 0.0), (0.2, 1.3), (0.55, -1.7), (0.9, 0.45)] {
            let l = |v: &[f64]| legendre_transform_numeric(|x, p| model.eval_h(x, p), &[x], v, 8.0, dp).unwrap();
            let back = convex_conjugate_numeric(l, &[p], 4.0, dp).unwrap();
            let h = model.eval_h(&[x], &[p]);
            assert!((back - h).abs() <= dp, "x = {x}, p = {p}: {back} vs {h}");
        }
    }
}

#[test]
fn numeric_legendre_examples() {
    let l = legendre_transform_numeric(|_, p| p[0] * p[0], &[0.0], &[1.0], 8.0, 1.0 / 64.0).unwrap();
    assert!((l - 0.25).abs() <= 1e-12);
    let graph = graph_1d(64, 3);
    let model = mechanical(&graph, cos_potential());
    let dp = graph.grid().dx();
    let l = legendre_transform_numeric(|x, p| model.eval_h(x, p), &[0.0], &[1.0], momentum_range(3.0), dp).unwrap();
    assert!((l + 0.5).abs() <= dp * dp);
    assert!(model.check_tolerance(dp) <= 1e-9);
}

#[test]
fn edge_costs_match_evaluator() {
    let (model, g) = mech_2d();
    let graph = build_edge_graph(&g, g.dx(), 1).unwrap();
    assert_eq!(graph.edge_count(), 64 * 9);
    let costs = model.edge_costs(&graph);
    for (id, e) in graph.edges().iter().enumerate() {
        let x = g.coords(e.source);
        assert_eq!(costs[id], model.eval_l(&x, graph.velocity(id)));
    }
}

#[test]
fn sin_contact_lipschitz_in_u() {
    let sin = ContactModel::SinContact;
    assert_eq!(sin.lipschitz_k(), 1.0);
    assert_eq!(sin.eval_lg(&[0.3], &[2.0], 0.0), 1.0);
    assert_eq!(sin.eval_g(&[0.3], &[0.5], 0.0), 0.25);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn convexity_in_velocity(x in 0.0..1.0f64, v1 in -3.0..3.0f64, v2 in -3.0..3.0f64, theta in 0.0..=1.0f64) {
        let graph = graph_1d(64, 3);
        let model = mechanical(&graph, cos_potential());
        prop_assert!(convexity_defect(&model, &[x], &[v1], &[v2], theta) <= 1e-9);
        prop_assert!(convexity_defect(&LagrangianModel::EikonalQuadratic, &[x], &[v1], &[v2], theta) <= 1e-9);
    }

    #[test]
    fn linear_contact_identity(x in 0.0..1.0f64, v in -3.0..3.0f64, u in -50.0..50.0f64, w in -50.0..50.0f64) {
        let g = make_grid(1, 64).unwrap();
        let params = ModelParams { coefficient: Some(PotentialSpec::cosine(1.0, 1.0, 0.0, 0.5)), ..ModelParams::default() };
        let Model::Contact(lin) = make_builtin_model("linear-discount", &params, &g).unwrap() else { unreachable!() };
        let a = lin.linear_coefficient(&[x]).unwrap();
        prop_assert_eq!(lin.eval_lg(&[x], &[v], u), lin.base().eval_l(&[x], &[v]) - a * u);
        prop_assert_eq!(lin.eval_dlg_du0(&[x], &[v]), -a);
        let k = lin.lipschitz_k();
        prop_assert!((lin.eval_lg(&[x], &[v], u) - lin.eval_lg(&[x], &[v], w)).abs() <= k * (u - w).abs() + 1e-12);
        let sin = ContactModel::SinContact;
        prop_assert!((sin.eval_lg(&[x], &[v], u) - sin.eval_lg(&[x], &[v], w)).abs() <= (u - w).abs() + 1e-12);
    }

    #[test]
    fn hops_reverse(n in 4usize..20, node_seed in any::<usize>(), m in 1usize..2) {
        let g = make_grid(1, n).unwrap();
        let graph = build_edge_graph(&g, g.dx(), m).unwrap();
        let x = node_seed % n;
        for e in graph.outgoing(x) {
            let edge = graph.edge(e);
            let back: Vec<i32> = graph.controls().offset(edge.velocity).iter().map(|k| -k).collect();
            prop_assert_eq!(g.shift(edge.target, &back), x);
        }
    }
}
