mod common;

use cartan_symmetry::catalog;
use cartan_symmetry::chart::stream_rng;
use cartan_symmetry::checks::{check_riemannian, CheckConfig};
use cartan_symmetry::expr::Expr;
use cartan_symmetry::fields::{
    connection_from_metric_torsion, levi_civita, lie_derivative_connection, lie_derivative_tensor,
    metricity_residual, torsion_of_connection, MetricSpec, TorsionSpec,
};
use cartan_symmetry::geometry::GeometrySpec;
use cartan_symmetry::tensor::Tensor;
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn metric_geometries() -> Vec<(&'static str, &'static MetricSpec)> {
    catalog::builtin()
        .geometries
        .iter()
        .filter_map(|g| g.spec.metric().map(|m| (g.name.as_str(), m)))
        .collect()
}

fn riemannian_pairs() -> Vec<(&'static str, &'static MetricSpec, &'static str)> {
    all_pairs()
        .into_iter()
        .filter_map(|(g, v)| match &g.spec {
            GeometrySpec::Riemannian(m) => Some((g.name.as_str(), m, v.name.as_str())),
            _ => None,
        })
        .collect()
}

#[test]
fn levi_civita_is_torsion_free_on_catalog_metrics() {
    for (name, g) in metric_geometries() {
        for x in g.chart().sample_points(20, 3).unwrap() {
            let gamma = levi_civita(g, &x).unwrap().values();
            let t = torsion_of_connection(&gamma).sup_norm();
            assert!(t < 1e-13, "{name} at {x:?}: torsion {t:e}");
            let m = metricity_residual(g, &gamma, &x).unwrap().sup_norm();
            assert!(m < 1e-12, "{name} at {x:?}: metricity {m:e}");
        }
    }
}

#[test]
fn killing_fields_preserve_the_levi_civita_connection() {
    let cfg = CheckConfig {
        samples: 10,
        ..CheckConfig::default()
    };
    let mut killing = 0;
    for (name, g, vname) in riemannian_pairs() {
        let xi = catalog::resolve_vector(vname, &GeometrySpec::Riemannian(g.clone())).unwrap();
        if !check_riemannian(g, &xi, &cfg).unwrap().is_symmetric() {
            continue;
        }
        killing += 1;
        for x in g.chart().sample_points(10, 5).unwrap() {
            let l = lie_derivative_connection(g, &xi, &x).unwrap().sup_norm();
            let scale = levi_civita(g, &x).unwrap().values().sup_norm().max(1.0);
            assert!(l / scale < 1e-9, "{name}/{vname} at {x:?}: ℒΓ = {l:e}");
        }
    }
    assert!(killing >= 20, "only {killing} Killing pairs in the catalog");
}

/// `(q⁻¹)^λ_i T^i_{jk} q^j_μ q^k_ν` with `q^i_μ = ∂x^i/∂q^μ`.
fn pull_back_12(t: &Tensor<f64>, jac: &[f64], inv: &[f64]) -> Tensor<f64> {
    Tensor::from_fn(2, 1, 2, |idx| {
        let (l, m, nu) = (idx[0], idx[1], idx[2]);
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    s += inv[l * 2 + i] * t.get(&[i, j, k]) * jac[j * 2 + m] * jac[k * 2 + nu];
                }
            }
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lie_derivative_of_connection_is_a_tensor(seed in 0u64..1_000_000, r in 0.6f64..0.95, phi in -3.0f64..3.0) {
        let cart = common::geometry("euclidean2");
        let polar = common::geometry("euclidean2_polar");
        let cart_vars = ["x", "y"];
        let polar_vars = ["(r*cos(phi))", "(r*sin(phi))"];
        let texts = |vars: &[&str]| {
            let mut rng = stream_rng(seed, 0);
            let a = random_expr_text(&mut rng, 3, vars);
            let b = random_expr_text(&mut rng, 3, vars);
            (a, b)
        };
        let (cx, cy) = texts(&cart_vars);
        let (px, py) = texts(&polar_vars);
        let xi_cart = field(cart.spec.chart(), &[&cx, &cy]);
        let xi_r = format!("cos(phi)*({px}) + sin(phi)*({py})");
        let xi_phi = format!("(cos(phi)*({py}) - sin(phi)*({px}))/r");
        let xi_polar = field(polar.spec.chart(), &[&xi_r, &xi_phi]);

        let (GeometrySpec::Riemannian(gc), GeometrySpec::Riemannian(gp)) = (&cart.spec, &polar.spec) else {
            panic!("euclidean charts must be riemannian");
        };
        let xy = [r * phi.cos(), r * phi.sin()];
        let lc = lie_derivative_connection(gc, &xi_cart, &xy).unwrap();
        let lp = lie_derivative_connection(gp, &xi_polar, &[r, phi]).unwrap();
        let jac = [phi.cos(), -r * phi.sin(), phi.sin(), r * phi.cos()];
        let inv = [phi.cos(), phi.sin(), -phi.sin() / r, phi.cos() / r];
        let expected = pull_back_12(&lc, &jac, &inv);
        let scale = lc.sup_norm().max(1.0);
        prop_assert!(lp.max_abs_diff(&expected) / scale < 1e-10, "{cx}, {cy}");
    }

    #[test]
    fn lie_derivative_is_linear_in_the_field(
        idx in 0usize..1000,
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        p in 0usize..40,
    ) {
        let pairs = riemannian_pairs();
        let (name, g, v1) = pairs[idx % pairs.len()];
        let spec = GeometrySpec::Riemannian(g.clone());
        let others: Vec<_> = pairs.iter().filter(|(n, _, _)| *n == name).collect();
        let v2 = others[(idx / pairs.len()) % others.len()].2;
        let x1 = catalog::resolve_vector(v1, &spec).unwrap();
        let x2 = catalog::resolve_vector(v2, &spec).unwrap();
        let combo = x1.combine(a, &x2, b).unwrap();
        let x = g.chart().sample_points(40, 11).unwrap().swap_remove(p);
        let l1 = lie_derivative_tensor(g, &x1, &x).unwrap();
        let l2 = lie_derivative_tensor(g, &x2, &x).unwrap();
        let lc = lie_derivative_tensor(g, &combo, &x).unwrap();
        let expected = Tensor::from_fn(l1.dim(), 0, 2, |i| a * l1.get(i) + b * l2.get(i));
        let scale = l1.sup_norm().max(l2.sup_norm()).max(1.0) * (a.abs() + b.abs()).max(1.0);
        prop_assert!(lc.max_abs_diff(&expected) / scale < 1e-13, "{name}: {v1} + {v2}");
    }

    #[test]
    fn bracket_identity_on_metrics(idx in 0usize..10_000, p in 0usize..10) {
        let pairs = riemannian_pairs();
        let (name, g, v1) = pairs[idx % pairs.len()];
        let others: Vec<_> = pairs.iter().filter(|(n, _, _)| *n == name).collect();
        let v2 = others[(idx / pairs.len()) % others.len()].2;
        let spec = GeometrySpec::Riemannian(g.clone());
        let x1 = catalog::resolve_vector(v1, &spec).unwrap();
        let x2 = catalog::resolve_vector(v2, &spec).unwrap();
        let x = g.chart().sample_points_within(10, 13, 0.1).unwrap().swap_remove(p);
        let d = bracket_defect(g, &x1, &x2, &x);
        prop_assert!(d < 1e-6, "{name}: [{v1}, {v2}] at {x:?}: {d:e}");
    }

    #[test]
    fn metric_torsion_connection_postconditions(
        comps in proptest::collection::vec(-2.0f64..2.0, 24),
        geom in 0usize..4,
        p in 0usize..10,
    ) {
        let name = ["minkowski4", "schwarzschild", "flrw_flat", "desitter"][geom];
        let g = common::geometry(name).spec.metric().unwrap();
        let t = TorsionSpec::from_components(
            g.chart().clone(),
            comps.iter().map(|c| Expr::num(*c)).collect(),
        ).unwrap();
        let x = g.chart().sample_points(10, 17).unwrap().swap_remove(p);
        let gamma = connection_from_metric_torsion(g, &t, &x).unwrap();
        let want = t.eval(&x).unwrap().values();
        let got = torsion_of_connection(&gamma.values());
        prop_assert!(got.max_abs_diff(&want) < 1e-12);
        let scale = g.eval_values(&x).unwrap().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let metricity = metricity_residual(g, &gamma, &x).unwrap().sup_norm();
        prop_assert!(metricity / scale < 1e-12, "{name}: {metricity:e}");
    }
}

#[test]
fn bracket_identity_on_torsion() {
    let rc = common::geometry("affine_with_torsion");
    let GeometrySpec::RiemannCartan(spec) = &rc.spec else {
        panic!("affine_with_torsion must be riemann-cartan");
    };
    let chart = rc.spec.chart();
    let a = field(chart, &["x*y", "sin(t)", "z^2", "t*x"]);
    let b = field(chart, &["cos(z)", "y", "x*t", "exp(0.5*y)"]);
    let mut rng = stream_rng(23, 0);
    for _ in 0..10 {
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.8..0.8)).collect();
        assert!(bracket_defect(&spec.torsion, &a, &b, &x) < 1e-6);
        assert!(bracket_defect(&spec.metric, &a, &b, &x) < 1e-6);
    }
}
