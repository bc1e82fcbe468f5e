//! Shared helpers for the integration tests: independent finite-difference
//! oracles and random expression generation.

#![allow(dead_code)]

use cartan_symmetry::catalog::{self, GeometryEntry, VectorEntry};
use cartan_symmetry::chart::{stream_rng, Chart};
use cartan_symmetry::expr::{parse_expr, Expr, Scope};
use cartan_symmetry::fields::{
    lie_derivative_components, lie_derivative_tensor, TensorField, VectorFieldSpec,
};
use cartan_symmetry::jet::{Jet1, Truncate};
use cartan_symmetry::tensor::Tensor;
use rand::Rng;

pub const VARS: [&str; 3] = ["x", "y", "z"];

pub fn scope() -> Scope {
    Scope::new(VARS.iter().map(|s| s.to_string()).collect(), vec![])
}

/// A random smooth expression, bounded on `[-1, 1]³` when `vars` are plain
/// variables. Each entry of `vars` is pasted verbatim at a variable leaf, so
/// the same random stream can be rendered in another coordinate system.
pub fn random_expr_text(rng: &mut impl Rng, depth: usize, vars: &[&str]) -> String {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.7) {
            vars[rng.gen_range(0..vars.len())].to_string()
        } else {
            format!("{:.3}", rng.gen_range(-2.0..2.0))
        };
    }
    let a = random_expr_text(rng, depth - 1, vars);
    match rng.gen_range(0..12) {
        0 => format!("({a}) + ({})", random_expr_text(rng, depth - 1, vars)),
        1 => format!("({a}) - ({})", random_expr_text(rng, depth - 1, vars)),
        2 | 3 => format!("({a}) * ({})", random_expr_text(rng, depth - 1, vars)),
        4 => format!(
            "({a}) / (1.5 + ({})^2)",
            random_expr_text(rng, depth - 1, vars)
        ),
        5 => format!("sin({a})"),
        6 => format!("cos({a})"),
        7 => format!("exp(0.3*tanh({a}))"),
        8 => format!("sqrt(1 + ({a})^2)"),
        9 => format!("log(2 + sin({a}))"),
        10 => format!("({a})^3"),
        _ => format!("cosh(0.5*sin({a}))"),
    }
}

pub fn random_expr(seed: u64, index: u64, depth: usize) -> (String, Expr) {
    let mut rng = stream_rng(seed, index);
    let text = random_expr_text(&mut rng, depth, &VARS);
    let expr = parse_expr(&text, &scope()).unwrap_or_else(|e| panic!("{text}: {e}"));
    (text, expr)
}

pub fn random_point(seed: u64, index: u64, n: usize) -> Vec<f64> {
    let mut rng = stream_rng(seed ^ 0x9e37_79b9, index);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn shifted(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &(i, d) in moves {
        y[i] += d;
    }
    y
}

/// One Richardson step on a difference quotient of order `h²`.
pub fn richardson(d: impl Fn(f64) -> f64, h: f64) -> f64 {
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

pub fn fd_partial(f: &impl Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    richardson(
        |h| (f(&shifted(x, &[(i, h)])) - f(&shifted(x, &[(i, -h)]))) / (2.0 * h),
        h,
    )
}

pub fn fd_gradient(f: &impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len()).map(|i| fd_partial(f, x, i, h)).collect()
}

/// Row-major Hessian from function values only.
pub fn fd_hessian(f: &impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = if i == j {
                richardson(
                    |h| {
                        (f(&shifted(x, &[(i, h)])) - 2.0 * f(x) + f(&shifted(x, &[(i, -h)])))
                            / (h * h)
                    },
                    h,
                )
            } else {
                richardson(
                    |h| {
                        (f(&shifted(x, &[(i, h), (j, h)]))
                            - f(&shifted(x, &[(i, h), (j, -h)]))
                            - f(&shifted(x, &[(i, -h), (j, h)]))
                            + f(&shifted(x, &[(i, -h), (j, -h)])))
                            / (4.0 * h * h)
                    },
                    h,
                )
            };
        }
    }
    out
}

pub fn rel_err(exact: f64, approx: f64) -> f64 {
    (exact - approx).abs() / exact.abs().max(1.0)
}

pub fn geometry(name: &str) -> &'static GeometryEntry {
    catalog::builtin()
        .geometry(name)
        .unwrap_or_else(|| panic!("no geometry {name}"))
}

pub fn vector(name: &str) -> &'static VectorEntry {
    catalog::builtin()
        .vector(name)
        .unwrap_or_else(|| panic!("no vector {name}"))
}

/// Every chart-compatible catalog pair, for every geometry kind.
pub fn all_pairs() -> Vec<(&'static GeometryEntry, &'static VectorEntry)> {
    let cat = catalog::builtin();
    cat.geometries
        .iter()
        .flat_map(|g| cat.vectors_for(&g.spec).map(move |v| (g, v)))
        .collect()
}

/// `ℒ_X S` at `x` for a tensor field known only pointwise, with `∂S` from
/// Richardson central differences.
pub fn fd_lie_derivative(
    s: &impl Fn(&[f64]) -> Tensor<f64>,
    xi: &VectorFieldSpec,
    x: &[f64],
    h: f64,
) -> Tensor<f64> {
    let n = x.len();
    let centre = s(x);
    let (upper, lower) = centre.rank();
    let mut grads = vec![vec![0.0; n]; centre.data().len()];
    for i in 0..n {
        let at = |d: f64| {
            let mut y = x.to_vec();
            y[i] += d;
            s(&y)
        };
        let (p1, m1, p2, m2) = (at(h), at(-h), at(h / 2.0), at(-h / 2.0));
        for (k, g) in grads.iter_mut().enumerate() {
            let d1 = (p1.data()[k] - m1.data()[k]) / (2.0 * h);
            let d2 = (p2.data()[k] - m2.data()[k]) / h;
            g[i] = (4.0 * d2 - d1) / 3.0;
        }
    }
    let jet = Tensor::from_vec(
        n,
        upper,
        lower,
        centre
            .data()
            .iter()
            .zip(grads)
            .map(|(v, g)| Jet1::new(*v, g))
            .collect(),
    );
    let xi1: Vec<Jet1> = xi.eval(x).unwrap().iter().map(Truncate::lower).collect();
    lie_derivative_components(&jet, &xi1)
}

/// First-order jets of `[X, Y]^μ = X^ν∂_νY^μ − Y^ν∂_νX^μ`.
pub fn bracket_jets(x_field: &VectorFieldSpec, y_field: &VectorFieldSpec, x: &[f64]) -> Vec<Jet1> {
    let n = x.len();
    let xj = x_field.eval(x).unwrap();
    let yj = y_field.eval(x).unwrap();
    (0..n)
        .map(|mu| {
            (0..n).fold(Jet1::new(0.0, vec![0.0; n]), |acc, nu| {
                acc + xj[nu].lower() * yj[mu].partial(nu) - yj[nu].lower() * xj[mu].partial(nu)
            })
        })
        .collect()
}

/// `sup |ℒ_Xℒ_Y S − ℒ_Yℒ_X S − ℒ_[X,Y] S|` at `x`, relative to the size of
/// the terms. Inner Lie derivatives come from jets; outer ones from
/// finite differences.
pub fn bracket_defect(
    field: &dyn TensorField,
    x_field: &VectorFieldSpec,
    y_field: &VectorFieldSpec,
    x: &[f64],
) -> f64 {
    let h = 1e-3;
    let ly = |p: &[f64]| lie_derivative_tensor(field, y_field, p).unwrap();
    let lx = |p: &[f64]| lie_derivative_tensor(field, x_field, p).unwrap();
    let xy = fd_lie_derivative(&ly, x_field, x, h);
    let yx = fd_lie_derivative(&lx, y_field, x, h);
    let bracket = lie_derivative_components(
        &field.eval_jet1(x).unwrap(),
        &bracket_jets(x_field, y_field, x),
    );
    let scale = xy.sup_norm().max(yx.sup_norm()).max(1.0);
    xy.data()
        .iter()
        .zip(yx.data())
        .zip(bracket.data())
        .map(|((a, b), c)| (a - b - c).abs())
        .fold(0.0, f64::max)
        / scale
}

pub fn parse_all(chart: &Chart, texts: &[&str]) -> Vec<Expr> {
    let scope = chart.scope();
    texts
        .iter()
        .map(|t| parse_expr(t, &scope).unwrap_or_else(|e| panic!("{t}: {e}")))
        .collect()
}

pub fn field(chart: &Chart, texts: &[&str]) -> VectorFieldSpec {
    VectorFieldSpec::new(chart.clone(), parse_all(chart, texts)).unwrap()
}
