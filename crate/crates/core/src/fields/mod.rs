//! Component specifications of the geometric fields on a chart and the
//! pointwise tensor calculus built on them.
//!
//! Index conventions used throughout:
//!
//! * `Γ^λ_{μν}` is stored at `[λ, μ, ν]` and the **last** lower slot is the
//!   differentiation direction: `∇_ν V^λ = ∂_ν V^λ + Γ^λ_{μν} V^μ`.
//! * Torsion is `T^λ_{μν} = Γ^λ_{μν} − Γ^λ_{νμ}`.
//! * A tetrad `e^a_μ` is stored row-major with the frame index `a` first.
//! * The Lorentzian signature is `(−, +, …, +)`.

mod ops;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

pub use ops::*;

use crate::chart::Chart;
use crate::expr::{Expr, Func};
use crate::jet::{condition_number, Jet1, Jet2, Truncate, MAX_CONDITION};
use crate::tensor::Tensor;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Signature {
    Lorentzian,
    Euclidean,
}

impl Signature {
    /// Diagonal of the flat model metric `η`.
    pub fn eta(self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|a| match self {
                Signature::Lorentzian if a == 0 => -1.0,
                _ => 1.0,
            })
            .collect()
    }

    fn negative_count(self) -> usize {
        match self {
            Signature::Lorentzian => 1,
            Signature::Euclidean => 0,
        }
    }
}

pub(crate) fn ensure_same_chart(a: &Chart, b: &Chart) -> Result<()> {
    if a.same_coordinates(b) {
        Ok(())
    } else {
        Err(Error::ChartMismatch(format!(
            "coordinates {:?} vs {:?}",
            a.coord_names(),
            b.coord_names()
        )))
    }
}

fn eval_all(exprs: &[Expr], x: &[f64]) -> Result<Vec<Jet2>> {
    exprs
        .iter()
        .map(|e| e.eval_jet(x).map_err(Error::from))
        .collect()
}

fn sym_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

fn product_or_zero(a: &Expr, b: &Expr) -> Option<Expr> {
    if a.is_zero() || b.is_zero() {
        None
    } else {
        Some(a.clone() * b.clone())
    }
}

/// Sum of terms, `0` when empty.
fn sum_exprs(terms: impl IntoIterator<Item = Expr>) -> Expr {
    terms
        .into_iter()
        .reduce(|acc, t| acc + t)
        .unwrap_or(Expr::Num(0.0))
}

/// Metric `g_{μν}`; only the upper triangle is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    chart: Chart,
    upper: Vec<Expr>,
    signature: Signature,
}

impl MetricSpec {
    /// `upper` lists `g_{μν}` for `μ ≤ ν` in row order.
    pub fn from_upper(chart: Chart, upper: Vec<Expr>, signature: Signature) -> Result<Self> {
        let n = chart.dim();
        if upper.len() != n * (n + 1) / 2 {
            return Err(Error::Validation(format!(
                "metric needs {} independent components, got {}",
                n * (n + 1) / 2,
                upper.len()
            )));
        }
        Ok(MetricSpec {
            chart,
            upper,
            signature,
        })
    }

    pub fn diagonal(chart: Chart, diag: Vec<Expr>, signature: Signature) -> Result<Self> {
        let n = chart.dim();
        let mut upper = vec![Expr::Num(0.0); n * (n + 1) / 2];
        for (i, d) in diag.into_iter().enumerate() {
            upper[sym_index(n, i, i)] = d;
        }
        MetricSpec::from_upper(chart, upper, signature)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn component(&self, mu: usize, nu: usize) -> &Expr {
        &self.upper[sym_index(self.dim(), mu, nu)]
    }

    /// `g_{μν}` as order-2 jets, a `(0, 2)` tensor.
    pub fn eval(&self, x: &[f64]) -> Result<Tensor<Jet2>> {
        let n = self.dim();
        let upper = eval_all(&self.upper, x)?;
        Ok(Tensor::from_fn(n, 0, 2, |i| {
            upper[sym_index(n, i[0], i[1])].clone()
        }))
    }

    pub fn eval_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let upper: Vec<f64> = self
            .upper
            .iter()
            .map(|e| e.eval::<f64>(x))
            .collect::<std::result::Result<_, _>>()?;
        Ok((0..n * n)
            .map(|k| upper[sym_index(n, k / n, k % n)])
            .collect())
    }

    /// Checks invertibility and the declared eigenvalue signs at `x`.
    pub fn validate_at(&self, x: &[f64]) -> Result<()> {
        let n = self.dim();
        let values = self.eval_values(x)?;
        let cond = condition_number(&values, n);
        if !(cond <= MAX_CONDITION) {
            return Err(Error::Validation(format!(
                "metric is singular at {x:?} (condition estimate {cond:e})"
            )));
        }
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, &values));
        let negatives = eig.eigenvalues.iter().filter(|&&l| l < 0.0).count();
        if negatives != self.signature.negative_count() {
            return Err(Error::Validation(format!(
                "metric signature at {x:?} has {negatives} negative eigenvalues, expected {} ({:?})",
                self.signature.negative_count(),
                self.signature
            )));
        }
        Ok(())
    }
}

/// Affine connection `Γ^λ_{μν}`, all `n³` components.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionSpec {
    chart: Chart,
    components: Vec<Expr>,
}

impl ConnectionSpec {
    pub fn new(chart: Chart, components: Vec<Expr>) -> Result<Self> {
        let n = chart.dim();
        if components.len() != n * n * n {
            return Err(Error::Validation(format!(
                "connection needs {} components, got {}",
                n * n * n,
                components.len()
            )));
        }
        Ok(ConnectionSpec { chart, components })
    }

    pub fn zero(chart: Chart) -> Self {
        let n = chart.dim();
        ConnectionSpec {
            chart,
            components: vec![Expr::Num(0.0); n * n * n],
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn component(&self, l: usize, m: usize, n_: usize) -> &Expr {
        let n = self.chart.dim();
        &self.components[(l * n + m) * n + n_]
    }

    pub fn eval(&self, x: &[f64]) -> Result<Tensor<Jet2>> {
        let n = self.chart.dim();
        Ok(Tensor::from_vec(n, 1, 2, eval_all(&self.components, x)?))
    }
}

/// Where torsion components come from.
#[derive(Debug, Clone, PartialEq)]
pub enum TorsionSource {
    /// `T^λ_{μν}` for `μ < ν`, indexed `[λ][pair(μ, ν)]`.
    Components(Vec<Expr>),
    /// Antisymmetric part of a given connection.
    Connection(ConnectionSpec),
    /// Torsion of the Weitzenböck connection of a tetrad.
    Tetrad(TetradSpec),
}

/// Torsion `T^λ_{μν} = −T^λ_{νμ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionSpec {
    chart: Chart,
    source: TorsionSource,
}

impl TorsionSpec {
    pub fn from_components(chart: Chart, components: Vec<Expr>) -> Result<Self> {
        let n = chart.dim();
        let expected = n * n * (n - 1) / 2;
        if components.len() != expected {
            return Err(Error::Validation(format!(
                "torsion needs {expected} components, got {}",
                components.len()
            )));
        }
        Ok(TorsionSpec {
            chart,
            source: TorsionSource::Components(components),
        })
    }

    pub fn zero(chart: Chart) -> Self {
        let n = chart.dim();
        TorsionSpec {
            source: TorsionSource::Components(vec![Expr::Num(0.0); n * n * (n - 1) / 2]),
            chart,
        }
    }

    pub fn from_connection(gamma: ConnectionSpec) -> Self {
        TorsionSpec {
            chart: gamma.chart().clone(),
            source: TorsionSource::Connection(gamma),
        }
    }

    pub fn from_tetrad(tetrad: TetradSpec) -> Self {
        TorsionSpec {
            chart: tetrad.chart().clone(),
            source: TorsionSource::Tetrad(tetrad),
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn source(&self) -> &TorsionSource {
        &self.source
    }

    /// Index into the stored component list for `T^λ_{μν}`, `μ < ν`.
    pub fn component_slot(n: usize, l: usize, m: usize, nu: usize) -> usize {
        l * (n * (n - 1) / 2) + pair_index(n, m, nu)
    }

    /// `T^λ_{μν}` as first-order jets, a `(1, 2)` tensor.
    pub fn eval(&self, x: &[f64]) -> Result<Tensor<Jet1>> {
        let n = self.chart.dim();
        match &self.source {
            TorsionSource::Components(exprs) => {
                let stored: Vec<Jet1> = eval_all(exprs, x)?.iter().map(Truncate::lower).collect();
                let zero = Jet1::new(0.0, vec![0.0; n]);
                Ok(Tensor::from_fn(n, 1, 2, |i| {
                    let (l, m, nu) = (i[0], i[1], i[2]);
                    match m.cmp(&nu) {
                        std::cmp::Ordering::Equal => zero.clone(),
                        std::cmp::Ordering::Less => {
                            stored[TorsionSpec::component_slot(n, l, m, nu)].clone()
                        }
                        std::cmp::Ordering::Greater => {
                            -stored[TorsionSpec::component_slot(n, l, nu, m)].clone()
                        }
                    }
                }))
            }
            TorsionSource::Connection(gamma) => {
                let g = gamma.eval(x)?.map(Truncate::lower);
                Ok(torsion_of_connection(&g))
            }
            TorsionSource::Tetrad(e) => Ok(torsion_of_connection(&weitzenbock_connection(e, x)?)),
        }
    }
}

/// Tetrad `e^a_μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TetradSpec {
    chart: Chart,
    components: Vec<Expr>,
    signature: Signature,
}

impl TetradSpec {
    pub fn new(chart: Chart, components: Vec<Expr>, signature: Signature) -> Result<Self> {
        let n = chart.dim();
        if components.len() != n * n {
            return Err(Error::Validation(format!(
                "tetrad needs {} components, got {}",
                n * n,
                components.len()
            )));
        }
        Ok(TetradSpec {
            chart,
            components,
            signature,
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn component(&self, a: usize, mu: usize) -> &Expr {
        &self.components[a * self.chart.dim() + mu]
    }

    /// `e^a_μ` as jets, row-major `[a][μ]`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<Jet2>> {
        eval_all(&self.components, x)
    }

    /// `g_{μν} = η_{ab} e^a_μ e^b_ν` as an expression table.
    pub fn metric(&self) -> Result<MetricSpec> {
        let n = self.chart.dim();
        let eta = self.signature.eta(n);
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for mu in 0..n {
            for nu in mu..n {
                let terms = (0..n).filter_map(|a| {
                    let p = product_or_zero(self.component(a, mu), self.component(a, nu))?;
                    Some(if eta[a] < 0.0 { -p } else { p })
                });
                upper.push(sum_exprs(terms));
            }
        }
        MetricSpec::from_upper(self.chart.clone(), upper, self.signature)
    }

    /// Torsion of the Weitzenböck connection.
    pub fn torsion(&self) -> TorsionSpec {
        TorsionSpec::from_tetrad(self.clone())
    }

    pub fn validate_at(&self, x: &[f64]) -> Result<()> {
        let n = self.chart.dim();
        let values: Vec<f64> = self
            .components
            .iter()
            .map(|e| e.eval::<f64>(x))
            .collect::<std::result::Result<_, _>>()?;
        let cond = condition_number(&values, n);
        if !(cond <= MAX_CONDITION) {
            return Err(Error::Validation(format!(
                "tetrad is singular at {x:?} (condition estimate {cond:e})"
            )));
        }
        Ok(())
    }
}

/// Candidate symmetry generator `ξ^μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldSpec {
    chart: Chart,
    components: Vec<Expr>,
}

impl VectorFieldSpec {
    pub fn new(chart: Chart, components: Vec<Expr>) -> Result<Self> {
        if components.len() != chart.dim() {
            return Err(Error::Validation(format!(
                "vector field needs {} components, got {}",
                chart.dim(),
                components.len()
            )));
        }
        Ok(VectorFieldSpec { chart, components })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<Jet2>> {
        eval_all(&self.components, x)
    }

    /// `a·self + b·other`, component-wise as expressions.
    pub fn combine(&self, a: f64, other: &VectorFieldSpec, b: f64) -> Result<VectorFieldSpec> {
        ensure_same_chart(&self.chart, &other.chart)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(p, q)| Expr::Num(a) * p.clone() + Expr::Num(b) * q.clone())
            .collect();
        VectorFieldSpec::new(self.chart.clone(), components)
    }
}

/// Finsler length function `F(x, y)` over coordinates and velocities.
#[derive(Debug, Clone, PartialEq)]
pub struct FinslerSpec {
    chart: Chart,
    function: Expr,
}

/// Scales used for the degree-one homogeneity test.
pub const HOMOGENEITY_SCALES: [f64; 3] = [0.5, 2.0, 3.7];

impl FinslerSpec {
    /// `function` must be parsed against [`Chart::tangent_scope`].
    pub fn new(chart: Chart, function: Expr) -> Result<Self> {
        if let Some(max) = function.max_var_index() {
            if max >= 2 * chart.dim() {
                return Err(Error::Validation(
                    "Finsler function uses unknown variables".into(),
                ));
            }
        }
        Ok(FinslerSpec { chart, function })
    }

    /// `F = sqrt(|g_{μν}(x) y^μ y^ν|)`.
    pub fn from_metric(g: &MetricSpec) -> Result<Self> {
        let n = g.dim();
        let scope = g.chart().tangent_scope();
        let vel = |i: usize| Expr::var(&scope.vars[n + i], n + i);
        let mut terms = Vec::new();
        for mu in 0..n {
            for nu in mu..n {
                let c = g.component(mu, nu);
                if c.is_zero() {
                    continue;
                }
                let coef = if mu == nu {
                    c.clone()
                } else {
                    Expr::Num(2.0) * c.clone()
                };
                terms.push(coef * vel(mu) * vel(nu));
            }
        }
        let quad = sum_exprs(terms);
        FinslerSpec::new(
            g.chart().clone(),
            Expr::call(Func::Sqrt, Expr::call(Func::Abs, quad)),
        )
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn function(&self) -> &Expr {
        &self.function
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let point: Vec<f64> = x.iter().chain(y).copied().collect();
        Ok(self.function.eval::<f64>(&point)?)
    }

    /// Checks `F(x, s·y) = s·F(x, y)` for the test scales at `(x, y)`.
    pub fn check_homogeneity_at(&self, x: &[f64], y: &[f64]) -> Result<()> {
        let f = self.value(x, y)?;
        for s in HOMOGENEITY_SCALES {
            let ys: Vec<f64> = y.iter().map(|v| v * s).collect();
            let fs = self.value(x, &ys)?;
            let rel = (fs - s * f).abs() / (s * f).abs().max(f64::MIN_POSITIVE);
            if rel >= 1e-9 {
                return Err(Error::Homogeneity(format!(
                    "F(x, {s}·y) differs from {s}·F(x, y) by relative {rel:e} at x={x:?}, y={y:?}"
                )));
            }
        }
        Ok(())
    }
}

/// Riemann–Cartan data: metric plus torsion.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannCartanSpec {
    pub metric: MetricSpec,
    pub torsion: TorsionSpec,
}

impl RiemannCartanSpec {
    pub fn new(metric: MetricSpec, torsion: TorsionSpec) -> Result<Self> {
        ensure_same_chart(metric.chart(), torsion.chart())?;
        Ok(RiemannCartanSpec { metric, torsion })
    }
}
