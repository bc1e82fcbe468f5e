use super::{
    ensure_same_chart, ConnectionSpec, MetricSpec, RiemannCartanSpec, TetradSpec, TorsionSpec,
    VectorFieldSpec,
};
use crate::chart::Chart;
use crate::jet::{jet_matrix_inverse, Jet1, Jet2, Scalar, SingularMatrix, Truncate};
use crate::tensor::Tensor;
use crate::{Error, Result};

/// A tensor field that can be sampled with one derivative order.
pub trait TensorField {
    fn chart(&self) -> &Chart;

    fn eval_jet1(&self, x: &[f64]) -> Result<Tensor<Jet1>>;
}

impl TensorField for MetricSpec {
    fn chart(&self) -> &Chart {
        MetricSpec::chart(self)
    }

    fn eval_jet1(&self, x: &[f64]) -> Result<Tensor<Jet1>> {
        Ok(self.eval(x)?.map(Truncate::lower))
    }
}

impl TensorField for TorsionSpec {
    fn chart(&self) -> &Chart {
        TorsionSpec::chart(self)
    }

    fn eval_jet1(&self, x: &[f64]) -> Result<Tensor<Jet1>> {
        self.eval(x)
    }
}

/// A field that yields a connection with first derivatives.
pub trait ConnectionField {
    fn chart(&self) -> &Chart;

    fn connection(&self, x: &[f64]) -> Result<Tensor<Jet1>>;
}

impl ConnectionField for ConnectionSpec {
    fn chart(&self) -> &Chart {
        ConnectionSpec::chart(self)
    }

    fn connection(&self, x: &[f64]) -> Result<Tensor<Jet1>> {
        Ok(self.eval(x)?.map(Truncate::lower))
    }
}

/// Levi-Civita connection of the metric.
impl ConnectionField for MetricSpec {
    fn chart(&self) -> &Chart {
        MetricSpec::chart(self)
    }

    fn connection(&self, x: &[f64]) -> Result<Tensor<Jet1>> {
        levi_civita(self, x)
    }
}

/// Metric-compatible connection with the prescribed torsion.
impl ConnectionField for RiemannCartanSpec {
    fn chart(&self) -> &Chart {
        self.metric.chart()
    }

    fn connection(&self, x: &[f64]) -> Result<Tensor<Jet1>> {
        connection_from_metric_torsion(&self.metric, &self.torsion, x)
    }
}

fn singular(what: &'static str) -> impl FnOnce(SingularMatrix) -> Error {
    move |source| Error::Singular { what, source }
}

/// Inverse metric `g^{μν}` as jets.
pub fn inverse_metric<T: Scalar>(g: &Tensor<T>) -> std::result::Result<Tensor<T>, SingularMatrix> {
    let n = g.dim();
    let inv = jet_matrix_inverse(g.data(), n)?;
    Ok(Tensor::from_vec(n, 2, 0, inv))
}

/// Christoffel symbols `Γ^λ_{μν} = ½ g^{λσ}(∂_μ g_{σν} + ∂_ν g_{σμ} − ∂_σ g_{μν})`
/// from order-2 metric jets.
pub fn christoffel(g: &Tensor<Jet2>) -> std::result::Result<Tensor<Jet1>, SingularMatrix> {
    let n = g.dim();
    let ginv = inverse_metric(&g.map(Truncate::lower))?;
    // dg[σ, ν, μ] = ∂_μ g_{σν}
    let dg = Tensor::from_fn(n, 0, 3, |i| g.get(&[i[0], i[1]]).partial(i[2]));
    let lowered = Tensor::from_fn(n, 0, 3, |i| {
        let (s, m, nu) = (i[0], i[1], i[2]);
        (dg.get(&[s, nu, m]).clone() + dg.get(&[s, m, nu]).clone() - dg.get(&[m, nu, s]).clone())
            .scale(0.5)
    });
    Ok(Tensor::from_fn(n, 1, 2, |i| {
        let (l, m, nu) = (i[0], i[1], i[2]);
        (1..n).fold(
            ginv.get(&[l, 0]).clone() * lowered.get(&[0, m, nu]).clone(),
            |acc, s| acc + ginv.get(&[l, s]).clone() * lowered.get(&[s, m, nu]).clone(),
        )
    }))
}

/// Levi-Civita connection of `g` at `x`, with first derivatives.
pub fn levi_civita(g: &MetricSpec, x: &[f64]) -> Result<Tensor<Jet1>> {
    christoffel(&g.eval(x)?).map_err(singular("metric"))
}

/// `T^λ_{μν} = Γ^λ_{μν} − Γ^λ_{νμ}`.
pub fn torsion_of_connection<T: Scalar>(gamma: &Tensor<T>) -> Tensor<T> {
    Tensor::from_fn(gamma.dim(), 1, 2, |i| {
        gamma.get(&[i[0], i[1], i[2]]).clone() - gamma.get(&[i[0], i[2], i[1]]).clone()
    })
}

/// Metric-compatible connection `Γ = Γ_LC + K` with torsion `t`, where
/// `K_{σμν} = ½(T_{σμν} − T_{μσν} − T_{νσμ})` and `T_{σμν} = g_{σρ} T^ρ_{μν}`.
pub fn metric_torsion_connection(
    g: &Tensor<Jet2>,
    t: &Tensor<Jet1>,
) -> std::result::Result<Tensor<Jet1>, SingularMatrix> {
    let n = g.dim();
    let lc = christoffel(g)?;
    let g1 = g.map(Truncate::lower);
    let ginv = inverse_metric(&g1)?;
    let lower_first = |s: usize, m: usize, nu: usize| -> Jet1 {
        (1..n).fold(
            g1.get(&[s, 0]).clone() * t.get(&[0, m, nu]).clone(),
            |acc, r| acc + g1.get(&[s, r]).clone() * t.get(&[r, m, nu]).clone(),
        )
    };
    let t_low = Tensor::from_fn(n, 0, 3, |i| lower_first(i[0], i[1], i[2]));
    let k_low = Tensor::from_fn(n, 0, 3, |i| {
        let (s, m, nu) = (i[0], i[1], i[2]);
        (t_low.get(&[s, m, nu]).clone()
            - t_low.get(&[m, s, nu]).clone()
            - t_low.get(&[nu, s, m]).clone())
        .scale(0.5)
    });
    Ok(Tensor::from_fn(n, 1, 2, |i| {
        let (l, m, nu) = (i[0], i[1], i[2]);
        (0..n).fold(lc.get(&[l, m, nu]).clone(), |acc, s| {
            acc + ginv.get(&[l, s]).clone() * k_low.get(&[s, m, nu]).clone()
        })
    }))
}

/// The unique metric-compatible connection of `g` whose torsion is `t`.
pub fn connection_from_metric_torsion(
    g: &MetricSpec,
    t: &TorsionSpec,
    x: &[f64],
) -> Result<Tensor<Jet1>> {
    ensure_same_chart(g.chart(), t.chart())?;
    metric_torsion_connection(&g.eval(x)?, &t.eval(x)?).map_err(singular("metric"))
}

/// `Γ^λ_{μν} = E^λ_a ∂_ν e^a_μ` from tetrad jets `[a][μ]`.
pub fn weitzenbock_from_jets(
    e: &[Jet2],
    n: usize,
) -> std::result::Result<Tensor<Jet1>, SingularMatrix> {
    let lowered: Vec<Jet1> = e.iter().map(Truncate::lower).collect();
    // inv[μ][a] = E^μ_a
    let inv = jet_matrix_inverse(&lowered, n)?;
    Ok(Tensor::from_fn(n, 1, 2, |i| {
        let (l, m, nu) = (i[0], i[1], i[2]);
        (1..n).fold(inv[l * n].clone() * e[m].partial(nu), |acc, a| {
            acc + inv[l * n + a].clone() * e[a * n + m].partial(nu)
        })
    }))
}

pub fn weitzenbock_connection(e: &TetradSpec, x: &[f64]) -> Result<Tensor<Jet1>> {
    weitzenbock_from_jets(&e.eval(x)?, e.chart().dim()).map_err(singular("tetrad"))
}

/// Lie derivative of an `(r, s)` tensor from its jets and those of `ξ`:
///
/// `ℒ_ξ S = ξ^ρ ∂_ρ S − Σ_upper (∂_ρ ξ^a) S^{..ρ..} + Σ_lower (∂_b ξ^ρ) S_{..ρ..}`.
///
/// The result loses one derivative order.
pub fn lie_derivative_components<J: Truncate>(s: &Tensor<J>, xi: &[J]) -> Tensor<J::Lower> {
    let n = s.dim();
    let (upper, lower) = s.rank();
    let xi0: Vec<J::Lower> = xi.iter().map(Truncate::lower).collect();
    // dxi[a * n + b] = ∂_b ξ^a
    let dxi: Vec<J::Lower> = (0..n * n).map(|k| xi[k / n].partial(k % n)).collect();
    Tensor::from_fn(n, upper, lower, |idx| {
        let mut acc = (1..n).fold(xi0[0].clone() * s.get(idx).partial(0), |acc, r| {
            acc + xi0[r].clone() * s.get(idx).partial(r)
        });
        let mut moved = idx.to_vec();
        for slot in 0..upper + lower {
            let orig = idx[slot];
            for r in 0..n {
                moved[slot] = r;
                let comp = s.get(&moved).lower();
                if slot < upper {
                    acc = acc - dxi[orig * n + r].clone() * comp;
                } else {
                    acc = acc + dxi[r * n + orig].clone() * comp;
                }
            }
            moved[slot] = orig;
        }
        acc
    })
}

/// Lie derivative of a tensor field along `ξ` at `x`.
pub fn lie_derivative_tensor(
    field: &dyn TensorField,
    xi: &VectorFieldSpec,
    x: &[f64],
) -> Result<Tensor<f64>> {
    ensure_same_chart(field.chart(), xi.chart())?;
    let s = field.eval_jet1(x)?;
    let xi1: Vec<Jet1> = xi.eval(x)?.iter().map(Truncate::lower).collect();
    Ok(lie_derivative_components(&s, &xi1))
}

/// `(ℒ_ξΓ)^λ_{μν}`: the tensorial part plus the inhomogeneous `∂_μ∂_ν ξ^λ`.
pub fn lie_derivative_connection_components(gamma: &Tensor<Jet1>, xi: &[Jet2]) -> Tensor<f64> {
    let xi1: Vec<Jet1> = xi.iter().map(Truncate::lower).collect();
    let tensorial = lie_derivative_components(gamma, &xi1);
    Tensor::from_fn(gamma.dim(), 1, 2, |i| {
        tensorial.get(i) + xi[i[0]].hess_at(i[1], i[2])
    })
}

pub fn lie_derivative_connection(
    gamma: &dyn ConnectionField,
    xi: &VectorFieldSpec,
    x: &[f64],
) -> Result<Tensor<f64>> {
    ensure_same_chart(gamma.chart(), xi.chart())?;
    Ok(lie_derivative_connection_components(
        &gamma.connection(x)?,
        &xi.eval(x)?,
    ))
}

/// `∇_λ g_{μν} = ∂_λ g_{μν} − Γ^ρ_{μλ} g_{ρν} − Γ^ρ_{νλ} g_{μρ}` at `[λ, μ, ν]`.
pub fn metricity_components<T: Scalar>(g: &Tensor<Jet1>, gamma: &Tensor<T>) -> Tensor<f64> {
    let n = g.dim();
    Tensor::from_fn(n, 0, 3, |i| {
        let (l, m, nu) = (i[0], i[1], i[2]);
        let mut acc = g.get(&[m, nu]).partial(l);
        for r in 0..n {
            acc -= gamma.get(&[r, m, l]).value() * g.get(&[r, nu]).value;
            acc -= gamma.get(&[r, nu, l]).value() * g.get(&[m, r]).value;
        }
        acc
    })
}

pub fn metricity_residual<T: Scalar>(
    g: &MetricSpec,
    gamma: &Tensor<T>,
    x: &[f64],
) -> Result<Tensor<f64>> {
    Ok(metricity_components(&g.eval_jet1(x)?, gamma))
}

/// `(ℒ_ξ e)^a_μ = ξ^ν ∂_ν e^a_μ + e^a_ν ∂_μ ξ^ν`, each `e^a` treated as a
/// covector. Rows are frame indices.
pub fn lie_derivative_coframe<J: Truncate>(e: &[J], xi: &[J], n: usize) -> Vec<J::Lower> {
    (0..n)
        .flat_map(|a| {
            let row = Tensor::from_vec(n, 0, 1, e[a * n..(a + 1) * n].to_vec());
            lie_derivative_components(&row, xi).into_data()
        })
        .collect()
}
