use serde::Serialize;

use super::{per_point, sup, CheckConfig, CheckReport, Mode, Residual};
use crate::fields::{
    lie_derivative_coframe, lie_derivative_connection, lie_derivative_tensor, ConnectionField,
    ConnectionSpec, MetricSpec, RiemannCartanSpec, TensorField, TetradSpec, TorsionSpec,
    VectorFieldSpec,
};
use crate::geometry::GeometrySpec;
use crate::jet::{jet_matrix_inverse, Truncate};
use crate::{Error, Result};

/// Sample-mean `λ^a_b` of `ℒ_ξ e = λ e` with its spreads.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LorentzLambda {
    pub n: usize,
    /// Row-major `λ^a_b`.
    pub mean: Vec<f64>,
    /// Max pairwise sup-difference across samples.
    pub constancy_spread: f64,
    /// Max sup-difference of any sample from the mean.
    pub spread_from_mean: f64,
}

impl LorentzLambda {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.mean[a * self.n + b]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.mean.chunks(self.n).map(<[f64]>::to_vec).collect()
    }
}

fn run(geom: GeometrySpec, xi: &VectorFieldSpec, cfg: &CheckConfig) -> Result<CheckReport> {
    super::check(&geom, xi, Mode::Direct, cfg)
}

/// `ℒ_ξΓ = 0`.
pub fn check_affine(
    gamma: &ConnectionSpec,
    xi: &VectorFieldSpec,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    run(GeometrySpec::Affine(gamma.clone()), xi, cfg)
}

/// `ℒ_ξg = 0`.
pub fn check_riemannian(
    g: &MetricSpec,
    xi: &VectorFieldSpec,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    run(GeometrySpec::Riemannian(g.clone()), xi, cfg)
}

/// `ℒ_ξg = 0` and `ℒ_ξT = 0`.
pub fn check_riemann_cartan(
    g: &MetricSpec,
    t: &TorsionSpec,
    xi: &VectorFieldSpec,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let rc = RiemannCartanSpec::new(g.clone(), t.clone())?;
    run(GeometrySpec::RiemannCartan(rc), xi, cfg)
}

/// `ℒ_ξe = λe` with `λ` constant and in the Lorentz algebra.
pub fn check_weitzenbock(
    e: &TetradSpec,
    xi: &VectorFieldSpec,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    run(GeometrySpec::Weitzenbock(e.clone()), xi, cfg)
}

type Named = Vec<(&'static str, Residual)>;

/// Per point: (sup of the Lie derivative, sup of the field itself).
fn tensor_condition(
    name: &'static str,
    points: &[Vec<f64>],
    f: impl Fn(&[f64]) -> Result<(f64, f64)> + Sync,
) -> Result<(&'static str, Residual)> {
    let per = per_point(points, |_, x| f(x))?;
    let raw = sup(per.iter().map(|p| p.0));
    let scale = sup(per.iter().map(|p| p.1));
    Ok((name, Residual::scaled(raw, scale)))
}

fn lie_of_tensor(
    name: &'static str,
    field: &(dyn TensorField + Sync),
    xi: &VectorFieldSpec,
    points: &[Vec<f64>],
) -> Result<(&'static str, Residual)> {
    tensor_condition(name, points, |x| {
        let lie = lie_derivative_tensor(field, xi, x)?;
        let own = field.eval_jet1(x)?.values();
        Ok((lie.sup_norm(), own.sup_norm()))
    })
}

fn lie_of_connection(
    field: &(dyn ConnectionField + Sync),
    xi: &VectorFieldSpec,
    points: &[Vec<f64>],
) -> Result<(&'static str, Residual)> {
    tensor_condition("lie_Gamma", points, |x| {
        let lie = lie_derivative_connection(field, xi, x)?;
        let own = field.connection(x)?.values();
        Ok((lie.sup_norm(), own.sup_norm()))
    })
}

pub(super) fn residuals(
    geom: &GeometrySpec,
    xi: &VectorFieldSpec,
    cfg: &CheckConfig,
    points: &[Vec<f64>],
) -> Result<(Named, Option<LorentzLambda>)> {
    match geom {
        GeometrySpec::Affine(gamma) => Ok((vec![lie_of_connection(gamma, xi, points)?], None)),
        GeometrySpec::Riemannian(g) => Ok((vec![lie_of_tensor("lie_g", g, xi, points)?], None)),
        GeometrySpec::RiemannCartan(rc) => Ok((
            vec![
                lie_of_tensor("lie_g", &rc.metric, xi, points)?,
                lie_of_tensor("lie_T", &rc.torsion, xi, points)?,
            ],
            None,
        )),
        GeometrySpec::Weitzenbock(e) => {
            let lambda = estimate_lambda(e, xi, points)?;
            let eta = e.signature().eta(lambda.n);
            let antisym = sup((0..lambda.n * lambda.n).map(|k| {
                let (a, b) = (k / lambda.n, k % lambda.n);
                eta[a] * lambda.get(a, b) + eta[b] * lambda.get(b, a)
            }));
            let residuals = vec![
                (
                    "lambda_constancy",
                    Residual::unscaled(lambda.constancy_spread),
                ),
                ("lambda_antisymmetry", Residual::unscaled(antisym)),
            ];
            Ok((residuals, Some(lambda)))
        }
        GeometrySpec::Finsler(f) => Ok((vec![super::finsler::residual(f, xi, cfg, points)?], None)),
    }
}

/// `λ(x)^a_b = (ℒ_ξe)^a_μ E^μ_b` at every point.
pub(super) fn lambda_at(e: &TetradSpec, xi: &VectorFieldSpec, x: &[f64]) -> Result<Vec<f64>> {
    crate::fields::ensure_same_chart(e.chart(), xi.chart())?;
    let n = e.chart().dim();
    let jets = e.eval(x)?;
    let xi_jets = xi.eval(x)?;
    let lie = lie_derivative_coframe(&jets, &xi_jets, n);
    let values: Vec<f64> = jets.iter().map(|j| j.lower().value).collect();
    let inv = jet_matrix_inverse(&values, n).map_err(|source| Error::Singular {
        what: "tetrad",
        source,
    })?;
    Ok((0..n * n)
        .map(|k| {
            let (a, b) = (k / n, k % n);
            (0..n)
                .map(|mu| lie[a * n + mu].value * inv[mu * n + b])
                .sum()
        })
        .collect())
}

fn estimate_lambda(
    e: &TetradSpec,
    xi: &VectorFieldSpec,
    points: &[Vec<f64>],
) -> Result<LorentzLambda> {
    let n = e.chart().dim();
    let per = per_point(points, |_, x| lambda_at(e, xi, x))?;
    let count = per.len() as f64;
    let mean: Vec<f64> = (0..n * n)
        .map(|k| per.iter().map(|l| l[k]).sum::<f64>() / count)
        .collect();
    // max over entries of (max − min) is the max pairwise sup-difference
    let constancy_spread = (0..n * n)
        .map(|k| {
            let (lo, hi) = per
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| {
                    (lo.min(l[k]), hi.max(l[k]))
                });
            hi - lo
        })
        .fold(0.0, f64::max);
    let spread_from_mean = per
        .iter()
        .flat_map(|l| l.iter().zip(&mean).map(|(v, m)| (v - m).abs()))
        .fold(0.0, f64::max);
    Ok(LorentzLambda {
        n,
        mean,
        constancy_spread,
        spread_from_mean,
    })
}
