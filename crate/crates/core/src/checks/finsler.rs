use rand::Rng;

use super::{per_point, point_seed, CheckConfig, CheckReport, Mode, Residual};
use crate::chart::stream_rng;
use crate::fields::{ensure_same_chart, FinslerSpec, VectorFieldSpec};
use crate::geometry::GeometrySpec;
use crate::jet::{Jet1, Truncate};
use crate::{Error, Result};

const DIRECTION_SALT: u64 = 0x7665_6c6f_6369_7479;
const MIN_LENGTH: f64 = 1e-6;
const RADIUS: (f64, f64) = (0.5, 2.0);
const MAX_DRAWS: usize = 1000;

/// `ℒ_ξ̂F = 0` for the tangent bundle lift `ξ̂`.
pub fn check_finsler(
    f: &FinslerSpec,
    xi: &VectorFieldSpec,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    super::check(&GeometrySpec::Finsler(f.clone()), xi, Mode::Direct, cfg)
}

/// `ξ̂F = ξ^μ ∂F/∂x^μ + y^ν ∂_νξ^μ ∂F/∂y^μ` at `(x, y)`.
pub fn tangent_lift_apply(
    f: &FinslerSpec,
    xi: &VectorFieldSpec,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    ensure_same_chart(f.chart(), xi.chart())?;
    let n = x.len();
    let point: Vec<f64> = x.iter().chain(y).copied().collect();
    let fj: Jet1 = f.function().eval(&point)?;
    let xi_jets: Vec<Jet1> = xi.eval(x)?.iter().map(Truncate::lower).collect();
    let mut acc = 0.0;
    for mu in 0..n {
        let push: f64 = (0..n).map(|nu| y[nu] * xi_jets[mu].grad[nu]).sum();
        acc += xi_jets[mu].value * fj.grad[mu] + push * fj.grad[n + mu];
    }
    Ok(acc)
}

/// Velocities at `x`: uniform direction, radius uniform in `[0.5, 2]`,
/// redrawn where `|F| < 1e-6` or `F` cannot be evaluated.
pub fn sample_directions(
    f: &FinslerSpec,
    x: &[f64],
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    (0..count)
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            for _ in 0..MAX_DRAWS {
                let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if !(1e-2..=1.0).contains(&norm) {
                    continue;
                }
                let radius = rng.gen_range(RADIUS.0..=RADIUS.1);
                let y: Vec<f64> = v.iter().map(|c| c / norm * radius).collect();
                if matches!(f.value(x, &y), Ok(len) if len.abs() >= MIN_LENGTH) {
                    return Ok(y);
                }
            }
            Err(Error::Sampling(format!(
                "no velocity with |F| ≥ {MIN_LENGTH} at {x:?} after {MAX_DRAWS} draws"
            )))
        })
        .collect()
}

pub(super) fn residual(
    f: &FinslerSpec,
    xi: &VectorFieldSpec,
    cfg: &CheckConfig,
    points: &[Vec<f64>],
) -> Result<(&'static str, Residual)> {
    ensure_same_chart(f.chart(), xi.chart())?;
    let per = per_point(points, |i, x| {
        let ys = sample_directions(f, x, cfg.frames, point_seed(cfg.seed, DIRECTION_SALT, i))?;
        ys.iter()
            .map(|y| {
                f.check_homogeneity_at(x, y)?;
                let lift = tangent_lift_apply(f, xi, x, y)?.abs();
                Ok((lift, lift / f.value(x, y)?.abs()))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let all = per.iter().flatten();
    Ok((
        "finsler_lift",
        Residual {
            raw: all.clone().fold(0.0, |m, r| m.max(r.0)),
            normalized: all.fold(0.0, |m, r| m.max(r.1)),
        },
    ))
}
