use super::{per_point, point_seed, sup, CheckConfig, CheckReport, Mode, Residual};
use crate::cartan::{
    lie_derivative_cartan_with, sample_frames, tangency_residual, tangent_basis_with, FramePoint,
};
use crate::fields::VectorFieldSpec;
use crate::geometry::GeometrySpec;
use crate::jet::Jet1;
use crate::tensor::Tensor;
use crate::Result;

const FRAME_SALT: u64 = 0x6672_616d_6573;

/// Tangency of `ξ̄` to the structure bundle and `ℒ_ξ̄A = 0` on it.
pub fn check_cartan_invariance(
    geom: &GeometrySpec,
    xi: &VectorFieldSpec,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    super::check(geom, xi, Mode::Cartan, cfg)
}

struct FrameResiduals {
    tangency: f64,
    lie_a: f64,
    scale: f64,
}

fn at_frame(
    geom: &GeometrySpec,
    connection: &Tensor<Jet1>,
    xi: &VectorFieldSpec,
    p: &FramePoint,
) -> Result<FrameResiduals> {
    let tangency = match geom.metric() {
        Some(g) => sup(tangency_residual(g, xi, p)?),
        None => 0.0,
    };
    let basis = tangent_basis_with(geom, connection, p)?;
    let (value, lie) = lie_derivative_cartan_with(geom, connection, xi, p)?;
    let scale = sup(basis.iter().flat_map(|v| {
        let (e, h) = value.apply(v);
        e.into_iter().chain(h)
    }));
    Ok(FrameResiduals {
        tangency,
        lie_a: sup(lie.restrict(&basis).into_iter().flatten()),
        scale,
    })
}

pub(super) fn residuals(
    geom: &GeometrySpec,
    xi: &VectorFieldSpec,
    cfg: &CheckConfig,
    points: &[Vec<f64>],
) -> Result<Vec<(&'static str, Residual)>> {
    let per = per_point(points, |i, x| {
        let frames = sample_frames(
            geom.metric(),
            x,
            cfg.frames,
            point_seed(cfg.seed, FRAME_SALT, i),
        )?;
        let connection = geom.connection(x)?;
        frames
            .iter()
            .map(|p| at_frame(geom, &connection, xi, p))
            .collect::<Result<Vec<_>>>()
    })?;
    let all = per.iter().flatten();
    let tangency = sup(all.clone().map(|r| r.tangency));
    let lie_a = sup(all.clone().map(|r| r.lie_a));
    let scale = sup(all.map(|r| r.scale));
    Ok(vec![
        ("tangency", Residual::unscaled(tangency)),
        ("lie_A", Residual::scaled(lie_a, scale)),
    ])
}
