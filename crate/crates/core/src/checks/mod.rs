//! Symmetry verdicts: the per-geometry Lie derivative conditions, the
//! Cartan-level invariance test, a flow-pullback oracle and the harness
//! comparing the two kinds of verdict.

mod cartan;
mod direct;
mod finsler;
mod harness;
mod oracle;

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use cartan::check_cartan_invariance;
pub use direct::{
    check_affine, check_riemann_cartan, check_riemannian, check_weitzenbock, LorentzLambda,
};
pub use finsler::{check_finsler, sample_directions, tangent_lift_apply};
pub use harness::{equivalence_harness, Agreement, EquivalenceReport, MARGIN_FACTOR};
pub use oracle::{
    flow, flow_pullback_oracle, loglog_slope, oracle_error, oracle_study, OracleStudy,
    CONVERGENCE_TIMES, FLOW_STEPS, ORACLE_MARGIN,
};

use crate::chart::stream_rng;
use crate::fields::VectorFieldSpec;
use crate::geometry::{GeometryKind, GeometrySpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub tolerance: f64,
    /// Base points drawn from the chart domain.
    pub samples: usize,
    /// Frames per base point in Cartan mode; velocity directions per point
    /// for Finsler checks.
    pub frames: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            tolerance: 1e-9,
            samples: 40,
            frames: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Direct,
    Cartan,
    Both,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Direct => "direct",
            Mode::Cartan => "cartan",
            Mode::Both => "both",
        }
    }

    pub fn from_name(name: &str) -> Option<Mode> {
        [Mode::Direct, Mode::Cartan, Mode::Both]
            .into_iter()
            .find(|m| m.name() == name)
    }

    fn direct(self) -> bool {
        self != Mode::Cartan
    }

    fn cartan(self) -> bool {
        self != Mode::Direct
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Symmetric,
    NotSymmetric,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Symmetric => "symmetric",
            Verdict::NotSymmetric => "not_symmetric",
        }
    }
}

/// Sup over samples of a condition's residual, raw and divided by the sup of
/// the field's own components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub raw: f64,
    pub normalized: f64,
}

impl Residual {
    /// `scale` is the sup of the field's components; an identically zero
    /// field leaves the residual unscaled.
    pub fn scaled(raw: f64, scale: f64) -> Residual {
        let normalized = if scale > 0.0 { raw / scale } else { raw };
        Residual { raw, normalized }
    }

    pub fn unscaled(raw: f64) -> Residual {
        Residual {
            raw,
            normalized: raw,
        }
    }
}

pub const RESIDUAL_NAMES: [&str; 8] = [
    "lie_g",
    "lie_T",
    "lie_Gamma",
    "lambda_constancy",
    "lambda_antisymmetry",
    "finsler_lift",
    "tangency",
    "lie_A",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub geometry_kind: GeometryKind,
    pub mode: Mode,
    pub sample_count: usize,
    pub frames_per_point: usize,
    pub residuals: BTreeMap<&'static str, Residual>,
    pub verdict: Verdict,
    pub lambda: Option<LorentzLambda>,
    pub tolerance: f64,
    pub seed: u64,
}

impl CheckReport {
    fn new(
        geometry_kind: GeometryKind,
        mode: Mode,
        cfg: &CheckConfig,
        residuals: BTreeMap<&'static str, Residual>,
        lambda: Option<LorentzLambda>,
    ) -> CheckReport {
        let verdict = if residuals.values().all(|r| r.normalized < cfg.tolerance) {
            Verdict::Symmetric
        } else {
            Verdict::NotSymmetric
        };
        CheckReport {
            geometry_kind,
            mode,
            sample_count: cfg.samples,
            frames_per_point: cfg.frames,
            residuals,
            verdict,
            lambda,
            tolerance: cfg.tolerance,
            seed: cfg.seed,
        }
    }

    pub fn residual(&self, name: &str) -> Option<Residual> {
        self.residuals.get(name).copied()
    }

    /// Largest normalized residual, the quantity compared against the tolerance.
    pub fn max_normalized(&self) -> f64 {
        self.residuals
            .values()
            .fold(0.0, |m, r| m.max(r.normalized))
    }

    pub fn is_symmetric(&self) -> bool {
        self.verdict == Verdict::Symmetric
    }

    /// Verdict, or inconclusive when a residual sits in the margin band or
    /// (in `both` mode) the direct and Cartan conditions disagree.
    pub fn outcome(&self) -> Outcome {
        let tol = self.tolerance;
        let in_band = |r: &Residual| r.normalized >= tol && r.normalized <= MARGIN_FACTOR * tol;
        if self.residuals.values().any(in_band) {
            return Outcome::Inconclusive;
        }
        if self.mode == Mode::Both {
            let passes = |cartan_part: bool| {
                self.residuals
                    .iter()
                    .filter(|(name, _)| CARTAN_RESIDUALS.contains(name) == cartan_part)
                    .all(|(_, r)| r.normalized < tol)
            };
            if passes(true) != passes(false) {
                return Outcome::Inconclusive;
            }
        }
        match self.verdict {
            Verdict::Symmetric => Outcome::Symmetric,
            Verdict::NotSymmetric => Outcome::NotSymmetric,
        }
    }
}

/// Residuals produced by the Cartan-level test.
pub const CARTAN_RESIDUALS: [&str; 2] = ["tangency", "lie_A"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Symmetric,
    NotSymmetric,
    Inconclusive,
}

/// Runs the checks selected by `mode` on one shared set of sample points.
pub fn check(
    geom: &GeometrySpec,
    xi: &VectorFieldSpec,
    mode: Mode,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    crate::fields::ensure_same_chart(geom.chart(), xi.chart())?;
    if cfg.samples == 0 {
        return Err(Error::Validation("sample count must be positive".into()));
    }
    if mode.cartan() {
        geom.model()?;
        if cfg.frames == 0 {
            return Err(Error::Validation("frame count must be positive".into()));
        }
    }
    let points = geom.chart().sample_points(cfg.samples, cfg.seed)?;
    let mut residuals = BTreeMap::new();
    let mut lambda = None;
    if mode.direct() {
        let (r, l) = direct::residuals(geom, xi, cfg, &points)?;
        residuals.extend(r);
        lambda = l;
    }
    if mode.cartan() {
        residuals.extend(cartan::residuals(geom, xi, cfg, &points)?);
    }
    Ok(CheckReport::new(geom.kind(), mode, cfg, residuals, lambda))
}

/// Evaluates `f` at every point in parallel, keeping index order and tagging
/// errors with the offending point.
pub(crate) fn per_point<T: Send>(
    points: &[Vec<f64>],
    f: impl Fn(usize, &[f64]) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    points
        .par_iter()
        .enumerate()
        .map(|(i, x)| f(i, x).map_err(|e| e.at_point(x)))
        .collect()
}

pub(crate) fn sup(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Independent seed for the sub-sampling (frames, directions) at point `i`.
pub(crate) fn point_seed(seed: u64, salt: u64, i: usize) -> u64 {
    stream_rng(seed ^ salt, i as u64).gen()
}
