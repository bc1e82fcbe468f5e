use serde::Serialize;

use crate::cartan::ModelDescriptor;
use crate::chart::Chart;
use crate::fields::{
    ConnectionField, ConnectionSpec, FinslerSpec, MetricSpec, RiemannCartanSpec, TetradSpec,
};
use crate::jet::Jet1;
use crate::tensor::Tensor;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    Affine,
    Riemannian,
    RiemannCartan,
    Weitzenbock,
    Finsler,
}

impl GeometryKind {
    pub const ALL: [GeometryKind; 5] = [
        GeometryKind::Affine,
        GeometryKind::Riemannian,
        GeometryKind::RiemannCartan,
        GeometryKind::Weitzenbock,
        GeometryKind::Finsler,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeometryKind::Affine => "affine",
            GeometryKind::Riemannian => "riemannian",
            GeometryKind::RiemannCartan => "riemann_cartan",
            GeometryKind::Weitzenbock => "weitzenbock",
            GeometryKind::Finsler => "finsler",
        }
    }

    pub fn from_name(name: &str) -> Option<GeometryKind> {
        GeometryKind::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Kinds with a hard-coded Cartan model.
    pub fn has_cartan_model(self) -> bool {
        matches!(
            self,
            GeometryKind::Affine | GeometryKind::Riemannian | GeometryKind::RiemannCartan
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySpec {
    Affine(ConnectionSpec),
    Riemannian(MetricSpec),
    RiemannCartan(RiemannCartanSpec),
    Weitzenbock(TetradSpec),
    Finsler(FinslerSpec),
}

impl GeometrySpec {
    pub fn kind(&self) -> GeometryKind {
        match self {
            GeometrySpec::Affine(_) => GeometryKind::Affine,
            GeometrySpec::Riemannian(_) => GeometryKind::Riemannian,
            GeometrySpec::RiemannCartan(_) => GeometryKind::RiemannCartan,
            GeometrySpec::Weitzenbock(_) => GeometryKind::Weitzenbock,
            GeometrySpec::Finsler(_) => GeometryKind::Finsler,
        }
    }

    pub fn chart(&self) -> &Chart {
        match self {
            GeometrySpec::Affine(c) => c.chart(),
            GeometrySpec::Riemannian(g) => g.chart(),
            GeometrySpec::RiemannCartan(rc) => rc.metric.chart(),
            GeometrySpec::Weitzenbock(e) => e.chart(),
            GeometrySpec::Finsler(f) => f.chart(),
        }
    }

    /// The metric whose orthonormal frames form the structure bundle, if any.
    pub fn metric(&self) -> Option<&MetricSpec> {
        match self {
            GeometrySpec::Riemannian(g) => Some(g),
            GeometrySpec::RiemannCartan(rc) => Some(&rc.metric),
            _ => None,
        }
    }

    /// Cartan model: affine for affine geometry, Poincaré for metric ones.
    pub fn model(&self) -> Result<ModelDescriptor> {
        let n = self.chart().dim();
        match self {
            GeometrySpec::Affine(_) => Ok(ModelDescriptor::affine(n)),
            GeometrySpec::Riemannian(g) => Ok(ModelDescriptor::poincare(n, g.signature())),
            GeometrySpec::RiemannCartan(rc) => {
                Ok(ModelDescriptor::poincare(n, rc.metric.signature()))
            }
            other => Err(Error::Unsupported(format!(
                "no Cartan model for {} geometry",
                other.kind().name()
            ))),
        }
    }

    /// The connection entering the Cartan connection's `h` part.
    pub fn connection(&self, x: &[f64]) -> Result<Tensor<Jet1>> {
        match self {
            GeometrySpec::Affine(c) => c.connection(x),
            GeometrySpec::Riemannian(g) => g.connection(x),
            GeometrySpec::RiemannCartan(rc) => rc.connection(x),
            other => Err(Error::Unsupported(format!(
                "no Cartan connection for {} geometry",
                other.kind().name()
            ))),
        }
    }
}
