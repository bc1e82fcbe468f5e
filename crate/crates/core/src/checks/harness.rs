use serde::Serialize;

use super::{check, CheckConfig, CheckReport, Mode};
use crate::fields::VectorFieldSpec;
use crate::geometry::GeometrySpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    Agree,
    Disagree,
    /// A residual fell in `[tol, 10·tol]`, too close to call.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub direct: CheckReport,
    pub cartan: CheckReport,
    pub agreement: Agreement,
}

/// Width of the band above the tolerance in which no agreement is claimed.
pub const MARGIN_FACTOR: f64 = 10.0;

/// Direct and Cartan verdicts on identical samples.
pub fn equivalence_harness(
    geom: &GeometrySpec,
    xi: &VectorFieldSpec,
    cfg: &CheckConfig,
) -> Result<EquivalenceReport> {
    if !geom.kind().has_cartan_model() {
        return Err(Error::Unsupported(format!(
            "no Cartan model for {} geometry",
            geom.kind().name()
        )));
    }
    let direct = check(geom, xi, Mode::Direct, cfg)?;
    let cartan = check(geom, xi, Mode::Cartan, cfg)?;
    let agreement = classify(&direct, &cartan, cfg.tolerance);
    Ok(EquivalenceReport {
        direct,
        cartan,
        agreement,
    })
}

fn classify(a: &CheckReport, b: &CheckReport, tol: f64) -> Agreement {
    let in_band = |r: &CheckReport| {
        let m = r.max_normalized();
        m >= tol && m <= MARGIN_FACTOR * tol
    };
    if in_band(a) || in_band(b) {
        Agreement::Inconclusive
    } else if a.verdict == b.verdict {
        Agreement::Agree
    } else {
        Agreement::Disagree
    }
}
