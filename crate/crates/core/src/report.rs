//! Text and JSON renderings of check reports.
//!
//! JSON floats are written with 17 significant digits in exponent form so
//! identical runs produce byte-identical output; non-finite values become
//! `null`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::checks::{CheckReport, EquivalenceReport};

pub const CHECK_REPORT_SCHEMA: &str = "cartan-sym.check-report/1";

/// `f64` serialized with a fixed format.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixed(pub f64);

impl Serialize for Fixed {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format_float(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

/// `d.dddddddddddddddde±XX`.
pub fn format_float(v: f64) -> String {
    let text = format!("{v:.16e}");
    // Rust prints `1.0000000000000000e0`; JSON accepts it, but a signed
    // exponent reads better and keeps widths stable.
    match text.split_once('e') {
        Some((mantissa, exp)) if !exp.starts_with('-') => format!("{mantissa}e+{exp}"),
        _ => text,
    }
}

#[derive(Serialize)]
struct ResidualJson {
    raw: Fixed,
    normalized: Fixed,
}

#[derive(Serialize)]
struct LambdaJson {
    mean: Vec<Vec<Fixed>>,
    constancy_spread: Fixed,
    spread_from_mean: Fixed,
}

#[derive(Serialize)]
struct CheckReportJson<'a> {
    schema: &'static str,
    geometry: &'a str,
    vector: &'a str,
    geometry_kind: &'static str,
    mode: &'static str,
    verdict: &'static str,
    tolerance: Fixed,
    seed: u64,
    sample_count: usize,
    frames_per_point: usize,
    max_normalized_residual: Fixed,
    residuals: BTreeMap<&'static str, ResidualJson>,
    lambda: Option<LambdaJson>,
}

/// Pretty-printed JSON document for one report.
pub fn check_report_json(report: &CheckReport, geometry: &str, vector: &str) -> String {
    let doc = CheckReportJson {
        schema: CHECK_REPORT_SCHEMA,
        geometry,
        vector,
        geometry_kind: report.geometry_kind.name(),
        mode: report.mode.name(),
        verdict: report.verdict.name(),
        tolerance: Fixed(report.tolerance),
        seed: report.seed,
        sample_count: report.sample_count,
        frames_per_point: report.frames_per_point,
        max_normalized_residual: Fixed(report.max_normalized()),
        residuals: report
            .residuals
            .iter()
            .map(|(k, r)| {
                (
                    *k,
                    ResidualJson {
                        raw: Fixed(r.raw),
                        normalized: Fixed(r.normalized),
                    },
                )
            })
            .collect(),
        lambda: report.lambda.as_ref().map(|l| LambdaJson {
            mean: l
                .rows()
                .into_iter()
                .map(|row| row.into_iter().map(Fixed).collect())
                .collect(),
            constancy_spread: Fixed(l.constancy_spread),
            spread_from_mean: Fixed(l.spread_from_mean),
        }),
    };
    serde_json::to_string_pretty(&doc).expect("report serialization cannot fail")
}

pub fn check_report_text(report: &CheckReport, geometry: &str, vector: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "geometry  {geometry} ({})",
        report.geometry_kind.name()
    );
    let _ = writeln!(out, "vector    {vector}");
    let _ = writeln!(
        out,
        "mode      {}  samples {}  frames {}  seed {}  tol {:e}",
        report.mode.name(),
        report.sample_count,
        report.frames_per_point,
        report.seed,
        report.tolerance
    );
    let _ = writeln!(out, "{:<20} {:>24} {:>24}", "residual", "raw", "normalized");
    for (name, r) in &report.residuals {
        let mark = if r.normalized < report.tolerance {
            "ok"
        } else {
            "FAIL"
        };
        let _ = writeln!(
            out,
            "{name:<20} {:>24.6e} {:>24.6e}  {mark}",
            r.raw, r.normalized
        );
    }
    if let Some(l) = &report.lambda {
        let _ = writeln!(out, "lambda (sample mean):");
        for row in l.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>12.6}")).collect();
            let _ = writeln!(out, "  [{}]", cells.join(" "));
        }
        let _ = writeln!(
            out,
            "lambda spread: pairwise {:.3e}, from mean {:.3e}",
            l.constancy_spread, l.spread_from_mean
        );
    }
    let _ = writeln!(out, "verdict   {}", report.verdict.name());
    out
}

/// One row of the agreement matrix.
pub fn equivalence_row(geometry: &str, vector: &str, eq: &EquivalenceReport) -> String {
    format!(
        "{geometry:<30} {vector:<16} {:<14} {:>10.3e} {:<14} {:>10.3e} {}",
        eq.direct.verdict.name(),
        eq.direct.max_normalized(),
        eq.cartan.verdict.name(),
        eq.cartan.max_normalized(),
        match eq.agreement {
            crate::checks::Agreement::Agree => "agree",
            crate::checks::Agreement::Disagree => "DISAGREE",
            crate::checks::Agreement::Inconclusive => "inconclusive",
        }
    )
}
