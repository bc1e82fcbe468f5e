use std::collections::BTreeMap;
use std::path::Path;

use super::format::{parse_indexed_key, Document, Entry, Section};
use crate::chart::{Chart, Comparison, Exclusion};
use crate::checks::sample_directions;
use crate::expr::{parse_expr, Expr, Func, Scope};
use crate::fields::{
    metricity_residual, ConnectionSpec, FinslerSpec, MetricSpec, RiemannCartanSpec, Signature,
    TetradSpec, TorsionSpec, VectorFieldSpec,
};
use crate::geometry::{GeometryKind, GeometrySpec};
use crate::{Error, Result};

/// Seeded points at which every loaded geometry is validated.
pub const SCAN_POINTS: usize = 64;
const SCAN_SEED: u64 = 0x5eed;
/// Largest `|∇g|` accepted when a Riemann–Cartan connection is given directly.
pub const METRICITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryEntry {
    pub name: String,
    pub description: String,
    pub spec: GeometrySpec,
}

/// A vector field file: expressions over named coordinates, bound to a
/// geometry's chart with [`VectorEntry::bind`].
#[derive(Debug, Clone, PartialEq)]
pub struct VectorEntry {
    pub name: String,
    pub description: String,
    pub coords: Vec<String>,
    pub components: Vec<Expr>,
}

impl VectorEntry {
    /// Fails unless `chart` has exactly this file's coordinates.
    pub fn bind(&self, chart: &Chart) -> Result<VectorFieldSpec> {
        if chart.coord_names() != self.coords.as_slice() {
            return Err(Error::ChartMismatch(format!(
                "vector field {} uses coordinates {:?}, geometry uses {:?}",
                self.name,
                self.coords,
                chart.coord_names()
            )));
        }
        VectorFieldSpec::new(chart.clone(), self.components.clone())
    }

    pub fn fits(&self, chart: &Chart) -> bool {
        chart.coord_names() == self.coords.as_slice()
    }
}

pub fn load_geometry(path: impl AsRef<Path>) -> Result<GeometryEntry> {
    let (text, source) = read(path.as_ref())?;
    parse_geometry(&text, &source)
}

pub fn load_vector(path: impl AsRef<Path>) -> Result<VectorEntry> {
    let (text, source) = read(path.as_ref())?;
    parse_vector(&text, &source)
}

fn read(path: &Path) -> Result<(String, String)> {
    let source = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: source.clone(),
        source: e,
    })?;
    Ok((text, source))
}

struct Header {
    name: String,
    description: String,
    kind: Option<String>,
    signature: Option<(usize, String)>,
    coords: Vec<String>,
}

fn header(doc: &Document, section: &str, kind_allowed: bool) -> Result<Header> {
    let sec = doc
        .section(section)
        .ok_or_else(|| doc.error(1, section, "missing section"))?;
    let mut h = Header {
        name: String::new(),
        description: String::new(),
        kind: None,
        signature: None,
        coords: Vec::new(),
    };
    for e in &sec.entries {
        match e.key.as_str() {
            "name" => h.name = e.value.clone(),
            "description" => h.description = e.value.clone(),
            "kind" if kind_allowed => h.kind = Some(e.value.clone()),
            "signature" if kind_allowed => h.signature = Some((e.line, e.value.clone())),
            "coords" => {
                h.coords = e.value.split(',').map(|c| c.trim().to_string()).collect();
                if let Some(bad) = h.coords.iter().find(|c| !is_identifier(c)) {
                    return Err(doc.error(
                        e.line,
                        &format!("{section}.coords"),
                        format!("invalid coordinate name {bad:?}"),
                    ));
                }
            }
            other => return Err(doc.error(e.line, &format!("{section}.{other}"), "unknown key")),
        }
    }
    if h.name.is_empty() {
        return Err(doc.error(sec.line, &format!("{section}.name"), "missing required key"));
    }
    if h.coords.is_empty() {
        return Err(doc.error(
            sec.line,
            &format!("{section}.coords"),
            "missing required key",
        ));
    }
    Ok(h)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn expression(doc: &Document, section: &str, e: &Entry, text: &str, scope: &Scope) -> Result<Expr> {
    parse_expr(text, scope).map_err(|source| Error::Expression {
        path: doc.path(section, e),
        source,
    })
}

fn constant_value(
    doc: &Document,
    section: &str,
    e: &Entry,
    text: &str,
    constants: &[(String, f64)],
) -> Result<f64> {
    let scope = Scope::new(Vec::new(), constants.to_vec());
    let expr = expression(doc, section, e, text, &scope)?;
    expr.eval::<f64>(&[])
        .map_err(|err| doc.error(e.line, &format!("{section}.{}", e.key), err.to_string()))
}

fn constants(doc: &Document, coords: &[String]) -> Result<Vec<(String, f64)>> {
    let mut out: Vec<(String, f64)> = Vec::new();
    let Some(sec) = doc.section("constants") else {
        return Ok(out);
    };
    for e in &sec.entries {
        let path = format!("constants.{}", e.key);
        if !is_identifier(&e.key) || e.key == "pi" || Func::from_name(&e.key).is_some() {
            return Err(doc.error(e.line, &path, "constant name must be a fresh identifier"));
        }
        if coords.contains(&e.key) {
            return Err(doc.error(e.line, &path, "constant shadows a coordinate"));
        }
        let v = constant_value(doc, "constants", e, &e.value, &out)?;
        out.push((e.key.clone(), v));
    }
    Ok(out)
}

fn chart(doc: &Document, h: &Header) -> Result<Chart> {
    let consts = constants(doc, &h.coords)?;
    let sec = doc
        .section("domain")
        .ok_or_else(|| doc.error(1, "domain", "missing section"))?;
    let mut domain: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for e in &sec.entries {
        let path = format!("domain.{}", e.key);
        if !h.coords.contains(&e.key) {
            return Err(doc.error(e.line, &path, "not a coordinate"));
        }
        let (lo, hi) = e
            .value
            .split_once(',')
            .ok_or_else(|| doc.error(e.line, &path, "expected `lo, hi`"))?;
        let lo = constant_value(doc, "domain", e, lo.trim(), &consts)?;
        let hi = constant_value(doc, "domain", e, hi.trim(), &consts)?;
        if !(lo < hi) {
            return Err(doc.error(e.line, &path, format!("empty interval [{lo}, {hi}]")));
        }
        domain.insert(&e.key, (lo, hi));
    }
    let intervals = h
        .coords
        .iter()
        .map(|c| {
            domain
                .get(c.as_str())
                .copied()
                .ok_or_else(|| doc.error(sec.line, &format!("domain.{c}"), "missing interval"))
        })
        .collect::<Result<Vec<_>>>()?;
    let chart = Chart::new(h.coords.clone(), intervals)?.with_constants(consts);
    let scope = chart.scope();
    let mut exclusions = Vec::new();
    if let Some(sec) = doc.section("exclude") {
        for e in &sec.entries {
            let (cmp, (lhs, rhs)) = if let Some(parts) = e.value.split_once('<') {
                (Comparison::Less, parts)
            } else if let Some(parts) = e.value.split_once('>') {
                (Comparison::Greater, parts)
            } else {
                return Err(doc.error(e.line, "exclude", "expected `lhs < rhs` or `lhs > rhs`"));
            };
            exclusions.push(Exclusion {
                lhs: expression(doc, "exclude", e, lhs.trim(), &scope)?,
                cmp,
                rhs: expression(doc, "exclude", e, rhs.trim(), &scope)?,
            });
        }
    }
    Ok(chart.with_exclusions(exclusions))
}

/// Component table keyed by index tuple; absent entries are zero.
struct Components<'a> {
    doc: &'a Document,
    section: &'a Section,
}

impl<'a> Components<'a> {
    fn new(doc: &'a Document, names: &[&str]) -> Result<Components<'a>> {
        let section = doc
            .section("components")
            .ok_or_else(|| doc.error(1, "components", "missing section"))?;
        for e in &section.entries {
            let known = parse_indexed_key(&e.key).is_some_and(|(n, _)| names.contains(&n));
            if !known {
                return Err(doc.error(
                    e.line,
                    &format!("components.{}", e.key),
                    format!("unknown component (expected one of {names:?})"),
                ));
            }
        }
        Ok(Components { doc, section })
    }

    fn has(&self, name: &str) -> bool {
        self.entries(name).next().is_some()
    }

    fn entries<'b>(&'b self, name: &'b str) -> impl Iterator<Item = &'a Entry> + 'b {
        self.section
            .entries
            .iter()
            .filter(move |e| parse_indexed_key(&e.key).is_some_and(|(n, _)| n == name))
    }

    /// Entries of `name` with `shape[k]` indices in group `k`, each `< n`.
    fn indexed(
        &self,
        name: &str,
        shape: &[usize],
        n: usize,
        scope: &Scope,
    ) -> Result<Vec<(Vec<usize>, &'a Entry, Expr)>> {
        self.entries(name)
            .map(|e| {
                let path = format!("components.{}", e.key);
                let (_, groups) = parse_indexed_key(&e.key).expect("filtered");
                let ok_shape = groups.len() == shape.len()
                    && groups.iter().zip(shape).all(|(g, s)| g.len() == *s);
                if !ok_shape {
                    return Err(self.doc.error(
                        e.line,
                        &path,
                        format!("{name} expects index groups of sizes {shape:?}"),
                    ));
                }
                let idx: Vec<usize> = groups.into_iter().flatten().collect();
                if let Some(bad) = idx.iter().find(|&&i| i >= n) {
                    return Err(self.doc.error(
                        e.line,
                        &path,
                        format!("index {bad} out of range for dimension {n}"),
                    ));
                }
                let expr = expression(self.doc, "components", e, &e.value, scope)?;
                Ok((idx, e, expr))
            })
            .collect()
    }

    fn metric(&self, chart: &Chart, signature: Signature) -> Result<MetricSpec> {
        let n = chart.dim();
        let mut table: BTreeMap<(usize, usize), (usize, Expr)> = BTreeMap::new();
        for (idx, e, expr) in self.indexed("g", &[1, 1], n, &chart.scope())? {
            let key = (idx[0].min(idx[1]), idx[0].max(idx[1]));
            if let Some((line, prev)) = table.get(&key) {
                if *prev != expr {
                    return Err(self.doc.error(
                        e.line,
                        &format!("components.{}", e.key),
                        format!("disagrees with the symmetric entry on line {line}"),
                    ));
                }
            }
            table.insert(key, (e.line, expr));
        }
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for m in 0..n {
            for nu in m..n {
                upper.push(table.remove(&(m, nu)).map_or(Expr::Num(0.0), |(_, x)| x));
            }
        }
        MetricSpec::from_upper(chart.clone(), upper, signature)
    }

    fn connection(&self, chart: &Chart) -> Result<ConnectionSpec> {
        let n = chart.dim();
        let mut comps = vec![Expr::Num(0.0); n * n * n];
        for (idx, _, expr) in self.indexed("Gamma", &[1, 1, 1], n, &chart.scope())? {
            comps[(idx[0] * n + idx[1]) * n + idx[2]] = expr;
        }
        ConnectionSpec::new(chart.clone(), comps)
    }

    fn torsion(&self, chart: &Chart) -> Result<TorsionSpec> {
        let n = chart.dim();
        let mut comps = vec![Expr::Num(0.0); n * n * (n - 1) / 2];
        for (idx, e, expr) in self.indexed("T", &[1, 2], n, &chart.scope())? {
            if idx[1] >= idx[2] {
                return Err(self.doc.error(
                    e.line,
                    &format!("components.{}", e.key),
                    "torsion is antisymmetric; give T[l][m,n] with m < n only",
                ));
            }
            comps[TorsionSpec::component_slot(n, idx[0], idx[1], idx[2])] = expr;
        }
        TorsionSpec::from_components(chart.clone(), comps)
    }

    fn tetrad(&self, chart: &Chart, signature: Signature) -> Result<TetradSpec> {
        let n = chart.dim();
        let mut comps = vec![Expr::Num(0.0); n * n];
        for (idx, _, expr) in self.indexed("e", &[1, 1], n, &chart.scope())? {
            comps[idx[0] * n + idx[1]] = expr;
        }
        TetradSpec::new(chart.clone(), comps, signature)
    }

    fn vector(&self, chart_scope: &Scope, n: usize) -> Result<Vec<Expr>> {
        let mut comps = vec![Expr::Num(0.0); n];
        for (idx, _, expr) in self.indexed("xi", &[1], n, chart_scope)? {
            comps[idx[0]] = expr;
        }
        Ok(comps)
    }
}

fn signature(doc: &Document, h: &Header, kind: GeometryKind) -> Result<Signature> {
    let needed = matches!(
        kind,
        GeometryKind::Riemannian | GeometryKind::RiemannCartan | GeometryKind::Weitzenbock
    );
    match (&h.signature, needed) {
        (None, true) => Err(doc.error(1, "geometry.signature", "missing required key")),
        (Some((line, _)), false) => Err(doc.error(
            *line,
            "geometry.signature",
            format!("not used by {} geometry", kind.name()),
        )),
        (Some((_, s)), true) if s == "lorentzian" => Ok(Signature::Lorentzian),
        (Some((_, s)), true) if s == "euclidean" => Ok(Signature::Euclidean),
        (Some((line, s)), true) => Err(doc.error(
            *line,
            "geometry.signature",
            format!("expected lorentzian or euclidean, got {s:?}"),
        )),
        (None, false) => Ok(Signature::Euclidean),
    }
}

pub fn parse_geometry(text: &str, source: &str) -> Result<GeometryEntry> {
    let doc = Document::parse(text, source)?;
    doc.expect_sections(&["geometry", "constants", "domain", "exclude", "components"])?;
    let h = header(&doc, "geometry", true)?;
    let kind_text = h
        .kind
        .as_deref()
        .ok_or_else(|| doc.error(1, "geometry.kind", "missing required key"))?;
    let kind = GeometryKind::from_name(kind_text)
        .ok_or_else(|| doc.error(1, "geometry.kind", format!("unknown kind {kind_text:?}")))?;
    let sig = signature(&doc, &h, kind)?;
    let chart = chart(&doc, &h)?;
    let spec = match kind {
        GeometryKind::Affine => {
            GeometrySpec::Affine(Components::new(&doc, &["Gamma"])?.connection(&chart)?)
        }
        GeometryKind::Riemannian => {
            GeometrySpec::Riemannian(Components::new(&doc, &["g"])?.metric(&chart, sig)?)
        }
        GeometryKind::RiemannCartan => {
            let comps = Components::new(&doc, &["g", "T", "Gamma"])?;
            let metric = comps.metric(&chart, sig)?;
            let torsion = match (comps.has("T"), comps.has("Gamma")) {
                (true, true) => {
                    return Err(doc.error(1, "components", "give either T or Gamma, not both"))
                }
                (_, false) => comps.torsion(&chart)?,
                (false, true) => {
                    let gamma = comps.connection(&chart)?;
                    validate_metricity(&metric, &gamma, &h.name)?;
                    TorsionSpec::from_connection(gamma)
                }
            };
            GeometrySpec::RiemannCartan(RiemannCartanSpec::new(metric, torsion)?)
        }
        GeometryKind::Weitzenbock => {
            GeometrySpec::Weitzenbock(Components::new(&doc, &["e"])?.tetrad(&chart, sig)?)
        }
        GeometryKind::Finsler => {
            let comps = Components::new(&doc, &["F"])?;
            let entries: Vec<&Entry> = comps.entries("F").collect();
            let [e] = entries.as_slice() else {
                return Err(doc.error(1, "components.F", "exactly one F entry is required"));
            };
            if e.key.trim() != "F" {
                return Err(doc.error(
                    e.line,
                    &format!("components.{}", e.key),
                    "F takes no indices",
                ));
            }
            let f = expression(&doc, "components", e, &e.value, &chart.tangent_scope())?;
            GeometrySpec::Finsler(FinslerSpec::new(chart.clone(), f)?)
        }
    };
    validate(&spec, &h.name)?;
    Ok(GeometryEntry {
        name: h.name,
        description: h.description,
        spec,
    })
}

pub fn parse_vector(text: &str, source: &str) -> Result<VectorEntry> {
    let doc = Document::parse(text, source)?;
    doc.expect_sections(&["vector", "constants", "components"])?;
    let h = header(&doc, "vector", false)?;
    let consts = constants(&doc, &h.coords)?;
    let scope = Scope::new(h.coords.clone(), consts);
    let components = Components::new(&doc, &["xi"])?.vector(&scope, h.coords.len())?;
    Ok(VectorEntry {
        name: h.name,
        description: h.description,
        coords: h.coords,
        components,
    })
}

fn failed(name: &str, err: Error) -> Error {
    Error::Validation(format!("{name}: {err}"))
}

fn scan_points(chart: &Chart, name: &str) -> Result<Vec<Vec<f64>>> {
    chart
        .sample_points(SCAN_POINTS, SCAN_SEED)
        .map_err(|e| failed(name, e))
}

fn validate_metricity(g: &MetricSpec, gamma: &ConnectionSpec, name: &str) -> Result<()> {
    for x in scan_points(g.chart(), name)? {
        let gv = gamma.eval(&x).map_err(|e| failed(name, e.at_point(&x)))?;
        let r = metricity_residual(g, &gv, &x).map_err(|e| failed(name, e.at_point(&x)))?;
        if r.sup_norm() > METRICITY_TOLERANCE {
            return Err(failed(
                name,
                Error::Validation(format!(
                    "connection is not metric-compatible at {x:?} (|∇g| = {:e})",
                    r.sup_norm()
                )),
            ));
        }
    }
    Ok(())
}

/// Signs of the diagonal metric components, i.e. which coordinate directions
/// are timelike, null or spacelike.
fn causal_pattern(values: &[f64], n: usize) -> Vec<i8> {
    (0..n)
        .map(|m| {
            let d = values[m * n + m];
            if d.abs() < 1e-12 {
                0
            } else if d < 0.0 {
                -1
            } else {
                1
            }
        })
        .collect()
}

fn validate_metric(g: &MetricSpec, points: &[Vec<f64>]) -> Result<()> {
    let n = g.dim();
    let mut first: Option<(Vec<i8>, &[f64])> = None;
    for x in points {
        g.validate_at(x).map_err(|e| e.at_point(x))?;
        let pattern = causal_pattern(&g.eval_values(x)?, n);
        match &first {
            None => first = Some((pattern, x)),
            Some((p0, x0)) => {
                if let Some(mu) = (0..n).find(|&m| p0[m] != pattern[m]) {
                    return Err(Error::Validation(format!(
                        "signature flip: coordinate direction {} changes causal character between {x0:?} and {x:?}",
                        g.chart().coord_names()[mu]
                    )));
                }
            }
        }
    }
    Ok(())
}

fn validate(spec: &GeometrySpec, name: &str) -> Result<()> {
    let points = scan_points(spec.chart(), name)?;
    let result = match spec {
        GeometrySpec::Affine(c) => points
            .iter()
            .try_for_each(|x| c.eval(x).map(drop).map_err(|e| e.at_point(x))),
        GeometrySpec::Riemannian(g) => validate_metric(g, &points),
        GeometrySpec::RiemannCartan(rc) => validate_metric(&rc.metric, &points).and_then(|_| {
            points
                .iter()
                .try_for_each(|x| rc.torsion.eval(x).map(drop).map_err(|e| e.at_point(x)))
        }),
        GeometrySpec::Weitzenbock(e) => points
            .iter()
            .try_for_each(|x| e.validate_at(x).map_err(|err| err.at_point(x))),
        GeometrySpec::Finsler(f) => points.iter().enumerate().try_for_each(|(i, x)| {
            let ys = sample_directions(f, x, 1, SCAN_SEED ^ i as u64)?;
            f.check_homogeneity_at(x, &ys[0])
        }),
    };
    result.map_err(|e| failed(name, e))
}
