//! Frame bundle, frame bundle lift and the Cartan connection of the affine
//! and Poincaré models.
//!
//! Points of the frame bundle are coordinatised by `z = (x^μ, f^μ_a)`, with
//! `f^μ_a` stored at slot `n + μ·n + a`. Every coefficient below is a
//! first-order jet in all `n + n²` of these coordinates, so Lie derivatives on
//! the total space reduce to the coordinate formula
//! `(ℒ_X A)_J = X^I ∂_I A_J + A_I ∂_J X^I`.

use nalgebra::DMatrix;
use rand::Rng;

use crate::chart::stream_rng;
use crate::fields::{MetricSpec, Signature, VectorFieldSpec};
use crate::geometry::GeometrySpec;
use crate::jet::{condition_number, jet_matrix_inverse, Jet1, Real, Truncate, MAX_CONDITION};
use crate::tensor::Tensor;
use crate::{Error, Result};

/// Orthonormality tolerance for accepting a frame as a point of `O(M)`.
pub const BUNDLE_TOLERANCE: f64 = 1e-9;

/// Default size of the random Lorentz (or rotation) perturbation of sampled frames.
pub const FRAME_PERTURBATION: f64 = 0.5;

/// A point of `GL(M)`: base point `x` and frame `f^μ_a` (row `μ`, column `a`).
#[derive(Debug, Clone, PartialEq)]
pub struct FramePoint {
    pub x: Vec<f64>,
    pub frame: Vec<f64>,
}

impl FramePoint {
    pub fn new(x: Vec<f64>, frame: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if frame.len() != n * n {
            return Err(Error::Validation(format!("frame must be {n}×{n}")));
        }
        let cond = condition_number(&frame, n);
        if !(cond <= MAX_CONDITION) {
            return Err(Error::Singular {
                what: "frame",
                source: crate::jet::SingularMatrix { condition: cond },
            });
        }
        Ok(FramePoint { x, frame })
    }

    /// The coordinate frame `f^μ_a = δ^μ_a`.
    pub fn identity(x: Vec<f64>) -> Self {
        let n = x.len();
        let frame = (0..n * n)
            .map(|k| if k / n == k % n { 1.0 } else { 0.0 })
            .collect();
        FramePoint { x, frame }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn f(&self, mu: usize, a: usize) -> f64 {
        self.frame[mu * self.dim() + a]
    }

    /// `sup_ab |g(f_a, f_b) − η_ab|`.
    pub fn orthonormality_residual(&self, g: &MetricSpec) -> Result<f64> {
        let n = self.dim();
        let gv = g.eval_values(&self.x)?;
        let eta = g.signature().eta(n);
        let mut sup: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let mut s = 0.0;
                for mu in 0..n {
                    for nu in 0..n {
                        s += gv[mu * n + nu] * self.f(mu, a) * self.f(nu, b);
                    }
                }
                let target = if a == b { eta[a] } else { 0.0 };
                sup = sup.max((s - target).abs());
            }
        }
        Ok(sup)
    }

    /// Right action `f ↦ f·h` of a constant matrix `h^b_a`.
    pub fn act(&self, h: &[f64]) -> FramePoint {
        let n = self.dim();
        let frame = (0..n * n)
            .map(|k| {
                let (mu, a) = (k / n, k % n);
                (0..n).map(|b| self.f(mu, b) * h[b * n + a]).sum()
            })
            .collect();
        FramePoint {
            x: self.x.clone(),
            frame,
        }
    }
}

/// Coordinates `(x^μ, f^μ_a)` on the frame bundle over an `n`-dimensional chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TotalSpace {
    pub n: usize,
}

impl TotalSpace {
    pub fn dim(self) -> usize {
        self.n + self.n * self.n
    }

    pub fn x(self, mu: usize) -> usize {
        mu
    }

    pub fn f(self, mu: usize, a: usize) -> usize {
        self.n + mu * self.n + a
    }

    /// Point coordinates as jets seeded in all total-space variables.
    fn seed(self, p: &FramePoint) -> (Vec<Jet1>, Vec<Jet1>) {
        let big = self.dim();
        let x = (0..self.n)
            .map(|mu| Jet1::variable(p.x[mu], self.x(mu), big))
            .collect();
        let f = (0..self.n * self.n)
            .map(|k| Jet1::variable(p.frame[k], self.f(k / self.n, k % self.n), big))
            .collect();
        (x, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Affine group over `GL(n)`; the structure bundle is all of `GL(M)`.
    Affine,
    /// Poincaré group over the Lorentz (or rotation) group; the structure
    /// bundle is the orthonormal frame bundle `O(M)`.
    Poincare,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDescriptor {
    pub kind: ModelKind,
    pub dim: usize,
    /// Diagonal of `η`, present for the Poincaré model.
    pub eta: Option<Vec<f64>>,
}

impl ModelDescriptor {
    pub fn affine(n: usize) -> Self {
        ModelDescriptor {
            kind: ModelKind::Affine,
            dim: n,
            eta: None,
        }
    }

    pub fn poincare(n: usize, signature: Signature) -> Self {
        ModelDescriptor {
            kind: ModelKind::Poincare,
            dim: n,
            eta: Some(signature.eta(n)),
        }
    }

    /// Dimension of the structure group `H`.
    pub fn h_dim(&self) -> usize {
        match self.kind {
            ModelKind::Affine => self.dim * self.dim,
            ModelKind::Poincare => self.dim * (self.dim - 1) / 2,
        }
    }

    /// Basis `Λ_k = η·(E_ab − E_ba)`, `a < b`, of the Lorentz algebra
    /// (row-major `Λ^c_d`). Empty for the affine model.
    pub fn lorentz_basis(&self) -> Vec<Vec<f64>> {
        let n = self.dim;
        let Some(eta) = &self.eta else {
            return Vec::new();
        };
        let mut basis = Vec::with_capacity(self.h_dim());
        for a in 0..n {
            for b in a + 1..n {
                let mut m = vec![0.0; n * n];
                m[a * n + b] = eta[a];
                m[b * n + a] = -eta[b];
                basis.push(m);
            }
        }
        basis
    }
}

/// Coefficients of the Cartan connection `A = e + ω` over `dz^J`.
///
/// `e_part[a][J]` is the solder form `e^a = (f⁻¹)^a_μ dx^μ`;
/// `h_part[a·n + b][J]` is `ω^a_b = (f⁻¹)^a_μ (df^μ_b + Γ^μ_{ρν} f^ρ_b dx^ν)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CartanValue {
    pub n: usize,
    pub e_part: Vec<Vec<Jet1>>,
    pub h_part: Vec<Vec<Jet1>>,
}

impl CartanValue {
    /// All Lie-algebra components, `e` first.
    pub fn components(&self) -> impl Iterator<Item = &Vec<Jet1>> {
        self.e_part.iter().chain(&self.h_part)
    }

    /// `(e(v), ω(v))` for a total-space tangent vector `v`.
    pub fn apply(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let contract = |row: &Vec<Jet1>| row.iter().zip(v).map(|(c, d)| c.value * d).sum();
        (
            self.e_part.iter().map(contract).collect(),
            self.h_part.iter().map(contract).collect(),
        )
    }
}

/// Frame bundle lift `ξ̄ = ξ^μ ∂_{x^μ} + (∂_ν ξ^μ f^ν_a) ∂_{f^μ_a}` with first
/// derivatives in all total-space coordinates. Base components come first.
pub fn frame_lift(xi: &VectorFieldSpec, p: &FramePoint) -> Result<Vec<Jet1>> {
    let n = p.dim();
    let space = TotalSpace { n };
    let big = space.dim();
    let jets = xi.eval(&p.x)?;
    let (_, f) = space.seed(p);
    let mut lift: Vec<Jet1> = jets.iter().map(|j| j.lower().embed(0, big)).collect();
    for mu in 0..n {
        let dxi: Vec<Jet1> = (0..n)
            .map(|nu| jets[mu].partial(nu).embed(0, big))
            .collect();
        for a in 0..n {
            let comp = (1..n).fold(dxi[0].clone() * f[a].clone(), |acc, nu| {
                acc + dxi[nu].clone() * f[nu * n + a].clone()
            });
            lift.push(comp);
        }
    }
    Ok(lift)
}

/// `X(φ) = X^I ∂_I φ` for a jet `φ` on the total space.
fn apply_vector(x: &[Jet1], phi: &Jet1) -> f64 {
    x.iter().zip(&phi.grad).map(|(xi, d)| xi.value * d).sum()
}

/// `ξ̄` applied to the defining functions `g_{μν} f^μ_a f^ν_b − η_ab` of `O(M)`.
/// Vanishes exactly when `ξ̄` is tangent to `O(M)` at `p`.
pub fn tangency_residual(g: &MetricSpec, xi: &VectorFieldSpec, p: &FramePoint) -> Result<Vec<f64>> {
    crate::fields::ensure_same_chart(g.chart(), xi.chart())?;
    let residual = p.orthonormality_residual(g)?;
    if residual > BUNDLE_TOLERANCE {
        return Err(Error::NotOnBundle { residual });
    }
    let n = p.dim();
    let space = TotalSpace { n };
    let big = space.dim();
    let gj = g.eval(&p.x)?.map(|j| j.lower().embed(0, big));
    let (_, f) = space.seed(p);
    let lift = frame_lift(xi, p)?;
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut phi = Jet1::constant(0.0, big);
            for mu in 0..n {
                for nu in 0..n {
                    phi = phi
                        + gj.get(&[mu, nu]).clone() * f[mu * n + a].clone() * f[nu * n + b].clone();
                }
            }
            out.push(apply_vector(&lift, &phi));
        }
    }
    Ok(out)
}

fn require_on_bundle(geom: &GeometrySpec, p: &FramePoint) -> Result<()> {
    if let Some(g) = geom.metric() {
        let residual = p.orthonormality_residual(g)?;
        if residual > BUNDLE_TOLERANCE {
            return Err(Error::NotOnBundle { residual });
        }
    }
    Ok(())
}

/// Cartan connection of the geometry's model at `p`.
pub fn cartan_connection_eval(geom: &GeometrySpec, p: &FramePoint) -> Result<CartanValue> {
    cartan_connection_with(geom, &geom.connection(&p.x)?, p)
}

/// [`cartan_connection_eval`] with the base connection jet at `p.x` supplied.
pub fn cartan_connection_with(
    geom: &GeometrySpec,
    connection: &Tensor<Jet1>,
    p: &FramePoint,
) -> Result<CartanValue> {
    geom.model()?;
    require_on_bundle(geom, p)?;
    let n = p.dim();
    let space = TotalSpace { n };
    let big = space.dim();
    let gamma = connection.map(|j| j.embed(0, big));
    let (_, f) = space.seed(p);
    // finv[a][μ] = (f⁻¹)^a_μ
    let finv = jet_matrix_inverse(&f, n).map_err(|source| Error::Singular {
        what: "frame",
        source,
    })?;
    let zero = Jet1::constant(0.0, big);

    let e_part = (0..n)
        .map(|a| {
            let mut row = vec![zero.clone(); big];
            for mu in 0..n {
                row[space.x(mu)] = finv[a * n + mu].clone();
            }
            row
        })
        .collect();

    // m[(a·n + ρ)·n + ν] = (f⁻¹)^a_μ Γ^μ_{ρν}
    let mut m = vec![zero.clone(); n * n * n];
    for a in 0..n {
        for rho in 0..n {
            for nu in 0..n {
                let slot = &mut m[(a * n + rho) * n + nu];
                for mu in 0..n {
                    slot.add_product(&finv[a * n + mu], gamma.get(&[mu, rho, nu]));
                }
            }
        }
    }
    let mut h_part = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut row = vec![zero.clone(); big];
            for nu in 0..n {
                let slot = &mut row[space.x(nu)];
                for rho in 0..n {
                    slot.add_product(&m[(a * n + rho) * n + nu], &f[rho * n + b]);
                }
            }
            for mu in 0..n {
                row[space.f(mu, b)] = finv[a * n + mu].clone();
            }
            h_part.push(row);
        }
    }
    Ok(CartanValue { n, e_part, h_part })
}

/// Full coefficient array of `ℒ_ξ̄ A` at `p`: one row per Lie-algebra
/// component (`e` then `ω`), one column per total-space coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct CartanForm {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
}

impl CartanForm {
    /// `rows · v` for every tangent vector in `basis`.
    pub fn restrict(&self, basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|row| {
                basis
                    .iter()
                    .map(|v| row.iter().zip(v).map(|(c, d)| c * d).sum())
                    .collect()
            })
            .collect()
    }

    pub fn e_rows(&self) -> &[Vec<f64>] {
        &self.rows[..self.n]
    }

    pub fn h_rows(&self) -> &[Vec<f64>] {
        &self.rows[self.n..]
    }
}

fn lie_derivative_one_form(x: &[Jet1], a: &[Jet1]) -> Vec<f64> {
    (0..a.len())
        .map(|j| {
            let transport: f64 = x.iter().zip(&a[j].grad).map(|(xi, d)| xi.value * d).sum();
            let twist: f64 = x.iter().zip(a).map(|(xi, ai)| ai.value * xi.grad[j]).sum();
            transport + twist
        })
        .collect()
}

/// `ℒ_ξ̄ A` on the ambient frame bundle at `p`.
pub fn lie_derivative_cartan(
    geom: &GeometrySpec,
    xi: &VectorFieldSpec,
    p: &FramePoint,
) -> Result<CartanForm> {
    Ok(lie_derivative_cartan_with_value(geom, xi, p)?.1)
}

/// [`lie_derivative_cartan`] together with the connection it differentiates.
pub fn lie_derivative_cartan_with_value(
    geom: &GeometrySpec,
    xi: &VectorFieldSpec,
    p: &FramePoint,
) -> Result<(CartanValue, CartanForm)> {
    lie_derivative_cartan_with(geom, &geom.connection(&p.x)?, xi, p)
}

/// [`lie_derivative_cartan_with_value`] with the base connection jet at `p.x` supplied.
pub fn lie_derivative_cartan_with(
    geom: &GeometrySpec,
    connection: &Tensor<Jet1>,
    xi: &VectorFieldSpec,
    p: &FramePoint,
) -> Result<(CartanValue, CartanForm)> {
    crate::fields::ensure_same_chart(geom.chart(), xi.chart())?;
    let value = cartan_connection_with(geom, connection, p)?;
    let lift = frame_lift(xi, p)?;
    let rows = value
        .components()
        .map(|a| lie_derivative_one_form(&lift, a))
        .collect();
    let form = CartanForm { n: value.n, rows };
    Ok((value, form))
}

/// Spanning set of `T_p P`.
///
/// For the affine model `P = GL(M)` and the coordinate directions are used.
/// For the Poincaré model: horizontal lifts
/// `∂_{x^μ} − Γ^ρ_{νμ} f^ν_a ∂_{f^ρ_a}` and vertical vectors `f·Λ_k`.
pub fn tangent_basis(geom: &GeometrySpec, p: &FramePoint) -> Result<Vec<Vec<f64>>> {
    if geom.model()?.kind == ModelKind::Affine {
        return Ok(coordinate_basis(TotalSpace { n: p.dim() }.dim()));
    }
    tangent_basis_with(geom, &geom.connection(&p.x)?, p)
}

/// [`tangent_basis`] with the base connection jet at `p.x` supplied.
pub fn tangent_basis_with(
    geom: &GeometrySpec,
    connection: &Tensor<Jet1>,
    p: &FramePoint,
) -> Result<Vec<Vec<f64>>> {
    let model = geom.model()?;
    let n = p.dim();
    let space = TotalSpace { n };
    let big = space.dim();
    if model.kind == ModelKind::Affine {
        return Ok(coordinate_basis(big));
    }
    require_on_bundle(geom, p)?;
    let gamma = connection.values();
    let mut basis = Vec::with_capacity(n + model.h_dim());
    for mu in 0..n {
        let mut v = vec![0.0; big];
        v[space.x(mu)] = 1.0;
        for rho in 0..n {
            for a in 0..n {
                let mut s = 0.0;
                for nu in 0..n {
                    s += gamma.get(&[rho, nu, mu]) * p.f(nu, a);
                }
                v[space.f(rho, a)] = -s;
            }
        }
        basis.push(v);
    }
    for lambda in model.lorentz_basis() {
        let mut v = vec![0.0; big];
        for mu in 0..n {
            for a in 0..n {
                v[space.f(mu, a)] = (0..n).map(|b| p.f(mu, b) * lambda[b * n + a]).sum();
            }
        }
        basis.push(v);
    }
    Ok(basis)
}

fn coordinate_basis(big: usize) -> Vec<Vec<f64>> {
    (0..big)
        .map(|k| (0..big).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn gram_schmidt(gv: &[f64], n: usize, signature: Signature) -> Result<Vec<f64>> {
    let inner = |u: &[f64], v: &[f64]| -> f64 {
        let mut s = 0.0;
        for mu in 0..n {
            for nu in 0..n {
                s += gv[mu * n + nu] * u[mu] * v[nu];
            }
        }
        s
    };
    let mut order: Vec<usize> = (0..n).collect();
    if signature == Signature::Lorentzian {
        let t = (0..n)
            .find(|&mu| gv[mu * n + mu] < 0.0)
            .ok_or_else(|| Error::GramSchmidt("no timelike coordinate direction".into()))?;
        order.retain(|&mu| mu != t);
        order.insert(0, t);
    }
    let eta = signature.eta(n);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (a, &mu) in order.iter().enumerate() {
        let mut w: Vec<f64> = (0..n).map(|k| if k == mu { 1.0 } else { 0.0 }).collect();
        for (b, fb) in cols.iter().enumerate() {
            let c = eta[b] * inner(&w, fb);
            for k in 0..n {
                w[k] -= c * fb[k];
            }
        }
        let norm2 = inner(&w, &w);
        if norm2.abs() < 1e-12 || norm2.signum() != eta[a] {
            return Err(Error::GramSchmidt(format!(
                "coordinate direction {mu} has norm² {norm2} after projection"
            )));
        }
        let s = norm2.abs().sqrt();
        cols.push(w.iter().map(|v| v / s).collect());
    }
    Ok((0..n * n).map(|k| cols[k % n][k / n]).collect())
}

/// Seeded frames at `x`; see [`sample_frames_with`].
pub fn sample_frames(
    g: Option<&MetricSpec>,
    x: &[f64],
    count: usize,
    seed: u64,
) -> Result<Vec<FramePoint>> {
    sample_frames_with(g, x, count, seed, FRAME_PERTURBATION)
}

/// With a metric: Gram–Schmidt of the coordinate frame (timelike direction
/// first) followed by `exp(ε·Λ)` for a random Lorentz algebra element `Λ`.
/// Without: `1 + ε·R` for a random matrix `R`, redrawn while `|det| < 0.1`.
/// Frame `k` depends only on `(seed, k)`.
pub fn sample_frames_with(
    g: Option<&MetricSpec>,
    x: &[f64],
    count: usize,
    seed: u64,
    epsilon: f64,
) -> Result<Vec<FramePoint>> {
    let n = x.len();
    match g {
        Some(g) => {
            let gv = g.eval_values(x)?;
            let base = FramePoint {
                x: x.to_vec(),
                frame: gram_schmidt(&gv, n, g.signature())?,
            };
            let model = ModelDescriptor::poincare(n, g.signature());
            let basis = model.lorentz_basis();
            Ok((0..count)
                .map(|k| {
                    let mut rng = stream_rng(seed, k as u64);
                    let mut lambda = DMatrix::<f64>::zeros(n, n);
                    for b in &basis {
                        let c: f64 = rng.gen_range(-1.0..=1.0) * epsilon;
                        lambda += DMatrix::from_row_slice(n, n, b) * c;
                    }
                    let q = lambda.exp();
                    let h: Vec<f64> = (0..n * n).map(|i| q[(i / n, i % n)]).collect();
                    base.act(&h)
                })
                .collect())
        }
        None => (0..count)
            .map(|k| {
                let mut rng = stream_rng(seed, k as u64);
                loop {
                    let frame: Vec<f64> = (0..n * n)
                        .map(|i| {
                            let d = if i / n == i % n { 1.0 } else { 0.0 };
                            d + epsilon * rng.gen_range(-1.0..=1.0)
                        })
                        .collect();
                    let det = DMatrix::from_row_slice(n, n, &frame).determinant();
                    if det.abs() >= 0.1 {
                        return FramePoint::new(x.to_vec(), frame);
                    }
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::expr::{parse_expr, Expr};
    use crate::fields::{ConnectionSpec, MetricSpec};

    fn chart4() -> Chart {
        Chart::new(
            ["t", "x", "y", "z"].iter().map(|s| s.to_string()).collect(),
            vec![(-1.0, 1.0); 4],
        )
        .unwrap()
    }

    fn exprs(chart: &Chart, texts: &[&str]) -> Vec<Expr> {
        let scope = chart.scope();
        texts
            .iter()
            .map(|t| parse_expr(t, &scope).unwrap())
            .collect()
    }

    fn minkowski() -> MetricSpec {
        let c = chart4();
        let d = exprs(&c, &["-1", "1", "1", "1"]);
        MetricSpec::diagonal(c, d, Signature::Lorentzian).unwrap()
    }

    fn field(texts: &[&str]) -> VectorFieldSpec {
        let c = chart4();
        VectorFieldSpec::new(c.clone(), exprs(&c, texts)).unwrap()
    }

    #[test]
    fn lift_of_constant_field() {
        let p = sample_frames(None, &[0.1, 0.2, 0.3, 0.4], 1, 3)
            .unwrap()
            .remove(0);
        let lift = frame_lift(&field(&["1", "0", "0", "0"]), &p).unwrap();
        let values: Vec<f64> = lift.iter().map(|j| j.value).collect();
        assert_eq!(&values[..4], &[1.0, 0.0, 0.0, 0.0]);
        assert!(values[4..].iter().all(|v| *v == 0.0));
        assert!(lift.iter().all(|j| j.grad.iter().all(|g| *g == 0.0)));
    }

    #[test]
    fn lift_of_rotation_is_its_jacobian() {
        let p = FramePoint::identity(vec![0.0; 4]);
        let lift = frame_lift(&field(&["0", "-y", "x", "0"]), &p).unwrap();
        let space = TotalSpace { n: 4 };
        assert!(lift[..4].iter().all(|j| j.value == 0.0));
        // Ξ^μ_a = ∂_a ξ^μ for the identity frame
        assert_eq!(lift[space.f(1, 2)].value, -1.0);
        assert_eq!(lift[space.f(2, 1)].value, 1.0);
        let others = (0..16).filter(|&k| k != 6 && k != 9);
        assert!(others.map(|k| lift[4 + k].value).all(|v| v == 0.0));
    }

    #[test]
    fn minkowski_frames_are_orthonormal() {
        let g = minkowski();
        let frames = sample_frames(Some(&g), &[0.0; 4], 1, 0).unwrap();
        assert!(frames[0].orthonormality_residual(&g).unwrap() < 1e-12);
    }

    #[test]
    fn unperturbed_euclidean_frame_is_identity() {
        let c = Chart::new(vec!["x".into(), "y".into()], vec![(-1.0, 1.0); 2]).unwrap();
        let d = exprs(&c, &["1", "1"]);
        let g = MetricSpec::diagonal(c, d, Signature::Euclidean).unwrap();
        let f = sample_frames_with(Some(&g), &[0.2, 0.3], 3, 9, 0.0).unwrap();
        for p in f {
            assert_eq!(p.frame, vec![1.0, 0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn tangency_for_killing_and_dilation() {
        let g = minkowski();
        for p in sample_frames(Some(&g), &[0.3, -0.1, 0.5, 0.2], 5, 1).unwrap() {
            let r = tangency_residual(&g, &field(&["x", "t", "0", "0"]), &p).unwrap();
            assert!(r.iter().all(|v| v.abs() < 1e-12));
        }
        let id = FramePoint::identity(vec![0.3, -0.1, 0.5, 0.2]);
        let r = tangency_residual(&g, &field(&["0", "x", "0", "0"]), &id).unwrap();
        assert_eq!(r[1 * 4 + 1], 2.0);
        assert_eq!(r.iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn tangency_rejects_points_off_the_bundle() {
        let g = minkowski();
        let p = FramePoint::new(vec![0.0; 4], {
            let mut f = FramePoint::identity(vec![0.0; 4]).frame;
            f[0] = 2.0;
            f
        })
        .unwrap();
        assert!(matches!(
            tangency_residual(&g, &field(&["1", "0", "0", "0"]), &p),
            Err(Error::NotOnBundle { .. })
        ));
    }

    #[test]
    fn flat_unit_frame_cartan_value() {
        let geom = GeometrySpec::Affine(ConnectionSpec::zero(chart4()));
        let p = FramePoint::identity(vec![0.0; 4]);
        let a = cartan_connection_eval(&geom, &p).unwrap();
        let space = TotalSpace { n: 4 };
        for (k, row) in a.e_part.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                let expected = if j == space.x(k) { 1.0 } else { 0.0 };
                assert_eq!(c.value, expected);
            }
        }
        for a_ in 0..4 {
            for b in 0..4 {
                let row = &a.h_part[a_ * 4 + b];
                for (j, c) in row.iter().enumerate() {
                    let expected = if (0..4).any(|mu| j == space.f(mu, b) && mu == a_) {
                        1.0
                    } else {
                        0.0
                    };
                    assert_eq!(c.value, expected, "ω^{a_}_{b} slot {j}");
                }
            }
        }
    }

    #[test]
    fn constant_field_preserves_minkowski_cartan_connection() {
        let g = minkowski();
        let geom = GeometrySpec::Riemannian(g.clone());
        let xi = field(&["1", "0", "0", "0"]);
        for p in sample_frames(Some(&g), &[0.1, 0.2, 0.3, 0.4], 20, 5).unwrap() {
            let form = lie_derivative_cartan(&geom, &xi, &p).unwrap();
            let basis = tangent_basis(&geom, &p).unwrap();
            let sup = form
                .restrict(&basis)
                .iter()
                .flatten()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(sup < 1e-12);
        }
    }

    #[test]
    fn quadratic_field_breaks_flat_affine_cartan_connection() {
        let geom = GeometrySpec::Affine(ConnectionSpec::zero(chart4()));
        let xi = field(&["0", "x^2", "0", "0"]);
        let p = FramePoint::identity(vec![0.0, 0.5, 0.0, 0.0]);
        let form = lie_derivative_cartan(&geom, &xi, &p).unwrap();
        assert!(form.e_rows().iter().flatten().all(|v| v.abs() < 1e-15));
        // ω^x_x along dx picks up ∂_x∂_x ξ^x = 2
        let space = TotalSpace { n: 4 };
        assert_eq!(form.h_rows()[1 * 4 + 1][space.x(1)], 2.0);
    }

    #[test]
    fn lorentz_basis_is_eta_antisymmetric() {
        let model = ModelDescriptor::poincare(4, Signature::Lorentzian);
        let eta = [-1.0, 1.0, 1.0, 1.0];
        let basis = model.lorentz_basis();
        assert_eq!(basis.len(), 6);
        for l in basis {
            for a in 0..4 {
                for b in 0..4 {
                    assert_eq!(eta[a] * l[a * 4 + b] + eta[b] * l[b * 4 + a], 0.0);
                }
            }
        }
    }
}
