use crate::fields::{ensure_same_chart, MetricSpec, VectorFieldSpec};
use crate::jet::Jet1;
use crate::tensor::Tensor;
use crate::{Error, Result};

/// Fixed RK4 step count for each flow integration.
pub const FLOW_STEPS: usize = 16;

/// `ξ(p)` and `Dξ(p)` (row-major `∂_ν ξ^μ`), failing outside the chart.
fn field_and_jacobian(xi: &VectorFieldSpec, p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if !xi.chart().contains(p) {
        return Err(Error::FlowExit(p.to_vec()));
    }
    let jets = xi
        .components()
        .iter()
        .map(|c| c.eval::<Jet1>(p))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let value = jets.iter().map(|j| j.value).collect();
    let jac = jets.iter().flat_map(|j| j.grad.iter().copied()).collect();
    Ok((value, jac))
}

/// Right-hand side of the flow plus its variational equation.
fn rhs(xi: &VectorFieldSpec, n: usize, state: &[f64]) -> Result<Vec<f64>> {
    let (v, dv) = field_and_jacobian(xi, &state[..n])?;
    let jac = &state[n..];
    let mut out = v;
    for a in 0..n {
        for m in 0..n {
            out.push((0..n).map(|b| dv[a * n + b] * jac[b * n + m]).sum());
        }
    }
    Ok(out)
}

/// `φ_t(x)` and its Jacobian `∂φ^α/∂x^μ` (row-major), by RK4 with `steps` steps.
pub fn flow(xi: &VectorFieldSpec, x: &[f64], t: f64, steps: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = x.len();
    let h = t / steps as f64;
    let mut state: Vec<f64> = x.to_vec();
    state.extend((0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }));
    let axpy = |s: &[f64], k: &[f64], c: f64| -> Vec<f64> {
        s.iter().zip(k).map(|(a, b)| a + c * b).collect()
    };
    for _ in 0..steps {
        let k1 = rhs(xi, n, &state)?;
        let k2 = rhs(xi, n, &axpy(&state, &k1, h / 2.0))?;
        let k3 = rhs(xi, n, &axpy(&state, &k2, h / 2.0))?;
        let k4 = rhs(xi, n, &axpy(&state, &k3, h))?;
        for i in 0..state.len() {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    if !xi.chart().contains(&state[..n]) {
        return Err(Error::FlowExit(state[..n].to_vec()));
    }
    let jac = state.split_off(n);
    Ok((state, jac))
}

fn pullback(g: &MetricSpec, p: &[f64], jac: &[f64]) -> Result<Vec<f64>> {
    let n = p.len();
    let gv = g.eval_values(p)?;
    Ok((0..n * n)
        .map(|k| {
            let (m, nu) = (k / n, k % n);
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    s += gv[a * n + b] * jac[a * n + m] * jac[b * n + nu];
                }
            }
            s
        })
        .collect())
}

/// `(φ_t^*g − φ_{−t}^*g) / 2t` at `x`, an `O(t²)` approximation of `ℒ_ξg`.
pub fn flow_pullback_oracle(
    g: &MetricSpec,
    xi: &VectorFieldSpec,
    x: &[f64],
    t: f64,
) -> Result<Tensor<f64>> {
    ensure_same_chart(g.chart(), xi.chart())?;
    let (pf, jf) = flow(xi, x, t, FLOW_STEPS)?;
    let (pb, jb) = flow(xi, x, -t, FLOW_STEPS)?;
    let fwd = pullback(g, &pf, &jf)?;
    let bwd = pullback(g, &pb, &jb)?;
    let n = x.len();
    Ok(Tensor::from_vec(
        n,
        0,
        2,
        fwd.iter()
            .zip(&bwd)
            .map(|(a, b)| (a - b) / (2.0 * t))
            .collect(),
    ))
}

/// Fraction of each domain interval trimmed on both sides when drawing
/// oracle points, keeping the short flows well inside the chart.
pub const ORACLE_MARGIN: f64 = 0.25;

/// Flow times of the convergence study, halving each time.
pub const CONVERGENCE_TIMES: [f64; 4] = [1e-2, 5e-3, 2.5e-3, 1.25e-3];

/// Sup over points and components of `|oracle(t) − ℒ_ξg|`.
pub fn oracle_error(
    g: &MetricSpec,
    xi: &VectorFieldSpec,
    points: &[Vec<f64>],
    t: f64,
) -> Result<f64> {
    let errors = super::per_point(points, |_, x| {
        let jet = crate::fields::lie_derivative_tensor(g, xi, x)?;
        Ok(flow_pullback_oracle(g, xi, x, t)?.max_abs_diff(&jet))
    })?;
    Ok(errors.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleStudy {
    pub times: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log t`.
    pub slope: f64,
}

pub fn oracle_study(
    g: &MetricSpec,
    xi: &VectorFieldSpec,
    points: &[Vec<f64>],
    times: &[f64],
) -> Result<OracleStudy> {
    let errors = times
        .iter()
        .map(|&t| oracle_error(g, xi, points, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleStudy {
        times: times.to_vec(),
        slope: loglog_slope(times, &errors),
        errors,
    })
}

pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}
