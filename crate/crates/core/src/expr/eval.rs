use thiserror::Error;

use super::{BinOp, Expr, Func, ABS_GUARD};
use crate::jet::{Jet2, Real};

#[derive(Debug, Clone, Error, PartialEq)]
#[error("domain error in `{subexpr}`: {reason}")]
pub struct EvalError {
    pub subexpr: String,
    pub reason: String,
}

impl EvalError {
    fn at(e: &Expr, reason: impl Into<String>) -> Self {
        EvalError {
            subexpr: e.to_string(),
            reason: reason.into(),
        }
    }
}

/// Integer exponents up to this magnitude use repeated multiplication.
const MAX_INT_EXPONENT: f64 = 64.0;

impl Expr {
    /// Evaluates with `point.len()` active variables.
    pub fn eval<T: Real>(&self, point: &[f64]) -> Result<T, EvalError> {
        let out = self.eval_inner::<T>(point)?;
        Ok(out)
    }

    /// Value, gradient and Hessian at `point`.
    pub fn eval_jet(&self, point: &[f64]) -> Result<Jet2, EvalError> {
        self.eval(point)
    }

    fn eval_inner<T: Real>(&self, point: &[f64]) -> Result<T, EvalError> {
        let n = point.len();
        let out = match self {
            Expr::Num(v) => T::constant(*v, n),
            Expr::Const { value, .. } => T::constant(*value, n),
            Expr::Var { index, name } => {
                let v = *point
                    .get(*index)
                    .ok_or_else(|| EvalError::at(self, format!("variable {name} out of range")))?;
                T::variable(v, *index, n)
            }
            Expr::Neg(e) => -e.eval_inner::<T>(point)?,
            Expr::Binary { op, lhs, rhs } => {
                let a = lhs.eval_inner::<T>(point)?;
                match op {
                    BinOp::Add => a + rhs.eval_inner(point)?,
                    BinOp::Sub => a - rhs.eval_inner(point)?,
                    BinOp::Mul => a * rhs.eval_inner(point)?,
                    BinOp::Div => {
                        let b: T = rhs.eval_inner(point)?;
                        if b.value() == 0.0 {
                            return Err(EvalError::at(self, "division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => self.eval_pow(a, rhs, point)?,
                }
            }
            Expr::Call { func, arg } => {
                let a = arg.eval_inner::<T>(point)?;
                apply_func(*func, &a).map_err(|reason| EvalError::at(self, reason))?
            }
        };
        if !out.is_finite() {
            return Err(EvalError::at(self, "non-finite result"));
        }
        Ok(out)
    }

    fn eval_pow<T: Real>(&self, base: T, exponent: &Expr, point: &[f64]) -> Result<T, EvalError> {
        if !exponent.has_vars() {
            let c: f64 = exponent.eval_inner::<f64>(&[])?;
            if c.fract() == 0.0 && c.abs() <= MAX_INT_EXPONENT {
                return int_pow(base, c as i64).map_err(|reason| EvalError::at(self, reason));
            }
            let a = base.value();
            if a <= 0.0 {
                return Err(EvalError::at(
                    self,
                    "non-integer power of a nonpositive base",
                ));
            }
            let p = a.powf(c);
            return Ok(base.chain(p, c * p / a, c * (c - 1.0) * p / (a * a)));
        }
        // exp(b * log(a))
        let a = base.value();
        if a <= 0.0 {
            return Err(EvalError::at(self, "variable power of a nonpositive base"));
        }
        let log_a = base.chain(a.ln(), 1.0 / a, -1.0 / (a * a));
        let b: T = exponent.eval_inner(point)?;
        let prod = b * log_a;
        let e = prod.value().exp();
        Ok(prod.chain(e, e, e))
    }
}

fn int_pow<T: Real>(base: T, k: i64) -> Result<T, &'static str> {
    if k == 0 {
        return Ok(base.lift_const(1.0));
    }
    let mut acc = base.clone();
    for _ in 1..k.unsigned_abs() {
        acc = acc * base.clone();
    }
    if k < 0 {
        if acc.value() == 0.0 {
            return Err("negative power of zero");
        }
        acc = acc.lift_const(1.0) / acc;
    }
    Ok(acc)
}

fn apply_func<T: Real>(func: Func, a: &T) -> Result<T, &'static str> {
    let x = a.value();
    let out = match func {
        Func::Sin => a.chain(x.sin(), x.cos(), -x.sin()),
        Func::Cos => a.chain(x.cos(), -x.sin(), -x.cos()),
        Func::Tan => {
            let t = x.tan();
            let sec2 = 1.0 + t * t;
            a.chain(t, sec2, 2.0 * t * sec2)
        }
        Func::Exp => {
            let e = x.exp();
            a.chain(e, e, e)
        }
        Func::Log => {
            if x <= 0.0 {
                return Err("log of nonpositive argument");
            }
            a.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
        }
        Func::Sqrt => {
            if x <= 0.0 {
                return Err("sqrt of nonpositive argument");
            }
            let s = x.sqrt();
            a.chain(s, 0.5 / s, -0.25 / (s * x))
        }
        Func::Abs => {
            if x.abs() < ABS_GUARD {
                return Err("abs is not differentiable at zero");
            }
            let sign = x.signum();
            a.chain(x.abs(), sign, 0.0)
        }
        Func::Tanh => {
            let t = x.tanh();
            let sech2 = 1.0 - t * t;
            a.chain(t, sech2, -2.0 * t * sech2)
        }
        Func::Cosh => a.chain(x.cosh(), x.sinh(), x.cosh()),
        Func::Sinh => a.chain(x.sinh(), x.cosh(), x.sinh()),
    };
    Ok(out)
}
