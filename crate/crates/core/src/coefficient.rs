//! Scalar functions of time used as Hamiltonian coefficients: closed-form
//! expressions or tabulated samples under natural cubic spline interpolation.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Natural cubic spline through `(times[i], values[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    times: Vec<f64>,
    values: Vec<f64>,
    // second derivatives at the knots
    curvature: Vec<f64>,
}

impl CubicSpline {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "tabulation needs at least two samples and matching lengths (got {} times, {} values)",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0]))
            || times.iter().chain(&values).any(|x| !x.is_finite())
        {
            return Err(Error::InvalidParameter(
                "tabulation times must be finite and strictly increasing".into(),
            ));
        }
        let curvature = natural_curvature(&times, &values);
        Ok(Self {
            times,
            values,
            curvature,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    /// Value (`order = 0`) or derivative of the interpolant at `t`.
    pub fn eval(&self, t: f64, order: usize) -> Result<f64> {
        let (start, end) = self.range();
        let slack = 1e-9 * (end - start);
        if !(t >= start - slack && t <= end + slack) {
            return Err(Error::TimeOutOfRange { t, start, end });
        }
        let t = t.clamp(start, end);
        let i = match self.times.partition_point(|x| *x <= t) {
            0 => 0,
            k => (k - 1).min(self.times.len() - 2),
        };
        let h = self.times[i + 1] - self.times[i];
        let a = (self.times[i + 1] - t) / h;
        let b = (t - self.times[i]) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.curvature[i], self.curvature[i + 1]);
        Ok(match order {
            0 => a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0,
            1 => {
                (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0
                    + (3.0 * b * b - 1.0) / 6.0 * h * m1
            }
            2 => a * m0 + b * m1,
            3 => (m1 - m0) / h,
            _ => 0.0,
        })
    }
}

/// Second derivatives of the natural spline (zero at both ends), by the
/// tridiagonal Thomas algorithm.
fn natural_curvature(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        diag[i] = (h0 + h1) / 3.0;
        upper[i] = h1 / 6.0;
        rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        if i > 1 {
            let lower = h0 / 6.0;
            let w = lower / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
    }
    for i in (1..n - 1).rev() {
        m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    }
    m
}

/// A scalar coefficient `f(t)` with access to its derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeFunction {
    Expr(Expr),
    Spline {
        spline: Arc<CubicSpline>,
        order: usize,
    },
}

impl TimeFunction {
    pub fn constant(value: f64) -> Self {
        TimeFunction::Expr(Expr::Const(value))
    }

    pub fn parse(src: &str, params: &HashMap<String, f64>) -> Result<Self> {
        Ok(TimeFunction::Expr(Expr::parse(src, params)?))
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(TimeFunction::Spline {
            spline: Arc::new(CubicSpline::new(times, values)?),
            order: 0,
        })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            TimeFunction::Expr(e) => Ok(e.eval(t)),
            TimeFunction::Spline { spline, order } => spline.eval(t, *order),
        }
    }

    pub fn derivative(&self) -> Self {
        match self {
            TimeFunction::Expr(e) => TimeFunction::Expr(e.derivative()),
            TimeFunction::Spline { spline, order } => TimeFunction::Spline {
                spline: Arc::clone(spline),
                order: order + 1,
            },
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, TimeFunction::Expr(e) if e.is_constant())
    }

    pub fn range(&self) -> Option<(f64, f64)> {
        match self {
            TimeFunction::Expr(_) => None,
            TimeFunction::Spline { spline, .. } => Some(spline.range()),
        }
    }
}

impl From<f64> for TimeFunction {
    fn from(value: f64) -> Self {
        TimeFunction::constant(value)
    }
}
