//! One-mode reduction to the classical oscillator `z'' + Ω²(t) z = 0`.
//!
//! For `H = A p² + 2B pq + C q²` (grand-matrix form with no 1/2 factor) the
//! Heisenberg equations give `q' = 2A p + 2B q`, `p' = -2B p - 2C q`.
//! Eliminating `p` and substituting `q = √A z` removes the first-derivative
//! term and leaves
//!
//! `Ω² = 4AC + 2BA'/A + A''/(2A) - 3A'²/(4A²) - 4B² - 2B'`.
//!
//! The propagator is rebuilt from a single complex solution
//! `z = z₂ + i z₁`, where the real part follows the trajectory started at
//! `(p, q) = (0, 1)` and the imaginary part the one started at `(1, 0)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::coefficient::TimeFunction;
use crate::dynamics::step_grid;
use crate::error::{Error, Result};
use crate::hamiltonian::{Block, QuadraticHamiltonian};
use crate::symplectic::SymplecticMatrix;

/// Central-difference step for numerically supplied derivatives.
pub const FINITE_DIFFERENCE_STEP: f64 = 1e-5;

/// `|A|` below this is treated as zero.
pub const SINGULAR_A: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
enum Derivatives {
    Analytic {
        a_dot: TimeFunction,
        a_ddot: TimeFunction,
        b_dot: TimeFunction,
    },
    CentralDifference,
}

/// Scalar coefficients `A(t)`, `B(t)`, `C(t)` of a one-mode quadratic
/// Hamiltonian together with the derivatives `A'`, `A''`, `B'`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneModeCoefficients {
    a: TimeFunction,
    b: TimeFunction,
    c: TimeFunction,
    derivatives: Derivatives,
}

impl OneModeCoefficients {
    /// Derivatives taken symbolically (expressions) or from the interpolant
    /// (tabulated data).
    pub fn analytic(a: TimeFunction, b: TimeFunction, c: TimeFunction) -> Self {
        let a_dot = a.derivative();
        let derivatives = Derivatives::Analytic {
            a_ddot: a_dot.derivative(),
            a_dot,
            b_dot: b.derivative(),
        };
        Self {
            a,
            b,
            c,
            derivatives,
        }
    }

    /// Derivatives by central differences with step [`FINITE_DIFFERENCE_STEP`].
    pub fn finite_difference(a: TimeFunction, b: TimeFunction, c: TimeFunction) -> Self {
        Self {
            a,
            b,
            c,
            derivatives: Derivatives::CentralDifference,
        }
    }

    pub fn from_hamiltonian(h: &QuadraticHamiltonian) -> Result<Self> {
        if h.n_modes() != 1 {
            return Err(Error::InvalidParameter(format!(
                "one-mode reduction needs n_modes = 1, got {}",
                h.n_modes()
            )));
        }
        Ok(Self::analytic(
            h.block_entry(Block::A, 0, 0).clone(),
            h.block_entry(Block::B, 0, 0).clone(),
            h.block_entry(Block::C, 0, 0).clone(),
        ))
    }

    pub fn a(&self, t: f64) -> Result<f64> {
        self.a.eval(t)
    }

    pub fn b(&self, t: f64) -> Result<f64> {
        self.b.eval(t)
    }

    pub fn c(&self, t: f64) -> Result<f64> {
        self.c.eval(t)
    }

    pub fn a_dot(&self, t: f64) -> Result<f64> {
        match &self.derivatives {
            Derivatives::Analytic { a_dot, .. } => a_dot.eval(t),
            Derivatives::CentralDifference => first_difference(&self.a, t),
        }
    }

    pub fn a_ddot(&self, t: f64) -> Result<f64> {
        match &self.derivatives {
            Derivatives::Analytic { a_ddot, .. } => a_ddot.eval(t),
            Derivatives::CentralDifference => {
                let h = FINITE_DIFFERENCE_STEP;
                let (lo, mid, hi) = (self.a.eval(t - h)?, self.a.eval(t)?, self.a.eval(t + h)?);
                Ok((hi - 2.0 * mid + lo) / (h * h))
            }
        }
    }

    pub fn b_dot(&self, t: f64) -> Result<f64> {
        match &self.derivatives {
            Derivatives::Analytic { b_dot, .. } => b_dot.eval(t),
            Derivatives::CentralDifference => first_difference(&self.b, t),
        }
    }

    fn nonsingular_a(&self, t: f64) -> Result<f64> {
        let a = self.a(t)?;
        if a.abs() < SINGULAR_A || !a.is_finite() {
            return Err(Error::SingularCoefficient { t, value: a });
        }
        Ok(a)
    }
}

fn first_difference(f: &TimeFunction, t: f64) -> Result<f64> {
    let h = FINITE_DIFFERENCE_STEP;
    Ok((f.eval(t + h)? - f.eval(t - h)?) / (2.0 * h))
}

/// `Ω²(t)` of the reduced oscillator.
pub fn omega_squared(c: &OneModeCoefficients, t: f64) -> Result<f64> {
    let a = c.nonsingular_a(t)?;
    let a1 = c.a_dot(t)?;
    let a2 = c.a_ddot(t)?;
    let b = c.b(t)?;
    let b1 = c.b_dot(t)?;
    Ok(4.0 * a * c.c(t)? + 2.0 * b * a1 / a + a2 / (2.0 * a)
        - 3.0 * a1 * a1 / (4.0 * a * a)
        - 4.0 * b * b
        - 2.0 * b1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTrajectory {
    pub times: Vec<f64>,
    pub z: Vec<Complex64>,
    pub z_dot: Vec<Complex64>,
}

impl ComplexTrajectory {
    /// `W = z' z* - z z'*` at sample `i` (purely imaginary).
    pub fn wronskian(&self, i: usize) -> Complex64 {
        self.z_dot[i] * self.z[i].conj() - self.z[i] * self.z_dot[i].conj()
    }
}

/// RK4 integration of `z'' = -Ω²(t) z` written as a first-order system.
pub fn solve_oscillator<F>(
    omega2: F,
    z0: Complex64,
    z_dot0: Complex64,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<ComplexTrajectory>
where
    F: Fn(f64) -> Result<f64>,
{
    let (steps, step) = step_grid(t0, t1, dt)?;
    let mut traj = ComplexTrajectory {
        times: Vec::with_capacity(steps + 1),
        z: Vec::with_capacity(steps + 1),
        z_dot: Vec::with_capacity(steps + 1),
    };
    let (mut z, mut v) = (z0, z_dot0);
    traj.times.push(t0);
    traj.z.push(z);
    traj.z_dot.push(v);

    for i in 0..steps {
        let t = t0 + i as f64 * step;
        let t_next = if i + 1 == steps {
            t1
        } else {
            t0 + (i + 1) as f64 * step
        };
        let (w0, wh, w1) = (omega2(t)?, omega2(t + 0.5 * step)?, omega2(t_next)?);

        let (k1z, k1v) = (v, -w0 * z);
        let (k2z, k2v) = (v + k1v * (0.5 * step), -wh * (z + k1z * (0.5 * step)));
        let (k3z, k3v) = (v + k2v * (0.5 * step), -wh * (z + k2z * (0.5 * step)));
        let (k4z, k4v) = (v + k3v * step, -w1 * (z + k3z * step));
        z += (k1z + (k2z + k3z) * 2.0 + k4z) * (step / 6.0);
        v += (k1v + (k2v + k3v) * 2.0 + k4v) * (step / 6.0);

        if !(z.norm().is_finite() && v.norm().is_finite()) || z.norm() > 1e150 || v.norm() > 1e150 {
            return Err(Error::BlowUp { t: t_next });
        }
        traj.times.push(t_next);
        traj.z.push(z);
        traj.z_dot.push(v);
    }
    Ok(traj)
}

/// `max_t |W(t) - W(t0)|`.
pub fn wronskian_defect(traj: &ComplexTrajectory) -> f64 {
    if traj.z.is_empty() {
        return 0.0;
    }
    let w0 = traj.wronskian(0);
    (0..traj.z.len())
        .map(|i| (traj.wronskian(i) - w0).norm())
        .fold(0.0, f64::max)
}

/// The forward propagator of a one-mode Hamiltonian, rebuilt from a complex
/// solution of the reduced oscillator with `Λ(t0) = I`. Requires `A > 0`.
///
/// Initial data: `z = q/√A`, `z' = (q' - A' q / (2A)) / √A`, with `q' = 2A p + 2B q`.
/// Back-substitution: `q = √A z`, `q' = √A z' + A' z / (2√A)`,
/// `p = (q' - 2B q) / (2A)`.
pub fn propagator_from_oscillator(
    c: &OneModeCoefficients,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<(ComplexTrajectory, Vec<SymplecticMatrix>)> {
    let positive_a = |t: f64| -> Result<f64> {
        let a = c.nonsingular_a(t)?;
        if a < 0.0 {
            return Err(Error::SingularCoefficient { t, value: a });
        }
        Ok(a)
    };

    let a = positive_a(t0)?;
    let (a1, b) = (c.a_dot(t0)?, c.b(t0)?);
    let root = a.sqrt();
    // real part: (p, q) = (0, 1); imaginary part: (p, q) = (1, 0)
    let q = Complex64::new(1.0, 0.0);
    let q_dot = Complex64::new(2.0 * b, 2.0 * a);
    let z0 = q / root;
    let z_dot0 = (q_dot - q * (a1 / (2.0 * a))) / root;

    let traj = solve_oscillator(|t| omega_squared(c, t), z0, z_dot0, t0, t1, dt)?;

    let mut lambdas = Vec::with_capacity(traj.times.len());
    for i in 0..traj.times.len() {
        let t = traj.times[i];
        let a = positive_a(t)?;
        let (a1, b) = (c.a_dot(t)?, c.b(t)?);
        let root = a.sqrt();
        let q = traj.z[i] * root;
        let q_dot = traj.z_dot[i] * root + traj.z[i] * (a1 / (2.0 * root));
        let p = (q_dot - q * (2.0 * b)) / (2.0 * a);
        let m = DMatrix::from_row_slice(2, 2, &[p.im, p.re, q.im, q.re]);
        lambdas.push(SymplecticMatrix::measured(m));
    }
    Ok((traj, lambdas))
}
