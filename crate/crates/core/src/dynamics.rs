//! Time evolution of symplectic propagators and Gaussian states.
//!
//! The forward propagator `Λ(t)` maps initial phase-space coordinates to the
//! Heisenberg-evolved ones, `Q(t) = Λ(t) Q(t0)`, and obeys `dΛ/dt = F(t) Λ`
//! with `F = -2 J H(t)`. The target-side propagator obeys
//! `dΛ/dt = Λ F'(t)` with `F' = 2 J H'(t)`. For stationary Hamiltonians both
//! reduce to matrix exponentials and the order of the product is immaterial.
//!
//! Integration is classical fixed-step RK4 followed by a first-order
//! projection back to the symplectic group whenever the residual
//! `‖ΛJΛ^T - J‖_max` exceeds [`PROJECTION_THRESHOLD`].

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expm::matrix_exponential;
use crate::gaussian_state::{CovarianceMatrix, GaussianState};
use crate::hamiltonian::{
    displace_out_linear_terms, forward_generator_of, generator_target, grand_matrix,
    ho_grand_matrix, GrandMatrix, MeanDrive, OscillatorTarget, QuadraticHamiltonian,
};
use crate::symplectic::{
    congruence, max_abs, standard_form_matrix, symplectic_residual, times_j, SymplecticMatrix,
    ORDERING_TAG,
};

/// Residual above which a step is projected back onto the symplectic group.
pub const PROJECTION_THRESHOLD: f64 = 1e-10;

const MAX_PROJECTION_SWEEPS: usize = 4;
const BLOW_UP_MAGNITUDE: f64 = 1e150;

/// Which propagator equation to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `dΛ/dt = -2 J H(t) Λ`.
    Forward,
    /// `dΛ/dt = Λ · 2 J H'(t)`, with `H'` the target Hamiltonian.
    Target,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorTrajectory {
    pub times: Vec<f64>,
    pub lambdas: Vec<SymplecticMatrix>,
    /// Residual of each sample before projection (0 for the initial sample).
    pub drift: Vec<f64>,
}

impl PropagatorTrajectory {
    pub fn last(&self) -> &SymplecticMatrix {
        self.lambdas.last().expect("trajectories are never empty")
    }

    pub fn max_drift(&self) -> f64 {
        self.drift.iter().copied().fold(0.0, f64::max)
    }
}

/// Number of steps and their length so that the grid ends exactly on `t1`.
pub fn step_grid(t0: f64, t1: f64, dt: f64) -> Result<(usize, f64)> {
    if !(t0.is_finite() && t1.is_finite() && dt.is_finite()) {
        return Err(Error::NonFinite);
    }
    if dt <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if t1 < t0 {
        return Err(Error::InvalidParameter(format!(
            "t1 = {t1} precedes t0 = {t0}"
        )));
    }
    if t1 == t0 {
        return Ok((0, 0.0));
    }
    let steps = (((t1 - t0) / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    Ok((steps, (t1 - t0) / steps as f64))
}

struct Generator<'a> {
    h: &'a QuadraticHamiltonian,
    side: Side,
    frozen: Option<DMatrix<f64>>,
}

impl<'a> Generator<'a> {
    fn new(h: &'a QuadraticHamiltonian, side: Side) -> Result<Self> {
        let mut g = Self {
            h,
            side,
            frozen: None,
        };
        if h.is_stationary() {
            g.frozen = Some(g.compute(0.0)?);
        }
        Ok(g)
    }

    fn compute(&self, t: f64) -> Result<DMatrix<f64>> {
        let grand = grand_matrix(self.h, t)?;
        Ok(match self.side {
            Side::Forward => forward_generator_of(&grand),
            Side::Target => generator_target(&grand),
        })
    }

    fn at(&self, t: f64) -> Result<DMatrix<f64>> {
        match &self.frozen {
            Some(f) => Ok(f.clone()),
            None => self.compute(t),
        }
    }

    fn rate(&self, f: &DMatrix<f64>, lambda: &DMatrix<f64>) -> DMatrix<f64> {
        match self.side {
            Side::Forward => f * lambda,
            Side::Target => lambda * f,
        }
    }
}

/// One integrated sample: propagator, optional mean, pre-projection residual.
struct Sample {
    t: f64,
    lambda: DMatrix<f64>,
    mean: Option<DVector<f64>>,
    drift: f64,
}

/// Shared RK4 driver. The mean (if any) follows `d<Q>/dt = F(t)<Q> + g(t)`,
/// evaluated on the same stages as the propagator.
fn integrate(
    h: &QuadraticHamiltonian,
    side: Side,
    drive: Option<&MeanDrive>,
    t0: f64,
    t1: f64,
    dt: f64,
    lambda0: &DMatrix<f64>,
    mean0: Option<&DVector<f64>>,
) -> Result<Vec<Sample>> {
    h.layout().check_matrix(lambda0)?;
    let (steps, step) = step_grid(t0, t1, dt)?;
    let gen = Generator::new(h, side)?;
    let drive = drive.filter(|d| !d.is_zero());
    let force = |t: f64| -> Result<Option<DVector<f64>>> { drive.map(|d| d.eval(t)).transpose() };

    let mut out = Vec::with_capacity(steps + 1);
    let mut lambda = lambda0.clone();
    let mut mean = mean0.cloned();
    out.push(Sample {
        t: t0,
        lambda: lambda.clone(),
        mean: mean.clone(),
        drift: 0.0,
    });

    let mean_rate =
        |f: &DMatrix<f64>, m: &DVector<f64>, g: &Option<DVector<f64>>| -> DVector<f64> {
            match g {
                Some(g) => f * m + g,
                None => f * m,
            }
        };

    for i in 0..steps {
        let t = t0 + i as f64 * step;
        let t_half = t + 0.5 * step;
        let t_next = if i + 1 == steps {
            t1
        } else {
            t0 + (i + 1) as f64 * step
        };

        let f0 = gen.at(t)?;
        let fh = gen.at(t_half)?;
        let f1 = gen.at(t_next)?;

        let k1 = gen.rate(&f0, &lambda);
        let k2 = gen.rate(&fh, &(&lambda + &k1 * (0.5 * step)));
        let k3 = gen.rate(&fh, &(&lambda + &k2 * (0.5 * step)));
        let k4 = gen.rate(&f1, &(&lambda + &k3 * step));
        lambda += (k1 + (k2 + k3) * 2.0 + k4) * (step / 6.0);

        if let Some(m) = mean.as_mut() {
            let (g0, gh, g1) = (force(t)?, force(t_half)?, force(t_next)?);
            let m1 = mean_rate(&f0, m, &g0);
            let m2 = mean_rate(&fh, &(&*m + &m1 * (0.5 * step)), &gh);
            let m3 = mean_rate(&fh, &(&*m + &m2 * (0.5 * step)), &gh);
            let m4 = mean_rate(&f1, &(&*m + &m3 * step), &g1);
            *m += (m1 + (m2 + m3) * 2.0 + m4) * (step / 6.0);
            if m.iter()
                .any(|x| !x.is_finite() || x.abs() > BLOW_UP_MAGNITUDE)
            {
                return Err(Error::BlowUp { t: t_next });
            }
        }

        if lambda
            .iter()
            .any(|x| !x.is_finite() || x.abs() > BLOW_UP_MAGNITUDE)
        {
            return Err(Error::BlowUp { t: t_next });
        }
        let drift = symplectic_residual(&lambda);
        if drift > PROJECTION_THRESHOLD {
            project(&mut lambda);
        }
        out.push(Sample {
            t: t_next,
            lambda: lambda.clone(),
            mean: mean.clone(),
            drift,
        });
    }
    Ok(out)
}

/// `Λ ← (I + E J / 2) Λ` with `E = ΛJΛ^T - J`, which removes the residual to
/// first order; repeated a few times if needed.
fn project(lambda: &mut DMatrix<f64>) {
    let n = lambda.nrows() / 2;
    let j = standard_form_matrix(n);
    for _ in 0..MAX_PROJECTION_SWEEPS {
        let e = times_j(lambda) * lambda.transpose() - &j;
        if max_abs(&e) <= 1e-15 {
            break;
        }
        let correction = DMatrix::<f64>::identity(2 * n, 2 * n) + times_j(&e) * 0.5;
        *lambda = correction * &*lambda;
    }
}

/// Integrates the propagator from `Λ(t0) = Λ0` to `t1`.
pub fn evolve_symplectic(
    h: &QuadraticHamiltonian,
    t0: f64,
    t1: f64,
    dt: f64,
    lambda0: &SymplecticMatrix,
    side: Side,
) -> Result<PropagatorTrajectory> {
    let samples = integrate(h, side, None, t0, t1, dt, lambda0.matrix(), None)?;
    let mut traj = PropagatorTrajectory {
        times: Vec::with_capacity(samples.len()),
        lambdas: Vec::with_capacity(samples.len()),
        drift: Vec::with_capacity(samples.len()),
    };
    for (i, s) in samples.into_iter().enumerate() {
        traj.times.push(s.t);
        traj.lambdas.push(if i == 0 {
            lambda0.clone()
        } else {
            SymplecticMatrix::measured(s.lambda)
        });
        traj.drift.push(s.drift);
    }
    Ok(traj)
}

/// `exp(-2 J H t)`.
pub fn stationary_propagator(h: &GrandMatrix, t: f64) -> Result<SymplecticMatrix> {
    Ok(SymplecticMatrix::measured(matrix_exponential(
        &forward_generator_of(h),
        t,
    )?))
}

/// Per-mode oscillator rotation in `(p, q)` ordering:
/// `p' = p cos ωt - mω q sin ωt`, `q' = q cos ωt + p sin ωt / (mω)`.
pub fn ho_rotation(target: &OscillatorTarget, t: f64) -> SymplecticMatrix {
    let n = target.n_modes();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        let mw = target.masses()[k] * target.frequencies()[k];
        let (s, c) = (target.frequencies()[k] * t).sin_cos();
        m[(k, k)] = c;
        m[(k, n + k)] = -mw * s;
        m[(n + k, k)] = s / mw;
        m[(n + k, n + k)] = c;
    }
    SymplecticMatrix::measured(m)
}

/// `exp(2 J H_ho t) exp(-2 J H t)`: maps the evolution under `H` onto the
/// evolution under the oscillator target, with both initial propagators set to
/// the identity. Other initial choices give equally valid transforms.
pub fn diagonalizing_transform(
    h: &GrandMatrix,
    target: &OscillatorTarget,
    t: f64,
) -> Result<SymplecticMatrix> {
    target.layout().check_matrix(h.matrix())?;
    let back = matrix_exponential(&generator_target(&ho_grand_matrix(target)), t)?;
    let forward = matrix_exponential(&forward_generator_of(h), t)?;
    Ok(SymplecticMatrix::measured(back * forward))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<GaussianState>,
    /// Post-projection symplectic residual of `Λ(t)`.
    pub residuals: Vec<f64>,
    /// Pre-projection residual of `Λ(t)`.
    pub drift: Vec<f64>,
}

impl StateTrajectory {
    pub fn last(&self) -> &GaussianState {
        self.states.last().expect("trajectories are never empty")
    }
}

/// `σ(t) = Λ(t) σ0 Λ(t)^T`; the mean follows the forward generator plus the
/// drive from the linear terms.
pub fn evolve_state(
    state: &GaussianState,
    h: &QuadraticHamiltonian,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<StateTrajectory> {
    let sigma0 = state.covariance();
    h.layout().check_matrix(sigma0.matrix())?;
    let (quadratic, drive) = displace_out_linear_terms(h);
    let eye = DMatrix::identity(sigma0.layout().dim(), sigma0.layout().dim());
    let samples = integrate(
        &quadratic,
        Side::Forward,
        Some(&drive),
        t0,
        t1,
        dt,
        &eye,
        Some(state.mean()),
    )?;

    let mut traj = StateTrajectory {
        times: Vec::with_capacity(samples.len()),
        states: Vec::with_capacity(samples.len()),
        residuals: Vec::with_capacity(samples.len()),
        drift: Vec::with_capacity(samples.len()),
    };
    for s in samples {
        let sigma = congruence(&s.lambda, sigma0.matrix())?;
        let covariance =
            CovarianceMatrix::new(sigma, sigma0.hbar()).map_err(|_| Error::BlowUp { t: s.t })?;
        let mean = s.mean.expect("mean integrated alongside");
        traj.times.push(s.t);
        traj.states.push(GaussianState::new(covariance, mean)?);
        traj.residuals.push(symplectic_residual(&s.lambda));
        traj.drift.push(s.drift);
    }
    Ok(traj)
}

/// Formats a value for machine-readable output: 17 significant digits, no
/// negative zero.
pub fn format_record_value(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// Column names of the trajectory records.
pub fn record_columns(n_modes: usize) -> Vec<String> {
    let labels: Vec<String> = (1..=n_modes)
        .map(|k| format!("p{k}"))
        .chain((1..=n_modes).map(|k| format!("q{k}")))
        .collect();
    let mut cols = vec!["t".to_string()];
    cols.extend(labels.iter().map(|l| format!("mean_{l}")));
    for i in 0..labels.len() {
        for j in i..labels.len() {
            cols.push(format!("sigma_{}_{}", labels[i], labels[j]));
        }
    }
    cols.push("det_sigma".into());
    cols.push("symplectic_residual".into());
    cols
}

/// Writes a trajectory as comma-separated records: a `#` line with the
/// ordering, mode count and `ħ`, a header row, then every `stride`-th sample
/// (the final sample is always written).
pub fn write_records<W: Write>(
    mut out: W,
    traj: &StateTrajectory,
    stride: usize,
) -> io::Result<()> {
    let first = traj.states.first().expect("trajectories are never empty");
    let n = first.covariance().n_modes();
    writeln!(
        out,
        "# ordering={ORDERING_TAG} n_modes={n} hbar={}",
        format_record_value(first.covariance().hbar())
    )?;
    writeln!(out, "{}", record_columns(n).join(","))?;
    let stride = stride.max(1);
    let last = traj.states.len() - 1;
    for i in (0..=last).filter(|i| i % stride == 0 || *i == last) {
        let state = &traj.states[i];
        let sigma = state.covariance().matrix();
        let mut row = vec![format_record_value(traj.times[i])];
        row.extend(state.mean().iter().map(|x| format_record_value(*x)));
        for r in 0..2 * n {
            for c in r..2 * n {
                row.push(format_record_value(sigma[(r, c)]));
            }
        }
        row.push(format_record_value(state.covariance().determinant()));
        row.push(format_record_value(traj.residuals[i]));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::TimeFunction;
    use crate::gaussian_state::{ccs_covariance, fock_covariance, robertson_defect};
    use crate::symplectic::PhaseSpaceLayout;
    use std::f64::consts::PI;

    fn m(rows: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, rows, v)
    }

    fn ho() -> QuadraticHamiltonian {
        QuadraticHamiltonian::stationary(&m(1, &[0.5]), &m(1, &[0.0]), &m(1, &[0.5])).unwrap()
    }

    fn free_particle() -> QuadraticHamiltonian {
        QuadraticHamiltonian::stationary(&m(1, &[0.5]), &m(1, &[0.0]), &m(1, &[0.0])).unwrap()
    }

    fn id1() -> SymplecticMatrix {
        SymplecticMatrix::identity(PhaseSpaceLayout::new(1).unwrap())
    }

    #[test]
    fn grid_lands_on_end_point() {
        assert_eq!(step_grid(0.0, 10.0, 1e-3).unwrap().0, 10_000);
        assert_eq!(step_grid(0.0, 1.0, 0.3).unwrap().0, 4);
        assert_eq!(step_grid(1.0, 1.0, 0.1).unwrap().0, 0);
        assert!(step_grid(0.0, 1.0, 0.0).is_err());
        assert!(step_grid(0.0, 1.0, -1.0).is_err());
        assert!(step_grid(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn quarter_turn() {
        let traj = evolve_symplectic(&ho(), 0.0, PI / 2.0, 1e-3, &id1(), Side::Forward).unwrap();
        let expected = m(2, &[0.0, -1.0, 1.0, 0.0]);
        assert!(max_abs(&(traj.last().matrix() - expected)) < 1e-8);
        assert_eq!(traj.lambdas[0], id1());
        assert_eq!(*traj.times.last().unwrap(), PI / 2.0);
    }

    #[test]
    fn free_particle_shear() {
        for t in [0.5, 2.0, 5.0] {
            let traj =
                evolve_symplectic(&free_particle(), 0.0, t, 1e-3, &id1(), Side::Forward).unwrap();
            let expected = m(2, &[1.0, 0.0, t, 1.0]);
            assert!(max_abs(&(traj.last().matrix() - expected)) < 1e-10);
        }
    }

    #[test]
    fn zero_hamiltonian_keeps_initial_matrix() {
        let zero =
            QuadraticHamiltonian::stationary(&m(1, &[0.0]), &m(1, &[0.0]), &m(1, &[0.0])).unwrap();
        let start = SymplecticMatrix::new(m(2, &[2.0, 0.0, 0.0, 0.5]), 1e-12).unwrap();
        let traj = evolve_symplectic(&zero, 0.0, 3.0, 0.1, &start, Side::Forward).unwrap();
        assert!(traj.lambdas.iter().all(|l| l.matrix() == start.matrix()));
    }

    #[test]
    fn target_side_is_inverse_rotation() {
        let traj = evolve_symplectic(&ho(), 0.0, 1.3, 1e-3, &id1(), Side::Target).unwrap();
        let target = OscillatorTarget::unit(1, 1.0).unwrap();
        let expected = ho_rotation(&target, -1.3);
        assert!(max_abs(&(traj.last().matrix() - expected.matrix())) < 1e-10);
    }

    #[test]
    fn stationary_closed_forms() {
        let target = OscillatorTarget::new(vec![2.0, 0.5], vec![1.5, 3.0], 1.0).unwrap();
        let h = ho_grand_matrix(&target);
        for t in [0.0, 0.4, 2.0, 7.5] {
            let a = stationary_propagator(&h, t).unwrap();
            let b = ho_rotation(&target, t);
            assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-10, "t={t}");
            assert!(a.residual() < 1e-10);
        }
        let unit = ho_grand_matrix(&OscillatorTarget::unit(1, 1.0).unwrap());
        let t = 0.7;
        let r = stationary_propagator(&unit, t).unwrap();
        let expected = m(2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        assert!(max_abs(&(r.matrix() - expected)) < 1e-14);
        let p = stationary_propagator(&unit, 0.3).unwrap();
        let q = stationary_propagator(&unit, 0.9).unwrap();
        let pq = p.compose(&q).unwrap();
        assert!(
            max_abs(&(pq.matrix() - stationary_propagator(&unit, 1.2).unwrap().matrix())) < 1e-10
        );
    }

    #[test]
    fn quarter_turn_rotation_swaps_coordinates() {
        let r = ho_rotation(&OscillatorTarget::unit(1, 1.0).unwrap(), PI / 2.0);
        let v = r.apply(&DVector::from_row_slice(&[0.3, 0.8])).unwrap();
        // p' = -q, q' = p
        assert!((v[0] + 0.8).abs() < 1e-15 && (v[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn diagonalizing_transform_of_target_is_identity() {
        let target = OscillatorTarget::new(vec![1.0, 2.0], vec![0.5, 1.5], 1.0).unwrap();
        let h = ho_grand_matrix(&target);
        for t in [0.0, 1.0, 4.2] {
            let d = diagonalizing_transform(&h, &target, t).unwrap();
            assert!(max_abs(&(d.matrix() - DMatrix::identity(4, 4))) < 1e-10);
        }
    }

    #[test]
    fn free_particle_transform_maps_evolutions() {
        let target = OscillatorTarget::unit(1, 1.0).unwrap();
        let h = grand_matrix(&free_particle(), 0.0).unwrap();
        let t = 1.0;
        let transform = diagonalizing_transform(&h, &target, t).unwrap();
        assert!(transform.residual() < 1e-10);

        // σ evolved under H equals (Tσ0T^T) evolved under H_ho.
        let sigma0 = m(2, &[0.8, 0.1, 0.1, 0.6]);
        let under_h =
            evolve_symplectic(&free_particle(), 0.0, t, 1e-3, &id1(), Side::Forward).unwrap();
        let under_ho = evolve_symplectic(&ho(), 0.0, t, 1e-3, &id1(), Side::Forward).unwrap();
        let lhs = congruence(under_h.last().matrix(), &sigma0).unwrap();
        let pushed = congruence(transform.matrix(), &sigma0).unwrap();
        let rhs = congruence(under_ho.last().matrix(), &pushed).unwrap();
        assert!(max_abs(&(lhs - rhs)) < 1e-7);
    }

    #[test]
    fn ccs_is_stationary_under_matching_oscillator() {
        let target = OscillatorTarget::new(vec![2.0], vec![1.5], 1.0).unwrap();
        let h = QuadraticHamiltonian::from_grand_matrix(&ho_grand_matrix(&target));
        let state = GaussianState::centered(ccs_covariance(&target));
        let traj = evolve_state(&state, &h, 0.0, 2.0 * PI, 1e-3).unwrap();
        let diff = traj.last().covariance().matrix() - state.covariance().matrix();
        assert!(max_abs(&diff) < 1e-7);
    }

    #[test]
    fn free_particle_spreads_ccs() {
        let target = OscillatorTarget::unit(1, 1.0).unwrap();
        let state = GaussianState::centered(ccs_covariance(&target));
        let traj = evolve_state(&state, &free_particle(), 0.0, 2.0, 1e-3).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states).step_by(250) {
            let expected = m(2, &[0.5, 0.5 * t, 0.5 * t, 0.5 * (1.0 + t * t)]);
            assert!(max_abs(&(s.covariance().matrix() - expected)) < 1e-10);
            assert!((s.covariance().determinant() - 0.25).abs() < 1e-10);
        }
    }

    #[test]
    fn fock_defect_is_conserved() {
        let target = OscillatorTarget::unit(1, 1.0).unwrap();
        let state = GaussianState::centered(fock_covariance(&[1], &target).unwrap());
        let traj = evolve_state(&state, &ho(), 0.0, 5.0, 1e-3).unwrap();
        for s in &traj.states {
            assert!((robertson_defect(s.covariance()) - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_force_moves_the_mean_only() {
        // H = p^2/2 + f q: classically p(t) = p0 - f t, q(t) = q0 + p0 t - f t^2 / 2.
        let f = 0.7;
        let h = free_particle()
            .with_linear(
                vec![TimeFunction::constant(0.0)],
                vec![TimeFunction::constant(f)],
            )
            .unwrap();
        let target = OscillatorTarget::unit(1, 1.0).unwrap();
        let (p0, q0) = (0.4, -1.0);
        let state = GaussianState::new(ccs_covariance(&target), DVector::from_row_slice(&[p0, q0]))
            .unwrap();
        let with = evolve_state(&state, &h, 0.0, 3.0, 1e-2).unwrap();
        let without = evolve_state(&state, &free_particle(), 0.0, 3.0, 1e-2).unwrap();
        for (i, t) in with.times.iter().enumerate() {
            let mean = with.states[i].mean();
            assert!((mean[0] - (p0 - f * t)).abs() < 1e-12);
            assert!((mean[1] - (q0 + p0 * t - 0.5 * f * t * t)).abs() < 1e-12);
            let diff =
                with.states[i].covariance().matrix() - without.states[i].covariance().matrix();
            assert!(max_abs(&diff) < 1e-9);
        }
    }

    #[test]
    fn momentum_drive_shifts_position() {
        let delta = 0.25;
        let h = free_particle()
            .with_linear(
                vec![TimeFunction::constant(delta)],
                vec![TimeFunction::constant(0.0)],
            )
            .unwrap();
        let target = OscillatorTarget::unit(1, 1.0).unwrap();
        let state = GaussianState::centered(ccs_covariance(&target));
        let traj = evolve_state(&state, &h, 0.0, 2.0, 0.1).unwrap();
        let mean = traj.last().mean();
        assert!(mean[0].abs() < 1e-14 && (mean[1] - 2.0 * delta).abs() < 1e-12);
    }

    #[test]
    fn blow_up_is_reported() {
        let h = QuadraticHamiltonian::stationary(&m(1, &[0.0]), &m(1, &[300.0]), &m(1, &[0.0]))
            .unwrap();
        match evolve_symplectic(&h, 0.0, 2.0, 1e-2, &id1(), Side::Forward) {
            Err(Error::BlowUp { t }) => assert!(t > 0.0 && t <= 2.0),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn records_are_stable_and_complete() {
        let target = OscillatorTarget::unit(1, 1.0).unwrap();
        let state = GaussianState::centered(ccs_covariance(&target));
        let traj = evolve_state(&state, &free_particle(), 0.0, 0.3, 0.1).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, &traj, 2).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "# ordering=pq n_modes=1 hbar=1.0000000000000000e0"
        );
        assert_eq!(
            lines[1],
            "t,mean_p1,mean_q1,sigma_p1_p1,sigma_p1_q1,sigma_q1_q1,det_sigma,symplectic_residual"
        );
        // samples 0, 2 and the final one (3)
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("0.0000000000000000e0,0.0000000000000000e0,"));
        assert!(!text.contains("-0.0000000000000000e0"));
        assert_eq!(format_record_value(-0.0), "0.0000000000000000e0");
    }
}
