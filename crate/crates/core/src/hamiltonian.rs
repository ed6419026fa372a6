//! Quadratic Hamiltonians `H(t) = p A p + p B q + q B^T p + q C q` (plus optional
//! linear terms `d·p + e·q`) and the generators of their symplectic flows.

use nalgebra::{DMatrix, DVector};

use crate::coefficient::TimeFunction;
use crate::error::{Error, Result};
use crate::symplectic::{j_times, symmetrize, PhaseSpaceLayout};

/// Symmetric grand matrix `[[A, B], [B^T, C]]` evaluated at `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrandMatrix {
    matrix: DMatrix<f64>,
    time: f64,
}

impl GrandMatrix {
    /// Wraps a matrix as a time-independent grand matrix; the input is symmetrized.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        PhaseSpaceLayout::for_matrix(&matrix)?;
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            matrix: symmetrize(&matrix),
            time: 0.0,
        })
    }

    pub fn from_blocks(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, time: f64) -> Self {
        let n = a.nrows();
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        h.view_mut((0, 0), (n, n)).copy_from(a);
        h.view_mut((0, n), (n, n)).copy_from(b);
        h.view_mut((n, 0), (n, n)).copy_from(&b.transpose());
        h.view_mut((n, n), (n, n)).copy_from(c);
        Self {
            matrix: symmetrize(&h),
            time,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn layout(&self) -> PhaseSpaceLayout {
        PhaseSpaceLayout::for_matrix(&self.matrix).expect("validated on construction")
    }
}

/// `N` uncoupled oscillators `Σ_k (p_k^2 / m_k + m_k ω_k^2 q_k^2) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorTarget {
    masses: Vec<f64>,
    frequencies: Vec<f64>,
    hbar: f64,
}

impl OscillatorTarget {
    pub fn new(masses: Vec<f64>, frequencies: Vec<f64>, hbar: f64) -> Result<Self> {
        if masses.is_empty() || masses.len() != frequencies.len() {
            return Err(Error::InvalidParameter(format!(
                "need one mass and one frequency per mode (got {} masses, {} frequencies)",
                masses.len(),
                frequencies.len()
            )));
        }
        if let Some(m) = masses.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "mass must be positive, got {m}"
            )));
        }
        if let Some(w) = frequencies.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "frequency must be positive, got {w}"
            )));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        Ok(Self {
            masses,
            frequencies,
            hbar,
        })
    }

    /// All masses and frequencies equal to one.
    pub fn unit(n_modes: usize, hbar: f64) -> Result<Self> {
        Self::new(vec![1.0; n_modes], vec![1.0; n_modes], hbar)
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn n_modes(&self) -> usize {
        self.masses.len()
    }

    pub fn layout(&self) -> PhaseSpaceLayout {
        PhaseSpaceLayout::new(self.n_modes()).expect("non-empty by construction")
    }
}

/// `A = diag(1/(2 m_k))`, `B = 0`, `C = diag(m_k ω_k^2 / 2)`.
pub fn ho_grand_matrix(target: &OscillatorTarget) -> GrandMatrix {
    let n = target.n_modes();
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    for (k, (m, w)) in target.masses.iter().zip(&target.frequencies).enumerate() {
        h[(k, k)] = 0.5 / m;
        h[(n + k, n + k)] = 0.5 * m * w * w;
    }
    GrandMatrix {
        matrix: h,
        time: 0.0,
    }
}

/// Linear terms `d(t)·p + e(t)·q`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearTerms {
    pub d: Vec<TimeFunction>,
    pub e: Vec<TimeFunction>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    n_modes: usize,
    // row-major N x N
    a: Vec<TimeFunction>,
    b: Vec<TimeFunction>,
    c: Vec<TimeFunction>,
    linear: Option<LinearTerms>,
}

impl QuadraticHamiltonian {
    /// Blocks given as row-major `N x N` arrays of time functions.
    pub fn from_functions(
        n_modes: usize,
        a: Vec<TimeFunction>,
        b: Vec<TimeFunction>,
        c: Vec<TimeFunction>,
    ) -> Result<Self> {
        PhaseSpaceLayout::new(n_modes)?;
        for (name, block) in [("A", &a), ("B", &b), ("C", &c)] {
            if block.len() != n_modes * n_modes {
                return Err(Error::InvalidParameter(format!(
                    "block {name} needs {} entries, got {}",
                    n_modes * n_modes,
                    block.len()
                )));
            }
        }
        Ok(Self {
            n_modes,
            a,
            b,
            c,
            linear: None,
        })
    }

    /// Time-independent blocks.
    pub fn stationary(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        for m in [a, b, c] {
            if m.shape() != (n, n) {
                return Err(crate::error::shape_error(
                    format!("{n}x{n}"),
                    m.nrows(),
                    m.ncols(),
                ));
            }
        }
        let to_fns = |m: &DMatrix<f64>| -> Vec<TimeFunction> {
            (0..n * n)
                .map(|i| TimeFunction::constant(m[(i / n, i % n)]))
                .collect()
        };
        Self::from_functions(n, to_fns(a), to_fns(b), to_fns(c))
    }

    /// Same blocks as a time-independent grand matrix.
    pub fn from_grand_matrix(h: &GrandMatrix) -> Self {
        let n = h.layout().n_modes();
        let m = h.matrix();
        let a = m.view((0, 0), (n, n)).into_owned();
        let b = m.view((0, n), (n, n)).into_owned();
        let c = m.view((n, n), (n, n)).into_owned();
        Self::stationary(&a, &b, &c).expect("square blocks")
    }

    /// Blocks sampled at `times`, interpolated with natural cubic splines.
    pub fn tabulated(
        times: &[f64],
        a: &[DMatrix<f64>],
        b: &[DMatrix<f64>],
        c: &[DMatrix<f64>],
    ) -> Result<Self> {
        let n = a
            .first()
            .map(|m| m.nrows())
            .ok_or_else(|| Error::InvalidParameter("empty tabulation".into()))?;
        let splines = |name: &str, samples: &[DMatrix<f64>]| -> Result<Vec<TimeFunction>> {
            if samples.len() != times.len() {
                return Err(Error::InvalidParameter(format!(
                    "block {name} has {} samples for {} times",
                    samples.len(),
                    times.len()
                )));
            }
            if let Some(m) = samples.iter().find(|m| m.shape() != (n, n)) {
                return Err(crate::error::shape_error(
                    format!("{n}x{n}"),
                    m.nrows(),
                    m.ncols(),
                ));
            }
            (0..n * n)
                .map(|i| {
                    let values = samples.iter().map(|m| m[(i / n, i % n)]).collect();
                    TimeFunction::tabulated(times.to_vec(), values)
                })
                .collect()
        };
        Self::from_functions(n, splines("A", a)?, splines("B", b)?, splines("C", c)?)
    }

    pub fn with_linear(mut self, d: Vec<TimeFunction>, e: Vec<TimeFunction>) -> Result<Self> {
        if d.len() != self.n_modes || e.len() != self.n_modes {
            return Err(Error::InvalidParameter(format!(
                "linear terms need {} entries each (got d: {}, e: {})",
                self.n_modes,
                d.len(),
                e.len()
            )));
        }
        self.linear = Some(LinearTerms { d, e });
        Ok(self)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn layout(&self) -> PhaseSpaceLayout {
        PhaseSpaceLayout::new(self.n_modes).expect("validated on construction")
    }

    pub fn linear(&self) -> Option<&LinearTerms> {
        self.linear.as_ref()
    }

    /// Entry `(row, col)` of block `A`, `B` or `C`.
    pub fn block_entry(&self, block: Block, row: usize, col: usize) -> &TimeFunction {
        let entries = match block {
            Block::A => &self.a,
            Block::B => &self.b,
            Block::C => &self.c,
        };
        &entries[row * self.n_modes + col]
    }

    /// True when no coefficient depends on time (linear terms included).
    pub fn is_stationary(&self) -> bool {
        let linear = self.linear.iter().flat_map(|l| l.d.iter().chain(&l.e));
        self.a
            .iter()
            .chain(&self.b)
            .chain(&self.c)
            .chain(linear)
            .all(TimeFunction::is_constant)
    }

    /// Intersection of the tabulation ranges, if any coefficient is tabulated.
    pub fn time_range(&self) -> Option<(f64, f64)> {
        let linear = self.linear.iter().flat_map(|l| l.d.iter().chain(&l.e));
        self.a
            .iter()
            .chain(&self.b)
            .chain(&self.c)
            .chain(linear)
            .filter_map(TimeFunction::range)
            .reduce(|(s0, e0), (s1, e1)| (s0.max(s1), e0.min(e1)))
    }

    fn eval_block(&self, entries: &[TimeFunction], t: f64) -> Result<DMatrix<f64>> {
        let n = self.n_modes;
        let mut m = DMatrix::zeros(n, n);
        for (i, f) in entries.iter().enumerate() {
            m[(i / n, i % n)] = f.eval(t)?;
        }
        Ok(m)
    }

    /// `(A(t), B(t), C(t))` with `A` and `C` symmetrized.
    pub fn blocks_at(&self, t: f64) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
        let a = symmetrize(&self.eval_block(&self.a, t)?);
        let b = self.eval_block(&self.b, t)?;
        let c = symmetrize(&self.eval_block(&self.c, t)?);
        Ok((a, b, c))
    }

    pub fn without_linear(&self) -> Self {
        Self {
            linear: None,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    A,
    B,
    C,
}

pub fn grand_matrix(h: &QuadraticHamiltonian, t: f64) -> Result<GrandMatrix> {
    let (a, b, c) = h.blocks_at(t)?;
    let g = GrandMatrix::from_blocks(&a, &b, &c, t);
    if g.matrix.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(g)
}

/// Generator of the forward flow, `-2 J H(t)`.
pub fn generator_forward(h: &QuadraticHamiltonian, t: f64) -> Result<DMatrix<f64>> {
    Ok(forward_generator_of(&grand_matrix(h, t)?))
}

pub fn forward_generator_of(h: &GrandMatrix) -> DMatrix<f64> {
    j_times(h.matrix()) * -2.0
}

/// Generator on the target side, `2 J H'`.
pub fn generator_target(target_grand: &GrandMatrix) -> DMatrix<f64> {
    j_times(target_grand.matrix()) * 2.0
}

/// Mean-vector drive `g(t) = -J (d(t), e(t)) = (-e(t), d(t))` produced by the
/// linear terms. Zero when the Hamiltonian has none.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanDrive {
    n_modes: usize,
    linear: Option<LinearTerms>,
}

impl MeanDrive {
    pub fn eval(&self, t: f64) -> Result<DVector<f64>> {
        let n = self.n_modes;
        let mut g = DVector::zeros(2 * n);
        if let Some(lin) = &self.linear {
            for k in 0..n {
                g[k] = -lin.e[k].eval(t)?;
                g[n + k] = lin.d[k].eval(t)?;
            }
        }
        Ok(g)
    }

    pub fn is_zero(&self) -> bool {
        self.linear.is_none()
    }
}

/// Splits off the linear terms: the quadratic part drives the covariance, the
/// returned drive enters only the mean equation `d<Q>/dt = F(t) <Q> + g(t)`.
pub fn displace_out_linear_terms(h: &QuadraticHamiltonian) -> (QuadraticHamiltonian, MeanDrive) {
    let drive = MeanDrive {
        n_modes: h.n_modes,
        linear: h.linear.clone(),
    };
    (h.without_linear(), drive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::max_abs;
    use std::collections::HashMap;

    fn m(rows: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, rows, v)
    }

    fn ho() -> QuadraticHamiltonian {
        QuadraticHamiltonian::stationary(&m(1, &[0.5]), &m(1, &[0.0]), &m(1, &[0.5])).unwrap()
    }

    fn free_particle() -> QuadraticHamiltonian {
        QuadraticHamiltonian::stationary(&m(1, &[0.5]), &m(1, &[0.0]), &m(1, &[0.0])).unwrap()
    }

    #[test]
    fn grand_matrix_examples() {
        assert_eq!(
            grand_matrix(&ho(), 0.0).unwrap().matrix(),
            &m(2, &[0.5, 0.0, 0.0, 0.5])
        );
        assert_eq!(
            grand_matrix(&free_particle(), 3.0).unwrap().matrix(),
            &m(2, &[0.5, 0.0, 0.0, 0.0])
        );
    }

    #[test]
    fn grand_matrix_is_exactly_symmetric() {
        let p = HashMap::new();
        let f = |s: &str| TimeFunction::parse(s, &p).unwrap();
        // Deliberately asymmetric A and C inputs.
        let h = QuadraticHamiltonian::from_functions(
            2,
            vec![f("1"), f("0.3*t"), f("0.1"), f("2")],
            vec![f("0.2"), f("sin(t)"), f("-1"), f("0.4")],
            vec![f("1"), f("cos(t)"), f("0.7"), f("1/3")],
        )
        .unwrap();
        for t in [0.0, 0.7, 2.0] {
            let g = grand_matrix(&h, t).unwrap();
            assert_eq!(g.matrix(), &g.matrix().transpose());
            assert_eq!(g.time(), t);
        }
    }

    #[test]
    fn oscillator_targets() {
        let unit = OscillatorTarget::unit(1, 1.0).unwrap();
        assert_eq!(
            ho_grand_matrix(&unit).matrix(),
            &m(2, &[0.5, 0.0, 0.0, 0.5])
        );
        let heavy = OscillatorTarget::new(vec![2.0], vec![3.0], 1.0).unwrap();
        assert_eq!(
            ho_grand_matrix(&heavy).matrix(),
            &m(2, &[0.25, 0.0, 0.0, 9.0])
        );
        let two = OscillatorTarget::new(vec![1.0, 1.0], vec![1.0, 2.0], 1.0).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_row_slice(&[0.5, 0.5, 0.5, 2.0]));
        assert_eq!(ho_grand_matrix(&two).matrix(), &expected);
    }

    #[test]
    fn oscillator_target_validation() {
        assert!(OscillatorTarget::new(vec![0.0], vec![1.0], 1.0).is_err());
        assert!(OscillatorTarget::new(vec![1.0], vec![-1.0], 1.0).is_err());
        assert!(OscillatorTarget::new(vec![1.0], vec![1.0, 2.0], 1.0).is_err());
        assert!(OscillatorTarget::new(vec![1.0], vec![1.0], 0.0).is_err());
    }

    #[test]
    fn forward_generator_examples() {
        assert_eq!(
            generator_forward(&ho(), 0.0).unwrap(),
            m(2, &[0.0, -1.0, 1.0, 0.0])
        );
        assert_eq!(
            generator_forward(&free_particle(), 0.0).unwrap(),
            m(2, &[0.0, 0.0, 1.0, 0.0])
        );
        let zero =
            QuadraticHamiltonian::stationary(&m(1, &[0.0]), &m(1, &[0.0]), &m(1, &[0.0])).unwrap();
        assert_eq!(generator_forward(&zero, 0.0).unwrap(), DMatrix::zeros(2, 2));
    }

    #[test]
    fn forward_generator_block_form() {
        // 2 [[-B^T, -C], [A, B]]
        let a = m(2, &[1.0, 0.2, 0.2, 0.5]);
        let b = m(2, &[0.1, -0.3, 0.4, 0.2]);
        let c = m(2, &[2.0, -0.1, -0.1, 0.7]);
        let h = QuadraticHamiltonian::stationary(&a, &b, &c).unwrap();
        let f = generator_forward(&h, 0.0).unwrap();
        let mut expected = DMatrix::zeros(4, 4);
        expected
            .view_mut((0, 0), (2, 2))
            .copy_from(&(-b.transpose()));
        expected.view_mut((0, 2), (2, 2)).copy_from(&(-&c));
        expected.view_mut((2, 0), (2, 2)).copy_from(&a);
        expected.view_mut((2, 2), (2, 2)).copy_from(&b);
        assert!(max_abs(&(f - expected * 2.0)) < 1e-15);
    }

    #[test]
    fn target_generator_examples() {
        let g = ho_grand_matrix(&OscillatorTarget::unit(1, 1.0).unwrap());
        assert_eq!(generator_target(&g), m(2, &[0.0, 1.0, -1.0, 0.0]));
        assert_eq!(
            generator_target(&GrandMatrix::new(DMatrix::zeros(2, 2)).unwrap()),
            DMatrix::zeros(2, 2)
        );
    }

    #[test]
    fn tabulated_range_is_enforced() {
        let times = [0.0, 1.0, 2.0];
        let a: Vec<_> = times.iter().map(|_| m(1, &[0.5])).collect();
        let c: Vec<_> = times.iter().map(|t| m(1, &[0.5 + 0.1 * t])).collect();
        let b: Vec<_> = times.iter().map(|_| m(1, &[0.0])).collect();
        let h = QuadraticHamiltonian::tabulated(&times, &a, &b, &c).unwrap();
        assert_eq!(h.time_range(), Some((0.0, 2.0)));
        assert!(!h.is_stationary());
        assert!((grand_matrix(&h, 1.5).unwrap().matrix()[(1, 1)] - 0.65).abs() < 1e-14);
        assert!(matches!(
            grand_matrix(&h, 2.5),
            Err(Error::TimeOutOfRange { .. })
        ));
    }

    #[test]
    fn drive_examples() {
        let (homog, drive) = displace_out_linear_terms(&ho());
        assert!(drive.is_zero());
        assert_eq!(drive.eval(1.0).unwrap(), DVector::zeros(2));
        assert_eq!(homog, ho());

        let pushed = free_particle()
            .with_linear(
                vec![TimeFunction::constant(0.7)],
                vec![TimeFunction::constant(0.0)],
            )
            .unwrap();
        let (homog, drive) = displace_out_linear_terms(&pushed);
        assert!(homog.linear().is_none());
        assert_eq!(
            drive.eval(0.0).unwrap(),
            DVector::from_row_slice(&[0.0, 0.7])
        );

        let force = free_particle()
            .with_linear(
                vec![TimeFunction::constant(0.0)],
                vec![TimeFunction::constant(2.0)],
            )
            .unwrap();
        let (_, drive) = displace_out_linear_terms(&force);
        assert_eq!(
            drive.eval(0.0).unwrap(),
            DVector::from_row_slice(&[-2.0, 0.0])
        );
    }
}
