//! Phase-space linear algebra in the momenta-first ordering.
//!
//! A phase-space vector for `N` modes is laid out as `(p_1, .., p_N, q_1, .., q_N)`,
//! so index `k` holds `p_k` and index `N + k` holds `q_k`. Every matrix in this
//! crate is `2N x 2N` in that ordering.

use nalgebra::{DMatrix, DVector};

use crate::error::{shape_error, Error, Result};

/// Default absolute max-norm tolerance on `M J M^T - J`.
pub const DEFAULT_SYMPLECTIC_TOL: f64 = 1e-9;

/// Ordering tag carried by every file format: momenta first, then coordinates.
pub const ORDERING_TAG: &str = "pq";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhaseSpaceLayout {
    n_modes: usize,
}

impl PhaseSpaceLayout {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidParameter("n_modes must be at least 1".into()));
        }
        Ok(Self { n_modes })
    }

    /// Layout matching a square matrix of even dimension.
    pub fn for_matrix(m: &DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows != cols || rows == 0 || rows % 2 != 0 {
            return Err(shape_error("square matrix of even dimension", rows, cols));
        }
        Ok(Self { n_modes: rows / 2 })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn p_index(&self, mode: usize) -> usize {
        mode
    }

    pub fn q_index(&self, mode: usize) -> usize {
        self.n_modes + mode
    }

    pub fn check_matrix(&self, m: &DMatrix<f64>) -> Result<()> {
        let d = self.dim();
        if m.shape() != (d, d) {
            return Err(shape_error(format!("{d}x{d}"), m.nrows(), m.ncols()));
        }
        Ok(())
    }

    pub fn check_vector(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(shape_error(
                format!("vector of length {}", self.dim()),
                v.len(),
                1,
            ));
        }
        Ok(())
    }

    /// Column labels `p1..pN, q1..qN`.
    pub fn labels(&self) -> Vec<String> {
        (1..=self.n_modes)
            .map(|k| format!("p{k}"))
            .chain((1..=self.n_modes).map(|k| format!("q{k}")))
            .collect()
    }
}

/// The standard form `J = [[0, I], [-I, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn standard(layout: PhaseSpaceLayout) -> Self {
        Self {
            matrix: standard_form_matrix(layout.n_modes()),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

pub(crate) fn standard_form_matrix(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = 1.0;
        j[(n + k, k)] = -1.0;
    }
    j
}

/// `J * m` without forming `J`.
pub(crate) fn j_times(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows() / 2;
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for c in 0..m.ncols() {
        for k in 0..n {
            out[(k, c)] = m[(n + k, c)];
            out[(n + k, c)] = -m[(k, c)];
        }
    }
    out
}

/// `m * J` without forming `J`.
pub(crate) fn times_j(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols() / 2;
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        for k in 0..n {
            out[(r, k)] = -m[(r, n + k)];
            out[(r, n + k)] = m[(r, k)];
        }
    }
    out
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Max-norm of `M J M^T - J`.
pub(crate) fn symplectic_residual(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows() / 2;
    let mjmt = times_j(m) * m.transpose();
    max_abs(&(mjmt - standard_form_matrix(n)))
}

/// Outcome of a symplecticity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticCheck {
    pub is_symplectic: bool,
    pub residual: f64,
}

/// Tests `M J M^T = J` in the max norm.
pub fn is_symplectic(m: &DMatrix<f64>, tol: f64) -> Result<SymplecticCheck> {
    PhaseSpaceLayout::for_matrix(m)?;
    let residual = symplectic_residual(m);
    Ok(SymplecticCheck {
        is_symplectic: residual <= tol,
        residual,
    })
}

/// A real `2N x 2N` matrix that passed the symplecticity test.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    matrix: DMatrix<f64>,
    residual: f64,
}

impl SymplecticMatrix {
    /// Validates `m` against `tol`.
    pub fn new(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let check = is_symplectic(&m, tol)?;
        if !check.is_symplectic {
            return Err(Error::NotSymplectic {
                residual: check.residual,
                tol,
            });
        }
        Ok(Self {
            matrix: m,
            residual: check.residual,
        })
    }

    pub fn identity(layout: PhaseSpaceLayout) -> Self {
        Self {
            matrix: DMatrix::identity(layout.dim(), layout.dim()),
            residual: 0.0,
        }
    }

    /// Wraps a matrix with a measured residual but no tolerance gate. Used by the
    /// integrators, which record drift rather than reject.
    pub(crate) fn measured(m: DMatrix<f64>) -> Self {
        let residual = symplectic_residual(&m);
        Self {
            matrix: m,
            residual,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn layout(&self) -> PhaseSpaceLayout {
        PhaseSpaceLayout {
            n_modes: self.matrix.nrows() / 2,
        }
    }

    /// `Λ^{-1} = -J Λ^T J`.
    pub fn inverse(&self) -> Self {
        let inv = -times_j(&j_times(&self.matrix.transpose()));
        Self::measured(inv)
    }

    /// `self * other`.
    pub fn compose(&self, other: &SymplecticMatrix) -> Result<Self> {
        self.layout().check_matrix(other.matrix())?;
        Ok(Self::measured(&self.matrix * &other.matrix))
    }

    pub fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.layout().check_vector(v)?;
        Ok(&self.matrix * v)
    }

    /// The four `N x N` blocks `(λ_pp, λ_pq, λ_qp, λ_qq)`.
    pub fn blocks(&self) -> [DMatrix<f64>; 4] {
        split_blocks(&self.matrix)
    }
}

pub(crate) fn split_blocks(m: &DMatrix<f64>) -> [DMatrix<f64>; 4] {
    let n = m.nrows() / 2;
    [
        m.view((0, 0), (n, n)).into_owned(),
        m.view((0, n), (n, n)).into_owned(),
        m.view((n, 0), (n, n)).into_owned(),
        m.view((n, n), (n, n)).into_owned(),
    ]
}

/// Residuals of the block form of the symplectic condition:
///
/// * `λ_qq λ_pp^T - λ_qp λ_pq^T - I`
/// * `λ_qq λ_qp^T - λ_qp λ_qq^T`
/// * `λ_pq λ_pp^T - λ_pp λ_pq^T`
#[derive(Debug, Clone, PartialEq)]
pub struct BlockResiduals {
    pub unit: DMatrix<f64>,
    pub qq_qp: DMatrix<f64>,
    pub pq_pp: DMatrix<f64>,
}

impl BlockResiduals {
    /// Max-norms of the three residual matrices, in declaration order.
    pub fn norms(&self) -> [f64; 3] {
        [
            max_abs(&self.unit),
            max_abs(&self.qq_qp),
            max_abs(&self.pq_pp),
        ]
    }
}

pub fn block_conditions(lambda: &DMatrix<f64>) -> Result<BlockResiduals> {
    let layout = PhaseSpaceLayout::for_matrix(lambda)?;
    let [pp, pq, qp, qq] = split_blocks(lambda);
    let eye = DMatrix::<f64>::identity(layout.n_modes(), layout.n_modes());
    Ok(BlockResiduals {
        unit: &qq * pp.transpose() - &qp * pq.transpose() - eye,
        qq_qp: &qq * qp.transpose() - &qp * qq.transpose(),
        pq_pp: &pq * pp.transpose() - &pp * pq.transpose(),
    })
}

/// `Λ M Λ^T`, symmetrized.
pub fn congruence(lambda: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let layout = PhaseSpaceLayout::for_matrix(lambda)?;
    layout.check_matrix(m)?;
    Ok(symmetrize(&(lambda * m * lambda.transpose())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(v))
    }

    #[test]
    fn standard_form_one_mode() {
        let j = SymplecticForm::standard(PhaseSpaceLayout::new(1).unwrap()).into_matrix();
        assert_eq!(j, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        assert_eq!(&j * &j, -DMatrix::<f64>::identity(2, 2));
    }

    #[test]
    fn standard_form_antisymmetric_unit_determinant() {
        let j = SymplecticForm::standard(PhaseSpaceLayout::new(2).unwrap()).into_matrix();
        assert_eq!(j.transpose(), -&j);
        assert!((j.determinant() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_modes_rejected() {
        assert!(PhaseSpaceLayout::new(0).is_err());
    }

    #[test]
    fn j_helpers_match_dense_products() {
        let m = DMatrix::from_fn(4, 4, |i, j| (i * 4 + j) as f64 - 3.5);
        let j = standard_form_matrix(2);
        assert_eq!(j_times(&m), &j * &m);
        assert_eq!(times_j(&m), &m * &j);
    }

    #[test]
    fn symplecticity_examples() {
        let id = is_symplectic(&DMatrix::identity(2, 2), 1e-9).unwrap();
        assert!(id.is_symplectic);
        assert_eq!(id.residual, 0.0);

        assert!(
            is_symplectic(&standard_form_matrix(1), 1e-9)
                .unwrap()
                .is_symplectic
        );

        let doubled = is_symplectic(&diag(&[2.0, 2.0]), 1e-9).unwrap();
        assert!(!doubled.is_symplectic);
        assert_eq!(doubled.residual, 3.0);

        assert!(
            is_symplectic(&diag(&[2.0, 0.5]), 1e-9)
                .unwrap()
                .is_symplectic
        );
    }

    #[test]
    fn symplecticity_shape_errors() {
        assert!(matches!(
            is_symplectic(&DMatrix::identity(3, 3), 1e-9),
            Err(Error::Shape { .. })
        ));
        assert!(matches!(
            is_symplectic(&DMatrix::zeros(2, 4), 1e-9),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn block_conditions_examples() {
        assert_eq!(
            block_conditions(&DMatrix::identity(4, 4)).unwrap().norms(),
            [0.0; 3]
        );

        // q' = q cos + p sin, p' = -q sin + p cos at m = ω = 1, t = π/4.
        let (s, c) = FRAC_PI_4.sin_cos();
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        assert!(block_conditions(&rot)
            .unwrap()
            .norms()
            .iter()
            .all(|r| *r < 1e-12));

        let norms = block_conditions(&diag(&[2.0, 2.0])).unwrap().norms();
        assert_eq!(norms[0], 3.0);
    }

    #[test]
    fn congruence_examples() {
        let m = diag(&[0.5, 0.5]);
        assert_eq!(congruence(&DMatrix::identity(2, 2), &m).unwrap(), m);
        let out = congruence(&diag(&[2.0, 0.5]), &m).unwrap();
        assert_eq!(out, diag(&[2.0, 0.125]));
        assert!(congruence(&DMatrix::identity(2, 2), &DMatrix::identity(4, 4)).is_err());
    }

    #[test]
    fn analytic_inverse() {
        let lam =
            SymplecticMatrix::new(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 3.0, 2.0]), 1e-12)
                .unwrap();
        let inv = lam.inverse();
        let numeric = lam.matrix().clone().try_inverse().unwrap();
        assert!(max_abs(&(inv.matrix() - numeric)) < 1e-12);
    }

    #[test]
    fn rejects_non_symplectic() {
        let err = SymplecticMatrix::new(diag(&[2.0, 2.0]), 1e-9).unwrap_err();
        assert!(matches!(err, Error::NotSymplectic { residual, .. } if residual == 3.0));
    }

    #[test]
    fn labels_follow_ordering() {
        let l = PhaseSpaceLayout::new(2).unwrap();
        assert_eq!(l.labels(), ["p1", "p2", "q1", "q2"]);
        assert_eq!(l.q_index(1), 3);
    }
}
