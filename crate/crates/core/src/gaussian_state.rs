//! Covariance (dispersion) matrices and Gaussian states: coherent and Fock
//! constructors, physicality, the Robertson inequality, CT invariants and the
//! symplectic-uncertainty conditions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hamiltonian::OscillatorTarget;
use crate::symplectic::{
    congruence, max_abs, split_blocks, standard_form_matrix, symmetrize, times_j, PhaseSpaceLayout,
    SymplecticMatrix,
};

/// Eigenvalue floor for physicality checks.
pub const DEFAULT_PHYSICAL_TOL: f64 = 1e-9;

/// Tolerance on the normalized residuals of the symplectic-uncertainty test.
pub const DEFAULT_SIGMA_SYMPLECTIC_TOL: f64 = 1e-9;

/// Symmetric positive-definite `2N x 2N` covariance matrix in `(p, q)` ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    matrix: DMatrix<f64>,
    hbar: f64,
}

impl CovarianceMatrix {
    /// Validates symmetry (relative 1e-10) and positive definiteness (Cholesky),
    /// then stores the exactly symmetrized matrix. Physicality is not required
    /// here; see [`check_physical`].
    pub fn new(matrix: DMatrix<f64>, hbar: f64) -> Result<Self> {
        PhaseSpaceLayout::for_matrix(&matrix)?;
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        let asym = max_abs(&(&matrix - matrix.transpose()));
        if asym > 1e-10 * max_abs(&matrix).max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        let matrix = symmetrize(&matrix);
        if matrix.clone().cholesky().is_none() {
            let min = SymmetricEigen::new(matrix.clone()).eigenvalues.min();
            return Err(Error::NotPositiveDefinite(min));
        }
        Ok(Self { matrix, hbar })
    }

    /// As [`CovarianceMatrix::new`], additionally requiring `σ - (iħ/2) J ⪰ 0`.
    pub fn new_physical(matrix: DMatrix<f64>, hbar: f64, tol: f64) -> Result<Self> {
        let sigma = Self::new(matrix, hbar)?;
        let report = check_physical(&sigma, tol);
        if !report.physical {
            return Err(Error::InvalidParameter(format!(
                "unphysical covariance: min eigenvalue of sigma - (i hbar/2) J is {:e}",
                report.min_eigenvalue
            )));
        }
        Ok(sigma)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn layout(&self) -> PhaseSpaceLayout {
        PhaseSpaceLayout::for_matrix(&self.matrix).expect("validated on construction")
    }

    pub fn n_modes(&self) -> usize {
        self.layout().n_modes()
    }

    /// Determinant by LU factorization (exact for diagonal matrices).
    pub fn determinant(&self) -> f64 {
        self.matrix.clone().lu().determinant()
    }

    /// `(σ_pp, σ_pq, σ_qp, σ_qq)`.
    pub fn blocks(&self) -> [DMatrix<f64>; 4] {
        split_blocks(&self.matrix)
    }

    /// `σ^{1/2}` and `σ^{-1/2}` from the symmetric eigendecomposition.
    pub(crate) fn sqrt_and_inverse_sqrt(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        sqrt_pair(&self.matrix).expect("positive definite by construction")
    }
}

/// Square root and inverse square root of a symmetric matrix; fails with the
/// smallest eigenvalue when it is not positive.
pub(crate) fn sqrt_pair(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::new(m.clone());
    let min = eig.eigenvalues.min();
    if !(min > 0.0) {
        return Err(Error::NotPositiveDefinite(min));
    }
    let u = &eig.eigenvectors;
    let root = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|x| x.sqrt()),
    );
    let inv_root = root.map(|x| 1.0 / x);
    let sqrt = symmetrize(&(u * DMatrix::from_diagonal(&root) * u.transpose()));
    let inv_sqrt = symmetrize(&(u * DMatrix::from_diagonal(&inv_root) * u.transpose()));
    Ok((sqrt, inv_sqrt))
}

/// Covariance matrix and mean vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    covariance: CovarianceMatrix,
    mean: DVector<f64>,
}

impl GaussianState {
    pub fn new(covariance: CovarianceMatrix, mean: DVector<f64>) -> Result<Self> {
        covariance.layout().check_vector(&mean)?;
        Ok(Self { covariance, mean })
    }

    /// Zero mean.
    pub fn centered(covariance: CovarianceMatrix) -> Self {
        let dim = covariance.layout().dim();
        Self {
            covariance,
            mean: DVector::zeros(dim),
        }
    }

    pub fn covariance(&self) -> &CovarianceMatrix {
        &self.covariance
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }
}

/// Canonical coherent state: `σ_pp,k = ħ m_k ω_k / 2`, `σ_qq,k = ħ / (2 m_k ω_k)`.
pub fn ccs_covariance(target: &OscillatorTarget) -> CovarianceMatrix {
    fock_covariance(&vec![0; target.n_modes()], target).expect("length matches")
}

/// Fock state `|n_1 .. n_N>`: the coherent variances scaled by `1 + 2 n_k`.
pub fn fock_covariance(n: &[u32], target: &OscillatorTarget) -> Result<CovarianceMatrix> {
    let modes = target.n_modes();
    if n.len() != modes {
        return Err(Error::InvalidParameter(format!(
            "need one occupation number per mode ({modes}), got {}",
            n.len()
        )));
    }
    let hbar = target.hbar();
    let mut diag = DVector::zeros(2 * modes);
    for k in 0..modes {
        let mw = target.masses()[k] * target.frequencies()[k];
        let scale = 1.0 + 2.0 * f64::from(n[k]);
        diag[k] = scale * hbar * mw / 2.0;
        diag[modes + k] = scale * hbar / (2.0 * mw);
    }
    CovarianceMatrix::new(DMatrix::from_diagonal(&diag), hbar)
}

/// `σ' = Λ σ Λ^T`, `<Q>' = Λ <Q>`.
pub fn apply_symplectic(state: &GaussianState, lambda: &SymplecticMatrix) -> Result<GaussianState> {
    let sigma = state.covariance();
    sigma.layout().check_matrix(lambda.matrix())?;
    let moved = congruence(lambda.matrix(), sigma.matrix())?;
    Ok(GaussianState {
        covariance: CovarianceMatrix::new(moved, sigma.hbar())?,
        mean: lambda.matrix() * state.mean(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalityReport {
    /// Smallest eigenvalue of the Hermitian matrix `σ - (iħ/2) J`.
    pub min_eigenvalue: f64,
    pub physical: bool,
}

/// Smallest eigenvalue of `σ - (iħ/2) J`, computed through the real symmetric
/// embedding `[[σ, (ħ/2) J], [-(ħ/2) J, σ]]` (each eigenvalue appears twice).
pub fn check_physical(sigma: &CovarianceMatrix, tol: f64) -> PhysicalityReport {
    let d = sigma.layout().dim();
    let half_j = standard_form_matrix(d / 2) * (sigma.hbar() / 2.0);
    let mut embed = DMatrix::zeros(2 * d, 2 * d);
    embed.view_mut((0, 0), (d, d)).copy_from(sigma.matrix());
    embed.view_mut((d, d), (d, d)).copy_from(sigma.matrix());
    embed.view_mut((0, d), (d, d)).copy_from(&half_j);
    embed.view_mut((d, 0), (d, d)).copy_from(&(-&half_j));
    let min_eigenvalue = SymmetricEigen::new(embed).eigenvalues.min();
    PhysicalityReport {
        min_eigenvalue,
        physical: min_eigenvalue >= -tol,
    }
}

/// `det σ - (ħ^2/4)^N`.
pub fn robertson_defect(sigma: &CovarianceMatrix) -> f64 {
    sigma.determinant() - robertson_bound(sigma.hbar(), sigma.n_modes())
}

/// `(ħ^2/4)^N`.
pub fn robertson_bound(hbar: f64, n_modes: usize) -> f64 {
    (hbar * hbar / 4.0).powi(n_modes as i32)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invariants {
    pub determinant: f64,
    /// `Tr[(σJ)^{2k}]` for `k = 1..=k_max`.
    pub traces: Vec<f64>,
}

/// `det σ` and `Tr[(σJ)^{2k}]`, `k = 1..=k_max`.
///
/// The traces are evaluated as `Tr[K^{2k}]` with `K = σ^{1/2} J σ^{1/2}`, which
/// is similar to `σJ` but antisymmetric, so `K^2` is symmetric negative
/// semidefinite and its powers do not suffer cancellation for strongly
/// squeezed states.
pub fn symplectic_invariants(sigma: &CovarianceMatrix, k_max: usize) -> Result<Invariants> {
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    let (root, _) = sigma.sqrt_and_inverse_sqrt();
    let k = times_j(&root) * &root;
    let k = (&k - k.transpose()) * 0.5;
    // K^2 = -K^T K is symmetric negative semidefinite.
    let k2 = symmetrize(&(&k * &k));
    let mut power = k2.clone();
    let mut traces = Vec::with_capacity(k_max);
    for step in 1..=k_max {
        if step > 1 {
            power = symmetrize(&(&power * &k2));
        }
        traces.push(power.trace());
    }
    Ok(Invariants {
        determinant: sigma.determinant(),
        traces,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaSymplecticReport {
    /// `‖σ J σ^T / c - J‖_max` with `c = (det σ)^{1/N}`.
    pub full: f64,
    /// `‖(σ_qq σ_pp - σ_qp^2) / c - I‖_max`.
    pub unit_block: f64,
    /// `‖(σ_qq σ_pq - σ_pq^T σ_qq) / c‖_max`.
    pub qq_block: f64,
    /// `‖(σ_pp σ_qp - σ_qp^T σ_pp) / c‖_max`.
    pub pp_block: f64,
    pub is_symplectic: bool,
}

impl SigmaSymplecticReport {
    pub fn max_residual(&self) -> f64 {
        self.full
            .max(self.unit_block)
            .max(self.qq_block)
            .max(self.pp_block)
    }
}

/// Tests whether `σ (det σ)^{-1/(2N)}` is a symplectic matrix, both in full form
/// and in the `N x N` block form.
pub fn is_sigma_symplectic(sigma: &CovarianceMatrix, tol: f64) -> SigmaSymplecticReport {
    let n = sigma.n_modes();
    let c = sigma.determinant().powf(1.0 / n as f64);
    let m = sigma.matrix();
    let full = max_abs(&((times_j(m) * m.transpose()) / c - standard_form_matrix(n)));

    let [s1, s2, s3, s4] = sigma.blocks();
    let eye = DMatrix::<f64>::identity(n, n);
    let unit_block = max_abs(&((&s4 * &s1 - &s3 * &s3) / c - eye));
    let qq_block = max_abs(&((&s4 * &s2 - s2.transpose() * &s4) / c));
    let pp_block = max_abs(&((&s1 * &s3 - s3.transpose() * &s1) / c));

    let mut report = SigmaSymplecticReport {
        full,
        unit_block,
        qq_block,
        pp_block,
        is_symplectic: false,
    };
    report.is_symplectic = report.max_residual() <= tol;
    report
}
