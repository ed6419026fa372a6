//! Symplectic diagonalization of positive-definite covariance matrices.
//!
//! With `K = σ^{1/2} J σ^{1/2}` antisymmetric, the Hermitian matrix `iK` has
//! eigenvalues `±ν_k`. For each positive eigenvalue with unit eigenvector
//! `w = a + ib` one has `K a = ν b` and `K b = -ν a`, so the real orthogonal
//! matrix `O = √2 [b_1 .. b_N | a_1 .. a_N]` brings `K` to
//! `[[0, diag ν], [-diag ν, 0]]`. Then `Λ_d = D^{1/2} O^T σ^{-1/2}` with
//! `D = diag(ν, ν)` is symplectic and `Λ_d σ Λ_d^T = D`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian_state::{sqrt_pair, CovarianceMatrix};
use crate::symplectic::{max_abs, times_j, PhaseSpaceLayout, SymplecticMatrix};

/// Minimality tolerance relative to `ħ`.
pub const MINIMALITY_REL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct WilliamsonResult {
    pub lambda_d: SymplecticMatrix,
    /// `d_1 .. d_2N` with `Λ_d σ Λ_d^T = diag(d)`.
    pub diagonal: DVector<f64>,
    /// `ν_k = sqrt(d_k d_{N+k})`, descending.
    pub spectrum: DVector<f64>,
}

impl WilliamsonResult {
    pub fn n_modes(&self) -> usize {
        self.spectrum.len()
    }

    /// `‖Λ_d^{-1} diag(d) Λ_d^{-T} - σ‖_max`.
    pub fn reconstruction_residual(&self, sigma: &CovarianceMatrix) -> f64 {
        let inv = self.lambda_d.inverse();
        let rebuilt =
            inv.matrix() * DMatrix::from_diagonal(&self.diagonal) * inv.matrix().transpose();
        max_abs(&(rebuilt - sigma.matrix()))
    }

    /// `‖Λ_d σ Λ_d^T - diag(d)‖_max`.
    pub fn congruence_residual(&self, sigma: &CovarianceMatrix) -> f64 {
        let l = self.lambda_d.matrix();
        max_abs(&(l * sigma.matrix() * l.transpose() - DMatrix::from_diagonal(&self.diagonal)))
    }
}

pub fn williamson_decompose(sigma: &CovarianceMatrix) -> Result<WilliamsonResult> {
    williamson_decompose_matrix(sigma.matrix())
}

/// As [`williamson_decompose`] on a bare symmetric matrix; positive
/// definiteness is checked here.
pub fn williamson_decompose_matrix(sigma: &DMatrix<f64>) -> Result<WilliamsonResult> {
    let n = PhaseSpaceLayout::for_matrix(sigma)?.n_modes();
    if is_diagonal(sigma) {
        let d = sigma.diagonal();
        let min = d.min();
        if !(min > 0.0) {
            return Err(Error::NotPositiveDefinite(min));
        }
        return Ok(diagonal_normal_form(&d, n));
    }

    let (root, inv_root) = sqrt_pair(sigma)?;
    let k = times_j(&root) * &root;
    let k = (&k - k.transpose()) * 0.5;
    let ik = k.map(|x| Complex64::new(0.0, x));
    let eig = SymmetricEigen::new(ik);

    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let mut nu = DVector::zeros(n);
    let mut o = DMatrix::zeros(2 * n, 2 * n);
    for (mode, &idx) in order.iter().take(n).enumerate() {
        nu[mode] = eig.eigenvalues[idx];
        let w = fix_phase(eig.eigenvectors.column(idx).into_owned());
        for r in 0..2 * n {
            o[(r, mode)] = std::f64::consts::SQRT_2 * w[r].im;
            o[(r, n + mode)] = std::f64::consts::SQRT_2 * w[r].re;
        }
    }

    let d = DVector::from_iterator(2 * n, nu.iter().chain(nu.iter()).copied());
    let scale = d.map(f64::sqrt);
    let lambda = DMatrix::from_diagonal(&scale) * o.transpose() * inv_root;
    Ok(WilliamsonResult {
        lambda_d: SymplecticMatrix::measured(lambda),
        diagonal: d,
        spectrum: nu,
    })
}

fn is_diagonal(m: &DMatrix<f64>) -> bool {
    m.iter()
        .enumerate()
        .all(|(i, x)| *x == 0.0 || i % m.nrows() == i / m.nrows())
}

/// Already-diagonal `σ`: keep the entries, only reorder modes so the spectrum
/// is descending. The permutation acts identically on `p` and `q`, so it is
/// symplectic.
fn diagonal_normal_form(d: &DVector<f64>, n: usize) -> WilliamsonResult {
    let nu_of = |k: usize| (d[k] * d[n + k]).sqrt();
    let mut modes: Vec<usize> = (0..n).collect();
    modes.sort_by(|&i, &j| nu_of(j).total_cmp(&nu_of(i)));
    let mut perm = DMatrix::zeros(2 * n, 2 * n);
    let mut diagonal = DVector::zeros(2 * n);
    for (new, &old) in modes.iter().enumerate() {
        perm[(new, old)] = 1.0;
        perm[(n + new, n + old)] = 1.0;
        diagonal[new] = d[old];
        diagonal[n + new] = d[n + old];
    }
    let spectrum = DVector::from_iterator(n, modes.iter().map(|&k| nu_of(k)));
    WilliamsonResult {
        lambda_d: SymplecticMatrix::measured(perm),
        diagonal,
        spectrum,
    }
}

/// Rotates the eigenvector so its largest-magnitude component (first one on
/// ties) is real and positive.
fn fix_phase(w: DVector<Complex64>) -> DVector<Complex64> {
    let mut best = 0;
    for (i, z) in w.iter().enumerate() {
        if z.norm() > w[best].norm() * (1.0 + 1e-12) {
            best = i;
        }
    }
    let pivot = w[best];
    if pivot.norm() == 0.0 {
        return w;
    }
    let phase = pivot.conj() / pivot.norm();
    w.map(|z| z * phase)
}

/// Symplectic spectrum from the moduli of the eigenvalues of `Jσ`, which come
/// in pairs `±iν_k`; sorted descending. Independent of the decomposition above.
pub fn symplectic_spectrum(sigma: &CovarianceMatrix) -> DVector<f64> {
    let n = sigma.n_modes();
    let j_sigma = -times_j(sigma.matrix()).transpose();
    let mut moduli: Vec<f64> = j_sigma
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    DVector::from_iterator(n, moduli.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergProducts {
    /// `d_k d_{N+k}` per mode.
    pub products: Vec<f64>,
    /// `products[k] >= ħ²/4 - tol`.
    pub satisfied: Vec<bool>,
}

impl HeisenbergProducts {
    pub fn all_satisfied(&self) -> bool {
        self.satisfied.iter().all(|&ok| ok)
    }
}

pub fn heisenberg_products(result: &WilliamsonResult, hbar: f64, tol: f64) -> HeisenbergProducts {
    let n = result.n_modes();
    let bound = hbar * hbar / 4.0;
    let products: Vec<f64> = (0..n)
        .map(|k| result.diagonal[k] * result.diagonal[n + k])
        .collect();
    let satisfied = products.iter().map(|p| *p >= bound - tol).collect();
    HeisenbergProducts {
        products,
        satisfied,
    }
}

/// Every `ν_k` equals `ħ/2` within `1e-7 ħ`.
pub fn is_robertson_minimal(sigma: &CovarianceMatrix) -> Result<bool> {
    let result = williamson_decompose(sigma)?;
    Ok(spectrum_is_minimal(&result.spectrum, sigma.hbar()))
}

pub fn spectrum_is_minimal(spectrum: &DVector<f64>, hbar: f64) -> bool {
    spectrum
        .iter()
        .all(|nu| (nu - hbar / 2.0).abs() <= MINIMALITY_REL_TOL * hbar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian_state::{ccs_covariance, fock_covariance};
    use crate::hamiltonian::OscillatorTarget;
    use crate::symplectic::congruence;

    fn cov(rows: usize, v: &[f64]) -> CovarianceMatrix {
        CovarianceMatrix::new(DMatrix::from_row_slice(rows, rows, v), 1.0).unwrap()
    }

    #[test]
    fn normal_form_is_identity() {
        let r = williamson_decompose(&cov(2, &[0.5, 0.0, 0.0, 0.5])).unwrap();
        assert_eq!(r.lambda_d.matrix(), &DMatrix::identity(2, 2));
        assert_eq!(r.diagonal.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn correlated_single_mode() {
        let sigma = cov(2, &[1.0, 0.5, 0.5, 1.0]);
        let r = williamson_decompose(&sigma).unwrap();
        let expected = 3f64.sqrt() / 2.0;
        assert!((r.spectrum[0] - expected).abs() < 1e-14);
        assert!((symplectic_spectrum(&sigma)[0] - expected).abs() < 1e-14);
        assert!(r.lambda_d.residual() < 1e-14);
        assert!(r.reconstruction_residual(&sigma) < 1e-14);
        assert!(r.congruence_residual(&sigma) < 1e-14);
    }

    #[test]
    fn squeezed_vacuum_spectrum() {
        let r = williamson_decompose(&cov(2, &[2.0, 0.0, 0.0, 0.125])).unwrap();
        assert!((r.spectrum[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fock_spectra_are_sorted() {
        let target = OscillatorTarget::unit(2, 1.0).unwrap();
        let fock = fock_covariance(&[0, 1], &target).unwrap();
        let r = williamson_decompose(&fock).unwrap();
        assert_eq!(r.spectrum.as_slice(), &[1.5, 0.5]);
        assert_eq!(r.diagonal.as_slice(), &[1.5, 0.5, 1.5, 0.5]);
        assert!(r.lambda_d.residual() == 0.0);
        assert!(r.reconstruction_residual(&fock) == 0.0);
        let oracle = symplectic_spectrum(&fock);
        assert!((oracle[0] - 1.5).abs() < 1e-14 && (oracle[1] - 0.5).abs() < 1e-14);

        let ccs = ccs_covariance(&target);
        assert!(symplectic_spectrum(&ccs)
            .iter()
            .all(|nu| (nu - 0.5).abs() < 1e-14));
    }

    #[test]
    fn dense_two_mode_matches_oracle() {
        let sigma = cov(
            4,
            &[
                2.0, 0.3, 0.1, -0.2, 0.3, 1.5, 0.4, 0.0, 0.1, 0.4, 1.0, 0.2, -0.2, 0.0, 0.2, 0.8,
            ],
        );
        let r = williamson_decompose(&sigma).unwrap();
        let oracle = symplectic_spectrum(&sigma);
        assert!((&r.spectrum - oracle).amax() < 1e-12);
        assert!(r.lambda_d.residual() < 1e-12);
        assert!(r.reconstruction_residual(&sigma) < 1e-12);
        let prod: f64 = r.spectrum.iter().map(|x| x * x).product();
        assert!((prod - sigma.determinant()).abs() < 1e-12 * prod);
    }

    #[test]
    fn degenerate_spectrum_still_diagonalizes() {
        let rot = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.7, 0.2, 1.0, 0.0, 0.2, -0.3, 0.0, 1.0,
            ],
        );
        let base = DMatrix::from_diagonal(&DVector::from_row_slice(&[0.75, 0.75, 0.75, 0.75]));
        let sigma = CovarianceMatrix::new(congruence(&rot, &base).unwrap(), 1.0).unwrap();
        let r = williamson_decompose(&sigma).unwrap();
        assert!((r.spectrum[0] - 0.75).abs() < 1e-12 && (r.spectrum[1] - 0.75).abs() < 1e-12);
        assert!(r.congruence_residual(&sigma) < 1e-12);
        assert!(r.lambda_d.residual() < 1e-12);
    }

    #[test]
    fn products_and_minimality() {
        let target = OscillatorTarget::unit(1, 1.0).unwrap();
        let ccs = ccs_covariance(&target);
        let hp = heisenberg_products(&williamson_decompose(&ccs).unwrap(), 1.0, 1e-9);
        assert!((hp.products[0] - 0.25).abs() < 1e-12 && hp.all_satisfied());
        assert!(is_robertson_minimal(&ccs).unwrap());

        let fock2 = fock_covariance(&[2], &target).unwrap();
        let hp = heisenberg_products(&williamson_decompose(&fock2).unwrap(), 1.0, 1e-9);
        assert!((hp.products[0] - 6.25).abs() < 1e-12);
        assert!(!is_robertson_minimal(&fock_covariance(&[1], &target).unwrap()).unwrap());

        let bad = cov(2, &[0.4, 0.0, 0.0, 0.4]);
        let hp = heisenberg_products(&williamson_decompose(&bad).unwrap(), 1.0, 1e-9);
        assert!((hp.products[0] - 0.16).abs() < 1e-15);
        assert!(!hp.all_satisfied());
    }

    #[test]
    fn rejects_indefinite_input() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        match williamson_decompose_matrix(&m) {
            Err(Error::NotPositiveDefinite(e)) => assert!((e + 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -2.0]);
        assert!(matches!(
            williamson_decompose_matrix(&d),
            Err(Error::NotPositiveDefinite(_))
        ));
    }
}
