//! Random symplectic matrices for tests, benchmarks and property checks.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::expm::matrix_exponential;
use crate::symplectic::{j_times, PhaseSpaceLayout, SymplecticMatrix};

/// Symmetric `dim x dim` matrix with entries uniform in `[-scale, scale]`.
pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let x = rng.random_range(-scale..=scale);
            s[(i, j)] = x;
            s[(j, i)] = x;
        }
    }
    s
}

/// `exp(J S)` with `S` from [`random_symmetric`]; `J S` ranges over the
/// symplectic Lie algebra, so the result is symplectic up to roundoff.
pub fn random_symplectic<R: Rng + ?Sized>(
    rng: &mut R,
    n_modes: usize,
    scale: f64,
) -> Result<SymplecticMatrix> {
    let layout = PhaseSpaceLayout::new(n_modes)?;
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scale must be finite and nonnegative, got {scale}"
        )));
    }
    let s = random_symmetric(rng, layout.dim(), scale);
    let lambda = matrix_exponential(&j_times(&s), 1.0)?;
    Ok(SymplecticMatrix::measured(lambda))
}
