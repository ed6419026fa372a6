//! Symplectic linear algebra and Gaussian-state analysis for `N`-mode quadratic
//! systems.
//!
//! Phase-space vectors are ordered `Q = (p_1 .. p_N, q_1 .. q_N)` throughout,
//! with standard form `J = [[0, I], [-I, 0]]`. Quadratic Hamiltonians are
//! written `H = Q · H Q` for the symmetric grand matrix `H = [[A, B], [B^T, C]]`.

pub mod coefficient;
pub mod dynamics;
pub mod error;
pub mod expm;
pub mod expr;
pub mod gaussian_state;
pub mod hamiltonian;
pub mod one_mode;
pub mod sampling;
pub mod symplectic;
pub mod williamson;

pub use coefficient::{CubicSpline, TimeFunction};
pub use dynamics::{
    diagonalizing_transform, evolve_state, evolve_symplectic, ho_rotation, stationary_propagator,
    write_records, PropagatorTrajectory, Side, StateTrajectory,
};
pub use error::{Error, Result};
pub use expm::matrix_exponential;
pub use gaussian_state::{
    apply_symplectic, ccs_covariance, check_physical, fock_covariance, is_sigma_symplectic,
    robertson_defect, symplectic_invariants, CovarianceMatrix, GaussianState, Invariants,
    PhysicalityReport, SigmaSymplecticReport,
};
pub use hamiltonian::{
    displace_out_linear_terms, generator_forward, generator_target, grand_matrix, ho_grand_matrix,
    GrandMatrix, MeanDrive, OscillatorTarget, QuadraticHamiltonian,
};
pub use one_mode::{
    omega_squared, propagator_from_oscillator, solve_oscillator, wronskian_defect,
    ComplexTrajectory, OneModeCoefficients,
};
pub use symplectic::{
    block_conditions, congruence, is_symplectic, PhaseSpaceLayout, SymplecticCheck, SymplecticForm,
    SymplecticMatrix,
};
pub use williamson::{
    heisenberg_products, is_robertson_minimal, symplectic_spectrum, williamson_decompose,
    HeisenbergProducts, WilliamsonResult,
};

/// Dense matrix and vector types used in the public API.
pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
