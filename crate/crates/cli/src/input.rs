//! TOML input files: states, Hamiltonians, oscillator targets and symplectic
//! matrices. Matrices are nested arrays, row-major, in `(p, q)` ordering.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use gaussct_core::symplectic::ORDERING_TAG;
use gaussct_core::{
    apply_symplectic, ccs_covariance, fock_covariance, CovarianceMatrix, DMatrix, DVector,
    GaussianState, OscillatorTarget, QuadraticHamiltonian, SymplecticMatrix, TimeFunction,
};
use serde::Deserialize;

use crate::CliError;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    toml::from_str(&read(path)?)
        .map_err(|e| CliError::usage(format!("{}: {}", path.display(), e.message().trim_end())))
}

fn check_ordering(ordering: &Option<String>, path: &Path) -> Result<(), CliError> {
    match ordering.as_deref() {
        Some(ORDERING_TAG) => Ok(()),
        Some(other) => Err(CliError::usage(format!(
            "{}: field \"ordering\" must be \"{ORDERING_TAG}\" (momenta first), got \"{other}\"",
            path.display()
        ))),
        None => Err(CliError::usage(format!(
            "{}: missing field \"ordering\" (expected \"{ORDERING_TAG}\")",
            path.display()
        ))),
    }
}

fn to_matrix(
    rows: &[Vec<f64>],
    field: &str,
    dim: usize,
    path: &Path,
) -> Result<DMatrix<f64>, CliError> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(CliError::usage(format!(
            "{}: field \"{field}\" must be a {dim}x{dim} array of rows",
            path.display()
        )));
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

fn per_mode(
    values: &Option<Vec<f64>>,
    field: &str,
    n: usize,
    path: &Path,
) -> Result<Vec<f64>, CliError> {
    match values {
        None => Ok(vec![1.0; n]),
        Some(v) if v.len() == n => Ok(v.clone()),
        Some(v) => Err(CliError::usage(format!(
            "{}: field \"{field}\" needs {n} entries, got {}",
            path.display(),
            v.len()
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Ccs,
    Fock,
    Explicit,
}

impl StateKind {
    pub fn name(self) -> &'static str {
        match self {
            StateKind::Ccs => "ccs",
            StateKind::Fock => "fock",
            StateKind::Explicit => "explicit",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    kind: StateKind,
    n_modes: usize,
    ordering: Option<String>,
    hbar: Option<f64>,
    masses: Option<Vec<f64>>,
    frequencies: Option<Vec<f64>>,
    n: Option<Vec<u32>>,
    matrix: Option<Vec<Vec<f64>>>,
    mean: Option<Vec<f64>>,
    symplectic: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone)]
pub struct LoadedState {
    pub kind: StateKind,
    pub state: GaussianState,
}

/// Parses a state file. `hbar_override` replaces (or supplies) `hbar`.
/// Shape and parse problems are usage errors; a non-positive-definite
/// explicit matrix or a non-symplectic squeezing matrix is a validation error.
pub fn load_state(
    path: &Path,
    hbar_override: Option<f64>,
    tol: f64,
) -> Result<LoadedState, CliError> {
    let file: StateFile = parse_toml(path)?;
    check_ordering(&file.ordering, path)?;
    let n = file.n_modes;
    if n == 0 {
        return Err(CliError::usage(format!(
            "{}: field \"n_modes\" must be at least 1",
            path.display()
        )));
    }
    let hbar = hbar_override.or(file.hbar).ok_or_else(|| {
        CliError::usage(format!(
            "{}: missing field \"hbar\" (or pass --hbar)",
            path.display()
        ))
    })?;
    let dim = 2 * n;
    let target = || -> Result<OscillatorTarget, CliError> {
        let masses = per_mode(&file.masses, "masses", n, path)?;
        let freqs = per_mode(&file.frequencies, "frequencies", n, path)?;
        OscillatorTarget::new(masses, freqs, hbar)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    };

    let covariance = match file.kind {
        StateKind::Ccs => ccs_covariance(&target()?),
        StateKind::Fock => {
            let occupations = file.n.as_ref().ok_or_else(|| {
                CliError::usage(format!(
                    "{}: kind \"fock\" needs field \"n\"",
                    path.display()
                ))
            })?;
            fock_covariance(occupations, &target()?)
                .map_err(|e| CliError::usage(format!("{}: field \"n\": {e}", path.display())))?
        }
        StateKind::Explicit => {
            let rows = file.matrix.as_ref().ok_or_else(|| {
                CliError::usage(format!(
                    "{}: kind \"explicit\" needs field \"matrix\"",
                    path.display()
                ))
            })?;
            let m = to_matrix(rows, "matrix", dim, path)?;
            CovarianceMatrix::new(m, hbar).map_err(|e| CliError::from_core(e).context(path))?
        }
    };

    let mean = match &file.mean {
        None => DVector::zeros(dim),
        Some(v) if v.len() == dim => DVector::from_column_slice(v),
        Some(v) => {
            return Err(CliError::usage(format!(
                "{}: field \"mean\" needs {dim} entries, got {}",
                path.display(),
                v.len()
            )))
        }
    };
    let mut state = GaussianState::new(covariance, mean).map_err(CliError::from_core)?;

    if let Some(rows) = &file.symplectic {
        let m = to_matrix(rows, "symplectic", dim, path)?;
        let lambda =
            SymplecticMatrix::new(m, tol).map_err(|e| CliError::from_core(e).context(path))?;
        state = apply_symplectic(&state, &lambda).map_err(CliError::from_core)?;
    }
    Ok(LoadedState {
        kind: file.kind,
        state,
    })
}

/// A coefficient entry: a number or an expression string in `t`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Entry {
    Number(f64),
    Expr(String),
}

/// A block: a matrix of entries, or a single entry when `n_modes = 1`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum BlockSpec {
    Scalar(Entry),
    Matrix(Vec<Vec<Entry>>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Blocks {
    #[serde(rename = "A")]
    a: BlockSpec,
    #[serde(rename = "B")]
    b: Option<BlockSpec>,
    #[serde(rename = "C")]
    c: BlockSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Linear {
    d: Option<Vec<Entry>>,
    e: Option<Vec<Entry>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Tabulated {
    times: Vec<f64>,
    #[serde(rename = "A")]
    a: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "B")]
    b: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(rename = "C")]
    c: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HamiltonianFile {
    n_modes: usize,
    ordering: Option<String>,
    #[allow(dead_code)]
    hbar: Option<f64>,
    #[serde(default)]
    params: HashMap<String, f64>,
    blocks: Option<Blocks>,
    linear: Option<Linear>,
    tabulated: Option<Tabulated>,
}

fn entry_function(
    entry: &Entry,
    params: &HashMap<String, f64>,
    field: &str,
    path: &Path,
) -> Result<TimeFunction, CliError> {
    match entry {
        Entry::Number(x) => Ok(TimeFunction::constant(*x)),
        Entry::Expr(src) => TimeFunction::parse(src, params)
            .map_err(|e| CliError::usage(format!("{}: field \"{field}\": {e}", path.display()))),
    }
}

fn block_functions(
    spec: Option<&BlockSpec>,
    field: &str,
    n: usize,
    params: &HashMap<String, f64>,
    path: &Path,
) -> Result<Vec<TimeFunction>, CliError> {
    match spec {
        None => Ok(vec![TimeFunction::constant(0.0); n * n]),
        Some(BlockSpec::Scalar(entry)) if n == 1 => Ok(vec![entry_function(
            entry,
            params,
            &format!("blocks.{field}"),
            path,
        )?]),
        Some(BlockSpec::Scalar(_)) => Err(CliError::usage(format!(
            "{}: field \"blocks.{field}\" must be a {n}x{n} array when n_modes = {n}",
            path.display()
        ))),
        Some(BlockSpec::Matrix(rows)) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(CliError::usage(format!(
                    "{}: field \"blocks.{field}\" must be a {n}x{n} array of rows",
                    path.display()
                )));
            }
            rows.iter()
                .flatten()
                .map(|e| entry_function(e, params, &format!("blocks.{field}"), path))
                .collect()
        }
    }
}

fn tabulated_samples(
    samples: Option<&Vec<Vec<Vec<f64>>>>,
    field: &str,
    n: usize,
    count: usize,
    path: &Path,
) -> Result<Vec<DMatrix<f64>>, CliError> {
    match samples {
        None => Ok(vec![DMatrix::zeros(n, n); count]),
        Some(list) => list
            .iter()
            .map(|rows| to_matrix(rows, &format!("tabulated.{field}"), n, path))
            .collect(),
    }
}

pub fn load_hamiltonian(path: &Path) -> Result<QuadraticHamiltonian, CliError> {
    let file: HamiltonianFile = parse_toml(path)?;
    check_ordering(&file.ordering, path)?;
    let n = file.n_modes;
    if n == 0 {
        return Err(CliError::usage(format!(
            "{}: field \"n_modes\" must be at least 1",
            path.display()
        )));
    }
    let core_err = |e| CliError::usage(format!("{}: {e}", path.display()));

    let mut h = match (&file.blocks, &file.tabulated) {
        (Some(blocks), None) => QuadraticHamiltonian::from_functions(
            n,
            block_functions(Some(&blocks.a), "A", n, &file.params, path)?,
            block_functions(blocks.b.as_ref(), "B", n, &file.params, path)?,
            block_functions(Some(&blocks.c), "C", n, &file.params, path)?,
        )
        .map_err(core_err)?,
        (None, Some(tab)) => {
            let count = tab.times.len();
            QuadraticHamiltonian::tabulated(
                &tab.times,
                &tabulated_samples(Some(&tab.a), "A", n, count, path)?,
                &tabulated_samples(tab.b.as_ref(), "B", n, count, path)?,
                &tabulated_samples(Some(&tab.c), "C", n, count, path)?,
            )
            .map_err(core_err)?
        }
        (Some(_), Some(_)) => {
            return Err(CliError::usage(format!(
                "{}: give either [blocks] or [tabulated], not both",
                path.display()
            )))
        }
        (None, None) => {
            return Err(CliError::usage(format!(
                "{}: missing field \"blocks\" (or \"tabulated\")",
                path.display()
            )))
        }
    };

    if let Some(linear) = &file.linear {
        let vector =
            |entries: &Option<Vec<Entry>>, field: &str| -> Result<Vec<TimeFunction>, CliError> {
                match entries {
                    None => Ok(vec![TimeFunction::constant(0.0); n]),
                    Some(v) if v.len() == n => v
                        .iter()
                        .map(|e| entry_function(e, &file.params, &format!("linear.{field}"), path))
                        .collect(),
                    Some(v) => Err(CliError::usage(format!(
                        "{}: field \"linear.{field}\" needs {n} entries, got {}",
                        path.display(),
                        v.len()
                    ))),
                }
            };
        h = h
            .with_linear(vector(&linear.d, "d")?, vector(&linear.e, "e")?)
            .map_err(core_err)?;
    }
    Ok(h)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetFile {
    n_modes: usize,
    masses: Option<Vec<f64>>,
    frequencies: Option<Vec<f64>>,
    hbar: Option<f64>,
}

pub fn load_target(path: &Path) -> Result<OscillatorTarget, CliError> {
    let file: TargetFile = parse_toml(path)?;
    let n = file.n_modes;
    OscillatorTarget::new(
        per_mode(&file.masses, "masses", n, path)?,
        per_mode(&file.frequencies, "frequencies", n, path)?,
        file.hbar.unwrap_or(1.0),
    )
    .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    ordering: Option<String>,
    matrix: Vec<Vec<f64>>,
}

/// Reads a square matrix file; symplecticity is checked by the caller.
pub fn load_matrix(path: &Path, dim: usize) -> Result<DMatrix<f64>, CliError> {
    let file: MatrixFile = parse_toml(path)?;
    check_ordering(&file.ordering, path)?;
    to_matrix(&file.matrix, "matrix", dim, path)
}
