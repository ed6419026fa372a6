use std::path::Path;

use gaussct_core::dynamics::{step_grid, write_records, PROJECTION_THRESHOLD};
use gaussct_core::williamson::{spectrum_is_minimal, MINIMALITY_REL_TOL};
use gaussct_core::{
    apply_symplectic, check_physical, diagonalizing_transform, evolve_state, grand_matrix,
    heisenberg_products, is_sigma_symplectic, omega_squared, robertson_defect,
    symplectic_invariants, williamson_decompose, DMatrix, OneModeCoefficients, SymplecticMatrix,
};

use crate::input::{load_hamiltonian, load_matrix, load_state, load_target};
use crate::report::{list, sci, sci1, short, yes_no, Report};
use crate::{CliError, Common, Format, Outcome, Window};

/// Relative change of an invariant that gets flagged.
const INVARIANT_REL_TOL: f64 = 1e-9;
/// Relative drift of invariants along a trajectory that still counts as preserved.
const TRAJECTORY_REL_TOL: f64 = 1e-7;
/// `max - min` of `Ω²` on the grid below which it is reported as constant.
const CONSTANCY_TOL: f64 = 1e-9;

fn core(err: gaussct_core::Error) -> CliError {
    CliError::from_core(err)
}

fn relative_change(before: f64, after: f64) -> f64 {
    (after - before).abs() / before.abs().max(f64::MIN_POSITIVE)
}

fn validate_window(w: &Window) -> Result<usize, CliError> {
    if !(w.dt > 0.0) {
        return Err(CliError::usage(format!(
            "--dt must be positive, got {}",
            w.dt
        )));
    }
    if !(w.t1 > w.t0) {
        return Err(CliError::usage(format!(
            "--t1 ({}) must exceed --t0 ({})",
            w.t1, w.t0
        )));
    }
    step_grid(w.t0, w.t1, w.dt)
        .map(|(steps, _)| steps)
        .map_err(core)
}

fn unphysical(min_eigenvalue: f64) -> CliError {
    CliError::validation(format!(
        "unphysical state: sigma - (i hbar/2) J has eigenvalue {}",
        sci1(min_eigenvalue)
    ))
}

pub fn check(c: &Common, state: &Path) -> Result<Outcome, CliError> {
    let loaded = load_state(state, c.hbar, c.tol)?;
    let sigma = loaded.state.covariance();
    let phys = check_physical(sigma, c.tol);
    let defect = robertson_defect(sigma);
    let ss = is_sigma_symplectic(sigma, c.tol);

    let mut r = Report::new();
    r.text(format!(
        "{}; Robertson defect {}; sigma symplectic: {}",
        if phys.physical {
            "physical"
        } else {
            "unphysical"
        },
        sci1(defect),
        yes_no(ss.is_symplectic)
    ));
    r.word("state", loaded.kind.name())
        .num(
            "n_modes",
            sigma.n_modes().to_string(),
            &[sigma.n_modes() as f64],
        )
        .num("hbar", short(sigma.hbar()), &[sigma.hbar()])
        .num("tolerance", sci1(c.tol), &[c.tol])
        .flag("physical", phys.physical)
        .num(
            "min_eigenvalue",
            sci1(phys.min_eigenvalue),
            &[phys.min_eigenvalue],
        )
        .num(
            "det_sigma",
            short(sigma.determinant()),
            &[sigma.determinant()],
        )
        .num("robertson_defect", sci1(defect), &[defect])
        .flag("sigma_symplectic", ss.is_symplectic)
        .num(
            "sigma_symplectic_residuals",
            format!(
                "full {} unit_block {} qq_block {} pp_block {}",
                sci(ss.full),
                sci(ss.unit_block),
                sci(ss.qq_block),
                sci(ss.pp_block)
            ),
            &[ss.full, ss.unit_block, ss.qq_block, ss.pp_block],
        );
    let report = r.render(c.format);
    Ok(if phys.physical {
        Outcome::ok(report)
    } else {
        Outcome::failed(report, unphysical(phys.min_eigenvalue))
    })
}

pub fn williamson(c: &Common, state: &Path) -> Result<Outcome, CliError> {
    let loaded = load_state(state, c.hbar, c.tol)?;
    let sigma = loaded.state.covariance();
    let phys = check_physical(sigma, c.tol);
    if !phys.physical {
        return Err(unphysical(phys.min_eigenvalue));
    }
    let w = williamson_decompose(sigma).map_err(core)?;
    let hbar = sigma.hbar();
    let products = heisenberg_products(&w, hbar, c.tol);
    let minimal = spectrum_is_minimal(&w.spectrum, hbar);
    let n = w.n_modes();

    let mut r = Report::new();
    r.word("state", loaded.kind.name())
        .num("hbar", short(hbar), &[hbar])
        .num("tolerance", sci1(c.tol), &[c.tol])
        .num(
            "minimality_tolerance",
            format!("{} * hbar", sci1(MINIMALITY_REL_TOL)),
            &[MINIMALITY_REL_TOL * hbar],
        )
        .num(
            "symplectic_spectrum",
            list(w.spectrum.iter().copied()),
            w.spectrum.as_slice(),
        )
        .num(
            "diagonal",
            list(w.diagonal.iter().copied()),
            w.diagonal.as_slice(),
        );
    for k in 0..n {
        r.num(
            &format!("heisenberg_product_{}", k + 1),
            format!(
                "{} (>= {}: {})",
                short(products.products[k]),
                short(hbar * hbar / 4.0),
                yes_no(products.satisfied[k])
            ),
            &[products.products[k]],
        );
    }
    r.flag("minimal", minimal);
    let identity = w.lambda_d.matrix() == &DMatrix::identity(2 * n, 2 * n);
    if identity && c.format == Format::Table {
        r.word("lambda_d", "identity");
    } else {
        r.matrix("lambda_d", w.lambda_d.matrix());
    }
    r.num(
        "lambda_d_symplectic_residual",
        sci1(w.lambda_d.residual()),
        &[w.lambda_d.residual()],
    )
    .num(
        "reconstruction_residual",
        sci1(w.reconstruction_residual(sigma)),
        &[w.reconstruction_residual(sigma)],
    );
    Ok(Outcome::ok(r.render(c.format)))
}

pub fn evolve(
    c: &Common,
    hamiltonian: &Path,
    state: &Path,
    window: &Window,
    stride: usize,
) -> Result<Outcome, CliError> {
    let steps = validate_window(window)?;
    let h = load_hamiltonian(hamiltonian)?;
    let loaded = load_state(state, c.hbar, c.tol)?;
    let start = &loaded.state;
    if h.n_modes() != start.covariance().n_modes() {
        return Err(CliError::usage(format!(
            "Hamiltonian has {} modes but the state has {}",
            h.n_modes(),
            start.covariance().n_modes()
        )));
    }
    let traj = evolve_state(start, &h, window.t0, window.t1, window.dt).map_err(core)?;

    let mut records = Vec::new();
    write_records(&mut records, &traj, stride).map_err(|e| CliError::usage(e.to_string()))?;
    let records = String::from_utf8(records).expect("ascii output");

    let end = traj.last();
    let inv0 = symplectic_invariants(start.covariance(), 2).map_err(core)?;
    let inv1 = symplectic_invariants(end.covariance(), 2).map_err(core)?;
    let drifts = [
        relative_change(inv0.determinant, inv1.determinant),
        relative_change(inv0.traces[0], inv1.traces[0]),
        relative_change(inv0.traces[1], inv1.traces[1]),
    ];
    let max_residual = traj.residuals.iter().copied().fold(0.0, f64::max);
    let max_drift = traj.drift.iter().copied().fold(0.0, f64::max);

    let mut r = Report::new();
    r.num(
        "window",
        format!(
            "t0 {} t1 {} dt {} steps {}",
            short(window.t0),
            short(window.t1),
            short(window.dt),
            steps
        ),
        &[window.t0, window.t1, window.dt, steps as f64],
    )
    .num("tolerance", sci1(c.tol), &[c.tol])
    .num(
        "projection_threshold",
        sci1(PROJECTION_THRESHOLD),
        &[PROJECTION_THRESHOLD],
    )
    .num(
        "invariant_tolerance",
        sci1(TRAJECTORY_REL_TOL),
        &[TRAJECTORY_REL_TOL],
    )
    .num(
        "final_mean",
        list(end.mean().iter().copied()),
        end.mean().as_slice(),
    )
    .matrix("final_sigma", end.covariance().matrix());
    for (key, before, after, drift) in [
        ("det_sigma", inv0.determinant, inv1.determinant, drifts[0]),
        ("trace_sigma_j_2", inv0.traces[0], inv1.traces[0], drifts[1]),
        ("trace_sigma_j_4", inv0.traces[1], inv1.traces[1], drifts[2]),
    ] {
        r.num(
            key,
            format!(
                "initial {} final {} relative drift {}",
                short(before),
                short(after),
                sci1(drift)
            ),
            &[before, after, drift],
        );
    }
    let preserved = drifts.iter().all(|d| *d <= TRAJECTORY_REL_TOL);
    r.flag("invariants_preserved", preserved)
        .num(
            "max_symplectic_residual",
            sci1(max_residual),
            &[max_residual],
        )
        .num("max_pre_projection_drift", sci1(max_drift), &[max_drift]);

    let mut outcome = match (&c.out, c.format) {
        (Some(path), _) => {
            std::fs::write(path, &records)
                .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
            Outcome::ok(r.render(Format::Table))
        }
        (None, Format::Records) => Outcome::ok(records),
        (None, Format::Table) => Outcome::ok(r.render(Format::Table)),
    };
    outcome.stdout = c.out.is_some();
    Ok(outcome)
}

pub fn diagonalize(
    c: &Common,
    hamiltonian: &Path,
    target: &Path,
    t: f64,
) -> Result<Outcome, CliError> {
    let h = load_hamiltonian(hamiltonian)?;
    if !h.is_stationary() {
        return Err(CliError::usage(
            "stationary only: the Hamiltonian depends on time; use `evolve` for the general case",
        ));
    }
    let target = load_target(target)?;
    if target.n_modes() != h.n_modes() {
        return Err(CliError::usage(format!(
            "target has {} modes but the Hamiltonian has {}",
            target.n_modes(),
            h.n_modes()
        )));
    }
    if !t.is_finite() {
        return Err(CliError::usage("--t must be finite"));
    }
    let g = grand_matrix(&h, 0.0).map_err(core)?;
    let transform = diagonalizing_transform(&g, &target, t).map_err(core)?;
    let residual = transform.residual();

    let mut r = Report::new();
    r.num("t", short(t), &[t])
        .num("tolerance", sci1(c.tol), &[c.tol])
        .matrix("transform", transform.matrix())
        .num("symplectic_residual", sci1(residual), &[residual])
        .flag("symplectic", residual <= c.tol);
    let report = r.render(c.format);
    Ok(if residual <= c.tol {
        Outcome::ok(report)
    } else {
        Outcome::failed(
            report,
            CliError::validation(format!(
                "transform residual {} exceeds tolerance {}",
                sci1(residual),
                sci1(c.tol)
            )),
        )
    })
}

pub fn omega(c: &Common, hamiltonian: &Path, window: &Window) -> Result<Outcome, CliError> {
    let steps = validate_window(window)?;
    let h = load_hamiltonian(hamiltonian)?;
    let coeffs = OneModeCoefficients::from_hamiltonian(&h).map_err(core)?;
    let (_, step) = step_grid(window.t0, window.t1, window.dt).map_err(core)?;
    let mut samples = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = if i == steps {
            window.t1
        } else {
            window.t0 + i as f64 * step
        };
        samples.push((t, omega_squared(&coeffs, t).map_err(core)?));
    }
    let min = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let max = samples
        .iter()
        .map(|s| s.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let spread = max - min;
    let constant = spread <= CONSTANCY_TOL;

    let mut r = Report::new();
    r.num(
        "window",
        format!(
            "t0 {} t1 {} dt {} samples {}",
            short(window.t0),
            short(window.t1),
            short(window.dt),
            steps + 1
        ),
        &[window.t0, window.t1, window.dt, (steps + 1) as f64],
    )
    .num("constancy_tolerance", sci1(CONSTANCY_TOL), &[CONSTANCY_TOL])
    .num("omega_squared_min", short(min), &[min])
    .num("omega_squared_max", short(max), &[max])
    .num("max_minus_min", sci(spread), &[spread])
    .flag("constant", constant);
    if constant {
        r.num("omega_squared", short(samples[0].1), &[samples[0].1]);
    }
    if c.format == Format::Records {
        for (t, w2) in &samples {
            r.num("sample", String::new(), &[*t, *w2]);
        }
    }
    Ok(Outcome::ok(r.render(c.format)))
}

pub fn invariants(
    c: &Common,
    state: &Path,
    symplectic: Option<&Path>,
) -> Result<Outcome, CliError> {
    let loaded = load_state(state, c.hbar, c.tol)?;
    let start = &loaded.state;
    let before = symplectic_invariants(start.covariance(), 2).map_err(core)?;

    let mut r = Report::new();
    r.num("tolerance", sci1(c.tol), &[c.tol]).num(
        "invariant_tolerance",
        sci1(INVARIANT_REL_TOL),
        &[INVARIANT_REL_TOL],
    );

    let Some(path) = symplectic else {
        r.num(
            "det_sigma",
            short(before.determinant),
            &[before.determinant],
        )
        .num(
            "trace_sigma_j_2",
            short(before.traces[0]),
            &[before.traces[0]],
        )
        .num(
            "trace_sigma_j_4",
            short(before.traces[1]),
            &[before.traces[1]],
        );
        return Ok(Outcome::ok(r.render(c.format)));
    };

    let dim = start.covariance().layout().dim();
    let m = load_matrix(path, dim)?;
    let lambda = SymplecticMatrix::new(m, c.tol).map_err(|e| core(e).context(path))?;
    let moved = apply_symplectic(start, &lambda).map_err(core)?;
    let after = symplectic_invariants(moved.covariance(), 2).map_err(core)?;

    r.num(
        "symplectic_residual",
        sci1(lambda.residual()),
        &[lambda.residual()],
    );
    let mut flagged = Vec::new();
    for (key, b, a) in [
        ("det_sigma", before.determinant, after.determinant),
        ("trace_sigma_j_2", before.traces[0], after.traces[0]),
        ("trace_sigma_j_4", before.traces[1], after.traces[1]),
    ] {
        let change = relative_change(b, a);
        let flag = change > INVARIANT_REL_TOL;
        if flag {
            flagged.push(key);
        }
        r.num(
            key,
            format!(
                "before {} after {} relative change {}{}",
                short(b),
                short(a),
                sci1(change),
                if flag { " FLAGGED" } else { "" }
            ),
            &[b, a, change],
        );
    }
    r.word(
        "flagged",
        if flagged.is_empty() {
            "none".to_string()
        } else {
            flagged.join(" ")
        },
    );
    Ok(Outcome::ok(r.render(c.format)))
}
