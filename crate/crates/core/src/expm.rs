//! Dense matrix exponential by scaling and squaring with diagonal Padé
//! approximants of degree 3, 5, 7, 9 or 13 (Higham, 2005).

use nalgebra::DMatrix;

use crate::error::{shape_error, Error, Result};

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// 1-norm bounds below which each degree reaches unit roundoff.
const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.53939833006323e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068;
const THETA13: f64 = 5.371920351148152;

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(m * t)`.
pub fn matrix_exponential(m: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(shape_error("square matrix", rows, cols));
    }
    if !t.is_finite() || m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if rows == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    expm(&(m * t))
}

fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let norm = one_norm(a);
    if norm == 0.0 {
        return Ok(eye);
    }

    for (theta, coeffs) in [
        (THETA3, &PADE3[..]),
        (THETA5, &PADE5[..]),
        (THETA7, &PADE7[..]),
        (THETA9, &PADE9[..]),
    ] {
        if norm <= theta {
            let (u, v) = pade_low(a, coeffs, &eye);
            return solve_pade(&u, &v);
        }
    }

    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * 2f64.powi(-squarings);
    let (u, v) = pade13(&scaled, &eye);
    let mut r = solve_pade(&u, &v)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

/// Odd part `U` and even part `V` of the degree-m numerator for m <= 9.
fn pade_low(a: &DMatrix<f64>, b: &[f64], eye: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let a2 = a * a;
    let mut power = eye.clone();
    let mut u_inner = eye * b[1];
    let mut v = eye * b[0];
    for k in (2..b.len()).step_by(2) {
        power = &power * &a2;
        v += &power * b[k];
        if k + 1 < b.len() {
            u_inner += &power * b[k + 1];
        }
    }
    (a * u_inner, v)
}

fn pade13(a: &DMatrix<f64>, eye: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let b = &PADE13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_high = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]);
    let u = a * (u_high + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + eye * b[1]);
    let v_high = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
    let v = v_high + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + eye * b[0];
    (u, v)
}

/// Solves `(V - U) R = V + U`.
fn solve_pade(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = v + u;
    let q = v - u;
    q.lu().solve(&p).ok_or(Error::NonFinite)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{max_abs, standard_form_matrix};

    /// Plain Taylor series with enough terms for small norms.
    fn taylor_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
        let n = a.nrows();
        let mut term = DMatrix::<f64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..60 {
            term = &term * a / k as f64;
            sum += &term;
        }
        sum
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let e = matrix_exponential(&DMatrix::zeros(3, 3), 2.0).unwrap();
        assert_eq!(e, DMatrix::identity(3, 3));
    }

    #[test]
    fn rotation_generator() {
        let j = standard_form_matrix(1);
        for theta in [0.1, 1.0, 2.5, 10.0, 100.0] {
            let e = matrix_exponential(&j, theta).unwrap();
            let (s, c) = f64::sin_cos(theta);
            let expected = DMatrix::from_row_slice(2, 2, &[c, s, -s, c]);
            assert!(
                max_abs(&(e - expected)) < 1e-12 * theta.max(1.0),
                "theta={theta}"
            );
        }
    }

    #[test]
    fn nilpotent_shear() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        for t in [0.3, 7.0, -4.0] {
            let e = matrix_exponential(&m, t).unwrap();
            let expected = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, t, 1.0]);
            assert!(max_abs(&(e - expected)) < 1e-13);
        }
    }

    #[test]
    fn matches_taylor_for_every_degree() {
        // Norms chosen to land in each Padé branch and in the squaring branch.
        let base =
            DMatrix::from_row_slice(3, 3, &[0.2, -0.5, 0.1, 0.4, 0.3, -0.2, -0.1, 0.6, -0.3]);
        let bn = one_norm(&base);
        for target in [0.01, 0.2, 0.9, 2.0, 5.0, 9.0] {
            let a = &base * (target / bn);
            let e = matrix_exponential(&a, 1.0).unwrap();
            let reference = taylor_exp(&a);
            let rel = max_abs(&(&e - &reference)) / max_abs(&reference);
            assert!(rel < 1e-13, "norm {target}: rel {rel}");
        }
    }

    #[test]
    fn diagonal_entries_exponentiate() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[-3.0, 0.5, 4.0]));
        let e = matrix_exponential(&a, 1.5).unwrap();
        for (i, x) in [-3.0f64, 0.5, 4.0].iter().enumerate() {
            let want = (x * 1.5).exp();
            assert!(((e[(i, i)] - want) / want).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = DMatrix::zeros(2, 2);
        a[(0, 1)] = f64::NAN;
        assert_eq!(matrix_exponential(&a, 1.0), Err(Error::NonFinite));
        assert_eq!(
            matrix_exponential(&DMatrix::zeros(2, 2), f64::INFINITY),
            Err(Error::NonFinite)
        );
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            matrix_exponential(&DMatrix::zeros(2, 3), 1.0),
            Err(Error::Shape { .. })
        ));
    }
}
