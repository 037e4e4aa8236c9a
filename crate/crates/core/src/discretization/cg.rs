use super::operator::DiscreteOperator;
use super::Field;
use crate::error::{Error, Result};

/// Iteration count and final relative residual of a converged solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Solves `A x = rhs` by Jacobi-preconditioned conjugate gradients from `x = 0`.
pub fn solve_spd(op: &DiscreteOperator, rhs: &Field, tol: f64) -> Result<Field> {
    op.check_len(rhs.len())?;
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance {tol} must be positive")));
    }
    let n = rhs.len();
    let (x, _) = solve_from(op, rhs, vec![0.0; n], tol, default_cap(n))?;
    Ok(Field::from_vec(x))
}

pub(crate) fn default_cap(n: usize) -> usize {
    10 * n + 1000
}

/// Preconditioned CG from an initial guess; stops when `||r|| <= tol ||rhs||`
/// on the recursively updated residual.
pub fn solve_from(
    op: &DiscreteOperator,
    rhs: &[f64],
    mut x: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgStats)> {
    let n = rhs.len();
    let b_norm = norm(rhs);
    if b_norm == 0.0 {
        return Ok((vec![0.0; n], CgStats { iterations: 0, residual: 0.0 }));
    }
    let inv_diag: Vec<f64> = op.diag().iter().map(|d| 1.0 / d).collect();

    let mut r = op.apply(&x);
    for (ri, bi) in r.iter_mut().zip(rhs) {
        *ri = bi - *ri;
    }
    let mut history = vec![norm(&r) / b_norm];
    if history[0] <= tol {
        return Ok((x, CgStats { iterations: 0, residual: history[0] }));
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut dir = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];

    for it in 1..=max_iter {
        op.apply_into(&dir, &mut q);
        let alpha = rz / dot(&dir, &q);
        for i in 0..n {
            x[i] += alpha * dir[i];
            r[i] -= alpha * q[i];
        }
        let rel = norm(&r) / b_norm;
        history.push(rel);
        if rel <= tol {
            return Ok((x, CgStats { iterations: it, residual: rel }));
        }
        if !rel.is_finite() {
            break;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            dir[i] = z[i] + beta * dir[i];
        }
    }
    Err(Error::LinearSolve { iterations: history.len() - 1, residuals: history })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
