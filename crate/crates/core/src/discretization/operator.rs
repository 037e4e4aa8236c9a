use serde::Serialize;

use super::cg;
use super::grid::{AxisKind, StripGrid};
use super::Field;
use crate::error::{Error, Result};

/// Which part of the boundary a Dirichlet face lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceKind {
    Interior,
    /// `r = a` (or `rho = a`).
    InnerShell,
    /// `r = b` (or `rho = b`).
    OuterShell,
    /// Artificial cut of the unbounded transverse axis.
    Truncation,
    /// Reflection plane where an equivariant field must vanish.
    Seam,
}

/// One face of the finite-volume stencil.
///
/// Contributes `area / dist * (v[lo] - v[hi])^2` to the Dirichlet energy, with
/// `v[hi] = 0` on a Dirichlet face (`hi = None`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub lo: usize,
    pub hi: Option<usize>,
    /// Second cell inward from a Dirichlet face, for one-sided differences.
    pub next: Option<usize>,
    /// Weighted face measure, angular constants included.
    pub area: f64,
    /// Distance between the two sample points (`h`, or `h/2` on a Dirichlet face).
    pub dist: f64,
    /// Normal axis index (0 is the radial axis).
    pub axis: u8,
    /// Radial coordinate of the face center.
    pub r: f64,
    pub kind: FaceKind,
}

impl Face {
    pub fn coeff(&self) -> f64 {
        self.area / self.dist
    }
}

/// Symmetric divergence-form operator in CSR form with its face and cell-measure tables.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
    measure: Vec<f64>,
    faces: Vec<Face>,
}

impl DiscreteOperator {
    /// Assembles `sum_faces coeff (e_lo - e_hi)(e_lo - e_hi)^T`.
    pub fn from_faces(faces: Vec<Face>, measure: Vec<f64>) -> Self {
        let n = measure.len();
        let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(n + 2 * faces.len());
        let mut diag = vec![0.0; n];
        for f in &faces {
            let c = f.coeff();
            diag[f.lo] += c;
            if let Some(hi) = f.hi {
                diag[hi] += c;
                triplets.push((f.lo, hi, -c));
                triplets.push((hi, f.lo, -c));
            }
        }
        triplets.extend(diag.iter().enumerate().map(|(i, &d)| (i, i, d)));
        triplets.sort_by_key(|t| (t.0, t.1));

        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        for (i, j, v) in triplets {
            if cols.len() > row_ptr[i] && *cols.last().unwrap() == j {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
            }
            row_ptr[i + 1] = cols.len();
        }
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i + 1].max(row_ptr[i]);
        }

        DiscreteOperator { row_ptr, cols, vals, diag, measure, faces }
    }

    pub fn len(&self) -> usize {
        self.measure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measure.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Cell quadrature weights `w * cell volume * angular constant`.
    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let row = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[row.clone()].binary_search(&j) {
            Ok(k) => self.vals[row.start + k],
            Err(_) => 0.0,
        }
    }

    /// Nonzeros as `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.len()).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.cols[k], self.vals[k]))
        })
    }

    /// `y = A x`.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.apply_into(x, &mut y);
        y
    }

    /// `<A v, v>` through the matrix.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        self.apply(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Discrete weighted Dirichlet energy `sum_faces area * (difference quotient)^2 * dist`.
    pub fn dirichlet_energy(&self, v: &[f64]) -> f64 {
        self.faces.iter().map(|f| f.coeff() * face_jump(f, v).powi(2)).sum()
    }

    pub(crate) fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::ShapeMismatch { expected: self.len(), got });
        }
        Ok(())
    }

    /// Smallest eigenvalue of `A v = lambda W v` by inverse iteration.
    pub fn smallest_eigenvalue(&self, tol: f64, max_iter: usize) -> Result<(f64, Field)> {
        let n = self.len();
        let mut v: Vec<f64> = vec![1.0; n];
        normalize_w(&mut v, &self.measure);
        let mut lambda = self.quadratic_form(&v);
        for _ in 0..max_iter {
            let rhs: Vec<f64> = v.iter().zip(&self.measure).map(|(x, w)| x * w).collect();
            let guess: Vec<f64> = v.iter().map(|x| x / lambda).collect();
            let (mut next, _) = cg::solve_from(self, &rhs, guess, 1e-14, 20 * n + 100)?;
            normalize_w(&mut next, &self.measure);
            let updated = self.quadratic_form(&next);
            v = next;
            let done = (updated - lambda).abs() <= tol * updated;
            lambda = updated;
            if done {
                return Ok((lambda, Field::from_vec(v)));
            }
        }
        Err(Error::LinearSolve { iterations: max_iter, residuals: vec![] })
    }
}

fn normalize_w(v: &mut [f64], w: &[f64]) {
    let norm = v.iter().zip(w).map(|(x, w)| w * x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// `v[lo] - v[hi]`, with `v[hi] = 0` on Dirichlet faces.
pub(crate) fn face_jump(f: &Face, v: &[f64]) -> f64 {
    v[f.lo] - f.hi.map_or(0.0, |h| v[h])
}

/// Builds the `-div(r^m s^(d-1) grad v)` stencil on a strip grid.
///
/// Face weights are evaluated at face midpoints. Dirichlet faces at `r = a`,
/// `r = b` and the truncation face use half-cell distances (mirror ghost
/// `-v`); the mirror face at `s = 0` carries no flux.
pub fn assemble_operator(grid: &StripGrid) -> DiscreteOperator {
    let n_r = grid.n_r();
    let n_s = grid.n_s();
    let h_r = grid.h_r();
    let h_s = grid.h_s();
    let ang = grid.weighting().angular;
    let has_s = grid.axis() != AxisKind::Absent;
    let transverse = if has_s { h_s } else { 1.0 };
    let r_nodes = grid.r_nodes();
    let s_of = |j: usize| grid.s_nodes().get(j).copied().unwrap_or(0.0);

    let mut faces = Vec::with_capacity(2 * grid.len() + n_r + n_s);
    for j in 0..n_s {
        let s = s_of(j);
        for i in 0..=n_r {
            let r_f = grid.a() + i as f64 * h_r;
            let area = grid.weight(r_f, s) * transverse * ang;
            let face = if i == 0 {
                Face {
                    lo: grid.index(0, j),
                    hi: None,
                    next: Some(grid.index(1, j)),
                    area,
                    dist: 0.5 * h_r,
                    axis: 0,
                    r: r_f,
                    kind: FaceKind::InnerShell,
                }
            } else if i == n_r {
                Face {
                    lo: grid.index(n_r - 1, j),
                    hi: None,
                    next: Some(grid.index(n_r - 2, j)),
                    area,
                    dist: 0.5 * h_r,
                    axis: 0,
                    r: r_f,
                    kind: FaceKind::OuterShell,
                }
            } else {
                Face {
                    lo: grid.index(i - 1, j),
                    hi: Some(grid.index(i, j)),
                    next: None,
                    area,
                    dist: h_r,
                    axis: 0,
                    r: r_f,
                    kind: FaceKind::Interior,
                }
            };
            faces.push(face);
        }
    }

    if has_s {
        let lo_z = if grid.axis() == AxisKind::Full { -grid.z_max() } else { 0.0 };
        for (i, &r) in r_nodes.iter().enumerate() {
            for j in 0..=n_s {
                let s_f = lo_z + j as f64 * h_s;
                let face = if j == 0 {
                    if grid.axis() == AxisKind::Radial {
                        // mirror face: zero normal derivative
                        continue;
                    }
                    Face {
                        lo: grid.index(i, 0),
                        hi: None,
                        next: Some(grid.index(i, 1)),
                        area: grid.weight(r, s_f) * h_r * ang,
                        dist: 0.5 * h_s,
                        axis: 1,
                        r,
                        kind: FaceKind::Truncation,
                    }
                } else if j == n_s {
                    Face {
                        lo: grid.index(i, n_s - 1),
                        hi: None,
                        next: Some(grid.index(i, n_s - 2)),
                        area: grid.weight(r, s_f) * h_r * ang,
                        dist: 0.5 * h_s,
                        axis: 1,
                        r,
                        kind: FaceKind::Truncation,
                    }
                } else {
                    Face {
                        lo: grid.index(i, j - 1),
                        hi: Some(grid.index(i, j)),
                        next: None,
                        area: grid.weight(r, s_f) * h_r * ang,
                        dist: h_s,
                        axis: 1,
                        r,
                        kind: FaceKind::Interior,
                    }
                };
                faces.push(face);
            }
        }
    }

    let cell = h_r * transverse * ang;
    let measure = (0..grid.len())
        .map(|idx| {
            let (r, s) = grid.coords(idx);
            grid.weight(r, s) * cell
        })
        .collect();

    DiscreteOperator::from_faces(faces, measure)
}

/// `||v||_m = sqrt(<A v, v>)`, evaluated as the face sum of the quadratic form.
pub fn weighted_h1_norm(op: &DiscreteOperator, v: &Field) -> Result<f64> {
    op.check_len(v.len())?;
    Ok(op.dirichlet_energy(v).sqrt())
}

/// Midpoint-rule `(sum_cells W |v|^q)^(1/q)`.
pub fn weighted_lp_norm(op: &DiscreteOperator, v: &Field, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::domain(format!("q = {q} must be at least 1")));
    }
    op.check_len(v.len())?;
    Ok(lp_norm(op.measure(), v, q))
}

pub(crate) fn lp_norm(measure: &[f64], v: &[f64], q: f64) -> f64 {
    lp_integral(measure, v, q).powf(1.0 / q)
}

pub(crate) fn lp_integral(measure: &[f64], v: &[f64], q: f64) -> f64 {
    measure.iter().zip(v).map(|(w, x)| w * x.abs().powf(q)).sum()
}
