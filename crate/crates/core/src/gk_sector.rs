//! `G_k`-equivariant sign-changing solutions for `N = 3, m = 1`.
//!
//! `G_k < O(2)` is generated by the rotation `alpha` by `2 pi/k` and the
//! reflection `beta` across the line at angle `pi/k`; it acts on `u` by
//! `(g u)(x) = det(g) u(g^{-1} x)`. Fixed points vanish on every reflection
//! line `theta = j pi/k`, so they are determined by their values on the
//! sector `0 < theta < pi/k` with Dirichlet data on its sides.

use std::f64::consts::PI;

use serde::Serialize;

use crate::discretization::{norm, DiscreteOperator, Face, FaceKind, Field};
use crate::error::{Error, Result};
use crate::nodal::Lattice;
use crate::solver::{InitialGuess, MinimizerRecord, Problem, SolverConfig, ZGauge};

/// Cell-centered cylindrical grid `(rho, theta, z)` on a sector or on the full annulus.
///
/// Flat index: `(l * n_theta + j) * n_rho + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorGrid {
    k: u32,
    a: f64,
    b: f64,
    z_max: f64,
    rho_nodes: Vec<f64>,
    theta_nodes: Vec<f64>,
    z_nodes: Vec<f64>,
    h_rho: f64,
    h_theta: f64,
    h_z: f64,
    /// Full annulus `theta in (0, 2 pi)`, periodic; otherwise the sector `(0, pi/k)`.
    periodic: bool,
}

impl SectorGrid {
    pub fn new(k: u32, a: f64, b: f64, z_max: f64, n_rho: usize, n_theta: usize, n_z: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::domain(format!("G_k needs k >= 3, got {k}")));
        }
        Self::build(k, a, b, z_max, n_rho, n_theta, n_z, PI / f64::from(k), false)
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        k: u32,
        a: f64,
        b: f64,
        z_max: f64,
        n_rho: usize,
        n_theta: usize,
        n_z: usize,
        theta_max: f64,
        periodic: bool,
    ) -> Result<Self> {
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(Error::domain(format!("need 0 < a < b, got a = {a}, b = {b}")));
        }
        if !(z_max > 0.0 && z_max.is_finite()) {
            return Err(Error::domain(format!("truncation length {z_max} must be positive")));
        }
        if n_rho < 4 || n_theta < 4 || n_z < 4 {
            return Err(Error::domain("each axis needs at least 4 cells"));
        }
        let h_rho = (b - a) / n_rho as f64;
        let h_theta = theta_max / n_theta as f64;
        let h_z = 2.0 * z_max / n_z as f64;
        Ok(SectorGrid {
            k,
            a,
            b,
            z_max,
            rho_nodes: (0..n_rho).map(|i| a + (i as f64 + 0.5) * h_rho).collect(),
            theta_nodes: (0..n_theta).map(|j| (j as f64 + 0.5) * h_theta).collect(),
            z_nodes: (0..n_z).map(|l| -z_max + (l as f64 + 0.5) * h_z).collect(),
            h_rho,
            h_theta,
            h_z,
            periodic,
        })
    }

    /// Full-annulus grid tiled by `2k` copies of this sector.
    pub fn full_annulus(&self) -> SectorGrid {
        let n_theta = 2 * self.k as usize * self.n_theta();
        Self::build(self.k, self.a, self.b, self.z_max, self.n_rho(), n_theta, self.n_z(), 2.0 * PI, true)
            .expect("sector grid already validated")
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn is_full(&self) -> bool {
        self.periodic
    }

    pub fn n_rho(&self) -> usize {
        self.rho_nodes.len()
    }

    pub fn n_theta(&self) -> usize {
        self.theta_nodes.len()
    }

    pub fn n_z(&self) -> usize {
        self.z_nodes.len()
    }

    pub fn rho_nodes(&self) -> &[f64] {
        &self.rho_nodes
    }

    pub fn theta_nodes(&self) -> &[f64] {
        &self.theta_nodes
    }

    pub fn z_nodes(&self) -> &[f64] {
        &self.z_nodes
    }

    pub fn len(&self) -> usize {
        self.n_rho() * self.n_theta() * self.n_z()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (l * self.n_theta() + j) * self.n_rho() + i
    }

    pub fn coords(&self, idx: usize) -> (f64, f64, f64) {
        let i = idx % self.n_rho();
        let j = (idx / self.n_rho()) % self.n_theta();
        let l = idx / (self.n_rho() * self.n_theta());
        (self.rho_nodes[i], self.theta_nodes[j], self.z_nodes[l])
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::new(vec![self.n_rho(), self.n_theta(), self.n_z()], vec![false, self.periodic, false])
    }

    /// Operator of `-(1/rho) d_rho(rho d_rho) - rho^-2 d_theta^2 - d_z^2` in
    /// divergence form with measure `rho d rho d theta d z`.
    pub fn assemble(&self) -> DiscreteOperator {
        let (nr, nt, nz) = (self.n_rho(), self.n_theta(), self.n_z());
        let (hr, ht, hz) = (self.h_rho, self.h_theta, self.h_z);
        let mut faces = Vec::with_capacity(3 * self.len() + nr * nz + nt * nz + nr * nt);

        for l in 0..nz {
            for j in 0..nt {
                for i in 0..=nr {
                    let rf = self.a + i as f64 * hr;
                    let area = rf * ht * hz;
                    faces.push(if i == 0 {
                        dirichlet(self.index(0, j, l), self.index(1, j, l), area, hr, 0, rf, FaceKind::InnerShell)
                    } else if i == nr {
                        dirichlet(self.index(nr - 1, j, l), self.index(nr - 2, j, l), area, hr, 0, rf, FaceKind::OuterShell)
                    } else {
                        interior(self.index(i - 1, j, l), self.index(i, j, l), area, hr, 0, rf)
                    });
                }
            }
        }

        for l in 0..nz {
            for (i, &rho) in self.rho_nodes.iter().enumerate() {
                let area = hr * hz / rho;
                if self.periodic {
                    for j in 0..nt {
                        let next = (j + 1) % nt;
                        faces.push(interior(self.index(i, j, l), self.index(i, next, l), area, ht, 1, rho));
                    }
                } else {
                    for j in 0..=nt {
                        faces.push(if j == 0 {
                            dirichlet(self.index(i, 0, l), self.index(i, 1, l), area, ht, 1, rho, FaceKind::Seam)
                        } else if j == nt {
                            dirichlet(self.index(i, nt - 1, l), self.index(i, nt - 2, l), area, ht, 1, rho, FaceKind::Seam)
                        } else {
                            interior(self.index(i, j - 1, l), self.index(i, j, l), area, ht, 1, rho)
                        });
                    }
                }
            }
        }

        for j in 0..nt {
            for (i, &rho) in self.rho_nodes.iter().enumerate() {
                let area = rho * hr * ht;
                for l in 0..=nz {
                    faces.push(if l == 0 {
                        dirichlet(self.index(i, j, 0), self.index(i, j, 1), area, hz, 2, rho, FaceKind::Truncation)
                    } else if l == nz {
                        dirichlet(self.index(i, j, nz - 1), self.index(i, j, nz - 2), area, hz, 2, rho, FaceKind::Truncation)
                    } else {
                        interior(self.index(i, j, l - 1), self.index(i, j, l), area, hz, 2, rho)
                    });
                }
            }
        }

        let measure = (0..self.len()).map(|idx| self.coords(idx).0 * hr * ht * hz).collect();
        DiscreteOperator::from_faces(faces, measure)
    }

    /// `sin(pi (rho - a)/(b - a)) sin(k theta) exp(-z^2)`, positive on the open sector.
    pub fn positive_bump(&self) -> Vec<f64> {
        let k = f64::from(self.k);
        (0..self.len())
            .map(|idx| {
                let (rho, theta, z) = self.coords(idx);
                (PI * (rho - self.a) / (self.b - self.a)).sin() * (k * theta).sin() * (-z * z).exp()
            })
            .collect()
    }
}

fn interior(lo: usize, hi: usize, area: f64, h: f64, axis: u8, r: f64) -> Face {
    Face { lo, hi: Some(hi), next: None, area, dist: h, axis, r, kind: FaceKind::Interior }
}

fn dirichlet(lo: usize, next: usize, area: f64, h: f64, axis: u8, r: f64, kind: FaceKind) -> Face {
    Face { lo, hi: None, next: Some(next), area, dist: 0.5 * h, axis, r, kind }
}

/// Classical Sobolev exponent `2N/(N-2)` for `N = 3`.
pub const SOBOLEV_EXPONENT_3D: f64 = 6.0;

/// Positive minimizer of the Dirichlet energy on the sector under `|v|_p = 1`.
pub fn sector_ground_state(grid: &SectorGrid, p: f64, scfg: &SolverConfig) -> Result<MinimizerRecord> {
    if grid.is_full() {
        return Err(Error::domain("sector solves need a sector grid, not the full annulus"));
    }
    if !(p > 2.0 && p < SOBOLEV_EXPONENT_3D) {
        return Err(Error::domain(format!("G_k solutions need 2 < p < 6, got p = {p}")));
    }
    let op = grid.assemble();
    let init = match &scfg.init {
        InitialGuess::PositiveBump => grid.positive_bump(),
        InitialGuess::Custom(f) => f.to_vec(),
    };
    let gauge = ZGauge { stride: grid.n_rho() * grid.n_theta(), z_nodes: grid.z_nodes(), h: grid.h_z };
    Problem { op: &op, p, gauge: Some(gauge) }.minimize(init, scfg)
}

/// Element `alpha^rotation beta^reflect` of `G_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GroupElement {
    pub rotation: u32,
    pub reflect: bool,
}

impl GroupElement {
    /// `det` as an element of `O(N)`: `+1` for rotations, `-1` once a `beta` appears.
    pub fn det(&self) -> f64 {
        if self.reflect {
            -1.0
        } else {
            1.0
        }
    }

    /// Image of full-annulus angular cell `j` (of `2 k n` cells, `n` per sector).
    pub fn act_on_cell(&self, j: usize, k: u32, n: usize) -> usize {
        let total = 2 * k as usize * n;
        let base = if self.reflect {
            // beta: theta -> 2 pi/k - theta
            (2 * n + total - 1 - j) % total
        } else {
            j
        };
        (base + 2 * n * self.rotation as usize) % total
    }
}

/// All `2k` elements of `G_k`.
pub fn group_elements(k: u32) -> Vec<GroupElement> {
    (0..k)
        .flat_map(|q| [false, true].map(|reflect| GroupElement { rotation: q, reflect }))
        .collect()
}

/// Tiles the annulus by `2k` signed copies of the sector field: copy `s`
/// covers `theta in (s pi/k, (s+1) pi/k)`, is mirrored when `s` is odd and
/// carries the sign `(-1)^s`.
pub fn extend_by_reflection(grid: &SectorGrid, v: &Field) -> Result<(SectorGrid, Field)> {
    if grid.is_full() {
        return Err(Error::domain("field is already on the full annulus"));
    }
    if grid.k() < 3 {
        return Err(Error::domain("G_k needs k >= 3"));
    }
    if v.len() != grid.len() {
        return Err(Error::ShapeMismatch { expected: grid.len(), got: v.len() });
    }
    let full = grid.full_annulus();
    let n = grid.n_theta();
    let mut out = vec![0.0; full.len()];
    for l in 0..grid.n_z() {
        for jf in 0..full.n_theta() {
            let copy = jf / n;
            let local = jf % n;
            let (src, sign) = if copy.is_multiple_of(2) { (local, 1.0) } else { (n - 1 - local, -1.0) };
            for i in 0..grid.n_rho() {
                out[full.index(i, jf, l)] = sign * v[grid.index(i, src, l)];
            }
        }
    }
    Ok((full, Field::from_vec(out)))
}

/// `max_{g, x} |u(g x) - det(g) u(x)|` over all grid-aligned elements of `G_k`.
pub fn equivariance_defect(full: &SectorGrid, u: &Field) -> Result<f64> {
    if !full.is_full() {
        return Err(Error::domain("equivariance is checked on the full annulus"));
    }
    let k = full.k();
    let n = full.n_theta() / (2 * k as usize);
    let mut worst = 0.0f64;
    for g in group_elements(k) {
        for l in 0..full.n_z() {
            for j in 0..full.n_theta() {
                let gj = g.act_on_cell(j, k, n);
                for i in 0..full.n_rho() {
                    let d = u[full.index(i, gj, l)] - g.det() * u[full.index(i, j, l)];
                    worst = worst.max(d.abs());
                }
            }
        }
    }
    Ok(worst)
}

/// PDE residual of `u` on the full annulus, skipping cells adjacent to a reflection line.
pub fn residual_away_from_seams(full: &SectorGrid, u: &Field, p: f64) -> Result<f64> {
    if !full.is_full() {
        return Err(Error::domain("seam-masked residual is computed on the full annulus"));
    }
    let op = full.assemble();
    let n = full.n_theta() / (2 * full.k() as usize);
    let au = op.apply(u);
    let mut diff = Vec::new();
    let mut src = Vec::new();
    for idx in 0..full.len() {
        let j = (idx / full.n_rho()) % full.n_theta();
        let local = j % n;
        if local == 0 || local == n - 1 {
            continue;
        }
        let s = op.measure()[idx] * u[idx].abs().powf(p - 2.0) * u[idx];
        diff.push(au[idx] - s);
        src.push(s);
    }
    Ok(norm(&diff) / norm(&src))
}
