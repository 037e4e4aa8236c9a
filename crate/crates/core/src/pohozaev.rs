//! The Pohozaev multiplier field `chi(y, z) = (phi(|y|) y, z)` and a term-by-term
//! audit of the identity
//!
//! ```text
//! 1/2 int_{dOmega} |grad u|^2 chi.nu = -int (div chi) F(u, grad u) + int Dchi[grad u].grad u
//! ```
//!
//! with `F(u, v) = |v|^2/2 - |u|^p/p`, evaluated on grid functions in reduced
//! coordinates. Angular constants are folded into every measure, so all terms
//! are full-domain integrals over the truncated shell.

use num_rational::Ratio;
use serde::Serialize;

use crate::discretization::{assemble_operator, face_jump, lp_integral, DiscreteOperator, Face, FaceKind, Field, StripGrid};
use crate::error::{Error, Result};
use crate::geometry::{Regime, ShellConfig};

/// `phi(t) = (1 - (a/t)^(m+1)) / (m+1)`, the solution of
/// `phi'(t) t + (m+1) phi(t) = 1`, `phi(a) = 0`.
pub fn phi(t: f64, a: f64, m: u32) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("phi needs t > 0, got {t}")));
    }
    Ok(phi_unchecked(t, a, m))
}

fn phi_unchecked(t: f64, a: f64, m: u32) -> f64 {
    let k = f64::from(m + 1);
    (1.0 - (a / t).powi(m as i32 + 1)) / k
}

/// `kappa(p) = (N - m)(1/p - 1/2 + 1/(N - m))`; positive iff `p < 2*_{N,m}` when `m < N - 2`.
pub fn pohozaev_factor(n: u32, m: u32, p: f64) -> f64 {
    let k = f64::from(n) - f64::from(m);
    k * (1.0 / p - 0.5 + 1.0 / k)
}

/// [`pohozaev_factor`] in exact rational arithmetic.
pub fn pohozaev_factor_exact(n: u32, m: u32, p: Ratio<i64>) -> Ratio<i64> {
    let k = Ratio::from_integer(i64::from(n) - i64::from(m));
    k * (p.recip() - Ratio::new(1, 2) + k.recip())
}

/// The vector field `chi` through its diagonal actions in reduced coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PohozaevField {
    pub n: u32,
    pub m: u32,
    pub a: f64,
}

impl PohozaevField {
    pub fn new(cfg: &ShellConfig) -> Self {
        PohozaevField { n: cfg.n(), m: cfg.m(), a: cfg.a() }
    }

    pub fn phi(&self, t: f64) -> f64 {
        phi_unchecked(t, self.a, self.m)
    }

    pub fn dphi(&self, t: f64) -> f64 {
        self.a.powi(self.m as i32 + 1) / t.powi(self.m as i32 + 2)
    }

    /// Coefficient of `Dchi` along `y/|y|`: `1 - m phi(r)`.
    pub fn radial_coeff(&self, r: f64) -> f64 {
        1.0 - f64::from(self.m) * self.phi(r)
    }

    /// Coefficient of `Dchi` on directions tangent to the sphere `|y| = r`.
    pub fn tangential_coeff(&self, r: f64) -> f64 {
        self.phi(r)
    }

    /// Coefficient of `Dchi` on `z` directions.
    pub fn z_coeff(&self) -> f64 {
        1.0
    }

    /// `div chi = phi'(r) r + (m+1) phi(r) + (N - m - 1)`.
    pub fn divergence(&self, r: f64) -> f64 {
        self.dphi(r) * r + f64::from(self.m + 1) * self.phi(r) + f64::from(self.n - self.m - 1)
    }

    /// `chi . nu` on the sphere `|y| = r` with outward normal (`r = a`: inner, `r = b`: outer).
    pub fn normal_on_shell(&self, r: f64, outer: bool) -> f64 {
        let radial = self.phi(r) * r;
        if outer {
            radial
        } else {
            -radial
        }
    }

    /// `|chi(y, z)|` for `|y| = r`, `|z| = z_abs`.
    pub fn magnitude(&self, r: f64, z_abs: f64) -> f64 {
        (self.phi(r) * r).hypot(z_abs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxFamily {
    OuterShell,
    Truncation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryFlux {
    pub value: f64,
    /// False when the grid has no face of the requested family.
    pub present: bool,
}

/// Term-by-term evaluation of the identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PohozaevReport {
    /// `-int (div chi) F(u, grad u)`.
    pub div_term: f64,
    /// `int Dchi[grad u] . grad u`.
    pub dchi_term: f64,
    /// `1/2 int_{|y| = b} |grad u|^2 chi.nu`.
    pub shell_flux: f64,
    /// Same over the truncation faces, where `chi.nu = Z`.
    pub trunc_flux: f64,
    /// `shell_flux + trunc_flux - div_term - dchi_term`.
    pub residual: f64,
    pub kappa: f64,
    /// `int |grad u|^2`.
    pub dirichlet_energy: f64,
    /// `int |u|^p`.
    pub lp_integral: f64,
    /// Angular constant folded into the measures; divide by it for the reduced-strip value.
    pub angular_constant: f64,
    pub truncation_present: bool,
    /// Set for the zero field.
    pub degenerate: bool,
    pub regime: Regime,
}

impl PohozaevReport {
    /// `|residual| / dirichlet_energy` (0 for the zero field).
    pub fn relative_residual(&self) -> f64 {
        if self.degenerate {
            0.0
        } else {
            self.residual.abs() / self.dirichlet_energy
        }
    }

    /// `trunc_flux / dirichlet_energy`.
    pub fn truncation_share(&self) -> f64 {
        if self.degenerate {
            0.0
        } else {
            self.trunc_flux / self.dirichlet_energy
        }
    }

    /// `0 < shell_flux <= kappa E (1 + slack)`.
    pub fn chain_holds(&self, slack: f64) -> bool {
        self.shell_flux > 0.0 && self.shell_flux <= self.kappa * self.dirichlet_energy * (1.0 + slack)
    }
}

/// `|d_nu u|` on a Dirichlet face from the one-sided quadratic through the
/// face value 0 and the two nearest cell centers.
fn normal_derivative(f: &Face, u: &[f64]) -> f64 {
    let h = 2.0 * f.dist;
    let u1 = u[f.lo];
    match f.next {
        Some(k) => (9.0 * u1 - u[k]) / (3.0 * h),
        None => u1 / f.dist,
    }
}

fn flux_over(op: &DiscreteOperator, u: &[f64], kind: FaceKind, chi_nu: impl Fn(&Face) -> f64) -> (f64, bool) {
    let mut total = 0.0;
    let mut present = false;
    for f in op.faces().iter().filter(|f| f.kind == kind) {
        present = true;
        total += 0.5 * normal_derivative(f, u).powi(2) * chi_nu(f) * f.area;
    }
    (total, present)
}

pub fn boundary_flux(grid: &StripGrid, cfg: &ShellConfig, u: &Field, which: FluxFamily) -> Result<BoundaryFlux> {
    let op = assemble_operator(grid);
    op_check(&op, u)?;
    Ok(flux_with(&op, grid, cfg, u, which))
}

fn op_check(op: &DiscreteOperator, u: &Field) -> Result<()> {
    if op.len() != u.len() {
        return Err(Error::ShapeMismatch { expected: op.len(), got: u.len() });
    }
    Ok(())
}

fn flux_with(op: &DiscreteOperator, grid: &StripGrid, cfg: &ShellConfig, u: &[f64], which: FluxFamily) -> BoundaryFlux {
    let chi = PohozaevField::new(cfg);
    let (value, present) = match which {
        FluxFamily::OuterShell => flux_over(op, u, FaceKind::OuterShell, |f| chi.normal_on_shell(f.r, true)),
        FluxFamily::Truncation => flux_over(op, u, FaceKind::Truncation, |_| grid.z_max()),
    };
    BoundaryFlux { value, present }
}

/// Audits the identity on `u` (a discrete solution or forced iterate).
pub fn pohozaev_report(grid: &StripGrid, cfg: &ShellConfig, u: &Field) -> Result<PohozaevReport> {
    let op = assemble_operator(grid);
    op_check(&op, u)?;
    let chi = PohozaevField::new(cfg);
    let p = cfg.p();
    let kappa = pohozaev_factor(cfg.n(), cfg.m(), p);
    let regime = cfg.classify().regime;
    let angular_constant = grid.weighting().angular;
    let truncation_present = grid.axis() != crate::discretization::AxisKind::Absent;

    if u.iter().all(|&x| x == 0.0) {
        return Ok(PohozaevReport {
            div_term: 0.0,
            dchi_term: 0.0,
            shell_flux: 0.0,
            trunc_flux: 0.0,
            residual: 0.0,
            kappa,
            dirichlet_energy: 0.0,
            lp_integral: 0.0,
            angular_constant,
            truncation_present,
            degenerate: true,
            regime,
        });
    }

    let dirichlet_energy = op.dirichlet_energy(u);
    let lp = lp_integral(op.measure(), u, p);
    let div_n = f64::from(cfg.n() - cfg.m());
    let div_term = -div_n * (0.5 * dirichlet_energy - lp / p);
    let dchi_term: f64 = op
        .faces()
        .iter()
        .map(|f| {
            let mult = if f.axis == 0 { chi.radial_coeff(f.r) } else { chi.z_coeff() };
            mult * f.coeff() * face_jump(f, u).powi(2)
        })
        .sum();
    let shell_flux = flux_with(&op, grid, cfg, u, FluxFamily::OuterShell).value;
    let trunc_flux = flux_with(&op, grid, cfg, u, FluxFamily::Truncation).value;

    Ok(PohozaevReport {
        div_term,
        dchi_term,
        shell_flux,
        trunc_flux,
        residual: shell_flux + trunc_flux - div_term - dchi_term,
        kappa,
        dirichlet_energy,
        lp_integral: lp,
        angular_constant,
        truncation_present,
        degenerate: false,
        regime,
    })
}

/// Same audit for a radial profile (`d = 0`) sampled on a uniform mesh
/// `r_j = a + j (b - a)/n` with `n` even, using Simpson quadrature.
pub fn pohozaev_report_profile(cfg: &ShellConfig, u: &[f64], du: &[f64]) -> Result<PohozaevReport> {
    if cfg.reduced_dimension() != 0 {
        return Err(Error::NotApplicable("profile audit is for d = 0 shells".into()));
    }
    let n = u.len().checked_sub(1).ok_or_else(|| Error::domain("empty profile"))?;
    if n < 2 || n % 2 != 0 || du.len() != u.len() {
        return Err(Error::domain("profile needs an even number of intervals and matching derivative samples"));
    }
    let chi = PohozaevField::new(cfg);
    let (a, b, p, m) = (cfg.a(), cfg.b(), cfg.p(), cfg.m());
    let h = (b - a) / n as f64;
    let ang = crate::geometry::sphere_area(m);
    let simpson = |g: &dyn Fn(usize) -> f64| -> f64 {
        let mut s = g(0) + g(n);
        for j in 1..n {
            s += if j % 2 == 1 { 4.0 } else { 2.0 } * g(j);
        }
        s * h / 3.0 * ang
    };
    let r = |j: usize| a + j as f64 * h;
    let w = |j: usize| r(j).powi(m as i32);
    let dirichlet_energy = simpson(&|j| w(j) * du[j] * du[j]);
    let lp = simpson(&|j| w(j) * u[j].abs().powf(p));
    let dchi_term = simpson(&|j| w(j) * chi.radial_coeff(r(j)) * du[j] * du[j]);
    let div_n = f64::from(cfg.n() - m);
    let div_term = -div_n * (0.5 * dirichlet_energy - lp / p);
    let shell_flux = 0.5 * du[n] * du[n] * chi.normal_on_shell(b, true) * b.powi(m as i32) * ang;
    let degenerate = u.iter().all(|&x| x == 0.0);
    Ok(PohozaevReport {
        div_term,
        dchi_term,
        shell_flux,
        trunc_flux: 0.0,
        residual: shell_flux - div_term - dchi_term,
        kappa: pohozaev_factor(cfg.n(), m, p),
        dirichlet_energy,
        lp_integral: lp,
        angular_constant: ang,
        truncation_present: false,
        degenerate,
        regime: cfg.classify().regime,
    })
}
