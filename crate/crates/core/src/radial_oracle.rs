//! Shooting solver for radial solutions on annuli (`d = 0`):
//! `u'' = -(m/r) u' - |u|^{p-2} u`, `u(a) = 0`, `u(b) = 0`.
//!
//! Classical RK4 with a fixed step, bisection on the initial slope. Used as
//! an oracle independent of the finite-volume discretization.

use crate::discretization::{Field, StripGrid};
use crate::error::{Error, Result};
use crate::geometry::{sphere_area, ShellConfig};

const BLOWUP: f64 = 1e150;
const SIGMA_MIN: f64 = 1e-6;
const SIGMA_MAX: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProblem {
    pub a: f64,
    pub b: f64,
    pub m: u32,
    pub p: f64,
}

impl RadialProblem {
    pub fn new(a: f64, b: f64, m: u32, p: f64) -> Result<Self> {
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(Error::domain(format!("need 0 < a < b, got a = {a}, b = {b}")));
        }
        if !(p > 2.0) {
            return Err(Error::domain(format!("p = {p} must exceed 2")));
        }
        Ok(RadialProblem { a, b, m, p })
    }

    pub fn from_shell(cfg: &ShellConfig) -> Self {
        RadialProblem { a: cfg.a(), b: cfg.b(), m: cfg.m(), p: cfg.p() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShootMode {
    Nonlinear,
    /// Drops the nonlinearity: `u'' = -(m/r) u'`.
    Linear,
}

/// Outcome of one shot from `(u, u')(a) = (0, sigma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shot {
    /// `u(b)`, or a signed infinity if the integration overflowed.
    pub end_value: f64,
    pub blowup_at: Option<f64>,
    /// Sign changes of `u` on `(a, b]`.
    pub crossings: usize,
}

struct Trajectory {
    u: Vec<f64>,
    du: Vec<f64>,
    shot: Shot,
}

fn rhs(prob: &RadialProblem, mode: ShootMode, r: f64, u: f64, v: f64) -> (f64, f64) {
    let damping = -(f64::from(prob.m) / r) * v;
    let source = match mode {
        ShootMode::Nonlinear => u.abs().powf(prob.p - 2.0) * u,
        ShootMode::Linear => 0.0,
    };
    (v, damping - source)
}

fn integrate(prob: &RadialProblem, sigma: f64, n_steps: usize, mode: ShootMode, keep: bool) -> Trajectory {
    let h = (prob.b - prob.a) / n_steps as f64;
    let (mut u, mut v) = (0.0f64, sigma);
    let mut us = Vec::new();
    let mut dus = Vec::new();
    if keep {
        us.reserve(n_steps + 1);
        dus.reserve(n_steps + 1);
        us.push(u);
        dus.push(v);
    }
    let mut crossings = 0;
    let mut prev = 0.0f64;
    for k in 0..n_steps {
        let r = prob.a + k as f64 * h;
        let (k1u, k1v) = rhs(prob, mode, r, u, v);
        let (k2u, k2v) = rhs(prob, mode, r + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v);
        let (k3u, k3v) = rhs(prob, mode, r + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v);
        let (k4u, k4v) = rhs(prob, mode, r + h, u + h * k3u, v + h * k3v);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if !(u.abs() < BLOWUP && v.abs() < BLOWUP) {
            let sign = if u.is_nan() { 1.0 } else { u.signum() };
            return Trajectory {
                u: us,
                du: dus,
                shot: Shot { end_value: sign * f64::INFINITY, blowup_at: Some(r + h), crossings },
            };
        }
        if (prev > 0.0 && u <= 0.0) || (prev < 0.0 && u >= 0.0) {
            crossings += 1;
        }
        if u != 0.0 {
            prev = u;
        }
        if keep {
            us.push(u);
            dus.push(v);
        }
    }
    Trajectory { u: us, du: dus, shot: Shot { end_value: u, blowup_at: None, crossings } }
}

/// Integrates from `(0, sigma)` at `r = a` with `n_steps` RK4 steps.
pub fn shoot(sigma: f64, prob: &RadialProblem, n_steps: usize, mode: ShootMode) -> Result<Shot> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("slope sigma = {sigma} must be finite and nonnegative")));
    }
    if n_steps < 100 {
        return Err(Error::domain(format!("n_steps = {n_steps} must be at least 100")));
    }
    Ok(integrate(prob, sigma, n_steps, mode, false).shot)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub n_steps: usize,
    /// Required `|u(b)|`.
    pub tol: f64,
    /// Number of interior zeros of the requested branch (0 = ground branch).
    pub branch: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { n_steps: 100_000, tol: 1e-12, branch: 0 }
    }
}

/// Sampled radial solution.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    pub sigma_star: f64,
    pub branch: usize,
    pub a: f64,
    pub b: f64,
    /// `u` at `r_j = a + j (b - a)/n_steps`.
    pub profile: Vec<f64>,
    pub derivative: Vec<f64>,
    pub amplitude: f64,
    /// `|S^m| int r^m |u'|^2 dr`.
    pub energy: f64,
    pub end_value: f64,
}

impl RadialSolution {
    pub fn n_steps(&self) -> usize {
        self.profile.len() - 1
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / self.n_steps() as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (0..self.profile.len()).map(move |j| self.a + j as f64 * h)
    }

    /// Cubic Hermite interpolation of the profile.
    pub fn value_at(&self, r: f64) -> f64 {
        let h = self.step();
        let n = self.n_steps();
        let t = ((r - self.a) / h).clamp(0.0, n as f64);
        let j = (t.floor() as usize).min(n - 1);
        hermite(self.profile[j], self.derivative[j], self.profile[j + 1], self.derivative[j + 1], h, t - j as f64)
    }

    /// Samples the profile at the cell centers of a `d = 0` grid.
    pub fn to_field(&self, grid: &StripGrid) -> Field {
        Field::from_vec(grid.r_nodes().iter().map(|&r| self.value_at(r)).collect())
    }

    /// Sign changes of `u'` on the mesh (1 for a single interior maximum).
    pub fn derivative_sign_changes(&self) -> usize {
        self.derivative.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count()
    }
}

fn hermite(u0: f64, d0: f64, u1: f64, d1: f64, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * u0 + (t3 - 2.0 * t2 + t) * h * d0 + (-2.0 * t3 + 3.0 * t2) * u1 + (t3 - t2) * h * d1
}

fn hermite_slope(u0: f64, d0: f64, u1: f64, d1: f64, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    ((6.0 * t2 - 6.0 * t) * u0 + (6.0 * t - 6.0 * t2) * u1) / h + (3.0 * t2 - 4.0 * t + 1.0) * d0 + (3.0 * t2 - 2.0 * t) * d1
}

/// `max |u|` using the Hermite interpolant around each critical point.
fn amplitude(u: &[f64], du: &[f64], h: f64) -> f64 {
    let mut best = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for j in 0..u.len() - 1 {
        if (du[j] > 0.0) == (du[j + 1] > 0.0) {
            continue;
        }
        let slope = |t| hermite_slope(u[j], du[j], u[j + 1], du[j + 1], h, t);
        let (mut lo, mut hi) = (0.0, 1.0);
        let s_lo = slope(lo);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if (slope(mid) > 0.0) == (s_lo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        best = best.max(hermite(u[j], du[j], u[j + 1], du[j + 1], h, 0.5 * (lo + hi)).abs());
    }
    best
}

/// Ground branch (one-sign) radial solution for a `d = 0` shell.
pub fn radial_ground_state(cfg: &ShellConfig, tol: f64) -> Result<RadialSolution> {
    radial_solution(cfg, &OracleOptions { tol, ..OracleOptions::default() })
}

/// Radial solution with `opts.branch` interior zeros.
pub fn radial_solution(cfg: &ShellConfig, opts: &OracleOptions) -> Result<RadialSolution> {
    if cfg.reduced_dimension() != 0 {
        return Err(Error::NotApplicable(format!(
            "radial oracle needs m = N - 1, got N = {}, m = {}",
            cfg.n(),
            cfg.m()
        )));
    }
    if opts.n_steps < 100 || !opts.n_steps.is_multiple_of(2) {
        return Err(Error::domain("n_steps must be even and at least 100"));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let prob = RadialProblem::from_shell(cfg);
    let n = opts.n_steps;
    let past = |sigma: f64| integrate(&prob, sigma, n, ShootMode::Nonlinear, false).shot.crossings > opts.branch;

    let mut lo = SIGMA_MIN;
    if past(lo) {
        return Err(Error::Bracketing { lo: SIGMA_MIN, hi: SIGMA_MAX, branch: opts.branch });
    }
    let mut hi = lo;
    loop {
        hi *= 2.0;
        if hi > SIGMA_MAX {
            return Err(Error::Bracketing { lo: SIGMA_MIN, hi: SIGMA_MAX, branch: opts.branch });
        }
        if past(hi) {
            break;
        }
        lo = hi;
    }

    let mut sigma = lo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let shot = integrate(&prob, mid, n, ShootMode::Nonlinear, false).shot;
        sigma = mid;
        if shot.end_value.abs() <= opts.tol {
            break;
        }
        if shot.crossings > opts.branch {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let traj = integrate(&prob, sigma, n, ShootMode::Nonlinear, true);
    if traj.shot.end_value.abs() > opts.tol {
        return Err(Error::Bracketing { lo, hi, branch: opts.branch });
    }
    let h = (cfg.b() - cfg.a()) / n as f64;
    let ang = sphere_area(cfg.m());
    let w = |j: usize| (cfg.a() + j as f64 * h).powi(cfg.m() as i32) * traj.du[j] * traj.du[j];
    let mut energy = w(0) + w(n);
    for j in 1..n {
        energy += if j % 2 == 1 { 4.0 } else { 2.0 } * w(j);
    }
    energy *= h / 3.0 * ang;

    Ok(RadialSolution {
        sigma_star: sigma,
        branch: opts.branch,
        a: cfg.a(),
        b: cfg.b(),
        amplitude: amplitude(&traj.u, &traj.du, h),
        profile: traj.u,
        derivative: traj.du,
        energy,
        end_value: traj.shot.end_value,
    })
}
