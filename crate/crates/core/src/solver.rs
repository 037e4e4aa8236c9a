//! Constrained minimization of `I(v) = ||v||_m^2` on `{|v|_{m,p} = 1}`.
//!
//! The outer scheme is normalized inverse iteration
//! `v <- normalize(A^{-1}(W |v|^{p-2} v))`. In exact arithmetic each step
//! does not increase `I`. A step whose energy rises past rounding level and
//! whose residual does not drop is replaced by a projected-gradient step with
//! backtracking.

use std::f64::consts::PI;

use crate::discretization::{
    assemble_operator, default_cap, lp_norm, norm, solve_from, AxisKind, DiscreteOperator, Field, StripGrid,
};
use crate::error::{Error, NonConvergence, RegimeRefusal, Result};
use crate::geometry::{Regime, ShellConfig};
use crate::pohozaev::pohozaev_factor;

/// Relative slack when comparing energies of successive iterates.
const ENERGY_ROUNDING: f64 = 64.0 * f64::EPSILON;
const MAX_BACKTRACK: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// `sin(pi (r - a)/(b - a)) exp(-|z|^2)` (times `sin(k theta)` on sectors).
    PositiveBump,
    Custom(Field),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub energy_tol: f64,
    pub residual_tol: f64,
    pub max_outer: usize,
    pub linear_tol: f64,
    pub init: InitialGuess,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            energy_tol: 1e-10,
            residual_tol: 1e-8,
            max_outer: 500,
            linear_tol: 1e-12,
            init: InitialGuess::PositiveBump,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("energy_tol", self.energy_tol),
            ("residual_tol", self.residual_tol),
            ("linear_tol", self.linear_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} = {v} must be positive")));
            }
        }
        if self.max_outer < 1 {
            return Err(Error::domain("max_outer must be at least 1"));
        }
        Ok(())
    }
}

/// Normalized minimizer, its energy and the rescaled PDE solution.
#[derive(Debug, Clone)]
pub struct MinimizerRecord {
    /// Minimizer with `|v|_{m,p} = 1`.
    pub v: Field,
    /// `I(v)`, the discrete `c_0` (or `c_0^G`).
    pub c: f64,
    /// `c^{1/(p-2)} v`.
    pub u: Field,
    pub p: f64,
    pub outer_iters: usize,
    pub pde_residual: f64,
    pub constraint_defect: f64,
    pub converged: bool,
    /// `I` after each accepted step, starting with the initial guess.
    pub energy_history: Vec<f64>,
    pub residual_history: Vec<f64>,
    /// Steps where the inverse-iteration candidate was rejected.
    pub fallback_steps: usize,
}

/// Shifts iterates along a uniform `z` axis so the `|v|^p`-weighted barycenter sits at 0.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ZGauge<'a> {
    /// Number of cells per `z` slice; the `z` index of cell `idx` is `idx / stride`.
    pub stride: usize,
    pub z_nodes: &'a [f64],
    pub h: f64,
}

impl ZGauge<'_> {
    fn barycenter(&self, v: &[f64], measure: &[f64], p: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (idx, (x, w)) in v.iter().zip(measure).enumerate() {
            let mass = w * x.abs().powf(p);
            num += mass * self.z_nodes[idx / self.stride];
            den += mass;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    /// Returns true if the iterate was moved.
    fn recenter(&self, v: &mut [f64], measure: &[f64], p: f64) -> bool {
        let zbar = self.barycenter(v, measure, p);
        if zbar.abs() <= 1e-3 * self.h {
            return false;
        }
        let n_z = self.z_nodes.len();
        let shift = zbar / self.h;
        let base = shift.floor();
        let frac = shift - base;
        let base = base as isize;
        let old = v.to_vec();
        let at = |j: isize, k: usize| -> f64 {
            if j < 0 || j >= n_z as isize {
                0.0
            } else {
                old[j as usize * self.stride + k]
            }
        };
        for j in 0..n_z {
            for k in 0..self.stride {
                let src = j as isize + base;
                v[j * self.stride + k] = (1.0 - frac) * at(src, k) + frac * at(src + 1, k);
            }
        }
        true
    }
}

pub(crate) struct Problem<'a> {
    pub op: &'a DiscreteOperator,
    pub p: f64,
    pub gauge: Option<ZGauge<'a>>,
}

impl Problem<'_> {
    fn normalize(&self, v: &mut [f64]) -> Result<()> {
        let n = lp_norm(self.op.measure(), v, self.p);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::domain("iterate has zero or non-finite weighted Lp norm"));
        }
        v.iter_mut().for_each(|x| *x /= n);
        Ok(())
    }

    /// `W |v|^{p-2} v`.
    fn source(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(self.op.measure())
            .map(|(x, w)| w * x.abs().powf(self.p - 2.0) * x)
            .collect()
    }

    /// `||A v - c W|v|^{p-2}v|| / ||c W|v|^{p-2}v||`.
    fn residual(&self, v: &[f64], c: f64) -> f64 {
        let src = self.source(v);
        let av = self.op.apply(v);
        let diff: Vec<f64> = av.iter().zip(&src).map(|(a, s)| a - c * s).collect();
        norm(&diff) / (c * norm(&src))
    }

    fn projected_gradient(&self, v: &[f64], c: f64) -> Option<(Vec<f64>, f64)> {
        let src = self.source(v);
        let av = self.op.apply(v);
        let w = self.op.measure();
        let dir: Vec<f64> = (0..v.len()).map(|i| -(av[i] - c * src[i]) / w[i]).collect();
        let stiff = self.op.diag().iter().zip(w).map(|(d, w)| d / w).fold(0.0, f64::max);
        let mut tau = 1.0 / stiff;
        for _ in 0..MAX_BACKTRACK {
            let mut cand: Vec<f64> = v.iter().zip(&dir).map(|(x, d)| x + tau * d).collect();
            if self.normalize(&mut cand).is_ok() {
                let e = self.op.dirichlet_energy(&cand);
                if e < c {
                    return Some((cand, e));
                }
            }
            tau *= 0.5;
        }
        None
    }

    pub fn minimize(&self, init: Vec<f64>, scfg: &SolverConfig) -> Result<MinimizerRecord> {
        scfg.validate()?;
        self.op.check_len(init.len())?;
        let mut v = init;
        self.normalize(&mut v)?;
        if let Some(g) = &self.gauge {
            if g.recenter(&mut v, self.op.measure(), self.p) {
                self.normalize(&mut v)?;
            }
        }
        let mut c = self.op.dirichlet_energy(&v);
        let mut energy_history = vec![c];
        let mut residual_history = vec![self.residual(&v, c)];
        let mut fallback_steps = 0;
        let mut converged = false;
        let mut stalled = false;
        let mut outer_iters = 0;
        let cap = default_cap(v.len());

        while outer_iters < scfg.max_outer {
            outer_iters += 1;
            let rhs = self.source(&v);
            let guess: Vec<f64> = v.iter().map(|x| x / c).collect();
            let (mut cand, _) = solve_from(self.op, &rhs, guess, scfg.linear_tol, cap)?;
            self.normalize(&mut cand)?;
            if let Some(g) = &self.gauge {
                if g.recenter(&mut cand, self.op.measure(), self.p) {
                    self.normalize(&mut cand)?;
                }
            }
            let e = self.op.dirichlet_energy(&cand);
            let accept = e <= c * (1.0 + ENERGY_ROUNDING)
                || self.residual(&cand, e) < *residual_history.last().unwrap();
            let (next, e_next) = if accept {
                (cand, e)
            } else {
                fallback_steps += 1;
                match self.projected_gradient(&v, c) {
                    Some(step) => step,
                    // no descent left at rounding level
                    None => {
                        stalled = true;
                        break;
                    }
                }
            };
            let change = (c - e_next).abs() / e_next;
            v = next;
            c = e_next;
            let res = self.residual(&v, c);
            energy_history.push(c);
            residual_history.push(res);
            if change <= scfg.energy_tol && res <= scfg.residual_tol {
                converged = true;
                break;
            }
        }

        let pde_residual = *residual_history.last().unwrap();
        if stalled && pde_residual <= scfg.residual_tol {
            converged = true;
        }
        let defect = (lp_norm(self.op.measure(), &v, self.p) - 1.0).abs();
        let v = Field::from_vec(v);
        let u = rescale_to_solution(&v, c, self.p)?;
        let record = MinimizerRecord {
            v,
            c,
            u,
            p: self.p,
            outer_iters,
            pde_residual,
            constraint_defect: defect,
            converged,
            energy_history,
            residual_history,
            fallback_steps,
        };
        if converged {
            Ok(record)
        } else {
            Err(Error::NonConvergence(Box::new(NonConvergence { record })))
        }
    }
}

/// Refusal report when `p >= 2*_{N,m}`.
pub fn check_regime(cfg: &ShellConfig) -> Result<()> {
    let regime = cfg.classify();
    if regime.regime == Regime::Subcritical {
        return Ok(());
    }
    Err(Error::Refused(RegimeRefusal {
        n: cfg.n(),
        m: cfg.m(),
        p: cfg.p(),
        critical_exponent: regime.critical_exponent,
        regime: regime.regime,
        kappa: pohozaev_factor(cfg.n(), cfg.m(), cfg.p()),
    }))
}

/// Ground state on a strip grid. Refuses critical and supercritical exponents.
pub fn ground_state(grid: &StripGrid, cfg: &ShellConfig, scfg: &SolverConfig) -> Result<MinimizerRecord> {
    check_regime(cfg)?;
    solve_strip(grid, cfg, scfg)
}

/// Runs the iteration whatever the regime. Used by truncation probes; the
/// result of a nonexistence-regime run is a diagnostic only.
pub fn ground_state_forced(grid: &StripGrid, cfg: &ShellConfig, scfg: &SolverConfig) -> Result<MinimizerRecord> {
    solve_strip(grid, cfg, scfg)
}

fn solve_strip(grid: &StripGrid, cfg: &ShellConfig, scfg: &SolverConfig) -> Result<MinimizerRecord> {
    if cfg.m() == 0 {
        return Err(Error::Unsupported("m = 0 (two disjoint straight strips) is classification-only".into()));
    }
    if grid.weighting().m != cfg.m() || grid.weighting().d != cfg.reduced_dimension() {
        return Err(Error::domain("grid was built for a different (N, m)"));
    }
    let op = assemble_operator(grid);
    let init = match &scfg.init {
        InitialGuess::PositiveBump => positive_bump(grid),
        InitialGuess::Custom(f) => f.to_vec(),
    };
    let gauge = (grid.axis() == AxisKind::Full).then(|| ZGauge {
        stride: grid.n_r(),
        z_nodes: grid.s_nodes(),
        h: grid.h_s(),
    });
    Problem { op: &op, p: cfg.p(), gauge }.minimize(init, scfg)
}

/// `sin(pi (r - a)/(b - a)) exp(-|z|^2)` at cell centers.
pub fn positive_bump(grid: &StripGrid) -> Vec<f64> {
    let (a, b) = (grid.a(), grid.b());
    grid.sample(|r, s| (PI * (r - a) / (b - a)).sin() * (-s * s).exp())
}

/// `c^{1/(p-2)} v`.
pub fn rescale_to_solution(v: &Field, c: f64, p: f64) -> Result<Field> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::domain(format!("energy c = {c} must be positive")));
    }
    if !(p > 2.0) {
        return Err(Error::domain(format!("p = {p} must exceed 2")));
    }
    Ok(v.scaled(c.powf(1.0 / (p - 2.0))))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeResidual {
    /// `||A u - W|u|^{p-2}u|| / ||W|u|^{p-2}u||`; infinite for `u = 0`.
    pub value: f64,
    pub zero_solution: bool,
}

pub fn pde_residual(op: &DiscreteOperator, u: &Field, p: f64) -> Result<PdeResidual> {
    op.check_len(u.len())?;
    if u.iter().all(|&x| x == 0.0) {
        return Ok(PdeResidual { value: f64::INFINITY, zero_solution: true });
    }
    let value = Problem { op, p, gauge: None }.residual(u, 1.0);
    Ok(PdeResidual { value, zero_solution: false })
}

/// `||A u - W f|| / ||W f||` for a prescribed source `f` (linear checks).
pub fn linear_residual(op: &DiscreteOperator, u: &Field, source: &[f64]) -> Result<f64> {
    op.check_len(u.len())?;
    op.check_len(source.len())?;
    let wf: Vec<f64> = source.iter().zip(op.measure()).map(|(f, w)| f * w).collect();
    let au = op.apply(u);
    let diff: Vec<f64> = au.iter().zip(&wf).map(|(a, b)| a - b).collect();
    Ok(norm(&diff) / norm(&wf))
}

/// Normalized tail samples `max_r |v(r, s)| / ||v||_inf`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TailProfile {
    pub at_half: f64,
    pub at_three_quarters: f64,
    pub at_last_cell: f64,
}

pub fn decay_profile(grid: &StripGrid, v: &Field) -> Result<TailProfile> {
    if grid.axis() == AxisKind::Absent {
        return Err(Error::NotApplicable("decay profile needs a transverse axis (d >= 1)".into()));
    }
    if v.len() != grid.len() {
        return Err(Error::ShapeMismatch { expected: grid.len(), got: v.len() });
    }
    let max = v.max_abs();
    if max == 0.0 {
        return Ok(TailProfile { at_half: 0.0, at_three_quarters: 0.0, at_last_cell: 0.0 });
    }
    let z = grid.z_max();
    let sample = |s: f64| -> f64 {
        let mut best = 0.0f64;
        let signs: &[f64] = if grid.axis() == AxisKind::Full { &[1.0, -1.0] } else { &[1.0] };
        for &sign in signs {
            best = best.max(slice_max(grid, v, sign * s));
        }
        best / max
    };
    Ok(TailProfile {
        at_half: sample(0.5 * z),
        at_three_quarters: sample(0.75 * z),
        at_last_cell: sample(z - 0.5 * grid.h_s()),
    })
}

/// `max_r |v(r, s)|` with linear interpolation between transverse cell centers.
fn slice_max(grid: &StripGrid, v: &[f64], s: f64) -> f64 {
    let nodes = grid.s_nodes();
    let h = grid.h_s();
    let t = (s - nodes[0]) / h;
    let (j0, frac) = if t <= 0.0 {
        (0, 0.0)
    } else if t >= (nodes.len() - 1) as f64 {
        (nodes.len() - 1, 0.0)
    } else {
        (t.floor() as usize, t - t.floor())
    };
    (0..grid.n_r())
        .map(|i| {
            let lo = v[grid.index(i, j0)];
            let hi = if frac > 0.0 { v[grid.index(i, j0 + 1)] } else { lo };
            ((1.0 - frac) * lo + frac * hi).abs()
        })
        .fold(0.0, f64::max)
}

/// `max |v(r, z) - v(r, -z)|` on a full `z` axis.
pub fn z_evenness_defect(grid: &StripGrid, v: &Field) -> Result<f64> {
    if grid.axis() != AxisKind::Full {
        return Err(Error::NotApplicable("evenness defect needs a full z axis (d = 1)".into()));
    }
    let n_s = grid.n_s();
    let mut worst = 0.0f64;
    for j in 0..n_s {
        for i in 0..grid.n_r() {
            worst = worst.max((v[grid.index(i, j)] - v[grid.index(i, n_s - 1 - j)]).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{weighted_lp_norm, Weighting};

    #[test]
    fn rescale_examples() {
        let v = Field::new(vec![1.0, -2.0, 0.5]).unwrap();
        assert_eq!(rescale_to_solution(&v, 1.0, 3.7).unwrap(), v);
        assert_eq!(rescale_to_solution(&v, 4.0, 4.0).unwrap(), v.scaled(2.0));
        assert_eq!(rescale_to_solution(&v, 8.0, 3.0).unwrap(), v.scaled(8.0));
        assert!(rescale_to_solution(&v, 0.0, 3.0).is_err());
        assert!(rescale_to_solution(&v, 1.0, 2.0).is_err());
    }

    #[test]
    fn zero_field_residual_is_flagged() {
        let cfg = ShellConfig::new(3, 2, 1.0, 2.0, 4.0).unwrap();
        let op = assemble_operator(&StripGrid::new(&cfg, 16, 0, 0.0).unwrap());
        let r = pde_residual(&op, &Field::zeros(16), 4.0).unwrap();
        assert!(r.zero_solution && r.value.is_infinite());
    }

    #[test]
    fn manufactured_linear_residual_is_second_order() {
        let mut res = Vec::new();
        for n in [32usize, 64, 128, 256] {
            let g = StripGrid::with_weighting(1.0, 2.0, Weighting::raw(0, 0), n, 0, 0.0, AxisKind::Absent).unwrap();
            let op = assemble_operator(&g);
            let u = Field::new(g.sample(|r, _| (PI * (r - 1.0)).sin())).unwrap();
            let f = g.sample(|r, _| PI * PI * (PI * (r - 1.0)).sin());
            res.push(linear_residual(&op, &u, &f).unwrap());
        }
        for w in res.windows(2) {
            assert!((w[0] / w[1]).log2() > 1.8, "{res:?}");
        }
    }

    #[test]
    fn refuses_nonexistence_regime() {
        let cfg = ShellConfig::new(5, 1, 1.0, 2.0, 4.0).unwrap();
        let g = StripGrid::new(&cfg, 8, 8, 2.0).unwrap();
        match ground_state(&g, &cfg, &SolverConfig::default()) {
            Err(Error::Refused(r)) => {
                assert_eq!(r.regime, Regime::Critical);
                assert_eq!(r.kappa, 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_m_zero() {
        let cfg = ShellConfig::new(3, 0, 1.0, 2.0, 3.0).unwrap();
        let g = StripGrid::new(&cfg, 8, 8, 2.0).unwrap();
        assert!(matches!(ground_state(&g, &cfg, &SolverConfig::default()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn radial_ground_state_basics() {
        let cfg = ShellConfig::new(3, 2, 1.0, 2.0, 4.0).unwrap();
        let g = StripGrid::new(&cfg, 64, 0, 0.0).unwrap();
        let rec = ground_state(&g, &cfg, &SolverConfig::default()).unwrap();
        assert!(rec.converged);
        assert!(rec.c > 0.0);
        assert!(rec.constraint_defect <= 1e-12);
        assert!(rec.pde_residual <= 1e-8);
        assert!(rec.v.iter().all(|&x| x >= 0.0));
        for w in rec.energy_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + ENERGY_ROUNDING));
        }
        let op = assemble_operator(&g);
        assert!((weighted_lp_norm(&op, &rec.v, 4.0).unwrap() - 1.0).abs() <= 1e-12);
        let unscaled = pde_residual(&op, &rec.v, 4.0).unwrap();
        assert!(unscaled.value > 0.1);
    }

    #[test]
    fn decay_profile_synthetic() {
        let cfg = ShellConfig::new(4, 1, 1.0, 2.0, 3.0).unwrap();
        let g = StripGrid::new(&cfg, 8, 16, 4.0).unwrap();
        let one = Field::new(vec![3.0; g.len()]).unwrap();
        let t = decay_profile(&g, &one).unwrap();
        assert_eq!((t.at_half, t.at_three_quarters, t.at_last_cell), (1.0, 1.0, 1.0));
        let local = Field::new(g.sample(|_, s| if s < 0.5 { 1.0 } else { 0.0 })).unwrap();
        let t = decay_profile(&g, &local).unwrap();
        assert_eq!((t.at_half, t.at_three_quarters, t.at_last_cell), (0.0, 0.0, 0.0));

        let cfg = ShellConfig::new(3, 2, 1.0, 2.0, 3.0).unwrap();
        let g = StripGrid::new(&cfg, 8, 0, 0.0).unwrap();
        assert!(matches!(decay_profile(&g, &Field::zeros(8)), Err(Error::NotApplicable(_))));
    }
}
