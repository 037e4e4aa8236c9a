use std::collections::BTreeMap;
use std::time::Instant;

use lane_emden_core::discretization::AxisKind;
use lane_emden_core::gk_sector::{equivariance_defect, residual_away_from_seams};
use lane_emden_core::pohozaev::pohozaev_report_profile;
use lane_emden_core::solver::{decay_profile, ground_state_forced, z_evenness_defect};
use lane_emden_core::{
    count_nodal_domains, extend_by_reflection, ground_state, pohozaev_report, radial_ground_state,
    sector_ground_state, weighted_lp_norm, Error as CoreError, Field, MinimizerRecord, Regime, SectorGrid,
    RadialSolution, ShellConfig, SolverConfig, StripGrid,
};
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::HarnessError;
use crate::record::{OracleComparison, Report, ResultRecord, SectorDiagnostics, Status, Table};

const DEFAULT_REFINE_LEVELS: usize = 3;
const PROBE_LEVELS: usize = 3;
const ORACLE_TOL: f64 = 1e-12;
const NODAL_THRESHOLD: f64 = 1e-3;

/// Runs the resolved experiment. `threads` caps sweep parallelism.
pub fn run(cfg: &ExperimentConfig, threads: usize) -> Result<Report, HarnessError> {
    let digest = cfg.digest();
    let config: serde_json::Value =
        serde_json::from_str(&cfg.canonical_json()).expect("canonical config is valid JSON");
    let mut report = Report {
        experiment: cfg.experiment(),
        config_digest: digest.clone(),
        config,
        records: Vec::new(),
        orders: BTreeMap::new(),
        truncation_decay: None,
        tables: Vec::new(),
    };
    let ctx = Context { cfg, digest, scfg: cfg.solver.to_solver_config()? };
    match cfg.experiment() {
        Experiment::Solve => {
            let shell = cfg.shell()?;
            report.records.push(ctx.solve(&shell, cfg.grid.n_r, cfg.grid.n_s, cfg.grid.z_max)?);
        }
        Experiment::Sweep => report.records = ctx.sweep(threads)?,
        Experiment::Refine => ctx.refine(&mut report)?,
        Experiment::Pohozaev => ctx.probe(&mut report)?,
        Experiment::Oracle => ctx.oracle(&mut report)?,
        Experiment::Gk => ctx.gk(&mut report)?,
    }
    Ok(report)
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    digest: String,
    scfg: SolverConfig,
}

impl Context<'_> {
    fn blank(&self, shell: &ShellConfig, n_r: usize, n_s: usize, z_max: f64) -> ResultRecord {
        let regime = shell.classify();
        ResultRecord {
            config_digest: self.digest.clone(),
            status: Status::Refused,
            forced: false,
            n: shell.n(),
            m: shell.m(),
            a: shell.a(),
            b: shell.b(),
            p: shell.p(),
            n_r,
            n_s,
            z_max,
            n_theta: None,
            regime: regime.regime,
            critical_exponent: regime.critical_exponent,
            kappa: lane_emden_core::pohozaev_factor(shell.n(), shell.m(), shell.p()),
            c0: None,
            pde_residual: None,
            constraint_defect: None,
            outer_iters: None,
            fallback_steps: None,
            min_v: None,
            pohozaev: None,
            pohozaev_residual: None,
            truncation_share: None,
            tail: None,
            z_evenness_defect: None,
            nodal_count: None,
            sector: None,
            oracle: None,
            refusal: None,
            seconds: 0.0,
        }
    }

    fn solve(&self, shell: &ShellConfig, n_r: usize, n_s: usize, z_max: f64) -> Result<ResultRecord, HarnessError> {
        self.solve_with_field(shell, n_r, n_s, z_max).map(|(rec, _)| rec)
    }

    fn solve_with_field(
        &self,
        shell: &ShellConfig,
        n_r: usize,
        n_s: usize,
        z_max: f64,
    ) -> Result<(ResultRecord, Option<Field>), HarnessError> {
        let grid = StripGrid::new(shell, n_r, n_s, z_max)?;
        let (n_s, z_max) = match grid.axis() {
            AxisKind::Absent => (0, 0.0),
            _ => (n_s, z_max),
        };
        let mut rec = self.blank(shell, n_r, n_s, z_max);
        let start = Instant::now();
        let subcritical = shell.classify().regime == Regime::Subcritical;
        let result = if self.cfg.force_supercritical {
            rec.forced = !subcritical;
            ground_state_forced(&grid, shell, &self.scfg)
        } else {
            ground_state(&grid, shell, &self.scfg)
        };
        let (status, min) = match result {
            Ok(m) => (Status::Converged, m),
            Err(CoreError::NonConvergence(nc)) => (Status::NotConverged, nc.record),
            Err(CoreError::Refused(r)) => {
                rec.refusal = Some(r);
                return Ok((rec, None));
            }
            Err(e) => return Err(e.into()),
        };
        rec.status = status;
        self.fill_strip(&mut rec, &grid, shell, &min)?;
        rec.seconds = start.elapsed().as_secs_f64();
        Ok((rec, Some(min.u)))
    }

    fn fill_strip(
        &self,
        rec: &mut ResultRecord,
        grid: &StripGrid,
        shell: &ShellConfig,
        min: &MinimizerRecord,
    ) -> Result<(), HarnessError> {
        let poh = pohozaev_report(grid, shell, &min.u)?;
        rec.c0 = Some(min.c);
        rec.pde_residual = Some(min.pde_residual);
        rec.constraint_defect = Some(min.constraint_defect);
        rec.outer_iters = Some(min.outer_iters);
        rec.fallback_steps = Some(min.fallback_steps);
        rec.min_v = Some(min.v.iter().copied().fold(f64::INFINITY, f64::min));
        rec.pohozaev_residual = Some(poh.relative_residual());
        rec.truncation_share = poh.truncation_present.then(|| poh.truncation_share());
        rec.pohozaev = Some(poh);
        if grid.axis() != AxisKind::Absent {
            rec.tail = Some(decay_profile(grid, &min.v)?);
        }
        if grid.axis() == AxisKind::Full {
            rec.z_evenness_defect = Some(z_evenness_defect(grid, &min.v)?);
        }
        Ok(())
    }

    fn sweep(&self, threads: usize) -> Result<Vec<ResultRecord>, HarnessError> {
        let mut ps = self.cfg.sweep_p.clone().unwrap_or_default();
        ps.sort_by(f64::total_cmp);
        let g = &self.cfg.grid;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .expect("thread pool");
        pool.install(|| {
            ps.par_iter()
                .map(|&p| self.solve(&self.cfg.shell_with_p(p)?, g.n_r, g.n_s, g.z_max))
                .collect()
        })
    }

    fn refine(&self, report: &mut Report) -> Result<(), HarnessError> {
        let shell = self.cfg.shell()?;
        let levels = self.cfg.refine_levels.unwrap_or(DEFAULT_REFINE_LEVELS);
        let g = &self.cfg.grid;
        let oracle = if shell.reduced_dimension() == 0 && shell.classify().regime == Regime::Subcritical {
            Some(radial_ground_state(&shell, ORACLE_TOL)?)
        } else {
            None
        };
        let mut oracle_errors = Vec::new();
        for level in 0..levels {
            let scale = 1usize << level;
            let (mut rec, u) = self.solve_with_field(&shell, g.n_r * scale, g.n_s * scale, g.z_max)?;
            if let (Some(sol), Some(u)) = (&oracle, u) {
                let grid = StripGrid::new(&shell, rec.n_r, 0, 0.0)?;
                let cmp = compare_with_oracle(&grid, &shell, sol, &u)?;
                oracle_errors.push(cmp.pointwise_rel_diff);
                rec.oracle = Some(cmp);
            }
            let stop = rec.status == Status::Refused;
            report.records.push(rec);
            if stop {
                return Ok(());
            }
        }
        let poh: Vec<f64> = report.records.iter().filter_map(|r| r.pohozaev_residual).collect();
        report.orders.insert("pohozaev_residual".into(), ratio_orders(&poh));
        let c0: Vec<f64> = report.records.iter().filter_map(|r| r.c0).collect();
        let diffs: Vec<f64> = c0.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
        report.orders.insert("c0".into(), ratio_orders(&diffs));
        if !oracle_errors.is_empty() {
            report.orders.insert("oracle_pointwise".into(), ratio_orders(&oracle_errors));
        }
        Ok(())
    }

    /// Solves at `Z, 2Z, 4Z` with the transverse step held fixed.
    fn probe(&self, report: &mut Report) -> Result<(), HarnessError> {
        let shell = self.cfg.shell()?;
        if shell.reduced_dimension() == 0 {
            return Err(HarnessError::config("shell", "the truncation probe needs a z axis (m < N - 1)"));
        }
        let g = &self.cfg.grid;
        for level in 0..PROBE_LEVELS {
            let scale = 1usize << level;
            let rec = self.solve(&shell, g.n_r, g.n_s * scale, g.z_max * scale as f64)?;
            let stop = rec.status == Status::Refused;
            report.records.push(rec);
            if stop {
                return Ok(());
            }
        }
        let shares: Vec<f64> = report.records.iter().filter_map(|r| r.truncation_share).collect();
        report.truncation_decay = Some(shares.windows(2).map(|w| w[0] / w[1]).collect());
        Ok(())
    }

    fn oracle(&self, report: &mut Report) -> Result<(), HarnessError> {
        let shell = self.cfg.shell()?;
        let start = Instant::now();
        let sol = radial_ground_state(&shell, ORACLE_TOL)?;
        let grid = StripGrid::new(&shell, self.cfg.grid.n_r, 0, 0.0)?;
        let mut rec = self.blank(&shell, self.cfg.grid.n_r, 0, 0.0);
        let (status, min) = match ground_state(&grid, &shell, &self.scfg) {
            Ok(m) => (Status::Converged, m),
            Err(CoreError::NonConvergence(nc)) => (Status::NotConverged, nc.record),
            Err(e) => return Err(e.into()),
        };
        rec.status = status;
        self.fill_strip(&mut rec, &grid, &shell, &min)?;
        let cmp = compare_with_oracle(&grid, &shell, &sol, &min.u)?;
        let sampled = pohozaev_report(&grid, &shell, &sol.to_field(&grid))?;
        rec.pohozaev_residual = Some(sampled.relative_residual());
        rec.pohozaev = Some(sampled);
        rec.oracle = Some(cmp);
        rec.seconds = start.elapsed().as_secs_f64();
        report.records.push(rec);
        report.tables.push(Table {
            file_name: "profile.csv".into(),
            header: vec!["r", "u"],
            rows: sol.nodes().zip(&sol.profile).map(|(r, &u)| vec![r, u]).collect(),
        });
        Ok(())
    }

    fn gk(&self, report: &mut Report) -> Result<(), HarnessError> {
        let shell = self.cfg.shell()?;
        let g = &self.cfg.grid;
        let k = self.cfg.gk_k.expect("validated");
        let n_theta = g.n_theta.expect("validated");
        let start = Instant::now();
        let sector = SectorGrid::new(k, shell.a(), shell.b(), g.z_max, g.n_r, n_theta, g.n_s)?;
        let (status, min) = match sector_ground_state(&sector, shell.p(), &self.scfg) {
            Ok(m) => (Status::Converged, m),
            Err(CoreError::NonConvergence(nc)) => (Status::NotConverged, nc.record),
            Err(e) => return Err(e.into()),
        };
        let (full, u) = extend_by_reflection(&sector, &min.u)?;
        let op = full.assemble();
        let energy = op.dirichlet_energy(&u);
        let c_full = energy / weighted_lp_norm(&op, &u, shell.p())?.powi(2);
        let nodal = count_nodal_domains(&u, &full.lattice(), NODAL_THRESHOLD)?;
        let mut rec = self.blank(&shell, g.n_r, g.n_s, g.z_max);
        rec.status = status;
        rec.n_theta = Some(n_theta);
        rec.c0 = Some(c_full);
        rec.pde_residual = Some(min.pde_residual);
        rec.constraint_defect = Some(min.constraint_defect);
        rec.outer_iters = Some(min.outer_iters);
        rec.fallback_steps = Some(min.fallback_steps);
        rec.min_v = Some(min.v.iter().copied().fold(f64::INFINITY, f64::min));
        rec.nodal_count = Some(nodal.count);
        rec.sector = Some(SectorDiagnostics {
            k,
            sector_c0: min.c,
            equivariance_defect: equivariance_defect(&full, &u)?,
            residual_away_from_seams: residual_away_from_seams(&full, &u, shell.p())?,
            nodal_component_sizes_min: nodal.component_sizes.iter().copied().min().unwrap_or(0),
            nodal_component_sizes_max: nodal.component_sizes.iter().copied().max().unwrap_or(0),
        });
        rec.seconds = start.elapsed().as_secs_f64();
        report.records.push(rec);
        report.tables.push(Table {
            file_name: "field.csv".into(),
            header: vec!["rho", "theta", "z", "value"],
            rows: (0..full.len())
                .map(|idx| {
                    let (rho, theta, z) = full.coords(idx);
                    vec![rho, theta, z, u[idx]]
                })
                .collect(),
        });
        Ok(())
    }
}

fn compare_with_oracle(
    grid: &StripGrid,
    shell: &ShellConfig,
    sol: &RadialSolution,
    u: &Field,
) -> Result<OracleComparison, HarnessError> {
    let sampled = sol.to_field(grid);
    let pointwise = u.iter().zip(sampled.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let profile = pohozaev_report_profile(shell, &sol.profile, &sol.derivative)?;
    Ok(OracleComparison {
        sigma_star: sol.sigma_star,
        amplitude: sol.amplitude,
        energy: sol.energy,
        c0: sol.energy.powf(1.0 - 2.0 / shell.p()),
        amplitude_rel_diff: (u.max_abs() - sol.amplitude).abs() / sol.amplitude,
        pointwise_rel_diff: pointwise / sol.amplitude,
        profile_pohozaev_residual: profile.relative_residual(),
    })
}

/// `log2(e_i / e_{i+1})` for successive entries.
pub fn ratio_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
