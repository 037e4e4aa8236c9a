//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use lane_emden_core::pohozaev::pohozaev_factor_exact;
use lane_emden_core::{
    assemble_operator, ground_state, pohozaev_factor, pohozaev_report, radial_ground_state, CriticalExponent,
    ShellConfig, SolverConfig, StripGrid,
};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shell_lane_emden::{run, Experiment, ExperimentConfig, Report, Status};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn config(json: &str, experiment: Experiment, force: bool) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap().resolve(experiment, force).unwrap()
}

fn exponent_dichotomy() -> Outcome {
    // 2.1, 2.5, 3.0, 3.5, ..., 12.0 as exact rationals
    let mut ps = vec![Ratio::new(21i64, 10), Ratio::new(5, 2)];
    ps.extend((6..=24).map(|twice| Ratio::new(twice, 2)));
    let mut checked = 0;
    let mut zeros = 0;
    for n in 2..=10u32 {
        for m in 1..n.saturating_sub(2) {
            let crit = match CriticalExponent::exact(n, m) {
                Some(c) => c,
                None => return outcome(false, format!("no finite critical exponent for N={n}, m={m}")),
            };
            for &p in &ps {
                let kappa = pohozaev_factor_exact(n, m, p);
                let expected = (crit - p).numer().signum();
                if kappa.numer().signum() != expected {
                    return outcome(false, format!("sign mismatch at N={n}, m={m}, p={p}"));
                }
                let float = pohozaev_factor(n, m, *p.numer() as f64 / *p.denom() as f64);
                if expected != 0 && (float > 0.0) != (expected > 0) {
                    return outcome(false, format!("floating sign mismatch at N={n}, m={m}, p={p}"));
                }
                checked += 1;
            }
            if crit.is_integer() {
                if *pohozaev_factor_exact(n, m, crit).numer() != 0 {
                    return outcome(false, format!("kappa(2*) != 0 at N={n}, m={m}"));
                }
                zeros += 1;
            }
        }
    }
    outcome(true, format!("{checked} (N, m, p) cases, exact zero at {zeros} integer critical exponents"))
}

const ANNULUS: &str = r#"{"shell": {"N": 3, "m": 2, "a": 1.0, "b": 2.0, "p": 4.0}, "grid": {"n_r": 512}}"#;

fn oracle_equivalence() -> Outcome {
    let report = run(&config(ANNULUS, Experiment::Oracle, false), 1).unwrap();
    let rec = &report.records[0];
    let cmp = rec.oracle.unwrap();
    let pass = rec.status == Status::Converged && cmp.amplitude_rel_diff <= 1e-3 && cmp.pointwise_rel_diff <= 1e-2;
    outcome(
        pass,
        format!(
            "n_r=512: amplitude rel diff {:.2e} (<= 1e-3), pointwise {:.2e} amp (<= 1e-2)",
            cmp.amplitude_rel_diff, cmp.pointwise_rel_diff
        ),
    )
}

fn pohozaev_convergence() -> Outcome {
    let cfg = ShellConfig::new(3, 2, 1.0, 2.0, 4.0).unwrap();
    let sol = radial_ground_state(&cfg, 1e-12).unwrap();
    let residuals: Vec<f64> = [128, 256, 512, 1024]
        .iter()
        .map(|&n| {
            let grid = StripGrid::new(&cfg, n, 0, 0.0).unwrap();
            pohozaev_report(&grid, &cfg, &sol.to_field(&grid)).unwrap().relative_residual()
        })
        .collect();
    let ratios: Vec<f64> = residuals.windows(2).map(|w| w[0] / w[1]).collect();
    let pass = residuals[3] <= 1e-4 && ratios.iter().all(|&r| r >= 1.5);
    outcome(
        pass,
        format!(
            "residual {:.2e} at n_r=1024 (<= 1e-4), halving ratios {:?} (>= 1.5)",
            residuals[3],
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>()
        ),
    )
}

fn integration_by_parts() -> Outcome {
    let cfg = ShellConfig::new(4, 1, 1.0, 2.0, 3.0).unwrap();
    let grid = StripGrid::new(&cfg, 64, 64, 4.0).unwrap();
    let op = assemble_operator(&grid);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let v: Vec<f64> = (0..op.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let energy = op.dirichlet_energy(&v);
        worst = worst.max((op.quadratic_form(&v) - energy).abs() / energy);
    }
    outcome(worst <= 1e-13, format!("100 random fields on 64x64: worst relative defect {worst:.2e} (<= 1e-13)"))
}

fn scaling_law() -> Outcome {
    let scfg = SolverConfig::default();
    let c0 = |a: f64, b: f64, z: f64| {
        let cfg = ShellConfig::new(4, 1, a, b, 3.0).unwrap();
        let grid = StripGrid::new(&cfg, 32, 128, z).unwrap();
        ground_state(&grid, &cfg, &scfg).unwrap().c
    };
    let ratio = c0(2.0, 4.0, 8.0) / c0(1.0, 2.0, 4.0);
    let expected = 2f64.powf(-2.0 / 3.0);
    let rel = (ratio - expected).abs() / expected;
    outcome(rel <= 0.01, format!("c0(2S)/c0(S) = {ratio:.10} vs 2^(-2/3) = {expected:.10}, rel {rel:.2e} (<= 1e-2)"))
}

fn ground_state_health() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for p in [3.0, 4.0, 5.0] {
        let solve = |z: f64, n_s: usize| {
            let json = format!(
                r#"{{"shell": {{"N": 4, "m": 1, "a": 1.0, "b": 2.0, "p": {p}}},
                    "grid": {{"n_r": 32, "n_s": {n_s}, "Z": {z}}}}}"#
            );
            run(&config(&json, Experiment::Solve, false), 1).unwrap().records.remove(0)
        };
        let base = solve(4.0, 128);
        let doubled = solve(8.0, 256);
        let poh = base.pohozaev.unwrap();
        let c_change = (base.c0.unwrap() - doubled.c0.unwrap()).abs() / doubled.c0.unwrap();
        let ok = base.status == Status::Converged
            && base.pde_residual.unwrap() <= 1e-8
            && base.min_v.unwrap() >= 0.0
            && c_change <= 1e-6
            && poh.shell_flux > 0.0
            && poh.shell_flux <= poh.kappa * poh.dirichlet_energy * 1.05;
        pass &= ok;
        lines.push(format!(
            "p={p}: res {:.1e}, min v {:.1e}, dc0 {:.1e}, flux/kE {:.3}",
            base.pde_residual.unwrap(),
            base.min_v.unwrap(),
            c_change,
            poh.shell_flux / (poh.kappa * poh.dirichlet_energy)
        ));
    }
    lines.push("z-evenness exact (grid in s = |z|)".into());
    outcome(pass, lines.join("; "))
}

fn probe_json(p: f64) -> String {
    format!(
        r#"{{"shell": {{"N": 5, "m": 1, "a": 1.0, "b": 2.0, "p": {p}}},
            "grid": {{"n_r": 16, "n_s": 16, "Z": 1.0}}}}"#
    )
}

fn run_binary(json: &str, force: bool, dir: &Path) -> (i32, serde_json::Value) {
    std::fs::create_dir_all(dir).unwrap();
    let cfg_path = dir.join("config.json");
    std::fs::write(&cfg_path, json).unwrap();
    let out = dir.join("out");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_shell-lane-emden"));
    cmd.arg("pohozaev").arg("--config").arg(&cfg_path).arg("--out-dir").arg(&out);
    if force {
        cmd.arg("--force");
    }
    let status = cmd.output().unwrap().status;
    let text = std::fs::read_to_string(out.join("results.json")).unwrap();
    (status.code().unwrap_or(-1), serde_json::from_str(&text).unwrap())
}

fn decay(report: &serde_json::Value) -> Vec<f64> {
    report["truncation_decay"]
        .as_array()
        .map(|a| a.iter().filter_map(|x| x.as_f64()).collect())
        .unwrap_or_default()
}

fn regime_refusal() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut pass = true;
    let mut lines = Vec::new();
    for p in [4.0, 6.0] {
        let (code, report) = run_binary(&probe_json(p), false, &tmp.path().join(format!("refuse{p}")));
        let refusal = &report["records"][0]["refusal"];
        let refused = code == 4 && report["records"][0]["status"] == "refused" && refusal.is_object();
        pass &= refused;
        let (forced_code, forced) = run_binary(&probe_json(p), true, &tmp.path().join(format!("force{p}")));
        pass &= forced_code == 0;
        let ratios = decay(&forced);
        lines.push(format!(
            "p={p}: exit {code}, regime {}; forced trunc-share ratios {:?}",
            refusal["regime"].as_str().unwrap_or("?"),
            ratios.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>()
        ));
    }
    let (code, control) = run_binary(&probe_json(3.0), false, &tmp.path().join("control"));
    let ratios = decay(&control);
    let control_ok = code == 0 && ratios.len() == 2 && ratios.iter().all(|&r| r >= 2.0);
    pass &= control_ok;
    lines.push(format!(
        "control p=3 ratios {:?} (>= 2)",
        ratios.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>()
    ));
    outcome(pass, lines.join("; "))
}

fn gk_json(k: u32) -> String {
    format!(
        r#"{{"shell": {{"N": 3, "m": 1, "a": 1.0, "b": 2.0, "p": 3.0}},
            "grid": {{"n_r": 64, "n_theta": 32, "n_s": 64, "Z": 3.0}},
            "gk_k": {k}}}"#
    )
}

fn gk_solutions() -> Outcome {
    let mut pass = true;
    let mut energies = Vec::new();
    let mut lines = Vec::new();
    for k in [3u32, 4] {
        let report: Report = run(&config(&gk_json(k), Experiment::Gk, false), 1).unwrap();
        let rec = &report.records[0];
        let sector = rec.sector.unwrap();
        let nodal = rec.nodal_count.unwrap();
        pass &= rec.status == Status::Converged && nodal == 2 * k as usize && sector.equivariance_defect == 0.0;
        pass &= report.tables.iter().any(|t| t.file_name == "field.csv" && t.header.len() == 4);
        energies.push(rec.c0.unwrap());
        lines.push(format!(
            "k={k}: res {:.1e}, {nodal} nodal domains, equivariance defect {:.1e}, c0 {:.8}",
            rec.pde_residual.unwrap(),
            sector.equivariance_defect,
            rec.c0.unwrap()
        ));
    }
    let rel = (energies[0] - energies[1]).abs() / energies[0].max(energies[1]);
    pass &= rel > 1e-6;
    lines.push(format!("energy gap {rel:.2e} (> 1e-6)"));
    outcome(pass, lines.join("; "))
}

fn payload(json: &str, experiment: Experiment, threads: usize) -> String {
    run(&config(json, experiment, false), threads).unwrap().payload().to_string()
}

fn determinism() -> Outcome {
    let sweep = r#"{"shell": {"N": 4, "m": 1, "a": 1.0, "b": 2.0, "p": 3.0},
                    "grid": {"n_r": 16, "n_s": 64, "Z": 4.0},
                    "sweep_p": [5.5, 3.0, 4.0, 5.0]}"#;
    let checks = [
        ("oracle", payload(ANNULUS, Experiment::Oracle, 1) == payload(ANNULUS, Experiment::Oracle, 1)),
        ("sweep", payload(sweep, Experiment::Sweep, 1) == payload(sweep, Experiment::Sweep, 1)),
        ("sweep 1 vs 4 threads", payload(sweep, Experiment::Sweep, 1) == payload(sweep, Experiment::Sweep, 4)),
        ("probe", payload(&probe_json(3.0), Experiment::Pohozaev, 1) == payload(&probe_json(3.0), Experiment::Pohozaev, 1)),
        ("gk", payload(&gk_json(3), Experiment::Gk, 1) == payload(&gk_json(3), Experiment::Gk, 1)),
    ];
    let pass = checks.iter().all(|(_, ok)| *ok);
    let detail = checks
        .iter()
        .map(|(name, ok)| format!("{name} {}", if *ok { "identical" } else { "DIFFERS" }))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(pass, detail)
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "exponent dichotomy", Duration::from_secs(1), exponent_dichotomy),
        (2, "oracle equivalence", Duration::from_secs(10), oracle_equivalence),
        (3, "identity convergence", Duration::from_secs(30), pohozaev_convergence),
        (4, "discrete integration by parts", Duration::from_secs(5), integration_by_parts),
        (5, "scaling law", Duration::from_secs(120), scaling_law),
        (6, "ground state health", Duration::from_secs(300), ground_state_health),
        (7, "regime refusal", Duration::from_secs(300), regime_refusal),
        (8, "G_k solutions", Duration::from_secs(600), gk_solutions),
        (9, "determinism", Duration::from_secs(600), determinism),
    ];
    let mut failures = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let pass = result.pass && elapsed <= limit;
        if !pass {
            failures += 1;
        }
        println!(
            "{} [{id}] {name}: {} ({:.2}s, limit {}s)",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
