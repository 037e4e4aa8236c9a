use lane_emden_core::pohozaev::{pohozaev_factor_exact, pohozaev_report_profile};
use lane_emden_core::radial_oracle::{radial_solution, OracleOptions};
use lane_emden_core::{
    ground_state, pohozaev_factor, pohozaev_report, radial_ground_state, CriticalExponent, ShellConfig,
    SolverConfig, StripGrid,
};
use num_rational::Ratio;
use proptest::prelude::*;

fn annulus() -> ShellConfig {
    ShellConfig::new(3, 2, 1.0, 2.0, 4.0).unwrap()
}

#[test]
fn oracle_amplitude_is_stable_under_step_refinement() {
    let cfg = annulus();
    let coarse = radial_solution(&cfg, &OracleOptions { n_steps: 10_000, ..Default::default() }).unwrap();
    let fine = radial_solution(&cfg, &OracleOptions::default()).unwrap();
    assert!((coarse.amplitude - fine.amplitude).abs() <= 1e-10 * fine.amplitude);
    assert!((fine.amplitude - 3.774150311).abs() < 1e-8);
}

#[test]
fn oracle_profile_satisfies_the_identity() {
    let cfg = annulus();
    let sol = radial_ground_state(&cfg, 1e-12).unwrap();
    let rep = pohozaev_report_profile(&cfg, &sol.profile, &sol.derivative).unwrap();
    assert!(rep.relative_residual() < 1e-10);
}

#[test]
fn variational_solution_converges_to_the_oracle() {
    let cfg = annulus();
    let sol = radial_ground_state(&cfg, 1e-12).unwrap();
    let mut errors = Vec::new();
    for n in [64, 128, 256] {
        let grid = StripGrid::new(&cfg, n, 0, 0.0).unwrap();
        let rec = ground_state(&grid, &cfg, &SolverConfig::default()).unwrap();
        let oracle = sol.to_field(&grid);
        let err = rec.u.iter().zip(oracle.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        errors.push(err / sol.amplitude);
    }
    assert!(errors[2] < 1e-4, "{errors:?}");
    for w in errors.windows(2) {
        assert!(w[0] / w[1] > 3.0, "{errors:?}");
    }
}

#[test]
fn sampled_oracle_residual_decreases_under_refinement() {
    let cfg = annulus();
    let sol = radial_ground_state(&cfg, 1e-12).unwrap();
    let res: Vec<f64> = [64, 128, 256, 512]
        .iter()
        .map(|&n| {
            let grid = StripGrid::new(&cfg, n, 0, 0.0).unwrap();
            pohozaev_report(&grid, &cfg, &sol.to_field(&grid)).unwrap().relative_residual()
        })
        .collect();
    for w in res.windows(2) {
        assert!(w[0] / w[1] >= 1.5, "{res:?}");
    }
}

#[test]
fn factor_vanishes_exactly_at_the_critical_exponent() {
    for n in 4..=10u32 {
        for m in 1..n - 2 {
            let crit = CriticalExponent::exact(n, m).unwrap();
            assert_eq!(pohozaev_factor_exact(n, m, crit), Ratio::from_integer(0));
        }
    }
}

proptest! {
    #[test]
    fn factor_sign_follows_the_regime(n in 2u32..=10, m in 1u32..8, p in 2.05f64..12.0) {
        prop_assume!(m < n);
        let cfg = ShellConfig::new(n, m, 1.0, 2.0, p).unwrap();
        let kappa = pohozaev_factor(n, m, p);
        match cfg.critical_exponent() {
            CriticalExponent::Infinite => prop_assert!(kappa > 0.0),
            CriticalExponent::Finite(c) if (p - c).abs() > 1e-9 => {
                prop_assert_eq!(kappa > 0.0, p < c);
            }
            CriticalExponent::Finite(_) => {}
        }
    }
}
