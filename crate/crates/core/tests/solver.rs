use lane_emden_core::gk_sector::SOBOLEV_EXPONENT_3D;
use lane_emden_core::solver::{ground_state_forced, pde_residual, z_evenness_defect};
use lane_emden_core::{
    assemble_operator, extend_by_reflection, ground_state, sector_ground_state, weighted_lp_norm, Error, SectorGrid,
    ShellConfig, SolverConfig, StripGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_ground_state(n: u32, m: u32, p: f64) -> (StripGrid, lane_emden_core::MinimizerRecord) {
    let cfg = ShellConfig::new(n, m, 1.0, 2.0, p).unwrap();
    let grid = StripGrid::new(&cfg, 16, 32, 2.0).unwrap();
    let rec = ground_state(&grid, &cfg, &SolverConfig::default()).unwrap();
    (grid, rec)
}

#[test]
fn minimizer_is_positive_and_normalized() {
    let (grid, rec) = small_ground_state(4, 1, 3.0);
    let op = assemble_operator(&grid);
    assert!(rec.v.iter().all(|&x| x > 0.0));
    assert!((weighted_lp_norm(&op, &rec.v, 3.0).unwrap() - 1.0).abs() < 1e-12);
    assert!(rec.pde_residual <= 1e-8);
}

#[test]
fn energy_history_does_not_increase() {
    let (_, rec) = small_ground_state(5, 2, 3.5);
    for w in rec.energy_history.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn first_order_condition_holds_against_random_tests() {
    let (grid, rec) = small_ground_state(4, 1, 3.0);
    let op = assemble_operator(&grid);
    let au = op.apply(&rec.u);
    let w = op.measure();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let phi: Vec<f64> = (0..op.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lhs: f64 = au.iter().zip(&phi).map(|(a, f)| a * f).sum();
        let rhs: f64 = rec.u.iter().zip(&phi).zip(w).map(|((u, f), w)| w * u.abs() * u * f).sum();
        let scale: f64 = au.iter().zip(&phi).map(|(a, f)| (a * f).abs()).sum();
        assert!((lhs - rhs).abs() <= 1e-7 * scale, "{lhs} vs {rhs}");
    }
}

#[test]
fn reported_residual_matches_recomputation() {
    let (grid, rec) = small_ground_state(4, 1, 4.0);
    let op = assemble_operator(&grid);
    let res = pde_residual(&op, &rec.u, 4.0).unwrap();
    assert!(!res.zero_solution);
    assert!((res.value - rec.pde_residual).abs() <= 1e-3 * rec.pde_residual.max(1e-14));
}

#[test]
fn even_restriction_on_the_full_axis_is_a_restriction() {
    let cfg = ShellConfig::new(3, 1, 1.0, 2.0, 3.0).unwrap();
    let full = StripGrid::new(&cfg, 16, 48, 3.0).unwrap();
    let even = StripGrid::even_in_z(&cfg, 16, 24, 3.0).unwrap();
    let a = ground_state(&full, &cfg, &SolverConfig::default()).unwrap();
    let b = ground_state(&even, &cfg, &SolverConfig::default()).unwrap();
    assert!(a.c <= b.c * (1.0 + 1e-9));
    assert!(z_evenness_defect(&full, &a.v).unwrap() <= 1e-8);
}

#[test]
fn critical_and_supercritical_exponents_are_refused() {
    let cfg = ShellConfig::new(5, 1, 1.0, 2.0, 4.0).unwrap();
    let grid = StripGrid::new(&cfg, 8, 8, 1.0).unwrap();
    match ground_state(&grid, &cfg, &SolverConfig::default()) {
        Err(Error::Refused(r)) => assert!(r.kappa == 0.0),
        other => panic!("expected refusal, got {other:?}"),
    }
    let cfg = cfg.with_p(6.0).unwrap();
    assert!(matches!(ground_state(&grid, &cfg, &SolverConfig::default()), Err(Error::Refused(_))));
    let forced = ground_state_forced(&grid, &cfg, &SolverConfig { max_outer: 3, ..Default::default() });
    assert!(!matches!(forced, Err(Error::Refused(_))));
}

#[test]
fn sector_extension_has_the_predicted_rayleigh_quotient() {
    let p = 3.0;
    let sector = SectorGrid::new(3, 1.0, 2.0, 2.0, 10, 8, 16).unwrap();
    let rec = sector_ground_state(&sector, p, &SolverConfig::default()).unwrap();
    let (full, u) = extend_by_reflection(&sector, &rec.v).unwrap();
    let op = full.assemble();
    let quotient = op.dirichlet_energy(&u) / weighted_lp_norm(&op, &u, p).unwrap().powi(2);
    let predicted = 6f64.powf(1.0 - 2.0 / p) * rec.c;
    assert!((quotient - predicted).abs() <= 1e-10 * predicted);
}

#[test]
fn sector_exponent_must_stay_below_sobolev() {
    let sector = SectorGrid::new(3, 1.0, 2.0, 2.0, 4, 4, 4).unwrap();
    assert!(sector_ground_state(&sector, SOBOLEV_EXPONENT_3D, &SolverConfig::default()).is_err());
}
