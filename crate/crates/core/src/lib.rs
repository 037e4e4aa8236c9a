//! Ground states, Pohozaev audits and `G_k`-equivariant solutions for
//! `-Δu = |u|^{p-2} u` on cylindrical shells `{a < |y| < b}` in `R^N`.
//!
//! Invariant solutions reduce to a weighted problem on a truncated strip
//! (see [`discretization`]); [`solver`] minimizes the weighted Dirichlet
//! energy on the unit sphere of the weighted `L^p` norm; [`pohozaev`] audits
//! the identity that rules out solutions above the critical exponent;
//! [`radial_oracle`] supplies an independent shooting solution for annuli.

pub mod discretization;
pub mod error;
pub mod geometry;
pub mod gk_sector;
pub mod nodal;
pub mod pohozaev;
pub mod radial_oracle;
pub mod solver;

pub use discretization::{
    assemble_operator, solve_spd, weight_at, weighted_h1_norm, weighted_lp_norm, DiscreteOperator, Field, StripGrid,
};
pub use error::{Error, RegimeRefusal, Result};
pub use geometry::{classify_regime, critical_exponent, CriticalExponent, ExponentRegime, Regime, ShellConfig};
pub use gk_sector::{extend_by_reflection, sector_ground_state, SectorGrid};
pub use nodal::{count_nodal_domains, NodalReport};
pub use pohozaev::{pohozaev_factor, pohozaev_report, PohozaevReport};
pub use radial_oracle::{radial_ground_state, RadialSolution};
pub use solver::{ground_state, rescale_to_solution, InitialGuess, MinimizerRecord, SolverConfig};
