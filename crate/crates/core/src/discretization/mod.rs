//! Truncated tensor grids on the reduced strip, the weighted divergence-form
//! operator, weighted norms and the SPD linear solver.

mod cg;
mod grid;
mod operator;

pub use cg::{solve_from, solve_spd, CgStats};
pub use grid::{weight_at, AxisKind, StripGrid, Weighting};
pub use operator::{assemble_operator, weighted_h1_norm, weighted_lp_norm, DiscreteOperator, Face, FaceKind};

pub(crate) use cg::{default_cap, norm};
pub(crate) use operator::{face_jump, lp_integral, lp_norm};

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// Grid function: one finite value per cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Field(Vec<f64>);

impl Field {
    /// Rejects non-finite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("field value at cell {i} is not finite")));
        }
        Ok(Field(values))
    }

    pub(crate) fn from_vec(values: Vec<f64>) -> Self {
        Field(values)
    }

    pub fn zeros(n: usize) -> Self {
        Field(vec![0.0; n])
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Field {
        Field(self.0.iter().map(|v| v * factor).collect())
    }
}

impl Deref for Field {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl TryFrom<Vec<f64>> for Field {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Field::new(values)
    }
}
