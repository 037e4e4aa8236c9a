use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{sphere_area, ShellConfig};

/// Weight `r^m s^(d-1)` together with the folded angular constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Weighting {
    pub m: u32,
    pub d: u32,
    /// Multiplies every cell and face measure so reduced sums equal full-domain integrals.
    pub angular: f64,
}

impl Weighting {
    /// Bare weight with unit angular factor, for checks against one-dimensional integrals.
    pub fn raw(m: u32, d: u32) -> Self {
        Weighting { m, d, angular: 1.0 }
    }

    pub fn eval(&self, r: f64, s: f64) -> Result<f64> {
        let radial = r.powi(self.m as i32);
        if self.d >= 2 {
            if s <= 0.0 {
                return Err(Error::domain(format!("weight s^(d-1) evaluated at s = {s} with d = {}", self.d)));
            }
            Ok(radial * s.powi(self.d as i32 - 1))
        } else {
            Ok(radial)
        }
    }

    fn eval_unchecked(&self, r: f64, s: f64) -> f64 {
        let radial = r.powi(self.m as i32);
        if self.d >= 2 {
            radial * s.powi(self.d as i32 - 1)
        } else {
            radial
        }
    }
}

/// `r^m s^(d-1)` at a reduced point; the `s` factor is 1 for `d <= 1`.
pub fn weight_at(cfg: &ShellConfig, r: f64, s: f64) -> Result<f64> {
    Weighting::raw(cfg.m(), cfg.reduced_dimension()).eval(r, s)
}

/// Layout of the transverse (z) axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    /// `d = 0`: no transverse axis.
    Absent,
    /// `z in (-Z, Z)`, Dirichlet at both ends.
    Full,
    /// `s = |z| in (0, Z)`, mirror face at `s = 0`, Dirichlet at `s = Z`.
    Radial,
}

/// Cell-centered uniform grid on the truncated reduced strip.
///
/// Cell `(i, j)` (radial index `i`, transverse index `j`) has flat index
/// `j * n_r + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct StripGrid {
    a: f64,
    b: f64,
    h_r: f64,
    r_nodes: Vec<f64>,
    s_nodes: Vec<f64>,
    h_s: f64,
    z_max: f64,
    axis: AxisKind,
    weighting: Weighting,
}

const MIN_NODES: usize = 4;

impl StripGrid {
    /// Grid for a shell: `s = |z|` for `d >= 2`, full `z` axis for `d = 1`,
    /// no transverse axis for `d = 0` (then `n_s` and `z_max` are ignored).
    pub fn new(cfg: &ShellConfig, n_r: usize, n_s: usize, z_max: f64) -> Result<Self> {
        let d = cfg.reduced_dimension();
        let axis = match d {
            0 => AxisKind::Absent,
            1 => AxisKind::Full,
            _ => AxisKind::Radial,
        };
        Self::for_shell(cfg, n_r, n_s, z_max, axis)
    }

    /// `d = 1` grid restricted to functions even in `z`: half line `(0, Z)` with a mirror face.
    pub fn even_in_z(cfg: &ShellConfig, n_r: usize, n_s: usize, z_max: f64) -> Result<Self> {
        if cfg.reduced_dimension() != 1 {
            return Err(Error::domain("even-in-z grids need d = 1"));
        }
        Self::for_shell(cfg, n_r, n_s, z_max, AxisKind::Radial)
    }

    fn for_shell(cfg: &ShellConfig, n_r: usize, n_s: usize, z_max: f64, axis: AxisKind) -> Result<Self> {
        let d = cfg.reduced_dimension();
        let mut angular = sphere_area(cfg.m());
        angular *= match (d, axis) {
            (0, _) | (1, AxisKind::Full) => 1.0,
            // both half-lines z > 0 and z < 0 are folded onto s = |z|
            (1, _) => 2.0,
            _ => sphere_area(d - 1),
        };
        let weighting = Weighting { m: cfg.m(), d, angular };
        Self::with_weighting(cfg.a(), cfg.b(), weighting, n_r, n_s, z_max, axis)
    }

    /// Low-level constructor. Allows `a = 0` when `m = 0`.
    pub fn with_weighting(
        a: f64,
        b: f64,
        weighting: Weighting,
        n_r: usize,
        n_s: usize,
        z_max: f64,
        axis: AxisKind,
    ) -> Result<Self> {
        if !(a >= 0.0 && b > a && b.is_finite()) {
            return Err(Error::domain(format!("need 0 <= a < b, got a = {a}, b = {b}")));
        }
        if a == 0.0 && weighting.m != 0 {
            return Err(Error::domain("a = 0 is only allowed with m = 0"));
        }
        if n_r < MIN_NODES {
            return Err(Error::domain(format!("n_r = {n_r} must be at least {MIN_NODES}")));
        }
        let expected_axis = matches!(
            (weighting.d, axis),
            (0, AxisKind::Absent) | (1, AxisKind::Full) | (1, AxisKind::Radial) | (2.., AxisKind::Radial)
        );
        if !expected_axis {
            return Err(Error::domain(format!("axis {axis:?} is incompatible with d = {}", weighting.d)));
        }
        let h_r = (b - a) / n_r as f64;
        let r_nodes = (0..n_r).map(|i| a + (i as f64 + 0.5) * h_r).collect();

        let (s_nodes, h_s, z_max) = match axis {
            AxisKind::Absent => (Vec::new(), 0.0, 0.0),
            AxisKind::Full | AxisKind::Radial => {
                if n_s < MIN_NODES {
                    return Err(Error::domain(format!("n_s = {n_s} must be at least {MIN_NODES}")));
                }
                if !(z_max > 0.0 && z_max.is_finite()) {
                    return Err(Error::domain(format!("truncation length Z = {z_max} must be positive")));
                }
                let (lo, len) = if axis == AxisKind::Full { (-z_max, 2.0 * z_max) } else { (0.0, z_max) };
                let h = len / n_s as f64;
                ((0..n_s).map(|j| lo + (j as f64 + 0.5) * h).collect(), h, z_max)
            }
        };

        Ok(StripGrid { a, b, h_r, r_nodes, s_nodes, h_s, z_max, axis, weighting })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n_r(&self) -> usize {
        self.r_nodes.len()
    }

    /// Number of transverse cells; 1 when there is no transverse axis.
    pub fn n_s(&self) -> usize {
        self.s_nodes.len().max(1)
    }

    pub fn h_r(&self) -> f64 {
        self.h_r
    }

    pub fn h_s(&self) -> f64 {
        self.h_s
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn axis(&self) -> AxisKind {
        self.axis
    }

    pub fn weighting(&self) -> &Weighting {
        &self.weighting
    }

    pub fn r_nodes(&self) -> &[f64] {
        &self.r_nodes
    }

    pub fn s_nodes(&self) -> &[f64] {
        &self.s_nodes
    }

    pub fn len(&self) -> usize {
        self.n_r() * self.n_s()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n_r() + i
    }

    /// `(r, s)` of a flat index; `s = 0` when there is no transverse axis.
    pub fn coords(&self, idx: usize) -> (f64, f64) {
        let i = idx % self.n_r();
        let j = idx / self.n_r();
        (self.r_nodes[i], self.s_nodes.get(j).copied().unwrap_or(0.0))
    }

    /// Samples `f(r, s)` at cell centers.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|idx| {
                let (r, s) = self.coords(idx);
                f(r, s)
            })
            .collect()
    }

    pub(crate) fn weight(&self, r: f64, s: f64) -> f64 {
        self.weighting.eval_unchecked(r, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shell(n: u32, m: u32) -> ShellConfig {
        ShellConfig::new(n, m, 1.0, 2.0, 3.0).unwrap()
    }

    #[test]
    fn cell_centers() {
        let g = StripGrid::new(&shell(3, 2), 4, 0, 0.0).unwrap();
        assert_eq!(g.r_nodes(), &[1.125, 1.375, 1.625, 1.875]);
        assert_eq!(g.axis(), AxisKind::Absent);
        assert_eq!(g.len(), 4);
        assert!(g.s_nodes().is_empty());

        let g = StripGrid::new(&shell(4, 1), 4, 4, 8.0).unwrap();
        assert_eq!(g.s_nodes(), &[1.0, 3.0, 5.0, 7.0]);
        assert_eq!(g.axis(), AxisKind::Radial);

        let g = StripGrid::new(&shell(3, 1), 4, 4, 2.0).unwrap();
        assert_eq!(g.s_nodes(), &[-1.5, -0.5, 0.5, 1.5]);
        assert_eq!(g.axis(), AxisKind::Full);
    }

    #[test]
    fn rejects_small_or_nonpositive_sizes() {
        assert!(StripGrid::new(&shell(4, 1), 3, 8, 4.0).is_err());
        assert!(StripGrid::new(&shell(4, 1), 8, 3, 4.0).is_err());
        assert!(StripGrid::new(&shell(4, 1), 8, 8, 0.0).is_err());
        assert!(StripGrid::new(&shell(4, 1), 8, 8, -1.0).is_err());
        // n_s and Z ignored for d = 0
        assert!(StripGrid::new(&shell(3, 2), 8, 0, -1.0).is_ok());
    }

    #[test]
    fn weight_examples() {
        let c = shell(3, 1);
        assert_eq!(weight_at(&c, 2.0, 0.0).unwrap(), 2.0);
        let c = ShellConfig::new(5, 1, 1.0, 2.0, 3.0).unwrap();
        assert_eq!(weight_at(&c, 1.5, 3.0).unwrap(), 13.5);
        assert!(weight_at(&c, 1.5, 0.0).is_err());
        let w = Weighting::raw(0, 1);
        for t in [0.1, 1.0, 7.5] {
            assert_eq!(w.eval(t, 0.3).unwrap(), 1.0);
        }
    }

    #[test]
    fn angular_constants() {
        use std::f64::consts::PI;
        let g = StripGrid::new(&shell(4, 1), 4, 4, 1.0).unwrap();
        assert!((g.weighting().angular - 4.0 * PI * PI).abs() < 1e-12);
        let g = StripGrid::new(&shell(3, 1), 4, 4, 1.0).unwrap();
        assert!((g.weighting().angular - 2.0 * PI).abs() < 1e-12);
        let g = StripGrid::even_in_z(&shell(3, 1), 4, 4, 1.0).unwrap();
        assert!((g.weighting().angular - 4.0 * PI).abs() < 1e-12);
    }
}
