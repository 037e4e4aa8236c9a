//! Nodal-domain counting by union-find over same-sign neighbouring cells.

use serde::Serialize;

use crate::error::{Error, Result};

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }
}

/// Tensor lattice; flat index `i0 + n0 (i1 + n1 (i2 + ...))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    pub dims: Vec<usize>,
    pub periodic: Vec<bool>,
}

impl Lattice {
    pub fn new(dims: Vec<usize>, periodic: Vec<bool>) -> Self {
        assert_eq!(dims.len(), periodic.len());
        Lattice { dims, periodic }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = Vec::with_capacity(self.dims.len());
        let mut acc = 1;
        for &d in &self.dims {
            s.push(acc);
            acc *= d;
        }
        s
    }

    /// Forward neighbours (one per axis), so every adjacent pair is visited once.
    fn forward_neighbours(&self, idx: usize, strides: &[usize], out: &mut Vec<usize>) {
        out.clear();
        for (ax, (&n, &st)) in self.dims.iter().zip(strides).enumerate() {
            let coord = (idx / st) % n;
            if coord + 1 < n {
                out.push(idx + st);
            } else if self.periodic[ax] && n > 2 {
                out.push(idx - coord * st);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodalReport {
    pub count: usize,
    /// Absolute threshold `threshold_frac * ||field||_inf`.
    pub threshold: f64,
    /// Cell counts per component, in order of first cell index.
    pub component_sizes: Vec<usize>,
    pub zero_field: bool,
}

/// Counts maximal same-sign face-connected sets of cells with
/// `|value| > threshold_frac * max|value|`. Cells at or below the threshold
/// stay unlabelled.
pub fn count_nodal_domains(values: &[f64], lattice: &Lattice, threshold_frac: f64) -> Result<NodalReport> {
    if !(threshold_frac > 0.0 && threshold_frac <= 0.01) {
        return Err(Error::domain(format!("threshold fraction {threshold_frac} must lie in (0, 0.01]")));
    }
    if values.len() != lattice.len() {
        return Err(Error::ShapeMismatch { expected: lattice.len(), got: values.len() });
    }
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return Ok(NodalReport { count: 0, threshold: 0.0, component_sizes: Vec::new(), zero_field: true });
    }
    let threshold = threshold_frac * max;
    let sign = |v: f64| -> i8 {
        if v > threshold {
            1
        } else if v < -threshold {
            -1
        } else {
            0
        }
    };

    let strides = lattice.strides();
    let mut dsu = DisjointSet::new(values.len());
    let mut nbrs = Vec::with_capacity(lattice.dims.len());
    for idx in 0..values.len() {
        let s = sign(values[idx]);
        if s == 0 {
            continue;
        }
        lattice.forward_neighbours(idx, &strides, &mut nbrs);
        for &nb in &nbrs {
            if sign(values[nb]) == s {
                dsu.union(idx, nb);
            }
        }
    }

    let mut seen = std::collections::HashSet::new();
    let mut component_sizes = Vec::new();
    for idx in 0..values.len() {
        if sign(values[idx]) == 0 {
            continue;
        }
        let root = dsu.find(idx);
        if seen.insert(root) {
            component_sizes.push(dsu.size_of(root));
        }
    }
    Ok(NodalReport { count: component_sizes.len(), threshold, component_sizes, zero_field: false })
}
