use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Body, Bounds, CONTAIN_TOL};

/// A regular lattice of axis-aligned cubes of side `delta`; cell
/// `(i_1, …, i_n)` covers `[origin + i δ, origin + (i + 1) δ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPartition {
    origin: Vec<f64>,
    delta: f64,
    extents: Vec<usize>,
}

impl GridPartition {
    pub fn new(origin: Vec<f64>, delta: f64, extents: Vec<usize>) -> Result<Self> {
        if origin.is_empty() {
            return Err(Error::InvalidParameter("grid needs at least one dimension".into()));
        }
        Error::check_dim(origin.len(), extents.len())?;
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("cell width must be positive, got {delta}")));
        }
        if extents.contains(&0) {
            return Err(Error::InvalidParameter("every axis needs at least one cell".into()));
        }
        extents
            .iter()
            .try_fold(1usize, |acc, &e| acc.checked_mul(e))
            .ok_or_else(|| Error::BudgetExceeded("grid cell count overflows".into()))?;
        Ok(Self { origin, delta, extents })
    }

    /// `k^n` cells of width `1/k` tiling the unit cube.
    pub fn unit_cube(n: usize, k: usize) -> Result<Self> {
        Self::new(vec![0.0; n], 1.0 / k as f64, vec![k; n])
    }

    /// Smallest grid anchored at `bounds.lo` that covers `bounds`.
    pub fn covering(bounds: &Bounds, delta: f64) -> Result<Self> {
        let extents = bounds
            .lo
            .iter()
            .zip(&bounds.hi)
            .map(|(l, h)| (((h - l) / delta) - 1e-9).ceil().max(1.0) as usize)
            .collect();
        Self::new(bounds.lo.clone(), delta, extents)
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn num_cells(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.delta.powi(self.dim() as i32)
    }

    /// Row-major linear index, last axis fastest.
    pub fn linear(&self, cell: &[usize]) -> Option<usize> {
        if cell.len() != self.dim() {
            return None;
        }
        let mut idx = 0;
        for (&c, &e) in cell.iter().zip(&self.extents) {
            if c >= e {
                return None;
            }
            idx = idx * e + c;
        }
        Some(idx)
    }

    pub fn multi(&self, mut idx: usize) -> Vec<usize> {
        let mut cell = vec![0; self.dim()];
        for (c, &e) in cell.iter_mut().zip(&self.extents).rev() {
            *c = idx % e;
            idx /= e;
        }
        cell
    }

    /// Cell containing `p`; points on an interior face belong to the upper
    /// cell, points on the outer upper face to the last cell.
    pub fn cell_of(&self, p: &[f64]) -> Option<usize> {
        let mut idx = 0;
        for ((&x, &o), &e) in p.iter().zip(&self.origin).zip(&self.extents) {
            let f = ((x - o) / self.delta).floor();
            let c = if f >= e as f64 && x <= o + e as f64 * self.delta * (1.0 + 1e-12) {
                e - 1
            } else if f < 0.0 || f >= e as f64 {
                return None;
            } else {
                f as usize
            };
            idx = idx * e + c;
        }
        Some(idx)
    }

    pub fn cell_bounds(&self, idx: usize) -> Bounds {
        let cell = self.multi(idx);
        let lo: Vec<f64> = cell
            .iter()
            .zip(&self.origin)
            .map(|(&c, o)| o + c as f64 * self.delta)
            .collect();
        let hi = lo.iter().map(|l| l + self.delta).collect();
        Bounds { lo, hi }
    }

    pub fn cell_center(&self, idx: usize) -> Vec<f64> {
        self.multi(idx)
            .iter()
            .zip(&self.origin)
            .map(|(&c, o)| o + (c as f64 + 0.5) * self.delta)
            .collect()
    }

    /// Index of the neighbour one step along `axis` in direction `dir`.
    pub fn neighbor(&self, idx: usize, axis: usize, up: bool) -> Option<usize> {
        let mut cell = self.multi(idx);
        if up {
            cell[axis] += 1;
        } else {
            cell[axis] = cell[axis].checked_sub(1)?;
        }
        self.linear(&cell)
    }

    /// Identifier of the axis-parallel line of cells through `idx` along
    /// `axis`: two cells share it iff they agree off `axis`.
    pub(crate) fn line_key(&self, idx: usize, axis: usize) -> (usize, usize) {
        let cell = self.multi(idx);
        let mut key = 0;
        for (i, (&c, &e)) in cell.iter().zip(&self.extents).enumerate() {
            if i != axis {
                key = key * e + c;
            }
        }
        (axis, key)
    }
}

/// A set of cells of one partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSet {
    partition: GridPartition,
    cells: BTreeSet<usize>,
}

impl GridSet {
    pub fn empty(partition: GridPartition) -> Self {
        Self {
            partition,
            cells: BTreeSet::new(),
        }
    }

    pub fn full(partition: GridPartition) -> Self {
        let cells = (0..partition.num_cells()).collect();
        Self { partition, cells }
    }

    pub fn from_linear(partition: GridPartition, cells: impl IntoIterator<Item = usize>) -> Result<Self> {
        let n = partition.num_cells();
        let cells: BTreeSet<usize> = cells.into_iter().collect();
        if let Some(&bad) = cells.iter().find(|&&c| c >= n) {
            return Err(Error::InvalidParameter(format!("cell index {bad} out of range")));
        }
        Ok(Self { partition, cells })
    }

    pub fn from_cells<I, C>(partition: GridPartition, cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = C>,
        C: AsRef<[usize]>,
    {
        let linear = cells
            .into_iter()
            .map(|c| {
                partition.linear(c.as_ref()).ok_or_else(|| {
                    Error::InvalidParameter(format!("cell {:?} outside the grid", c.as_ref()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_linear(partition, linear)
    }

    /// Cells whose centre lies in `body`.
    pub fn body_cells(body: &Body, partition: GridPartition) -> Result<Self> {
        Error::check_dim(body.dim(), partition.dim())?;
        let cells = (0..partition.num_cells())
            .filter(|&c| body.contains_tol(&partition.cell_center(c), CONTAIN_TOL))
            .collect();
        Ok(Self { partition, cells })
    }

    pub fn partition(&self) -> &GridPartition {
        &self.partition
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.len() as f64 * self.partition.cell_volume()
    }

    pub fn insert(&mut self, idx: usize) -> bool {
        assert!(idx < self.partition.num_cells(), "cell index out of range");
        self.cells.insert(idx)
    }

    pub fn remove(&mut self, idx: usize) -> bool {
        self.cells.remove(&idx)
    }

    pub fn contains_cell(&self, idx: usize) -> bool {
        self.cells.contains(&idx)
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        self.partition.cell_of(p).is_some_and(|c| self.cells.contains(&c))
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter().copied()
    }

    pub fn is_subset(&self, other: &GridSet) -> bool {
        self.cells.is_subset(&other.cells)
    }

    pub fn difference(&self, other: &GridSet) -> GridSet {
        GridSet {
            partition: self.partition.clone(),
            cells: self.cells.difference(&other.cells).copied().collect(),
        }
    }

    pub(crate) fn line_keys(&self) -> HashSet<(usize, usize)> {
        let n = self.partition.dim();
        self.cells
            .iter()
            .flat_map(|&c| (0..n).map(move |j| (c, j)))
            .map(|(c, j)| self.partition.line_key(c, j))
            .collect()
    }

    /// Sorted cell tuples, one per line, comma separated.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.cells {
            let cell = self.partition.multi(*c);
            let line: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn from_text(partition: GridPartition, text: &str) -> Result<Self> {
        let cells = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<usize>()
                            .map_err(|e| Error::InvalidParameter(format!("cell {l:?}: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_cells(partition, cells)
    }
}
