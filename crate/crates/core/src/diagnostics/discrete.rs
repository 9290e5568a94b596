//! Exact analysis of the coordinate walk on a grid of cells.
//!
//! The surrogate chain lives on the cells whose centre lies in the body.
//! From a cell it picks an axis uniformly and jumps to a uniform cell of the
//! contiguous run of body cells through it along that axis, itself
//! included. Both endpoints of a move share the run, so the matrix is
//! symmetric and the uniform law on cells is stationary. It mirrors the
//! continuous walk on the product structure but is not its discretization
//! by chord lengths.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Body;
use crate::isoperimetry::{GridPartition, GridSet};
use crate::rng::stream_rng;

/// Largest grid [`build_discrete_chain`] accepts.
pub const MAX_CHAIN_CELLS: usize = 20_000;
/// Residual tolerance of [`spectral_gap`].
pub const GAP_TOL: f64 = 1e-8;
/// Iteration cap of [`spectral_gap`].
pub const GAP_MAX_ITERS: usize = 100_000;

/// Sparse row-stochastic chain on grid cells.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteChain {
    pub partition: GridPartition,
    /// Linear cell index of each state.
    pub states: Vec<usize>,
    /// Row `i` lists `(state, probability)` with distinct states in
    /// increasing order.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub pi: Vec<f64>,
}

/// Worst deviations from the chain invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainCheck {
    pub row_sum_error: f64,
    pub balance_error: f64,
    pub stationarity_error: f64,
}

impl ChainCheck {
    pub fn holds(&self) -> bool {
        self.row_sum_error <= 1e-12 && self.balance_error <= 1e-10 && self.stationarity_error <= 1e-10
    }
}

/// Exact flow and conductance of one cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutConductance {
    pub flow: f64,
    pub mass: f64,
    pub phi: f64,
}

/// Axis-aligned cut `{cells with index[axis] < threshold}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisCut {
    pub axis: usize,
    pub threshold: usize,
    pub conductance: CutConductance,
}

/// Both sides of `φ²/2 ≤ gap ≤ 2φ` for the lazy chain, with `φ` the
/// smallest axis-cut conductance of the lazy chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheegerCheck {
    pub gap: f64,
    pub phi: f64,
    pub lower: f64,
    pub upper: f64,
    pub cut: AxisCut,
}

impl CheegerCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.lower <= self.gap + slack && self.gap <= self.upper + slack
    }
}

pub fn build_discrete_chain(body: &Body, grid: GridPartition) -> Result<DiscreteChain> {
    let total = grid.num_cells();
    if total > MAX_CHAIN_CELLS {
        return Err(Error::BudgetExceeded(format!(
            "grid has {total} cells (limit {MAX_CHAIN_CELLS})"
        )));
    }
    let cells = GridSet::body_cells(body, grid.clone())?;
    if cells.is_empty() {
        return Err(Error::DegenerateGeometry("no cell centre lies in the body".into()));
    }
    let states: Vec<usize> = cells.iter().collect();
    let mut index = vec![usize::MAX; total];
    for (i, &c) in states.iter().enumerate() {
        index[c] = i;
    }
    let n = grid.dim();
    let rows = states
        .par_iter()
        .map(|&c| {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for axis in 0..n {
                let mut run = vec![index[c]];
                for up in [false, true] {
                    let mut cur = c;
                    while let Some(next) = grid.neighbor(cur, axis, up).filter(|&o| index[o] != usize::MAX) {
                        run.push(index[next]);
                        cur = next;
                    }
                }
                let p = 1.0 / (n * run.len()) as f64;
                row.extend(run.into_iter().map(|s| (s, p)));
            }
            row.sort_by_key(|&(s, _)| s);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (s, p) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == s => last.1 += p,
                    _ => merged.push((s, p)),
                }
            }
            merged
        })
        .collect();
    let pi = vec![1.0 / states.len() as f64; states.len()];
    Ok(DiscreteChain {
        partition: grid,
        states,
        rows,
        pi,
    })
}

impl DiscreteChain {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let row = &self.rows[i];
        row.binary_search_by_key(&j, |&(s, _)| s).map_or(0.0, |k| row[k].1)
    }

    /// `x ↦ x P` for a row vector.
    pub fn left_apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                out[j] += x[i] * p;
            }
        }
        out
    }

    /// `f ↦ P f` for a column vector.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, p)| p * f[j]).sum())
            .collect()
    }

    pub fn check(&self) -> ChainCheck {
        let row_sum_error = self
            .rows
            .iter()
            .map(|r| (r.iter().map(|e| e.1).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max);
        let balance_error = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&(j, p)| (i, j, p)))
            .map(|(i, j, p)| (self.pi[i] * p - self.pi[j] * self.entry(j, i)).abs())
            .fold(0.0, f64::max);
        let stationarity_error = self
            .left_apply(&self.pi)
            .iter()
            .zip(&self.pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        ChainCheck {
            row_sum_error,
            balance_error,
            stationarity_error,
        }
    }

    /// Exact `Q(S, Sᶜ)` and `Q(S, Sᶜ) / min(π(S), π(Sᶜ))` of the non-lazy
    /// chain for the states flagged in `in_s`.
    pub fn cut_conductance(&self, in_s: &[bool]) -> Result<CutConductance> {
        Error::check_dim(self.len(), in_s.len())?;
        let mut flow = 0.0;
        let mut mass = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            if !in_s[i] {
                continue;
            }
            mass += self.pi[i];
            flow += self.pi[i] * row.iter().filter(|&&(j, _)| !in_s[j]).map(|e| e.1).sum::<f64>();
        }
        let smaller = mass.min(1.0 - mass);
        Ok(CutConductance {
            flow,
            mass,
            phi: if smaller > 0.0 { flow / smaller } else { 0.0 },
        })
    }

    /// Conductance of `{index[axis] < threshold}`.
    pub fn axis_cut(&self, axis: usize, threshold: usize) -> Result<AxisCut> {
        let in_s: Vec<bool> = self
            .states
            .iter()
            .map(|&c| self.partition.multi(c)[axis] < threshold)
            .collect();
        Ok(AxisCut {
            axis,
            threshold,
            conductance: self.cut_conductance(&in_s)?,
        })
    }

    /// Smallest conductance over all nontrivial axis-aligned cuts.
    pub fn min_axis_cut(&self) -> Result<AxisCut> {
        let ext = self.partition.extents().to_vec();
        let mut best: Option<AxisCut> = None;
        for (axis, &e) in ext.iter().enumerate() {
            for threshold in 1..e {
                let cut = self.axis_cut(axis, threshold)?;
                let m = cut.conductance.mass;
                if m <= 0.0 || m >= 1.0 {
                    continue;
                }
                if best.is_none_or(|b| cut.conductance.phi < b.conductance.phi) {
                    best = Some(cut);
                }
            }
        }
        best.ok_or_else(|| Error::DegenerateGeometry("chain has no nontrivial axis cut".into()))
    }
}

/// `1 − λ₂` of the lazy chain `(I + P)/2` by power iteration on the
/// orthogonal complement of the constants; the matrix is symmetric because
/// the stationary law is uniform on cells.
pub fn spectral_gap(chain: &DiscreteChain) -> Result<f64> {
    let m = chain.len();
    if m < 2 {
        return Ok(1.0);
    }
    let deflate = |v: &mut [f64]| {
        let mean = v.iter().sum::<f64>() / m as f64;
        v.iter_mut().for_each(|x| *x -= mean);
    };
    let normalize = |v: &mut [f64]| {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        norm
    };
    let mut rng = stream_rng(0x9A9, 0);
    let mut v: Vec<f64> = (0..m).map(|_| rng.random::<f64>() - 0.5).collect();
    deflate(&mut v);
    normalize(&mut v);
    for _ in 0..GAP_MAX_ITERS {
        let pv = chain.apply(&v);
        let mut w: Vec<f64> = v.iter().zip(&pv).map(|(a, b)| 0.5 * (a + b)).collect();
        deflate(&mut w);
        let lambda: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        let residual = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= GAP_TOL {
            return Ok(1.0 - lambda);
        }
        if normalize(&mut w) == 0.0 {
            return Ok(1.0);
        }
        v = w;
    }
    Err(Error::NoConvergence(GAP_MAX_ITERS))
}

/// Discrete Cheeger sandwich for the lazy chain over axis-aligned cuts.
pub fn cheeger_check(chain: &DiscreteChain) -> Result<CheegerCheck> {
    let gap = spectral_gap(chain)?;
    let cut = chain.min_axis_cut()?;
    let phi = 0.5 * cut.conductance.phi;
    Ok(CheegerCheck {
        gap,
        phi,
        lower: phi * phi / 2.0,
        upper: 2.0 * phi,
        cut,
    })
}
