//! Lattice classification of a set into lightly and heavily occupied cubes.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{GridPartition, GridSet};
use crate::error::{Error, Result};
use crate::geometry::{Body, CONTAIN_TOL};
use crate::kernel::Region;
use crate::rng::stream_rng;

/// Points drawn per cell when estimating occupancy.
pub const CELL_POINTS: u64 = 1000;
/// Largest lattice [`tiling_classify`] will visit.
pub const MAX_TILING_CELLS: usize = 200_000;

/// Shrink factor, cell width and accuracy of the tiling argument, tied by
/// `alpha = epsilon / (20 n)` and `delta = alpha / (4 √n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TilingParams {
    pub alpha: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl TilingParams {
    pub fn from_epsilon(epsilon: f64, n: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) || n == 0 {
            return Err(Error::InvalidParameter(format!(
                "need epsilon > 0 and n ≥ 1, got {epsilon}, {n}"
            )));
        }
        let alpha = epsilon / (20.0 * n as f64);
        Ok(Self {
            alpha,
            delta: alpha / (4.0 * (n as f64).sqrt()),
            epsilon,
        })
    }

    pub fn from_delta(delta: f64, n: usize) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) || n == 0 {
            return Err(Error::InvalidParameter(format!(
                "need delta > 0 and n ≥ 1, got {delta}, {n}"
            )));
        }
        let alpha = 4.0 * (n as f64).sqrt() * delta;
        Ok(Self {
            alpha,
            delta,
            epsilon: 20.0 * n as f64 * alpha,
        })
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let nf = n as f64;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        if n == 0
            || !(self.delta > 0.0)
            || !close(self.alpha, self.epsilon / (20.0 * nf))
            || !close(self.delta, self.alpha / (4.0 * nf.sqrt()))
        {
            return Err(Error::InvalidParameter(format!(
                "inconsistent tiling parameters {self:?} for n={n}"
            )));
        }
        Ok(())
    }
}

/// Occupancy estimate of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellOccupancy {
    pub cell: usize,
    /// Fraction of the cell's volume in `S₁ ∩ K`.
    pub fraction: f64,
    pub std_error: f64,
}

/// A facet between a heavy cell and a neighbouring cell of `K` outside the
/// heavy class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Facet {
    pub heavy: usize,
    pub other: usize,
    pub axis: usize,
    /// Whether `other` lies above `heavy` along `axis`.
    pub upper: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tiling {
    pub partition: GridPartition,
    /// Cells meeting `S₁`.
    pub cells: GridSet,
    /// Cells where `S₁` fills less than half.
    pub light: GridSet,
    /// Cells where `S₁` fills at least half.
    pub heavy: GridSet,
    pub occupancy: Vec<CellOccupancy>,
    /// Internal boundary of the heavy cells inside `K`.
    pub border: Vec<Facet>,
    pub facet_area: f64,
}

/// Lays a lattice of width `params.delta` over the body's bounding box,
/// estimates each cell's occupancy by `S₁` with [`CELL_POINTS`] uniform
/// points and splits the cells meeting `S₁` at occupancy 1/2.
pub fn tiling_classify(body: &Body, s1: &Region, params: &TilingParams, seed: u64) -> Result<Tiling> {
    let n = body.dim();
    params.validate(n)?;
    let part = GridPartition::covering(&body.bounding_box()?, params.delta)?;
    let total = part.num_cells();
    if total > MAX_TILING_CELLS {
        return Err(Error::BudgetExceeded(format!(
            "tiling needs {total} cells (limit {MAX_TILING_CELLS})"
        )));
    }
    let counts: Vec<(u64, u64)> = (0..total)
        .into_par_iter()
        .map(|c| {
            let b = part.cell_bounds(c);
            let mut rng = stream_rng(seed, c as u64);
            let mut p = vec![0.0; n];
            let (mut in_k, mut in_s) = (0, 0);
            for _ in 0..CELL_POINTS {
                for (k, v) in p.iter_mut().enumerate() {
                    *v = b.lo[k] + (b.hi[k] - b.lo[k]) * rng.random::<f64>();
                }
                if body.contains_tol(&p, CONTAIN_TOL) {
                    in_k += 1;
                    in_s += u64::from(s1.contains(&p));
                }
            }
            (in_k, in_s)
        })
        .collect();
    let mut cells = GridSet::empty(part.clone());
    let mut light = GridSet::empty(part.clone());
    let mut heavy = GridSet::empty(part.clone());
    let mut occupancy = Vec::new();
    for (c, &(_, in_s)) in counts.iter().enumerate() {
        if in_s == 0 {
            continue;
        }
        let f = in_s as f64 / CELL_POINTS as f64;
        occupancy.push(CellOccupancy {
            cell: c,
            fraction: f,
            std_error: (f * (1.0 - f) / CELL_POINTS as f64).sqrt(),
        });
        cells.insert(c);
        if f >= 0.5 {
            heavy.insert(c);
        } else {
            light.insert(c);
        }
    }
    let mut border = Vec::new();
    for h in heavy.iter() {
        for axis in 0..n {
            for upper in [false, true] {
                if let Some(o) = part.neighbor(h, axis, upper) {
                    if !heavy.contains_cell(o) && counts[o].0 > 0 {
                        border.push(Facet {
                            heavy: h,
                            other: o,
                            axis,
                            upper,
                        });
                    }
                }
            }
        }
    }
    Ok(Tiling {
        facet_area: params.delta.powi(n as i32 - 1),
        partition: part,
        cells,
        light,
        heavy,
        occupancy,
        border,
    })
}
