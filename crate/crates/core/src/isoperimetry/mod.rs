//! Axis-disjoint sets and their isoperimetry.
//!
//! Two sets are axis-disjoint when no point of one lies on an axis-parallel
//! line through a point of the other, i.e. every cross pair agrees in at
//! most `n − 2` coordinates. On a lattice the same rule is applied to
//! integer cell coordinates, which is conservative: collinear cells always
//! contain collinear points.

mod grid;
mod search;
mod tiling;

pub use grid::{GridPartition, GridSet};
pub use search::{brute_force_worst_ratio, worst_ratio_cube_grid, WorstRatio, BRUTE_FORCE_MAX_CELLS};
pub use tiling::{
    tiling_classify, CellOccupancy, Facet, Tiling, TilingParams, CELL_POINTS, MAX_TILING_CELLS,
};

use rand::seq::IteratorRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Body;
use crate::kernel::{Region, BLOCK_SIZE, MIN_HITS};
use crate::rng::stream_rng;
use crate::samplers::{PointSampler, UniformSampler};

/// Coordinate tolerance of [`are_axis_disjoint`].
pub const AXIS_TOL: f64 = 1e-12;

/// Whether every pair `(p, q)` agrees in at most `n − 2` coordinates, with
/// equality judged within `tol`. In one dimension any two points share the
/// only axis line, so nonempty sets are never axis-disjoint.
pub fn are_axis_disjoint(p: &[Vec<f64>], q: &[Vec<f64>], tol: f64) -> Result<bool> {
    let Some(n) = p.iter().chain(q).map(Vec::len).next() else {
        return Ok(true);
    };
    if let Some(bad) = p.iter().chain(q).find(|v| v.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
    }
    if n == 1 {
        return Ok(p.is_empty() || q.is_empty());
    }
    Ok(p.iter().all(|u| {
        q.iter().all(|v| {
            let shared = u.iter().zip(v).filter(|(a, b)| (*a - *b).abs() <= tol).count();
            shared + 2 <= n
        })
    }))
}

fn same_partition(a: &GridSet, b: &GridSet) -> Result<()> {
    if a.partition() != b.partition() {
        return Err(Error::InvalidParameter("grid sets use different partitions".into()));
    }
    Ok(())
}

/// Cell-level axis-disjointness: no cell of `s1` shares an axis line of
/// cells with a cell of `s2`.
pub fn grid_axis_disjoint(s1: &GridSet, s2: &GridSet) -> Result<bool> {
    same_partition(s1, s2)?;
    let (small, large) = if s1.len() <= s2.len() { (s1, s2) } else { (s2, s1) };
    let keys = small.line_keys();
    let part = large.partition();
    Ok(large
        .iter()
        .all(|c| (0..part.dim()).all(|j| !keys.contains(&part.line_key(c, j)))))
}

/// Cells of `k_grid ∖ s` reachable from a cell of `s` by changing one
/// integer coordinate.
pub fn axis_extension(k_grid: &GridSet, s: &GridSet) -> Result<GridSet> {
    same_partition(k_grid, s)?;
    if !s.is_subset(k_grid) {
        return Err(Error::Precondition("set is not contained in the body grid".into()));
    }
    let keys = s.line_keys();
    let part = k_grid.partition();
    let cells = k_grid
        .iter()
        .filter(|&c| !s.contains_cell(c))
        .filter(|&c| (0..part.dim()).any(|j| keys.contains(&part.line_key(c, j))));
    GridSet::from_linear(part.clone(), cells)
}

/// Random axis-disjoint pair of nonempty cell sets inside `k_grid`.
pub fn random_axis_disjoint_pair<R: Rng + ?Sized>(k_grid: &GridSet, rng: &mut R) -> Result<(GridSet, GridSet)> {
    let part = k_grid.partition().clone();
    for _ in 0..100 {
        let a = k_grid.iter().choose(rng).ok_or_else(|| Error::InvalidParameter("empty grid".into()))?;
        let mut s1 = GridSet::empty(part.clone());
        s1.insert(a);
        let keys1 = s1.line_keys();
        let free: Vec<usize> = k_grid
            .iter()
            .filter(|&c| (0..part.dim()).all(|j| !keys1.contains(&part.line_key(c, j))))
            .collect();
        let Some(&b) = free.get(rng.random_range(0..free.len().max(1))) else {
            continue;
        };
        let mut s2 = GridSet::empty(part.clone());
        s2.insert(b);
        let attempts = rng.random_range(0..=2 * k_grid.len());
        for _ in 0..attempts {
            let c = k_grid.iter().choose(rng).expect("nonempty grid");
            if s1.contains_cell(c) || s2.contains_cell(c) {
                continue;
            }
            let mut single = GridSet::empty(part.clone());
            single.insert(c);
            if rng.random_bool(0.5) {
                if grid_axis_disjoint(&single, &s2)? {
                    s1.insert(c);
                }
            } else if grid_axis_disjoint(&single, &s1)? {
                s2.insert(c);
            }
        }
        return Ok((s1, s2));
    }
    Err(Error::DegenerateGeometry("grid admits no axis-disjoint pair".into()))
}

/// Outer Minkowski-quotient estimate of the boundary of `S` relative to
/// `K`: `[vol(S_ε ∩ K) − vol(S ∩ K)] / ε` at `ε` and `ε/2` from the same
/// draws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryEstimate {
    pub eps: f64,
    pub area: f64,
    pub se: f64,
    pub area_half: f64,
    pub se_half: f64,
    /// Richardson extrapolation `2·area_half − area`.
    pub extrapolated: f64,
    pub vol_s: f64,
    pub se_vol_s: f64,
    pub vol_k: f64,
    pub n_samples: u64,
    pub seed: u64,
}

pub fn boundary_measure_estimate(
    body: &Body,
    s: &Region,
    eps: f64,
    n_samples: u64,
    seed: u64,
) -> Result<BoundaryEstimate> {
    if !(eps > 0.0 && eps <= 0.1) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 0.1], got {eps}")));
    }
    if n_samples < 1000 {
        return Err(Error::InvalidParameter(format!("need at least 1000 samples, got {n_samples}")));
    }
    let vol_k = body
        .volume()
        .ok_or_else(|| Error::Unsupported(format!("{} bodies have no closed-form volume", body.kind_name())))?;
    let blocks = n_samples.div_ceil(BLOCK_SIZE);
    let partial = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b + 1);
            let mut sampler = UniformSampler::new(body)?;
            let mut c = [0u64; 3];
            for _ in 0..BLOCK_SIZE.min(n_samples - b * BLOCK_SIZE) {
                let x = sampler.sample(body, &mut rng)?;
                if s.contains(&x) {
                    c[0] += 1;
                } else {
                    let d = s.distance(&x)?;
                    c[1] += u64::from(d <= eps);
                    c[2] += u64::from(d <= eps / 2.0);
                }
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let [inside, shell, half] = partial
        .into_iter()
        .fold([0u64; 3], |a, c| [a[0] + c[0], a[1] + c[1], a[2] + c[2]]);
    let nf = n_samples as f64;
    let prop = |k: u64| {
        let p = k as f64 / nf;
        (p, (p * (1.0 - p) / nf).sqrt())
    };
    let (p_s, se_s) = prop(inside);
    let (area, se, area_half, se_half) = if inside == 0 || inside == n_samples {
        (0.0, 0.0, 0.0, 0.0)
    } else if half < MIN_HITS {
        return Err(Error::InsufficientSamples(format!(
            "only {half} draws within eps/2 of the set (need {MIN_HITS})"
        )));
    } else {
        let (p1, s1) = prop(shell);
        let (p2, s2) = prop(half);
        (vol_k * p1 / eps, vol_k * s1 / eps, vol_k * p2 * 2.0 / eps, vol_k * s2 * 2.0 / eps)
    };
    Ok(BoundaryEstimate {
        eps,
        area,
        se,
        area_half,
        se_half,
        extrapolated: 2.0 * area_half - area,
        vol_s: vol_k * p_s,
        se_vol_s: vol_k * se_s,
        vol_k,
        n_samples,
        seed,
    })
}

/// Both sides of the axis-disjoint isoperimetric inequality
/// `vol(S₃) ≥ c ε / (n^3.5 R ln n) · (min{vol S₁, vol S₂} − ε vol K)`
/// evaluated with `c = 1` on the cells of `body`'s grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsoReport {
    pub n: usize,
    pub vol_s1: f64,
    pub vol_s2: f64,
    pub vol_s3: f64,
    pub vol_k: f64,
    pub bracket: f64,
    pub rhs: f64,
    /// Constant that would make the inequality tight; absent when vacuous.
    pub c_achieved: Option<f64>,
    pub vacuous: bool,
}

pub fn check_iso_inequality(body: &Body, s1: &GridSet, s2: &GridSet, epsilon: f64, r: f64) -> Result<IsoReport> {
    same_partition(s1, s2)?;
    let n = body.dim();
    if n < 2 {
        return Err(Error::Precondition("the inequality needs n ≥ 2".into()));
    }
    if !(epsilon > 0.0) || !(r > 0.0) {
        return Err(Error::InvalidParameter("epsilon and R must be positive".into()));
    }
    if !grid_axis_disjoint(s1, s2)? {
        return Err(Error::Precondition("sets are not axis-disjoint".into()));
    }
    let k_grid = GridSet::body_cells(body, s1.partition().clone())?;
    if !s1.is_subset(&k_grid) || !s2.is_subset(&k_grid) {
        return Err(Error::Precondition("sets must consist of body cells".into()));
    }
    let s3 = k_grid.difference(s1).difference(s2);
    let nf = n as f64;
    let vol_k = k_grid.volume();
    let bracket = s1.volume().min(s2.volume()) - epsilon * vol_k;
    let scale = epsilon / (nf.powf(3.5) * r * nf.ln());
    let vacuous = bracket <= 0.0;
    Ok(IsoReport {
        n,
        vol_s1: s1.volume(),
        vol_s2: s2.volume(),
        vol_s3: s3.volume(),
        vol_k,
        bracket,
        rhs: scale * bracket,
        c_achieved: (!vacuous).then(|| s3.volume() / (scale * bracket)),
        vacuous,
    })
}
