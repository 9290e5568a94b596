//! Worst-case isoperimetric ratio of axis-disjoint cell sets on the cube grid.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::grid::{GridPartition, GridSet};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Best pair found: `ratio = |S₃| / min(|S₁|, |S₂|)` with `S₃` the cells in
/// neither set.
#[derive(Debug, Clone, Serialize)]
pub struct WorstRatio {
    pub ratio: f64,
    pub s1: GridSet,
    pub s2: GridSet,
    pub s3_cells: usize,
    /// True when the search covered every candidate.
    pub exhaustive: bool,
    /// Candidates (n = 2) or restarts (n ≥ 3) evaluated.
    pub evaluated: u64,
}

/// Largest grid the labelling brute force accepts.
pub const BRUTE_FORCE_MAX_CELLS: usize = 13;

/// Dense ids of the `n` axis lines through each cell.
struct LineTable {
    cells: usize,
    n: usize,
    ids: Vec<usize>,
    lines: usize,
}

impl LineTable {
    fn new(part: &GridPartition) -> Self {
        let n = part.dim();
        let cells = part.num_cells();
        let mut offsets = Vec::with_capacity(n);
        let mut total = 0;
        for &e in part.extents() {
            offsets.push(total);
            total += cells / e;
        }
        let mut ids = Vec::with_capacity(cells * n);
        for c in 0..cells {
            for (j, off) in offsets.iter().enumerate() {
                ids.push(off + part.line_key(c, j).1);
            }
        }
        Self {
            cells,
            n,
            ids,
            lines: total,
        }
    }

    fn of(&self, c: usize) -> &[usize] {
        &self.ids[c * self.n..(c + 1) * self.n]
    }
}

fn ratio(total: usize, a: usize, b: usize) -> f64 {
    (total - a - b) as f64 / a.min(b) as f64
}

/// Minimizes the ratio over grid-axis-disjoint pairs of nonempty sets on the
/// `k^n` cube grid. For `n = 2` the search is exhaustive: disjoint pairs live
/// in `R₁×C₁` and `R₂×C₂` with disjoint row and column sets, filling both
/// rectangles only lowers the ratio, and so enumerating the four side lengths
/// covers every case. For `n ≥ 3` it runs `budget` seeded hill-climbing
/// restarts and labels the result non-exhaustive.
pub fn worst_ratio_cube_grid(k: usize, n: usize, budget: u64, seed: u64) -> Result<WorstRatio> {
    if n < 2 || k < 2 {
        return Err(Error::Precondition(format!(
            "axis-disjoint nonempty pairs need n ≥ 2 and k ≥ 2, got n={n}, k={k}"
        )));
    }
    let part = GridPartition::unit_cube(n, k)?;
    if n == 2 {
        return Ok(structured_search(part, k));
    }
    hill_climb(part, budget, seed)
}

fn structured_search(part: GridPartition, k: usize) -> WorstRatio {
    let total = k * k;
    let mut best = (f64::INFINITY, 0, 0, 0, 0);
    let mut evaluated = 0;
    for r1 in 1..k {
        for r2 in 1..=k - r1 {
            for c1 in 1..k {
                for c2 in 1..=k - c1 {
                    evaluated += 1;
                    let v = ratio(total, r1 * c1, r2 * c2);
                    if v < best.0 {
                        best = (v, r1, c1, r2, c2);
                    }
                }
            }
        }
    }
    let (v, r1, c1, r2, c2) = best;
    let rect = |rows: std::ops::Range<usize>, cols: std::ops::Range<usize>| {
        let cells: Vec<[usize; 2]> = rows.flat_map(|r| cols.clone().map(move |c| [r, c])).collect();
        GridSet::from_cells(part.clone(), cells).expect("cells inside the grid")
    };
    let s1 = rect(0..r1, 0..c1);
    let s2 = rect(r1..r1 + r2, c1..c1 + c2);
    WorstRatio {
        ratio: v,
        s3_cells: total - s1.len() - s2.len(),
        s1,
        s2,
        exhaustive: true,
        evaluated,
    }
}

struct ClimbState<'a> {
    table: &'a LineTable,
    label: Vec<u8>,
    count: [Vec<u32>; 2],
    size: [usize; 2],
}

impl<'a> ClimbState<'a> {
    fn new(table: &'a LineTable) -> Self {
        Self {
            table,
            label: vec![0; table.cells],
            count: [vec![0; table.lines], vec![0; table.lines]],
            size: [0, 0],
        }
    }

    fn set(&mut self, c: usize, to: u8) {
        let from = self.label[c];
        if from == to {
            return;
        }
        if from > 0 {
            let side = (from - 1) as usize;
            self.size[side] -= 1;
            for &l in self.table.of(c) {
                self.count[side][l] -= 1;
            }
        }
        if to > 0 {
            let side = (to - 1) as usize;
            self.size[side] += 1;
            for &l in self.table.of(c) {
                self.count[side][l] += 1;
            }
        }
        self.label[c] = to;
    }

    /// Whether `c` may join side `to` without sharing a line with the other
    /// side.
    fn allowed(&self, c: usize, to: u8) -> bool {
        if to == 0 {
            return true;
        }
        let other = (2 - to) as usize;
        let own = u32::from(self.label[c] == 3 - to);
        self.table.of(c).iter().all(|&l| self.count[other][l] == own)
    }

    fn ratio_after(&self, c: usize, to: u8) -> Option<f64> {
        let mut size = self.size;
        let from = self.label[c];
        if from > 0 {
            size[(from - 1) as usize] -= 1;
        }
        if to > 0 {
            size[(to - 1) as usize] += 1;
        }
        (size[0] > 0 && size[1] > 0).then(|| ratio(self.table.cells, size[0], size[1]))
    }

    fn ratio(&self) -> f64 {
        ratio(self.table.cells, self.size[0], self.size[1])
    }
}

fn hill_climb(part: GridPartition, budget: u64, seed: u64) -> Result<WorstRatio> {
    if budget == 0 {
        return Err(Error::InvalidParameter("search budget must be positive".into()));
    }
    let table = LineTable::new(&part);
    let cells = table.cells;
    let mut rng = stream_rng(seed, 0);
    let mut best: Option<(f64, Vec<u8>)> = None;
    let mut order: Vec<usize> = (0..cells).collect();
    for _ in 0..budget {
        let mut st = ClimbState::new(&table);
        let a = rng.random_range(0..cells);
        st.set(a, 1);
        order.shuffle(&mut rng);
        let Some(&b) = order.iter().find(|&&b| b != a && st.allowed(b, 2)) else {
            continue;
        };
        st.set(b, 2);
        for _ in 0..30 * cells {
            let c = rng.random_range(0..cells);
            let to = (st.label[c] + rng.random_range(1..3u8)) % 3;
            if !st.allowed(c, to) {
                continue;
            }
            if let Some(r) = st.ratio_after(c, to) {
                if r <= st.ratio() {
                    st.set(c, to);
                }
            }
        }
        if best.as_ref().is_none_or(|(r, _)| st.ratio() < *r) {
            best = Some((st.ratio(), st.label.clone()));
        }
    }
    let (r, label) = best.ok_or_else(|| Error::DegenerateGeometry("no axis-disjoint pair exists".into()))?;
    Ok(labelled_result(part, r, &label, false, budget))
}

fn labelled_result(part: GridPartition, r: f64, label: &[u8], exhaustive: bool, evaluated: u64) -> WorstRatio {
    let pick = |side: u8| {
        GridSet::from_linear(part.clone(), (0..label.len()).filter(|&c| label[c] == side))
            .expect("cells inside the grid")
    };
    let (s1, s2) = (pick(1), pick(2));
    WorstRatio {
        ratio: r,
        s3_cells: label.len() - s1.len() - s2.len(),
        s1,
        s2,
        exhaustive,
        evaluated,
    }
}

/// Exhaustive search over all `3^(k^n)` labellings; an independent oracle
/// for tiny grids.
pub fn brute_force_worst_ratio(k: usize, n: usize) -> Result<WorstRatio> {
    let part = GridPartition::unit_cube(n, k)?;
    let cells = part.num_cells();
    if cells > BRUTE_FORCE_MAX_CELLS {
        return Err(Error::BudgetExceeded(format!(
            "brute force over {cells} cells (limit {BRUTE_FORCE_MAX_CELLS})"
        )));
    }
    let keys: Vec<Vec<(usize, usize)>> = (0..cells)
        .map(|c| (0..n).map(|j| part.line_key(c, j)).collect())
        .collect();
    let mut label = vec![0u8; cells];
    let mut best: Option<(f64, Vec<u8>)> = None;
    let mut evaluated = 0;
    loop {
        evaluated += 1;
        let a = label.iter().filter(|&&l| l == 1).count();
        let b = label.iter().filter(|&&l| l == 2).count();
        if a > 0 && b > 0 {
            let r = ratio(cells, a, b);
            if best.as_ref().is_none_or(|(v, _)| r < *v) {
                let disjoint = (0..cells).filter(|&c| label[c] == 1).all(|c| {
                    (0..cells)
                        .filter(|&d| label[d] == 2)
                        .all(|d| keys[c].iter().all(|key| !keys[d].contains(key)))
                });
                if disjoint {
                    best = Some((r, label.clone()));
                }
            }
        }
        // Next labelling in base 3.
        let mut i = 0;
        while i < cells && label[i] == 2 {
            label[i] = 0;
            i += 1;
        }
        if i == cells {
            break;
        }
        label[i] += 1;
    }
    let (r, label) = best.ok_or_else(|| Error::DegenerateGeometry("no axis-disjoint pair exists".into()))?;
    Ok(labelled_result(part, r, &label, true, evaluated))
}
