use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Chord;
use crate::isoperimetry::GridSet;

/// Closed axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        Error::check_dim(lo.len(), hi.len())?;
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return Err(Error::InvalidParameter("box needs lo ≤ hi".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| l <= v && v <= h)
    }

    fn distance(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&v, (&l, &h))| (l - v).max(v - h).max(0.0).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Parameters with `x + t d` in the box, as an interval (maybe empty).
    fn line_interval(&self, x: &[f64], d: &[f64]) -> (f64, f64) {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for k in 0..x.len() {
            if d[k] == 0.0 {
                if x[k] < self.lo[k] || x[k] > self.hi[k] {
                    return (1.0, 0.0);
                }
            } else {
                let (a, b) = ((self.lo[k] - x[k]) / d[k], (self.hi[k] - x[k]) / d[k]);
                lo = lo.max(a.min(b));
                hi = hi.min(a.max(b));
            }
        }
        (lo, hi)
    }
}

/// Measurable subset of a body that supports exact length measure along
/// lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// `{x : normal · x ≤ offset}` with a unit normal.
    Halfspace { normal: Vec<f64>, offset: f64 },
    BoxUnion { boxes: Vec<AxisBox> },
    Cells { set: GridSet },
    Complement { of: Box<Region> },
}

impl Region {
    /// Halfspace `{a · x ≤ c}`; `a` is normalized.
    pub fn halfspace(a: Vec<f64>, c: f64) -> Result<Self> {
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) || !c.is_finite() {
            return Err(Error::InvalidParameter("halfspace needs a finite nonzero normal".into()));
        }
        Ok(Region::Halfspace {
            normal: a.into_iter().map(|v| v / norm).collect(),
            offset: c / norm,
        })
    }

    /// `{x : x_axis ≤ c}`.
    pub fn axis_cut(n: usize, axis: usize, c: f64) -> Self {
        let mut normal = vec![0.0; n];
        normal[axis] = 1.0;
        Region::Halfspace { normal, offset: c }
    }

    pub fn boxes(boxes: Vec<AxisBox>) -> Self {
        Region::BoxUnion { boxes }
    }

    pub fn cells(set: GridSet) -> Self {
        Region::Cells { set }
    }

    pub fn complement(self) -> Self {
        match self {
            Region::Complement { of } => *of,
            other => Region::Complement { of: Box::new(other) },
        }
    }

    pub fn empty() -> Self {
        Region::BoxUnion { boxes: Vec::new() }
    }

    pub fn whole() -> Self {
        Region::empty().complement()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Halfspace { normal, offset } => dot(normal, x) <= *offset,
            Region::BoxUnion { boxes } => boxes.iter().any(|b| b.contains(x)),
            Region::Cells { set } => set.contains_point(x),
            Region::Complement { of } => !of.contains(x),
        }
    }

    /// Sorted, disjoint parameter intervals of `{t ∈ chord : x + t d ∈ S}`.
    pub fn line_intervals(&self, x: &[f64], d: &[f64], chord: Chord) -> Vec<(f64, f64)> {
        let (t_lo, t_hi) = (chord.t_lo, chord.t_hi);
        if !(t_hi > t_lo) {
            return Vec::new();
        }
        match self {
            Region::Halfspace { normal, offset } => {
                let slope = dot(normal, d);
                let room = offset - dot(normal, x);
                let (lo, hi) = if slope.abs() < 1e-300 {
                    if room >= 0.0 {
                        (t_lo, t_hi)
                    } else {
                        return Vec::new();
                    }
                } else if slope > 0.0 {
                    (t_lo, t_hi.min(room / slope))
                } else {
                    (t_lo.max(room / slope), t_hi)
                };
                if hi > lo {
                    vec![(lo, hi)]
                } else {
                    Vec::new()
                }
            }
            Region::BoxUnion { boxes } => {
                let pieces = boxes
                    .iter()
                    .map(|b| b.line_interval(x, d))
                    .map(|(a, b)| (a.max(t_lo), b.min(t_hi)))
                    .filter(|(a, b)| b > a)
                    .collect();
                merge(pieces)
            }
            Region::Cells { set } => cell_intervals(set, x, d, t_lo, t_hi),
            Region::Complement { of } => {
                let inner = of.line_intervals(x, d, chord);
                let mut out = Vec::new();
                let mut cursor = t_lo;
                for (a, b) in inner {
                    if a > cursor {
                        out.push((cursor, a));
                    }
                    cursor = cursor.max(b);
                }
                if t_hi > cursor {
                    out.push((cursor, t_hi));
                }
                out
            }
        }
    }

    /// Length of `{t ∈ chord : x + t d ∈ S}`.
    pub fn line_measure(&self, x: &[f64], d: &[f64], chord: Chord) -> f64 {
        self.line_intervals(x, d, chord).iter().map(|(a, b)| b - a).sum()
    }

    /// Euclidean distance from `x` to the region (0 inside).
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            Region::Halfspace { normal, offset } => (dot(normal, x) - offset).max(0.0),
            Region::BoxUnion { boxes } => boxes
                .iter()
                .map(|b| b.distance(x))
                .fold(f64::INFINITY, f64::min),
            Region::Cells { set } => {
                let part = set.partition();
                set.iter()
                    .map(|c| {
                        let b = part.cell_bounds(c);
                        AxisBox { lo: b.lo, hi: b.hi }.distance(x)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
            Region::Complement { of } => match of.as_ref() {
                Region::Halfspace { normal, offset } => (offset - dot(normal, x)).max(0.0),
                Region::BoxUnion { boxes } if boxes.is_empty() => 0.0,
                Region::BoxUnion { boxes } if boxes.len() == 1 => {
                    let b = &boxes[0];
                    if !b.contains(x) {
                        0.0
                    } else {
                        x.iter()
                            .zip(b.lo.iter().zip(&b.hi))
                            .map(|(&v, (&l, &h))| (v - l).min(h - v))
                            .fold(f64::INFINITY, f64::min)
                    }
                }
                _ => {
                    return Err(Error::Unsupported(
                        "distance to the complement of this region".into(),
                    ))
                }
            },
        })
    }

    /// Dimension the region is defined in, when it fixes one.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Region::Halfspace { normal, .. } => Some(normal.len()),
            Region::BoxUnion { boxes } => boxes.first().map(|b| b.lo.len()),
            Region::Cells { set } => Some(set.partition().dim()),
            Region::Complement { of } => of.dim(),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

fn merge(mut pieces: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
    for (a, b) in pieces {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Splits the chord at every grid plane it crosses and keeps the pieces
/// whose midpoint lies in an occupied cell.
fn cell_intervals(set: &GridSet, x: &[f64], d: &[f64], t_lo: f64, t_hi: f64) -> Vec<(f64, f64)> {
    let part = set.partition();
    let mut breaks = vec![t_lo, t_hi];
    for k in 0..x.len() {
        if d[k] == 0.0 {
            continue;
        }
        let o = part.origin()[k];
        let delta = part.delta();
        let a = (x[k] + t_lo * d[k] - o) / delta;
        let b = (x[k] + t_hi * d[k] - o) / delta;
        let (a, b) = (a.min(b), a.max(b));
        let first = a.ceil().max(0.0) as i64;
        let last = b.floor().min(part.extents()[k] as f64) as i64;
        for i in first..=last {
            let t = (o + i as f64 * delta - x[k]) / d[k];
            if t > t_lo && t < t_hi {
                breaks.push(t);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut mid = vec![0.0; x.len()];
    let pieces = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .filter(|w| {
            let t = 0.5 * (w[0] + w[1]);
            mid.iter_mut().zip(x.iter().zip(d)).for_each(|(m, (x, d))| *m = x + t * d);
            set.contains_point(&mid)
        })
        .map(|w| (w[0], w[1]))
        .collect();
    merge(pieces)
}
