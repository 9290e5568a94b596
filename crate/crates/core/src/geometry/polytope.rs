use std::sync::OnceLock;

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use super::{Bounds, Chord};
use crate::error::{Error, Result};

/// Polytope `{x : A x ≤ b}` with unit-norm rows.
///
/// `A` is kept both row-major (membership, general chords) and column-major
/// (axis chords and residual updates touch one column per step).
#[derive(Debug, Clone)]
pub struct HPolytope {
    dim: usize,
    rows: Vec<f64>,
    cols: Vec<f64>,
    b: Vec<f64>,
    bounds: OnceLock<Result<Bounds>>,
    center: OnceLock<Result<(Vec<f64>, f64)>>,
}

impl HPolytope {
    /// Builds the polytope from a row-major `m × dim` matrix. Every row is
    /// rescaled to unit Euclidean norm together with its right-hand side.
    pub fn new(dim: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidBody("dimension must be at least 1".into()));
        }
        if a.len() != dim * b.len() {
            return Err(Error::InvalidBody(format!(
                "matrix has {} entries, expected {} rows × {} columns",
                a.len(),
                b.len(),
                dim
            )));
        }
        if b.is_empty() {
            return Err(Error::InvalidBody("polytope needs at least one row".into()));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidBody("non-finite polytope entry".into()));
        }
        let m = b.len();
        let mut rows = a;
        let mut b = b;
        for i in 0..m {
            let row = &mut rows[i * dim..(i + 1) * dim];
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::InvalidBody(format!("row {i} is zero")));
            }
            row.iter_mut().for_each(|v| *v /= norm);
            b[i] /= norm;
        }
        let mut cols = vec![0.0; m * dim];
        for i in 0..m {
            for j in 0..dim {
                cols[j * m + i] = rows[i * dim + j];
            }
        }
        Ok(Self {
            dim,
            rows,
            cols,
            b,
            bounds: OnceLock::new(),
            center: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let m = self.b.len();
        &self.cols[j * m..(j + 1) * m]
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    /// `r = b − A x`, evaluated with compensated products and sums so that
    /// each entry is (almost always) the correctly rounded residual.
    pub fn residuals(&self, x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.b.len()];
        self.residuals_into(x, &mut r);
        r
    }

    pub fn residuals_into(&self, x: &[f64], r: &mut [f64]) {
        for (i, ri) in r.iter_mut().enumerate() {
            *ri = self.residual_dd(i, x).0;
        }
    }

    fn residual_dd(&self, i: usize, x: &[f64]) -> (f64, f64) {
        let (mut s, mut c) = (self.b[i], 0.0);
        for (&a, &x) in self.row(i).iter().zip(x) {
            let (p, pe) = two_prod(a, x);
            let (t, te) = two_sum(s, -p);
            s = t;
            c += te - pe;
        }
        two_sum(s, c)
    }

    pub fn contains_tol(&self, x: &[f64], tol: f64) -> bool {
        (0..self.b.len()).all(|i| {
            let dot: f64 = self.row(i).iter().zip(x).map(|(a, x)| a * x).sum();
            dot <= self.b[i] + tol * self.b[i].abs().max(1.0)
        })
    }

    /// Axis chord from cached residuals: one pass over column `j`.
    pub fn axis_chord_from_residuals(&self, r: &[f64], j: usize) -> Result<Chord> {
        let mut t_lo = f64::NEG_INFINITY;
        let mut t_hi = f64::INFINITY;
        for (&c, &ri) in self.column(j).iter().zip(r) {
            if c > 0.0 {
                t_hi = t_hi.min(ri / c);
            } else if c < 0.0 {
                t_lo = t_lo.max(ri / c);
            }
        }
        finish_chord(t_lo, t_hi)
    }

    /// Chord along an arbitrary (not necessarily unit) direction.
    pub fn chord_raw(&self, x: &[f64], d: &[f64]) -> Result<Chord> {
        let mut t_lo = f64::NEG_INFINITY;
        let mut t_hi = f64::INFINITY;
        for i in 0..self.b.len() {
            let row = self.row(i);
            let ad: f64 = row.iter().zip(d).map(|(a, d)| a * d).sum();
            if ad == 0.0 {
                continue;
            }
            let ax: f64 = row.iter().zip(x).map(|(a, x)| a * x).sum();
            let bound = (self.b[i] - ax) / ad;
            if ad > 0.0 {
                t_hi = t_hi.min(bound);
            } else {
                t_lo = t_lo.max(bound);
            }
        }
        finish_chord(t_lo, t_hi)
    }

    /// Chebyshev center and inradius, from the LP `max r s.t. a_i·x + r ≤ b_i`.
    pub fn chebyshev_center(&self) -> Result<(Vec<f64>, f64)> {
        self.center
            .get_or_init(|| {
                let mut problem = Problem::new(OptimizationDirection::Maximize);
                let xs: Vec<_> = (0..self.dim)
                    .map(|_| problem.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
                    .collect();
                let radius = problem.add_var(1.0, (0.0, f64::INFINITY));
                for i in 0..self.b.len() {
                    let mut terms: Vec<_> = xs
                        .iter()
                        .zip(self.row(i))
                        .filter(|(_, &a)| a != 0.0)
                        .map(|(&v, &a)| (v, a))
                        .collect();
                    terms.push((radius, 1.0));
                    problem.add_constraint(terms.as_slice(), ComparisonOp::Le, self.b[i]);
                }
                let solution = problem.solve().map_err(|e| match e {
                    minilp::Error::Unbounded => Error::InvalidBody("polytope is unbounded".into()),
                    minilp::Error::Infeasible => Error::InvalidBody("polytope is empty".into()),
                })?;
                let r = solution[radius];
                if r <= 0.0 {
                    return Err(Error::InvalidBody("polytope has empty interior".into()));
                }
                let center: Vec<f64> = xs.iter().map(|&v| solution[v]).collect();
                let slack = self.residuals(&center).into_iter().fold(f64::INFINITY, f64::min);
                if slack < 0.5 * r {
                    return Err(Error::InvalidBody(format!(
                        "inradius program returned a point with slack {slack:e} for radius {r:e}"
                    )));
                }
                Ok((center, r))
            })
            .clone()
    }

    /// Tight bounding box from `2 · dim` linear programs.
    pub fn bounding_box(&self) -> Result<Bounds> {
        self.bounds
            .get_or_init(|| {
                let mut lo = vec![0.0; self.dim];
                let mut hi = vec![0.0; self.dim];
                for j in 0..self.dim {
                    for (direction, out) in [
                        (OptimizationDirection::Minimize, &mut lo),
                        (OptimizationDirection::Maximize, &mut hi),
                    ] {
                        let mut problem = Problem::new(direction);
                        let xs: Vec<_> = (0..self.dim)
                            .map(|k| {
                                problem.add_var(
                                    if k == j { 1.0 } else { 0.0 },
                                    (f64::NEG_INFINITY, f64::INFINITY),
                                )
                            })
                            .collect();
                        for i in 0..self.b.len() {
                            let terms: Vec<_> = xs
                                .iter()
                                .zip(self.row(i))
                                .filter(|(_, &a)| a != 0.0)
                                .map(|(&v, &a)| (v, a))
                                .collect();
                            problem.add_constraint(terms.as_slice(), ComparisonOp::Le, self.b[i]);
                        }
                        let solution = problem.solve().map_err(|e| match e {
                            minilp::Error::Unbounded => {
                                Error::InvalidBody("polytope is unbounded".into())
                            }
                            minilp::Error::Infeasible => {
                                Error::InvalidBody("polytope is empty".into())
                            }
                        })?;
                        out[j] = solution[xs[j]];
                    }
                }
                Ok(Bounds { lo, hi })
            })
            .clone()
    }
}

pub(crate) fn finish_chord(t_lo: f64, t_hi: f64) -> Result<Chord> {
    if !t_lo.is_finite() || !t_hi.is_finite() {
        return Err(Error::UnboundedChord);
    }
    // Round-off can push a point that sits on a facet a few ulps outside.
    Ok(Chord {
        t_lo: t_lo.min(0.0),
        t_hi: t_hi.max(0.0),
    })
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `(hi, lo) ← (hi, lo) − c · (d_hi + d_lo)` in double-double arithmetic.
fn sub_scaled(hi: &mut f64, lo: &mut f64, c: f64, d_hi: f64, d_lo: f64) {
    let (p, pe) = two_prod(c, d_hi);
    let (s, se) = two_sum(*hi, -p);
    let (h, l) = two_sum(s, se + *lo - (pe + c * d_lo));
    *hi = h;
    *lo = l;
}

/// Incrementally maintained `b − A x`.
///
/// Each residual is kept as an unevaluated sum `hi + lo` with about 106
/// bits of precision, and `hi` is always the rounded value of that sum.
/// Updates therefore reproduce [`HPolytope::residuals`] bit for bit except
/// when a residual lies within roughly `2^-100` of a rounding boundary, so a
/// chain driven by the cache visits the same points as one that recomputes.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualCache {
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl ResidualCache {
    pub fn new(poly: &HPolytope, x: &[f64]) -> Self {
        let (hi, lo) = (0..poly.num_rows()).map(|i| poly.residual_dd(i, x)).unzip();
        Self { hi, lo }
    }

    pub fn values(&self) -> &[f64] {
        &self.hi
    }

    /// Coordinate `j` moved from `from` to `to`: one pass over column `j`.
    pub fn shift_axis(&mut self, poly: &HPolytope, j: usize, from: f64, to: f64) {
        let (d_hi, d_lo) = two_sum(to, -from);
        if d_hi == 0.0 && d_lo == 0.0 {
            return;
        }
        for ((hi, lo), &c) in self.hi.iter_mut().zip(&mut self.lo).zip(poly.column(j)) {
            sub_scaled(hi, lo, c, d_hi, d_lo);
        }
    }

    /// The point moved from `from` to `to` along an arbitrary direction.
    pub fn shift(&mut self, poly: &HPolytope, from: &[f64], to: &[f64]) {
        for (j, (&f, &t)) in from.iter().zip(to).enumerate() {
            self.shift_axis(poly, j, f, t);
        }
    }
}
