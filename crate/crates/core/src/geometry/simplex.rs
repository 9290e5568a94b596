use nalgebra::DMatrix;

use super::polytope::HPolytope;
use super::Bounds;
use crate::error::{Error, Result};

/// A full-dimensional simplex, stored as its vertices and its facet
/// description.
#[derive(Debug, Clone)]
pub struct Simplex {
    pub(crate) poly: HPolytope,
    vertices: Vec<Vec<f64>>,
    volume: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl Simplex {
    /// `{x ≥ 0, Σ x ≤ 1}`.
    pub fn standard(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidBody("dimension must be at least 1".into()));
        }
        let mut vertices = vec![vec![0.0; dim]];
        for i in 0..dim {
            let mut v = vec![0.0; dim];
            v[i] = 1.0;
            vertices.push(v);
        }
        let mut a = Vec::with_capacity((dim + 1) * dim);
        let mut b = Vec::with_capacity(dim + 1);
        for i in 0..dim {
            let mut row = vec![0.0; dim];
            row[i] = -1.0;
            a.extend(row);
            b.push(0.0);
        }
        a.extend(std::iter::repeat_n(1.0, dim));
        b.push(1.0);
        Ok(Self {
            poly: HPolytope::new(dim, a, b)?,
            vertices,
            volume: 1.0 / factorial(dim),
        })
    }

    /// Simplex spanned by `dim + 1` affinely independent vertices.
    pub fn from_vertices(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vertices.len().saturating_sub(1);
        if dim == 0 {
            return Err(Error::InvalidBody("a simplex needs at least 2 vertices".into()));
        }
        if vertices.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidBody(format!(
                "{} vertices need dimension {dim}",
                dim + 1
            )));
        }
        let v0 = &vertices[0];
        let edges = DMatrix::from_fn(dim, dim, |r, c| vertices[c + 1][r] - v0[r]);
        let det = edges.determinant();
        let inv = edges
            .clone()
            .try_inverse()
            .filter(|_| det.abs() > 1e-14)
            .ok_or_else(|| Error::InvalidBody("simplex vertices are affinely dependent".into()))?;
        // Barycentric λ_{1..n} = inv (x − v0); λ_0 = 1 − Σ λ_i. Facets are λ_i ≥ 0.
        let mut a = Vec::with_capacity((dim + 1) * dim);
        let mut b = Vec::with_capacity(dim + 1);
        let mut sum_row = vec![0.0; dim];
        let mut sum_rhs = 1.0;
        for i in 0..dim {
            let row: Vec<f64> = (0..dim).map(|k| inv[(i, k)]).collect();
            let shift: f64 = row.iter().zip(v0).map(|(a, v)| a * v).sum();
            a.extend(row.iter().map(|v| -v));
            b.push(-shift);
            sum_row.iter_mut().zip(&row).for_each(|(s, r)| *s += r);
            sum_rhs += shift;
        }
        a.extend(sum_row);
        b.push(sum_rhs);
        Ok(Self {
            poly: HPolytope::new(dim, a, b)?,
            volume: det.abs() / factorial(dim),
            vertices,
        })
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn polytope(&self) -> &HPolytope {
        &self.poly
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn barycenter(&self) -> Vec<f64> {
        vertex_mean(&self.vertices)
    }

    pub fn bounding_box(&self) -> Bounds {
        vertex_bounds(&self.vertices)
    }
}

pub(crate) fn vertex_mean(vertices: &[Vec<f64>]) -> Vec<f64> {
    let dim = vertices[0].len();
    let mut c = vec![0.0; dim];
    for v in vertices {
        c.iter_mut().zip(v).for_each(|(c, v)| *c += v);
    }
    c.iter_mut().for_each(|c| *c /= vertices.len() as f64);
    c
}

pub(crate) fn vertex_bounds(vertices: &[Vec<f64>]) -> Bounds {
    let dim = vertices[0].len();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for v in vertices {
        for k in 0..dim {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    Bounds { lo, hi }
}

/// Outward facet normals of the regular simplex in `R^m` centred at the
/// origin: `m + 1` unit vectors summing to zero with pairwise inner product
/// `−1/m`. Built by expressing `e_i − 1/(m+1)` in the Helmert basis of the
/// hyperplane orthogonal to the all-ones vector of `R^{m+1}`.
pub fn regular_simplex_normals(m: usize) -> Vec<Vec<f64>> {
    assert!(m >= 1);
    (0..=m)
        .map(|i| {
            let mut u: Vec<f64> = (1..=m)
                .map(|k| {
                    let scale = ((k * (k + 1)) as f64).sqrt();
                    if i < k {
                        1.0 / scale
                    } else if i == k {
                        -(k as f64) / scale
                    } else {
                        0.0
                    }
                })
                .collect();
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            u.iter_mut().for_each(|v| *v /= norm);
            u
        })
        .collect()
}
