//! The slanted simplex prism used for the CHAR conductance lower bound.
//!
//! Coordinates are `(x₁, y)` with `y ∈ R^{n−1}`. For `x₁ ∈ [0, D]` the slice
//! at `x₁` is `C + x₁·e₁`, where `C` is the regular simplex in `R^{n−1}` with
//! inradius 1 and barycenter at the origin and `e₁` is the first axis of the
//! slice. Moving along the body therefore requires alternating moves in `x₁`
//! and `y₁`, and only axis-1 moves cross a cut `{x₁ = const}`.

use super::polytope::HPolytope;
use super::simplex::regular_simplex_normals;
use super::Bounds;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Prism {
    pub(crate) poly: HPolytope,
    length: f64,
    section_vertices: Vec<Vec<f64>>,
    section_volume: f64,
}

impl Prism {
    pub fn new(dim: usize, length: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "prism needs dimension ≥ 2, got {dim}"
            )));
        }
        if !(length.is_finite() && length >= 2.0 * dim as f64) {
            return Err(Error::InvalidParameter(format!(
                "prism length must satisfy D ≥ 2n = {}, got {length}",
                2 * dim
            )));
        }
        let m = dim - 1;
        let normals = regular_simplex_normals(m);
        let mut a = Vec::with_capacity((m + 3) * dim);
        let mut b = Vec::with_capacity(m + 3);
        // u·(y − x₁ e₁) ≤ 1
        for u in &normals {
            a.push(-u[0]);
            a.extend_from_slice(u);
            b.push(1.0);
        }
        let mut lower = vec![0.0; dim];
        lower[0] = -1.0;
        a.extend(lower);
        b.push(0.0);
        let mut upper = vec![0.0; dim];
        upper[0] = 1.0;
        a.extend(upper);
        b.push(length);
        let section_vertices: Vec<Vec<f64>> = normals
            .iter()
            .map(|u| u.iter().map(|v| -(m as f64) * v).collect())
            .collect();
        Ok(Self {
            poly: HPolytope::new(dim, a, b)?,
            length,
            section_volume: regular_simplex_volume(m),
            section_vertices,
        })
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn polytope(&self) -> &HPolytope {
        &self.poly
    }

    /// Vertices of the cross-section simplex `C` in `R^{n−1}`.
    pub fn section_vertices(&self) -> &[Vec<f64>] {
        &self.section_vertices
    }

    pub fn section_volume(&self) -> f64 {
        self.section_volume
    }

    pub fn volume(&self) -> f64 {
        self.length * self.section_volume
    }

    /// Barycenter of the middle slice.
    pub fn center(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim()];
        c[0] = self.length / 2.0;
        c[1] = self.length / 2.0;
        c
    }

    pub fn bounding_box(&self) -> Bounds {
        let n = self.dim();
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        hi[0] = self.length;
        for k in 0..n - 1 {
            let (mn, mx) = self
                .section_vertices
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                    (a.min(v[k]), b.max(v[k]))
                });
            lo[k + 1] = mn;
            hi[k + 1] = mx;
        }
        hi[1] += self.length;
        Bounds { lo, hi }
    }
}

/// Volume of the regular `m`-simplex with inradius 1:
/// `m^{m/2} (m+1)^{(m+1)/2} / m!`.
pub fn regular_simplex_volume(m: usize) -> f64 {
    let mf = m as f64;
    let fact: f64 = (1..=m).map(|k| k as f64).product();
    mf.powf(mf / 2.0) * (mf + 1.0).powf((mf + 1.0) / 2.0) / fact
}
