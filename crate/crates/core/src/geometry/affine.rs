use nalgebra::DMatrix;

use super::{Body, Bounds};
use crate::error::{Error, Result};

/// Image `{M x + v : x ∈ K}` of a body under an invertible affine map.
#[derive(Debug, Clone)]
pub struct AffineImage {
    pub(crate) inner: Box<Body>,
    map: Vec<f64>,
    inverse: Vec<f64>,
    shift: Vec<f64>,
    determinant: f64,
    condition: f64,
}

const MAX_CONDITION: f64 = 1e14;

impl AffineImage {
    /// `map` is row-major `n × n`.
    pub fn new(inner: Body, map: Vec<f64>, shift: Vec<f64>) -> Result<Self> {
        let n = inner.dim();
        if map.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "affine map needs {} entries, got {}",
                n * n,
                map.len()
            )));
        }
        Error::check_dim(n, shift.len())?;
        let m = DMatrix::from_row_slice(n, n, &map);
        let singular = m.clone().svd(false, false).singular_values;
        let smax = singular.max();
        let smin = singular.min();
        if !(smin > 0.0) || smax / smin > MAX_CONDITION {
            return Err(Error::SingularMatrix);
        }
        let inv = m.clone().try_inverse().ok_or(Error::SingularMatrix)?;
        let inverse = (0..n * n).map(|k| inv[(k / n, k % n)]).collect();
        Ok(Self {
            determinant: m.determinant(),
            condition: smax / smin,
            inner: Box::new(inner),
            map,
            inverse,
            shift,
        })
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn inner(&self) -> &Body {
        &self.inner
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    pub fn determinant(&self) -> f64 {
        self.determinant
    }

    /// `M x + v`.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                self.map[i * n..(i + 1) * n]
                    .iter()
                    .zip(x)
                    .map(|(a, x)| a * x)
                    .sum::<f64>()
                    + self.shift[i]
            })
            .collect()
    }

    /// `M⁻¹ (y − v)`.
    pub fn pull_back(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                self.inverse[i * n..(i + 1) * n]
                    .iter()
                    .zip(y.iter().zip(&self.shift))
                    .map(|(a, (y, v))| a * (y - v))
                    .sum()
            })
            .collect()
    }

    /// `M⁻¹ d` for a direction.
    pub fn pull_back_direction(&self, d: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                self.inverse[i * n..(i + 1) * n]
                    .iter()
                    .zip(d)
                    .map(|(a, d)| a * d)
                    .sum()
            })
            .collect()
    }

    pub(crate) fn inverse_column(&self, j: usize) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| self.inverse[i * n + j]).collect()
    }

    /// Interval-arithmetic image of the inner bounding box.
    pub fn bounding_box(&self) -> Result<Bounds> {
        let inner = self.inner.bounding_box()?;
        let n = self.dim();
        let mut lo = self.shift.clone();
        let mut hi = self.shift.clone();
        for i in 0..n {
            for k in 0..n {
                let a = self.map[i * n + k];
                let (p, q) = (a * inner.lo[k], a * inner.hi[k]);
                lo[i] += p.min(q);
                hi[i] += p.max(q);
            }
        }
        Ok(Bounds { lo, hi })
    }
}
