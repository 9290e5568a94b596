use serde::Serialize;

use super::Body;
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::samplers::PointSampler;
use crate::stats::MeanAccumulator;

/// Moment estimates of the uniform distribution on a body.
#[derive(Debug, Clone, Serialize)]
pub struct BodyStats {
    pub centroid: Vec<f64>,
    /// `E‖x − z‖²` around the sample centroid `z`.
    pub r2: f64,
    pub r2_std_error: f64,
    /// Diagonal of the bounding box, an upper bound on the diameter.
    pub diameter_upper: f64,
    pub sample_count: usize,
}

impl BodyStats {
    pub fn r(&self) -> f64 {
        self.r2.sqrt()
    }
}

pub fn estimate_stats<S: PointSampler>(
    body: &Body,
    sampler: &mut S,
    sample_count: usize,
    seed: u64,
) -> Result<BodyStats> {
    if sample_count < 1000 {
        return Err(Error::InvalidParameter(format!(
            "estimate_stats needs at least 1000 samples, got {sample_count}"
        )));
    }
    let n = body.dim();
    let mut rng = stream_rng(seed, 0);
    let points = (0..sample_count)
        .map(|_| sampler.sample(body, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let mut centroid = vec![0.0; n];
    for p in &points {
        centroid.iter_mut().zip(p).for_each(|(c, x)| *c += x);
    }
    centroid.iter_mut().for_each(|c| *c /= sample_count as f64);
    let mut acc = MeanAccumulator::default();
    for p in &points {
        acc.push(p.iter().zip(&centroid).map(|(x, c)| (x - c).powi(2)).sum());
    }
    Ok(BodyStats {
        centroid,
        r2: acc.mean(),
        r2_std_error: acc.std_error(),
        diameter_upper: body.bounding_box()?.diagonal(),
        sample_count,
    })
}
