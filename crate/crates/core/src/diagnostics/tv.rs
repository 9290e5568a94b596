//! Total variation to the uniform law on axis-aligned binnings.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Body, Bounds};
use crate::rng::stream_rng;
use crate::samplers::{warm_start, ChainState, PointSampler, Stepper, UniformSampler, Walk, WarmStart};

/// Uniform draws behind Monte Carlo reference masses.
pub const REFERENCE_POINTS: u64 = 10_000_000;
/// Seed of the reference-mass stream; fixed so cached masses are reproducible.
pub const REFERENCE_SEED: u64 = 0x005E_ED0F_B145;
/// Smallest expected count per occupied bin.
pub const MIN_BIN_COUNT: f64 = 20.0;

/// Regular axis-aligned grid of bins over a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub bins_per_axis: Vec<usize>,
}

impl Binning {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, bins_per_axis: Vec<usize>) -> Result<Self> {
        Error::check_dim(lo.len(), hi.len())?;
        Error::check_dim(lo.len(), bins_per_axis.len())?;
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h)) || bins_per_axis.contains(&0) {
            return Err(Error::InvalidParameter("binning needs lo < hi and at least one bin per axis".into()));
        }
        Ok(Self { lo, hi, bins_per_axis })
    }

    /// `bins` bins per axis over the body's bounding box.
    pub fn over_body(body: &Body, bins: usize) -> Result<Self> {
        let Bounds { lo, hi } = body.bounding_box()?;
        Self::new(lo, hi, vec![bins; body.dim()])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn num_bins(&self) -> usize {
        self.bins_per_axis.iter().product()
    }

    /// Row-major bin of `x`, clamping points on the outer faces inward.
    pub fn bin_of(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        for (k, &m) in self.bins_per_axis.iter().enumerate() {
            let f = (x[k] - self.lo[k]) / (self.hi[k] - self.lo[k]) * m as f64;
            let c = (f.floor().max(0.0) as usize).min(m - 1);
            idx = idx * m + c;
        }
        idx
    }

    /// Volume of each bin intersected with the box `b`.
    fn box_overlap(&self, b: &Bounds) -> Vec<f64> {
        let widths: Vec<Vec<f64>> = (0..self.dim())
            .map(|k| {
                let m = self.bins_per_axis[k];
                let w = (self.hi[k] - self.lo[k]) / m as f64;
                (0..m)
                    .map(|i| {
                        let a = self.lo[k] + i as f64 * w;
                        (b.hi[k].min(a + w) - b.lo[k].max(a)).max(0.0)
                    })
                    .collect()
            })
            .collect();
        (0..self.num_bins())
            .map(|mut idx| {
                let mut v = 1.0;
                for k in (0..self.dim()).rev() {
                    let m = self.bins_per_axis[k];
                    v *= widths[k][idx % m];
                    idx /= m;
                }
                v
            })
            .collect()
    }
}

type MassCache = Mutex<HashMap<String, Arc<Vec<f64>>>>;

fn mass_cache() -> &'static MassCache {
    static CACHE: OnceLock<MassCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Uniform probability of every bin. Exact for boxes; otherwise estimated
/// from [`REFERENCE_POINTS`] uniform draws and cached per body and binning.
pub fn reference_masses(body: &Body, binning: &Binning) -> Result<Arc<Vec<f64>>> {
    Error::check_dim(body.dim(), binning.dim())?;
    if let Body::Box(b) = body {
        let bounds = Bounds {
            lo: b.lo().to_vec(),
            hi: b.hi().to_vec(),
        };
        let overlap = binning.box_overlap(&bounds);
        let total: f64 = overlap.iter().sum();
        return Ok(Arc::new(overlap.into_iter().map(|v| v / total).collect()));
    }
    let key = format!("{body:?}|{binning:?}");
    if let Some(m) = mass_cache().lock().expect("cache lock").get(&key) {
        return Ok(Arc::clone(m));
    }
    let masses = Arc::new(estimate_masses(body, binning, REFERENCE_POINTS, REFERENCE_SEED)?);
    mass_cache()
        .lock()
        .expect("cache lock")
        .insert(key, Arc::clone(&masses));
    Ok(masses)
}

/// Monte Carlo bin masses from `points` exact uniform draws.
pub fn estimate_masses(body: &Body, binning: &Binning, points: u64, seed: u64) -> Result<Vec<f64>> {
    const BLOCK: u64 = 1 << 16;
    let bins = binning.num_bins();
    let blocks = points.div_ceil(BLOCK);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b);
            let mut sampler = UniformSampler::new(body)?;
            let mut c = vec![0u64; bins];
            for _ in 0..BLOCK.min(points - b * BLOCK) {
                c[binning.bin_of(&sampler.sample(body, &mut rng)?)] += 1;
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(vec![0u64; bins], |mut acc, c| {
            acc.iter_mut().zip(c).for_each(|(a, v)| *a += v);
            acc
        });
    Ok(counts.into_iter().map(|c| c as f64 / points as f64).collect())
}

fn check_counts(total: u64, masses: &[f64]) -> Result<()> {
    for (bin, &u) in masses.iter().enumerate() {
        let expected = u * total as f64;
        if u > 0.0 && expected < MIN_BIN_COUNT {
            return Err(Error::BinUnderflow {
                bin,
                expected,
                minimum: MIN_BIN_COUNT,
            });
        }
    }
    Ok(())
}

/// `½ Σ |p̂ − u|` for bin counts against bin masses.
pub fn tv_from_counts(counts: &[u64], masses: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let n = total as f64;
    0.5 * counts
        .iter()
        .zip(masses)
        .map(|(&c, &u)| (c as f64 / n - u).abs())
        .sum::<f64>()
}

/// Delta-method standard error of [`tv_from_counts`] under multinomial
/// sampling of the counts.
fn tv_std_error(counts: &[u64], masses: &[f64]) -> f64 {
    let n = counts.iter().sum::<u64>() as f64;
    let (mut first, mut second) = (0.0, 0.0);
    for (&c, &u) in counts.iter().zip(masses) {
        let p = c as f64 / n;
        let s = (p - u).signum() * f64::from(p != u);
        first += s * p;
        second += s * s * p;
    }
    0.5 * ((second - first * first).max(0.0) / n).sqrt()
}

/// Total variation between the empirical law of `samples` and the uniform
/// law on `body`, both coarsened to `binning`.
pub fn tv_to_uniform(samples: &[Vec<f64>], body: &Body, binning: &Binning) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no samples".into()));
    }
    if let Some(bad) = samples.iter().find(|s| s.len() != binning.dim()) {
        return Err(Error::DimensionMismatch {
            expected: binning.dim(),
            got: bad.len(),
        });
    }
    let masses = reference_masses(body, binning)?;
    check_counts(samples.len() as u64, &masses)?;
    let mut counts = vec![0u64; binning.num_bins()];
    for s in samples {
        counts[binning.bin_of(s)] += 1;
    }
    Ok(tv_from_counts(&counts, &masses))
}

/// Initial law of the replicas of a mixing curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "start", rename_all = "snake_case")]
pub enum StartSpec {
    /// Every replica starts at the same point.
    Point { x: Vec<f64> },
    /// Every replica starts at the body's interior reference point.
    Center,
    /// Independent warm starts.
    Warm { mode: WarmStart },
}

/// TV-to-uniform of a walk at a sequence of checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixCurve {
    pub walk: Walk,
    pub body: String,
    pub t: Vec<u64>,
    pub tv: Vec<f64>,
    /// Non-increasing isotonic fit of `tv`.
    pub tv_smoothed: Vec<f64>,
    pub stderr: Vec<f64>,
    pub replicas: u64,
    pub seed: u64,
    pub binning: Binning,
}

impl MixCurve {
    /// First checkpoint whose smoothed TV is at most `threshold`.
    pub fn mixing_time(&self, threshold: f64) -> Option<u64> {
        self.t
            .iter()
            .zip(&self.tv_smoothed)
            .find(|(_, &v)| v <= threshold)
            .map(|(&t, _)| t)
    }
}

/// Least-squares non-increasing fit (pool adjacent violators).
pub fn monotone_smooth(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if a >= b {
                break;
            }
            blocks.pop();
            let last = blocks.last_mut().expect("two blocks");
            *last = ((a * na as f64 + b * nb as f64) / (na + nb) as f64, na + nb);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(v, n)| std::iter::repeat_n(v, n))
        .collect()
}

/// Smallest replica count accepted by [`mixing_curve`].
pub const MIN_REPLICAS: u64 = 1000;

/// Runs `replicas` independent chains from `start` and records the binned
/// TV to uniform at each checkpoint of `ts` (strictly increasing; 0 allowed).
pub fn mixing_curve(
    body: &Body,
    walk: &Walk,
    ts: &[u64],
    replicas: u64,
    start: &StartSpec,
    binning: &Binning,
    seed: u64,
) -> Result<MixCurve> {
    if replicas < MIN_REPLICAS {
        return Err(Error::InvalidParameter(format!(
            "mixing curves need at least {MIN_REPLICAS} replicas, got {replicas}"
        )));
    }
    if ts.is_empty() || ts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("checkpoints must be nonempty and strictly increasing".into()));
    }
    walk.kind.validate()?;
    let masses = reference_masses(body, binning)?;
    check_counts(replicas, &masses)?;
    let fixed = match start {
        StartSpec::Point { x } => Some(x.clone()),
        StartSpec::Center => Some(body.interior_point()?),
        StartSpec::Warm { .. } => None,
    };
    let bins = binning.num_bins();
    let per_replica = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r);
            let x0 = match (&fixed, start) {
                (Some(x), _) => x.clone(),
                (None, StartSpec::Warm { mode }) => warm_start(body, *mode, &mut rng)?,
                _ => unreachable!(),
            };
            let mut state = ChainState::new(body, x0, r)?;
            let mut out = Vec::with_capacity(ts.len());
            let mut done = 0;
            for &t in ts {
                walk.run(body, &mut state, t - done, &mut rng)?;
                done = t;
                out.push(binning.bin_of(state.x()) as u32);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut tv = Vec::with_capacity(ts.len());
    let mut stderr = Vec::with_capacity(ts.len());
    for i in 0..ts.len() {
        let mut counts = vec![0u64; bins];
        for row in &per_replica {
            counts[row[i] as usize] += 1;
        }
        tv.push(tv_from_counts(&counts, &masses));
        stderr.push(tv_std_error(&counts, &masses));
    }
    Ok(MixCurve {
        walk: *walk,
        body: format!("{}-{}", body.kind_name(), body.dim()),
        t: ts.to_vec(),
        tv_smoothed: monotone_smooth(&tv),
        tv,
        stderr,
        replicas,
        seed,
        binning: binning.clone(),
    })
}

/// Runs `steps` steps and reports which coordinates changed at least once.
/// A resampled coordinate keeps its old value with probability zero, so this
/// identifies the coordinates a coordinate walk has touched.
pub fn run_with_coverage<S: Stepper, R: Rng + ?Sized>(
    body: &Body,
    walk: &S,
    state: &mut ChainState,
    steps: u64,
    rng: &mut R,
) -> Result<Vec<bool>> {
    let mut touched = vec![false; body.dim()];
    let mut prev = state.x().to_vec();
    for _ in 0..steps {
        walk.step(body, state, rng)?;
        for (k, (a, b)) in prev.iter_mut().zip(state.x()).enumerate() {
            if *a != *b {
                touched[k] = true;
                *a = *b;
            }
        }
    }
    Ok(touched)
}
