//! Per-step cost of the coordinate walk with and without the residual cache.

use std::time::Instant;

use coordwalk::geometry::{regular_simplex_normals, Body};
use coordwalk::rng::stream_rng;
use coordwalk::samplers::{ChainState, CoordinateHitAndRun, Stepper};
use coordwalk::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

/// Random bounded polytope `{A x ≤ b}` with unit-norm rows containing the
/// unit ball: the first `n + 1` rows are regular simplex normals, the rest
/// are uniform random directions, and every `b_i` lies in `[1, 2)`.
pub fn random_polytope(n: usize, m: usize, seed: u64) -> Result<Body> {
    if n == 0 || m < n + 1 {
        return Err(Error::InvalidParameter(format!(
            "a bounded polytope in R^{n} needs at least {} rows, got {m}",
            n + 1
        )));
    }
    let mut rng = stream_rng(seed, 0);
    let mut a: Vec<f64> = regular_simplex_normals(n).into_iter().flatten().collect();
    for _ in n + 1..m {
        let row: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        a.extend(row.into_iter().map(|v| v / norm));
    }
    let b = (0..m).map(|_| 1.0 + rng.random::<f64>()).collect();
    Body::polytope(n, a, b)
}

/// Timing of cached against recomputed residuals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub n: usize,
    pub m: usize,
    pub steps: u64,
    pub repeats: usize,
    /// Median over repeats.
    pub cached_ns_per_step: f64,
    pub naive_ns_per_step: f64,
    pub ratio: f64,
    /// Largest coordinate difference between the two chains over all steps.
    pub max_coord_diff: f64,
    /// Sum of the final coordinates, a fingerprint of the trajectory.
    pub checksum: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn timed_run(body: &Body, cached: bool, steps: u64, seed: u64) -> Result<(f64, Vec<f64>)> {
    let x0 = vec![0.0; body.dim()];
    let mut state = ChainState::new(body, x0, 0)?;
    if cached {
        state = state.with_residual_cache(body)?;
    }
    let mut rng = stream_rng(seed, 1);
    let walk = CoordinateHitAndRun::uniform();
    let start = Instant::now();
    walk.run(body, &mut state, steps, &mut rng)?;
    let ns = start.elapsed().as_nanos() as f64 / steps as f64;
    Ok((ns, state.x().to_vec()))
}

/// Times `steps` coordinate-walk steps from the origin on a random
/// `n × m` polytope, `repeats` times per variant, and replays both variants
/// in lockstep under one seed to compare the visited points.
pub fn bench_per_step(n: usize, m: usize, steps: u64, repeats: usize, seed: u64) -> Result<BenchRecord> {
    if steps == 0 || repeats == 0 {
        return Err(Error::InvalidParameter("steps and repeats must be positive".into()));
    }
    let body = random_polytope(n, m, seed)?;
    let mut cached_ns = Vec::with_capacity(repeats);
    let mut naive_ns = Vec::with_capacity(repeats);
    let mut checksum = 0.0;
    for _ in 0..repeats {
        let (c, x) = timed_run(&body, true, steps, seed)?;
        let (v, _) = timed_run(&body, false, steps, seed)?;
        cached_ns.push(c);
        naive_ns.push(v);
        checksum = x.iter().sum();
    }
    let walk = CoordinateHitAndRun::uniform();
    let mut a = ChainState::new(&body, vec![0.0; n], 0)?.with_residual_cache(&body)?;
    let mut b = ChainState::new(&body, vec![0.0; n], 0)?;
    let (mut ra, mut rb) = (stream_rng(seed, 1), stream_rng(seed, 1));
    let mut max_coord_diff = 0.0_f64;
    for _ in 0..steps {
        walk.step(&body, &mut a, &mut ra)?;
        walk.step(&body, &mut b, &mut rb)?;
        for (p, q) in a.x().iter().zip(b.x()) {
            max_coord_diff = max_coord_diff.max((p - q).abs());
        }
    }
    let cached_ns_per_step = median(cached_ns);
    let naive_ns_per_step = median(naive_ns);
    Ok(BenchRecord {
        n,
        m,
        steps,
        repeats,
        cached_ns_per_step,
        naive_ns_per_step,
        ratio: naive_ns_per_step / cached_ns_per_step,
        max_coord_diff,
        checksum,
    })
}
