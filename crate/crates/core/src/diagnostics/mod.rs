//! Mixing and convergence measurements.
//!
//! * [`tv_to_uniform`] and [`mixing_curve`] bin chain states on a fixed
//!   axis-aligned grid and compare against uniform bin masses.
//! * [`coupon_collector_check`] simulates the axis-coverage time that makes
//!   the coordinate walk exact on a box.
//! * [`build_discrete_chain`] and [`spectral_gap`] analyse a grid surrogate
//!   of the coordinate walk exactly.
//! * [`lower_bound_experiment`] sweeps prism lengths and fits conductance
//!   slopes.
//! * [`ess`] is the initial-positive-sequence effective sample size.

mod discrete;
mod tv;

pub use discrete::{
    build_discrete_chain, cheeger_check, spectral_gap, AxisCut, ChainCheck, CheegerCheck, CutConductance,
    DiscreteChain, GAP_MAX_ITERS, GAP_TOL, MAX_CHAIN_CELLS,
};
pub use tv::{
    estimate_masses, mixing_curve, monotone_smooth, reference_masses, run_with_coverage, tv_from_counts,
    tv_to_uniform, Binning, MixCurve, StartSpec, MIN_BIN_COUNT, MIN_REPLICAS, REFERENCE_POINTS, REFERENCE_SEED,
};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::geometry::{make_lower_bound_body, Body};
use crate::kernel::{conductance, Region};
use crate::rng::{derive_seed, stream_rng};
use crate::samplers::{ChainState, PointSampler, Trajectory, UniformSampler, Walk};
use crate::stats::{coupon_collector_mean, ks_two_sample, least_squares, MeanAccumulator};

/// Coverage-time estimate with a 99% normal confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouponReport {
    pub n: usize,
    pub trials: u64,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// `n · H_n`.
    pub expected: f64,
}

/// Draws uniform axes until all `n` have appeared, `trials` times.
pub fn coupon_collector_check(n: usize, trials: u64, seed: u64) -> Result<CouponReport> {
    if n == 0 || trials < 1000 {
        return Err(Error::InvalidParameter(format!(
            "need n ≥ 1 and at least 1000 trials, got n={n}, trials={trials}"
        )));
    }
    let mut rng = stream_rng(seed, 0);
    let mut acc = MeanAccumulator::default();
    let mut seen = vec![false; n];
    for _ in 0..trials {
        seen.iter_mut().for_each(|s| *s = false);
        let (mut left, mut steps) = (n, 0u64);
        while left > 0 {
            steps += 1;
            let j = rng.random_range(0..n);
            if !seen[j] {
                seen[j] = true;
                left -= 1;
            }
        }
        acc.push(steps as f64);
    }
    let z = Normal::standard().inverse_cdf(0.995);
    let half = z * acc.std_error();
    Ok(CouponReport {
        n,
        trials,
        mean: acc.mean(),
        ci_lo: acc.mean() - half,
        ci_hi: acc.mean() + half,
        expected: coupon_collector_mean(n),
    })
}

/// Exactness of the coordinate walk on `[0,1]^n`: states after `steps`
/// steps from a fixed corner-side point, split by whether every axis was
/// resampled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubeExactness {
    pub n: usize,
    pub chains: u64,
    pub steps: u64,
    pub covered: u64,
    /// Two-sample KS p-value per coordinate of the covered states against
    /// fresh uniforms.
    pub ks_p: Vec<f64>,
    /// Octant TV of all states.
    pub tv_octants: f64,
}

pub fn cube_exactness(n: usize, chains: u64, steps: u64, seed: u64) -> Result<CubeExactness> {
    let cube = Body::unit_cube(n)?;
    let x0 = vec![0.1; n];
    let runs = (0..chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c + 1);
            let mut st = ChainState::new(&cube, x0.clone(), c)?;
            let touched = run_with_coverage(&cube, &Walk::CHAR, &mut st, steps, &mut rng)?;
            Ok((st.x().to_vec(), touched.iter().all(|&t| t)))
        })
        .collect::<Result<Vec<_>>>()?;
    let covered: Vec<&Vec<f64>> = runs.iter().filter(|r| r.1).map(|r| &r.0).collect();
    if covered.is_empty() {
        return Err(Error::InsufficientSamples("no chain touched every axis".into()));
    }
    let mut rng = stream_rng(seed, 0);
    let ks_p = (0..n)
        .map(|k| {
            let got: Vec<f64> = covered.iter().map(|x| x[k]).collect();
            let fresh: Vec<f64> = (0..got.len()).map(|_| rng.random()).collect();
            ks_two_sample(&got, &fresh).p_value
        })
        .collect();
    let covered_count = covered.len() as u64;
    let all: Vec<Vec<f64>> = runs.into_iter().map(|r| r.0).collect();
    let tv_octants = tv_to_uniform(&all, &cube, &Binning::over_body(&cube, 2)?)?;
    Ok(CubeExactness {
        n,
        chains,
        steps,
        covered: covered_count,
        ks_p,
        tv_octants,
    })
}

/// Floor reported by [`ess`] for a series without variation.
pub const ESS_FLOOR: f64 = 1.0;

/// Effective sample size and integrated autocorrelation time of a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EssEstimate {
    pub ess: f64,
    pub tau: f64,
    pub len: usize,
}

/// Geyer's initial monotone positive sequence estimator.
pub fn ess_series(x: &[f64]) -> Result<EssEstimate> {
    let len = x.len();
    if len < 4 {
        return Err(Error::InsufficientSamples(format!("ESS needs at least 4 values, got {len}")));
    }
    let n = len as f64;
    let mean = x.iter().sum::<f64>() / n;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let autocov = |lag: usize| c[..len - lag].iter().zip(&c[lag..]).map(|(a, b)| a * b).sum::<f64>() / n;
    let g0 = autocov(0);
    if !(g0 > f64::EPSILON * mean.abs().max(1.0).powi(2)) {
        return Ok(EssEstimate {
            ess: ESS_FLOOR,
            tau: n / ESS_FLOOR,
            len,
        });
    }
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut k = 0;
    while 2 * k + 1 < len {
        let pair = autocov(2 * k) + autocov(2 * k + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        sum += pair;
        prev = pair;
        k += 1;
    }
    let tau = ((2.0 * sum - g0) / g0).max(1.0 / n);
    Ok(EssEstimate {
        ess: (n / tau).max(ESS_FLOOR),
        tau,
        len,
    })
}

/// ESS of one coordinate of a trajectory.
pub fn ess(traj: &Trajectory, coordinate: usize) -> Result<f64> {
    if coordinate >= traj.dims {
        return Err(Error::InvalidParameter(format!(
            "coordinate {coordinate} out of range for dimension {}",
            traj.dims
        )));
    }
    Ok(ess_series(&traj.coordinate(coordinate))?.ess)
}

/// One `(n, D, walk)` conductance measurement of the cut `{x₀ ≤ D/2}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundRow {
    pub n: usize,
    pub length: f64,
    pub walk: &'static str,
    pub phi: f64,
    pub se: f64,
    pub pi_s: f64,
    pub seed: u64,
}

/// Least-squares slope of `ln φ` against `ln D` at fixed `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub n: usize,
    pub walk: &'static str,
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundTable {
    pub rows: Vec<LowerBoundRow>,
    pub fits: Vec<SlopeFit>,
}

/// Conductance of the half-length cut of the prism for the coordinate walk
/// and Hit-and-Run over a grid of dimensions and lengths.
pub fn lower_bound_experiment(ns: &[usize], lengths: &[f64], n_samples: u64, seed: u64) -> Result<LowerBoundTable> {
    if ns.is_empty() || lengths.is_empty() {
        return Err(Error::InvalidParameter("need at least one dimension and one length".into()));
    }
    for &n in ns {
        if !(2..=8).contains(&n) {
            return Err(Error::InvalidParameter(format!("dimension must lie in [2, 8], got {n}")));
        }
        if let Some(d) = lengths.iter().find(|&&d| !(d >= 2.0 * n as f64)) {
            return Err(Error::InvalidParameter(format!("length {d} is below 2n = {}", 2 * n)));
        }
    }
    let walks = [("char", Walk::CHAR), ("har", Walk::HAR)];
    let mut rows = Vec::new();
    let mut salt = 0u64;
    for &n in ns {
        for &d in lengths {
            let body = make_lower_bound_body(n, d)?;
            let cut = Region::axis_cut(n, 0, d / 2.0);
            for (name, walk) in &walks {
                let s = derive_seed(seed, salt);
                salt += 1;
                let est = conductance(&body, &cut, n_samples, walk, s)?;
                rows.push(LowerBoundRow {
                    n,
                    length: d,
                    walk: name,
                    phi: est.phi,
                    se: est.se_phi,
                    pi_s: est.pi_s,
                    seed: s,
                });
            }
        }
    }
    let mut fits = Vec::new();
    if lengths.len() >= 2 {
        for &n in ns {
            for (name, _) in &walks {
                let pts: Vec<(f64, f64)> = rows
                    .iter()
                    .filter(|r| r.n == n && r.walk == *name && r.phi > 0.0)
                    .map(|r| (r.length.ln(), r.phi.ln()))
                    .collect();
                if pts.len() < 2 {
                    continue;
                }
                let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
                let fit = least_squares(&xs, &ys);
                fits.push(SlopeFit {
                    n,
                    walk: name,
                    slope: fit.slope,
                    intercept: fit.intercept,
                    residuals: fit.residuals,
                });
            }
        }
    }
    Ok(LowerBoundTable { rows, fits })
}

/// Exact uniform draws packaged as a trajectory, the reference series for
/// [`ess`].
pub fn iid_trajectory(body: &Body, len: usize, seed: u64) -> Result<Trajectory> {
    let mut rng = stream_rng(seed, 0);
    let mut sampler = UniformSampler::new(body)?;
    let mut t = Trajectory::new(body.dim(), seed);
    for i in 0..len {
        t.push(i as u64, &sampler.sample(body, &mut rng)?);
    }
    Ok(t)
}

#[cfg(test)]
mod tests;
