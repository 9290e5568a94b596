//! One-step kernel analytics for CHAR and flow estimators for all walks.
//!
//! From `x`, CHAR moves into a region `S` with probability
//! `P_x(S) = (1/n) Σ_j len(ℓ_j ∩ S) / len(ℓ_j ∩ K)` where `ℓ_j` is the axis
//! line through `x`. [`transition_prob`] evaluates this exactly for every
//! [`Region`]. Flow estimators integrate one-step probabilities against
//! exact uniform draws; CHAR uses the exact inner probability, Hit-and-Run
//! the exact chord fraction along a sampled direction and the Ball walk a
//! one-step indicator.

mod region;

pub use region::{AxisBox, Region};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Body, CONTAIN_TOL};
use crate::rng::stream_rng;
use crate::samplers::{BallWalk, HitAndRun, PointSampler, UniformSampler, Walk, WalkKind, DEGENERATE_CHORD};

/// Monte Carlo work is split into blocks of this many draws, each with its
/// own random stream.
pub const BLOCK_SIZE: u64 = 4096;

/// Flow estimates need at least this many draws inside the set.
pub const MIN_HITS: u64 = 30;

/// Slack below `1/(2n)` inside which a transition probability counts as
/// reaching the threshold.
pub const THRESHOLD_TOL: f64 = 1e-12;

fn unit(n: usize, j: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[j] = 1.0;
    e
}

fn check_region(body: &Body, s: &Region) -> Result<()> {
    match s.dim() {
        Some(d) => Error::check_dim(body.dim(), d),
        None => Ok(()),
    }
}

/// Exact probability that one CHAR step from `x` lands in `s`. Axes whose
/// chord is degenerate are excluded, as the sampler redraws them.
pub fn transition_prob(body: &Body, x: &[f64], s: &Region) -> Result<f64> {
    Error::check_dim(body.dim(), x.len())?;
    check_region(body, s)?;
    if !body.contains_tol(x, CONTAIN_TOL) {
        return Err(Error::NotInBody);
    }
    transition_prob_unchecked(body, x, s)
}

fn transition_prob_unchecked(body: &Body, x: &[f64], s: &Region) -> Result<f64> {
    let n = x.len();
    let mut total = 0.0;
    let mut axes = 0;
    for j in 0..n {
        let chord = body.axis_chord_unchecked(x, j)?;
        let len = chord.len();
        if len < DEGENERATE_CHORD {
            continue;
        }
        total += (s.line_measure(x, &unit(n, j), chord) / len).clamp(0.0, 1.0);
        axes += 1;
    }
    if axes == 0 {
        return Err(Error::DegenerateGeometry(format!("every axis chord is degenerate at {x:?}")));
    }
    Ok(total / axes as f64)
}

/// Unbiased single-draw estimate of `P_x(target)` for `walk`.
pub fn one_step_estimate<R: Rng + ?Sized>(
    body: &Body,
    walk: &Walk,
    x: &[f64],
    target: &Region,
    rng: &mut R,
) -> Result<f64> {
    let moved = match walk.kind {
        WalkKind::Char => transition_prob_unchecked(body, x, target)?,
        WalkKind::HitAndRun => {
            let (d, chord) = HitAndRun::direction(body, x, rng)?;
            target.line_measure(x, &d, chord) / chord.len()
        }
        WalkKind::BallWalk { delta } => {
            let y = BallWalk::new(delta)?.propose(x, rng);
            let end = if body.contains_tol(&y, CONTAIN_TOL) { &y[..] } else { x };
            f64::from(u8::from(target.contains(end)))
        }
    };
    Ok(if walk.lazy {
        0.5 * moved + 0.5 * f64::from(u8::from(target.contains(x)))
    } else {
        moved
    })
}

/// Labels used by [`classify_prime_sets`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrimeLabel {
    /// In `S₁` and `P_x(S₂) < 1/(2n)`.
    S1Prime,
    /// In `S₂` and `P_x(S₁) < 1/(2n)`.
    S2Prime,
    Neither,
}

/// Splits points into `S₁′`, `S₂′` and the rest for `S₂ = K ∖ S₁`. The
/// threshold is strict; probabilities within [`THRESHOLD_TOL`] of `1/(2n)`
/// count as reaching it.
pub fn classify_prime_sets(body: &Body, s1: &Region, points: &[Vec<f64>]) -> Result<Vec<PrimeLabel>> {
    let threshold = 1.0 / (2.0 * body.dim() as f64) - THRESHOLD_TOL;
    let s2 = s1.clone().complement();
    points
        .iter()
        .map(|x| {
            Ok(if s1.contains(x) {
                if transition_prob(body, x, &s2)? < threshold {
                    PrimeLabel::S1Prime
                } else {
                    PrimeLabel::Neither
                }
            } else if transition_prob(body, x, s1)? < threshold {
                PrimeLabel::S2Prime
            } else {
                PrimeLabel::Neither
            })
        })
        .collect()
}

/// Ergodic flow and conductance of a set, with standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowEstimate {
    #[serde(rename = "p_S")]
    pub p_s: f64,
    #[serde(rename = "pi_S")]
    pub pi_s: f64,
    /// `p_S / min(pi_S, 1 − pi_S)`; 0 when either side is empty.
    pub phi: f64,
    pub se_p: f64,
    pub se_pi: f64,
    pub se_phi: f64,
    pub n_samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    sz: f64,
    sw: f64,
    szz: f64,
    sww: f64,
    szw: f64,
}

impl Moments {
    fn push(&mut self, z: f64, w: f64) {
        self.n += 1.0;
        self.sz += z;
        self.sw += w;
        self.szz += z * z;
        self.sww += w * w;
        self.szw += z * w;
    }

    fn merge(mut self, o: Moments) -> Moments {
        self.n += o.n;
        self.sz += o.sz;
        self.sw += o.sw;
        self.szz += o.szz;
        self.sww += o.sww;
        self.szw += o.szw;
        self
    }
}

/// Sums `(z, w)` pairs over `n_samples` exact uniform draws, block-parallel
/// with a deterministic reduction order.
fn integrate<F>(body: &Body, n_samples: u64, seed: u64, f: F) -> Result<Moments>
where
    F: Fn(&[f64], &mut crate::rng::StreamRng) -> Result<(f64, f64)> + Sync,
{
    let blocks = n_samples.div_ceil(BLOCK_SIZE);
    let partial = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b + 1);
            let mut sampler = UniformSampler::new(body)?;
            let count = BLOCK_SIZE.min(n_samples - b * BLOCK_SIZE);
            let mut m = Moments::default();
            for _ in 0..count {
                let x = sampler.sample(body, &mut rng)?;
                let (z, w) = f(&x, &mut rng)?;
                m.push(z, w);
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(partial.into_iter().fold(Moments::default(), Moments::merge))
}

fn check_samples(n_samples: u64) -> Result<()> {
    if n_samples < 1000 {
        return Err(Error::InvalidParameter(format!(
            "flow estimates need at least 1000 samples, got {n_samples}"
        )));
    }
    Ok(())
}

/// `p(S) = ∫_S P_x(K ∖ S) dQ(x)` with `Q` uniform on the body.
pub fn ergodic_flow(body: &Body, s: &Region, n_samples: u64, walk: &Walk, seed: u64) -> Result<FlowEstimate> {
    check_samples(n_samples)?;
    check_region(body, s)?;
    walk.kind.validate()?;
    let out = s.clone().complement();
    let m = integrate(body, n_samples, seed, |x, rng| {
        if s.contains(x) {
            Ok((one_step_estimate(body, walk, x, &out, rng)?, 1.0))
        } else {
            Ok((0.0, 0.0))
        }
    })?;
    let hits = m.sw.round() as u64;
    if hits < MIN_HITS && hits < n_samples {
        return Err(Error::InsufficientSamples(format!(
            "only {hits} of {n_samples} draws fell in the set (need {MIN_HITS})"
        )));
    }
    let n = m.n;
    let p = m.sz / n;
    let pi = m.sw / n;
    let var_z = (m.szz / n - p * p).max(0.0);
    let var_w = (m.sww / n - pi * pi).max(0.0);
    let cov = m.szw / n - p * pi;
    let (smaller, sign) = if pi <= 0.5 { (pi, 1.0) } else { (1.0 - pi, -1.0) };
    let (phi, se_phi) = if smaller > 0.0 {
        let phi = p / smaller;
        // Ratio estimator: Var(z − φ w̃) with w̃ the indicator of the smaller side.
        let var = (var_z - 2.0 * phi * sign * cov + phi * phi * var_w).max(0.0);
        (phi, (var / n).sqrt() / smaller)
    } else {
        (0.0, 0.0)
    };
    Ok(FlowEstimate {
        p_s: p,
        pi_s: pi,
        phi,
        se_p: (var_z / n).sqrt(),
        se_pi: (var_w / n).sqrt(),
        se_phi,
        n_samples,
        seed,
    })
}

/// Same estimate as [`ergodic_flow`]; `phi` is the conductance of `s`.
pub fn conductance(body: &Body, s: &Region, n_samples: u64, walk: &Walk, seed: u64) -> Result<FlowEstimate> {
    ergodic_flow(body, s, n_samples, walk, seed)
}

/// `∫_A P_x(B) dQ(x)` and its standard error.
pub fn cross_flow(
    body: &Body,
    a: &Region,
    b: &Region,
    n_samples: u64,
    walk: &Walk,
    seed: u64,
) -> Result<(f64, f64)> {
    check_samples(n_samples)?;
    check_region(body, a)?;
    check_region(body, b)?;
    let m = integrate(body, n_samples, seed, |x, rng| {
        if a.contains(x) {
            Ok((one_step_estimate(body, walk, x, b, rng)?, 0.0))
        } else {
            Ok((0.0, 0.0))
        }
    })?;
    let mean = m.sz / m.n;
    let var = (m.szz / m.n - mean * mean).max(0.0);
    Ok((mean, (var / m.n).sqrt()))
}

/// Smallest estimated conductance among `cuts` whose smaller side has
/// measure in `(s, 1/2]`, as `(index, estimate)`.
pub fn s_conductance_over_cuts(
    body: &Body,
    cuts: &[Region],
    s: f64,
    n_samples: u64,
    walk: &Walk,
    seed: u64,
) -> Result<Option<(usize, FlowEstimate)>> {
    if !(s > 0.0 && s <= 0.5) {
        return Err(Error::InvalidParameter(format!("s must lie in (0, 1/2], got {s}")));
    }
    let mut best: Option<(usize, FlowEstimate)> = None;
    for (i, cut) in cuts.iter().enumerate() {
        let est = ergodic_flow(body, cut, n_samples, walk, crate::rng::derive_seed(seed, i as u64))?;
        let smaller = est.pi_s.min(1.0 - est.pi_s);
        if smaller > s && best.as_ref().is_none_or(|(_, b)| est.phi < b.phi) {
            best = Some((i, est));
        }
    }
    Ok(best)
}

/// Inputs of the lazy-chain convergence bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub h_s: f64,
    pub s: f64,
    pub phi_s: f64,
    pub t: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ls93Bound {
    /// Raw value clamped to `[0, 1]`.
    pub value: f64,
    pub raw: f64,
}

/// `d_TV(Q_t, Q) ≤ H_s + (H_s / s)(1 − φ_s²/2)^t` for a lazy reversible
/// chain started from `Q_0`, where `H_s` bounds `|Q_0(A) − Q(A)|` over sets
/// with `Q(A) ≤ s`.
pub fn ls93_bound(inp: &BoundInputs) -> Result<Ls93Bound> {
    let BoundInputs { h_s, s, phi_s, t } = *inp;
    if !(0.0..=1.0).contains(&h_s) {
        return Err(Error::InvalidParameter(format!("H_s must lie in [0, 1], got {h_s}")));
    }
    if !(s > 0.0 && s <= 0.5) {
        return Err(Error::InvalidParameter(format!("s must lie in (0, 1/2], got {s}")));
    }
    if !(0.0..=1.0).contains(&phi_s) {
        return Err(Error::InvalidParameter(format!("phi_s must lie in [0, 1], got {phi_s}")));
    }
    let raw = h_s + (h_s / s) * (1.0 - phi_s * phi_s / 2.0).powf(t as f64);
    Ok(Ls93Bound {
        value: raw.clamp(0.0, 1.0),
        raw,
    })
}

/// Constant in front of [`mixing_time_budget`].
pub const MIXING_BUDGET_CONSTANT: f64 = 1.0;

/// Step budget `c · n⁹ R² · ln(n + 1)³` with `c = 1`: a non-normative
/// heuristic that exposes the polynomial rate, with the hidden logarithmic
/// factors fixed to a cubed natural log.
pub fn mixing_time_budget(n: usize, r: f64) -> Result<f64> {
    if n == 0 || !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("need n ≥ 1 and R > 0, got n={n}, R={r}")));
    }
    let nf = n as f64;
    Ok(MIXING_BUDGET_CONSTANT * nf.powi(9) * r * r * (nf + 1.0).ln().powi(3))
}

#[cfg(test)]
mod tests;
