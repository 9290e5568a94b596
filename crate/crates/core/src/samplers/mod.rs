//! Random-walk steppers on convex bodies.
//!
//! [`CoordinateHitAndRun`] picks a uniformly random axis and resamples that
//! coordinate from the target restricted to the axis chord. [`HitAndRun`]
//! does the same along a uniformly random direction and [`BallWalk`] is the
//! Metropolis ball walk. [`Lazy`] holds with probability 1/2 before
//! delegating. Every step, including holds and rejected proposals, advances
//! the step counter.
//!
//! Mixing diagnostics in this crate call a chain mixed once its total
//! variation distance to the target is at most 1/4.

mod line;
mod trajectory;
mod warm;

pub use line::{line_resample, truncated_normal_quantile, truncated_standard_normal, LineDensity};
pub use trajectory::{record_trajectory, Trajectory};
pub use warm::{
    estimate_acceptance, warm_start, ChainSampler, PointSampler, RejectionSampler, UniformSampler,
    WarmStart,
    REJECTION_MAX_TRIALS, REJECTION_MIN_ACCEPTANCE,
};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Body, Chord, ResidualCache, CONTAIN_TOL};

/// Chords shorter than this are treated as degenerate.
pub const DEGENERATE_CHORD: f64 = 1e-14;

/// State of one chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    x: Vec<f64>,
    steps: u64,
    stream: u64,
    residuals: Option<ResidualCache>,
}

impl ChainState {
    pub fn new(body: &Body, x: Vec<f64>, stream: u64) -> Result<Self> {
        if !body.contains(&x)? {
            return Err(Error::NotInBody);
        }
        Ok(Self {
            x,
            steps: 0,
            stream,
            residuals: None,
        })
    }

    /// Enables the `b − A x` cache; only bodies with a facet description
    /// support it.
    pub fn with_residual_cache(mut self, body: &Body) -> Result<Self> {
        let poly = body.as_polytope().ok_or_else(|| {
            Error::Unsupported(format!("{} bodies have no residual cache", body.kind_name()))
        })?;
        self.residuals = Some(ResidualCache::new(poly, &self.x));
        Ok(self)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn residuals(&self) -> Option<&[f64]> {
        self.residuals.as_ref().map(ResidualCache::values)
    }

    fn hold(&mut self) {
        self.steps += 1;
    }
}

/// Target density of a walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Target {
    Uniform,
    /// Isotropic Gaussian `N(mean, sigma² I)` restricted to the body.
    Gaussian { mean: Vec<f64>, sigma: f64 },
}

impl Target {
    /// Restriction to the line `x + t e_j`.
    pub fn axis_density(&self, x: &[f64], j: usize) -> LineDensity {
        match self {
            Target::Uniform => LineDensity::Uniform,
            Target::Gaussian { mean, sigma } => LineDensity::Gaussian {
                mean: mean[j] - x[j],
                sigma: *sigma,
            },
        }
    }
}

/// A Markov kernel on a body.
pub trait Stepper: Sync {
    fn step<R: Rng + ?Sized>(&self, body: &Body, state: &mut ChainState, rng: &mut R) -> Result<()>;

    fn run<R: Rng + ?Sized>(
        &self,
        body: &Body,
        state: &mut ChainState,
        steps: u64,
        rng: &mut R,
    ) -> Result<()> {
        for _ in 0..steps {
            self.step(body, state, rng)?;
        }
        Ok(())
    }
}

/// Coordinate Hit-and-Run (random-scan Gibbs sampler).
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateHitAndRun {
    pub target: Target,
}

impl CoordinateHitAndRun {
    pub fn uniform() -> Self {
        Self {
            target: Target::Uniform,
        }
    }

    pub fn gaussian(mean: Vec<f64>, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter("Gaussian target needs sigma > 0".into()));
        }
        Ok(Self {
            target: Target::Gaussian { mean, sigma },
        })
    }
}

impl Default for CoordinateHitAndRun {
    fn default() -> Self {
        Self::uniform()
    }
}

impl Stepper for CoordinateHitAndRun {
    fn step<R: Rng + ?Sized>(&self, body: &Body, state: &mut ChainState, rng: &mut R) -> Result<()> {
        let n = state.x.len();
        let attempts = (n * n).max(1);
        for _ in 0..attempts {
            let j = rng.random_range(0..n);
            let chord = match (&state.residuals, body.as_polytope()) {
                (Some(r), Some(poly)) => poly.axis_chord_from_residuals(r.values(), j)?,
                _ => body.axis_chord_unchecked(&state.x, j)?,
            };
            if chord.len() < DEGENERATE_CHORD {
                continue;
            }
            let t = line_resample(&chord, &self.target.axis_density(&state.x, j), rng);
            let from = state.x[j];
            state.x[j] += t;
            if let (Some(r), Some(poly)) = (state.residuals.as_mut(), body.as_polytope()) {
                r.shift_axis(poly, j, from, state.x[j]);
            }
            state.steps += 1;
            return Ok(());
        }
        Err(Error::DegenerateGeometry(format!(
            "no axis with a chord longer than {DEGENERATE_CHORD} after {attempts} draws at {:?}",
            state.x
        )))
    }
}

fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let d: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return d.into_iter().map(|v| v / norm).collect();
        }
    }
}

fn move_along(body: &Body, state: &mut ChainState, d: &[f64], t: f64) {
    let from = state.residuals.as_ref().map(|_| state.x.clone());
    state.x.iter_mut().zip(d).for_each(|(x, d)| *x += t * d);
    if let (Some(r), Some(poly), Some(from)) = (state.residuals.as_mut(), body.as_polytope(), from) {
        r.shift(poly, &from, &state.x);
    }
}

/// Hit-and-Run with a uniformly random direction and uniform target.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HitAndRun;

impl HitAndRun {
    /// Draws the direction and its chord; shared with the kernel estimators.
    pub fn direction<R: Rng + ?Sized>(
        body: &Body,
        x: &[f64],
        rng: &mut R,
    ) -> Result<(Vec<f64>, Chord)> {
        let n = x.len();
        for _ in 0..(n * n).max(1) {
            let d = random_unit_vector(n, rng);
            let chord = body.chord_unchecked(x, &d)?;
            if chord.len() >= DEGENERATE_CHORD {
                return Ok((d, chord));
            }
        }
        Err(Error::DegenerateGeometry(format!(
            "no direction with a chord longer than {DEGENERATE_CHORD} at {x:?}"
        )))
    }
}

impl Stepper for HitAndRun {
    fn step<R: Rng + ?Sized>(&self, body: &Body, state: &mut ChainState, rng: &mut R) -> Result<()> {
        let (d, chord) = Self::direction(body, &state.x, rng)?;
        let t = line_resample(&chord, &LineDensity::Uniform, rng);
        move_along(body, state, &d, t);
        state.steps += 1;
        Ok(())
    }
}

/// Metropolis ball walk with radius `delta`; rejected proposals hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallWalk {
    delta: f64,
}

impl BallWalk {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ball walk radius must be positive, got {delta}"
            )));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Uniform point of the ball of radius `delta` around `x`.
    pub fn propose<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Vec<f64> {
        let n = x.len();
        let d = random_unit_vector(n, rng);
        let u: f64 = rng.random();
        let radius = self.delta * u.powf(1.0 / n as f64);
        x.iter().zip(&d).map(|(x, d)| x + radius * d).collect()
    }
}

impl Stepper for BallWalk {
    fn step<R: Rng + ?Sized>(&self, body: &Body, state: &mut ChainState, rng: &mut R) -> Result<()> {
        let y = self.propose(&state.x, rng);
        if body.contains_tol(&y, CONTAIN_TOL) {
            let d: Vec<f64> = y.iter().zip(&state.x).map(|(y, x)| y - x).collect();
            move_along(body, state, &d, 1.0);
        }
        state.steps += 1;
        Ok(())
    }
}

/// Holds with probability 1/2, otherwise delegates to the inner kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Lazy<S>(pub S);

impl<S: Stepper> Stepper for Lazy<S> {
    fn step<R: Rng + ?Sized>(&self, body: &Body, state: &mut ChainState, rng: &mut R) -> Result<()> {
        if rng.random_bool(0.5) {
            state.hold();
            Ok(())
        } else {
            self.0.step(body, state, rng)
        }
    }
}

/// Walk selector used by configuration-driven callers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WalkKind {
    Char,
    HitAndRun,
    BallWalk { delta: f64 },
}

impl WalkKind {
    pub fn name(&self) -> &'static str {
        match self {
            WalkKind::Char => "char",
            WalkKind::HitAndRun => "har",
            WalkKind::BallWalk { .. } => "ball",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let WalkKind::BallWalk { delta } = self {
            BallWalk::new(*delta)?;
        }
        Ok(())
    }
}

/// A uniform-target walk, optionally lazy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Walk {
    pub kind: WalkKind,
    #[serde(default)]
    pub lazy: bool,
}

impl Walk {
    pub const CHAR: Walk = Walk {
        kind: WalkKind::Char,
        lazy: false,
    };
    pub const HAR: Walk = Walk {
        kind: WalkKind::HitAndRun,
        lazy: false,
    };

    pub fn new(kind: WalkKind, lazy: bool) -> Result<Self> {
        kind.validate()?;
        Ok(Self { kind, lazy })
    }
}

impl Stepper for WalkKind {
    fn step<R: Rng + ?Sized>(&self, body: &Body, state: &mut ChainState, rng: &mut R) -> Result<()> {
        match *self {
            WalkKind::Char => CoordinateHitAndRun::uniform().step(body, state, rng),
            WalkKind::HitAndRun => HitAndRun.step(body, state, rng),
            WalkKind::BallWalk { delta } => BallWalk::new(delta)?.step(body, state, rng),
        }
    }
}

impl Stepper for Walk {
    fn step<R: Rng + ?Sized>(&self, body: &Body, state: &mut ChainState, rng: &mut R) -> Result<()> {
        if self.lazy {
            Lazy(self.kind).step(body, state, rng)
        } else {
            self.kind.step(body, state, rng)
        }
    }
}

#[cfg(test)]
mod tests;
