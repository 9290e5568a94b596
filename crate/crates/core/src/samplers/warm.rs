use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ChainState, CoordinateHitAndRun, Stepper};
use crate::error::{Error, Result};
use crate::geometry::{Body, Bounds, CONTAIN_TOL};

/// Rejection sampling gives up once this many trials have been spent…
pub const REJECTION_MAX_TRIALS: u64 = 10_000_000;
/// …with an acceptance rate below this.
pub const REJECTION_MIN_ACCEPTANCE: f64 = 1e-6;

/// Source of (approximately) uniform points of a body.
pub trait PointSampler {
    fn sample<R: Rng + ?Sized>(&mut self, body: &Body, rng: &mut R) -> Result<Vec<f64>>;
}

/// Exact uniform sampling by rejection from the bounding box.
#[derive(Debug, Clone)]
pub struct RejectionSampler {
    bounds: Bounds,
    trials: u64,
    accepted: u64,
}

impl RejectionSampler {
    pub fn new(body: &Body) -> Result<Self> {
        Ok(Self {
            bounds: body.bounding_box()?,
            trials: 0,
            accepted: 0,
        })
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.trials == 0 {
            return f64::NAN;
        }
        self.accepted as f64 / self.trials as f64
    }

    fn infeasible(&self) -> bool {
        self.trials >= REJECTION_MAX_TRIALS
            && (self.accepted as f64) < REJECTION_MIN_ACCEPTANCE * self.trials as f64
    }
}

pub(crate) fn uniform_in_bounds<R: Rng + ?Sized>(bounds: &Bounds, rng: &mut R) -> Vec<f64> {
    bounds
        .lo
        .iter()
        .zip(&bounds.hi)
        .map(|(l, h)| l + (h - l) * rng.random::<f64>())
        .collect()
}

impl PointSampler for RejectionSampler {
    fn sample<R: Rng + ?Sized>(&mut self, body: &Body, rng: &mut R) -> Result<Vec<f64>> {
        loop {
            let p = uniform_in_bounds(&self.bounds, rng);
            self.trials += 1;
            if body.contains_tol(&p, CONTAIN_TOL) {
                self.accepted += 1;
                return Ok(p);
            }
            if self.infeasible() {
                return Err(Error::RejectionInfeasible {
                    accepted: self.accepted,
                    trials: self.trials,
                });
            }
        }
    }
}

/// Exact uniform sampling: direct constructions for boxes, balls,
/// simplices, prisms and their affine images, rejection from the bounding
/// box for general polytopes.
#[derive(Debug, Clone)]
pub struct UniformSampler {
    fallback: Option<RejectionSampler>,
}

impl UniformSampler {
    pub fn new(body: &Body) -> Result<Self> {
        let fallback = if has_direct_sampler(body) {
            None
        } else {
            Some(RejectionSampler::new(body)?)
        };
        Ok(Self { fallback })
    }
}

impl PointSampler for UniformSampler {
    fn sample<R: Rng + ?Sized>(&mut self, body: &Body, rng: &mut R) -> Result<Vec<f64>> {
        match &mut self.fallback {
            Some(rej) => rej.sample(body, rng),
            None => Ok(sample_direct(body, rng).expect("direct sampler available")),
        }
    }
}

fn has_direct_sampler(body: &Body) -> bool {
    match body {
        Body::Polytope(_) => false,
        Body::Affine(a) => has_direct_sampler(a.inner()),
        _ => true,
    }
}

fn uniform_simplex_weights<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}

fn convex_combination(vertices: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0; vertices[0].len()];
    for (v, &wi) in vertices.iter().zip(w) {
        p.iter_mut().zip(v).for_each(|(p, v)| *p += wi * v);
    }
    p
}

fn sample_direct<R: Rng + ?Sized>(body: &Body, rng: &mut R) -> Option<Vec<f64>> {
    Some(match body {
        Body::Box(_) => uniform_in_bounds(&body.bounding_box().ok()?, rng),
        Body::Ball(b) => {
            let n = b.center().len();
            let d: Vec<f64> = (0..n).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
            let norm = d.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
            let r = b.radius() * rng.random::<f64>().powf(1.0 / n as f64);
            b.center().iter().zip(&d).map(|(c, d)| c + r * d / norm).collect()
        }
        Body::Simplex(s) => {
            let w = uniform_simplex_weights(s.vertices().len(), rng);
            convex_combination(s.vertices(), &w)
        }
        Body::Prism(p) => {
            let x1 = p.length() * rng.random::<f64>();
            let w = uniform_simplex_weights(p.section_vertices().len(), rng);
            let mut y = convex_combination(p.section_vertices(), &w);
            y[0] += x1;
            std::iter::once(x1).chain(y).collect()
        }
        Body::Affine(a) => a.forward(&sample_direct(a.inner(), rng)?),
        Body::Polytope(_) => return None,
    })
}

/// Approximate sampling: one long CHAR chain, emitting every `thin` steps.
#[derive(Debug, Clone)]
pub struct ChainSampler {
    state: ChainState,
    thin: u64,
    walk: CoordinateHitAndRun,
}

impl ChainSampler {
    pub fn new(body: &Body, burn_in: u64, thin: u64, rng: &mut impl Rng) -> Result<Self> {
        if thin == 0 {
            return Err(Error::InvalidParameter("thinning must be at least 1".into()));
        }
        let walk = CoordinateHitAndRun::uniform();
        let mut state = ChainState::new(body, body.interior_point()?, 0)?;
        walk.run(body, &mut state, burn_in, rng)?;
        Ok(Self { state, thin, walk })
    }
}

impl PointSampler for ChainSampler {
    fn sample<R: Rng + ?Sized>(&mut self, body: &Body, rng: &mut R) -> Result<Vec<f64>> {
        self.walk.run(body, &mut self.state, self.thin, rng)?;
        Ok(self.state.x().to_vec())
    }
}

/// How to obtain a starting point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum WarmStart {
    /// Exactly uniform, by rejection from the bounding box.
    RejectionFromBox,
    /// `steps` CHAR steps from the body's known interior point.
    BurnIn { steps: u64 },
}

pub fn warm_start<R: Rng + ?Sized>(body: &Body, mode: WarmStart, rng: &mut R) -> Result<Vec<f64>> {
    match mode {
        WarmStart::RejectionFromBox => RejectionSampler::new(body)?.sample(body, rng),
        WarmStart::BurnIn { steps } => {
            let mut state = ChainState::new(body, body.interior_point()?, 0)?;
            CoordinateHitAndRun::uniform().run(body, &mut state, steps, rng)?;
            Ok(state.x().to_vec())
        }
    }
}

/// Fraction of bounding-box points inside the body, with its standard error.
pub fn estimate_acceptance<R: Rng + ?Sized>(body: &Body, trials: u64, rng: &mut R) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let bounds = body.bounding_box()?;
    let hits = (0..trials)
        .filter(|_| body.contains_tol(&uniform_in_bounds(&bounds, rng), CONTAIN_TOL))
        .count() as f64;
    let p = hits / trials as f64;
    Ok((p, (p * (1.0 - p) / trials as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn cube_accepts_everything() {
        let body = Body::unit_cube(4).unwrap();
        let mut rng = stream_rng(1, 0);
        let mut s = RejectionSampler::new(&body).unwrap();
        for _ in 0..1000 {
            s.sample(&body, &mut rng).unwrap();
        }
        assert_eq!(s.acceptance_rate(), 1.0);
    }

    #[test]
    fn disk_acceptance_is_quarter_pi() {
        let body = Body::unit_ball(2).unwrap();
        let mut rng = stream_rng(2, 0);
        let (p, se) = estimate_acceptance(&body, 100_000, &mut rng).unwrap();
        assert!((p - std::f64::consts::FRAC_PI_4).abs() < 3.0 * se, "p={p} se={se}");
    }

    #[test]
    fn burn_in_start_is_inside() {
        let body = crate::geometry::make_lower_bound_body(6, 12.0).unwrap();
        let mut rng = stream_rng(3, 0);
        let x = warm_start(&body, WarmStart::BurnIn { steps: 2000 }, &mut rng).unwrap();
        assert!(body.contains(&x).unwrap());
    }

    #[test]
    fn infeasible_rejection_is_reported() {
        // A thin diagonal slab of the unit square; acceptance is about 3e-8.
        let w = 1e-8;
        let body = Body::polytope(
            2,
            vec![1.0, -1.0, -1.0, 1.0, -1.0, 0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 1.0],
            vec![w, w, 0.0, 1.0, 0.0, 1.0],
        )
        .unwrap();
        let mut rng = stream_rng(4, 0);
        let err = RejectionSampler::new(&body).unwrap().sample(&body, &mut rng).unwrap_err();
        assert!(matches!(err, Error::RejectionInfeasible { .. }));
    }

    #[test]
    fn direct_samplers_match_rejection() {
        use crate::stats::ks_two_sample;
        let bodies = [
            Body::unit_ball(3).unwrap(),
            Body::standard_simplex(3).unwrap(),
            crate::geometry::make_lower_bound_body(3, 6.0).unwrap(),
            crate::geometry::apply_affine(
                Body::standard_simplex(2).unwrap(),
                vec![1.0, 2.0, 0.0, 1.0],
                vec![0.5, 0.0],
            )
            .unwrap(),
        ];
        let mut rng = stream_rng(6, 0);
        for body in &bodies {
            let mut direct = UniformSampler::new(body).unwrap();
            let mut rej = RejectionSampler::new(body).unwrap();
            let a: Vec<Vec<f64>> = (0..20_000).map(|_| direct.sample(body, &mut rng).unwrap()).collect();
            let b: Vec<Vec<f64>> = (0..20_000).map(|_| rej.sample(body, &mut rng).unwrap()).collect();
            for j in 0..body.dim() {
                let xa: Vec<f64> = a.iter().map(|p| p[j]).collect();
                let xb: Vec<f64> = b.iter().map(|p| p[j]).collect();
                let ks = ks_two_sample(&xa, &xb);
                assert!(ks.p_value > 0.001, "{} axis {j}: p={}", body.kind_name(), ks.p_value);
            }
            assert!(a.iter().all(|p| body.contains(p).unwrap()));
        }
    }

    #[test]
    fn zero_thinning_rejected() {
        let body = Body::unit_cube(2).unwrap();
        assert!(ChainSampler::new(&body, 0, 0, &mut stream_rng(0, 0)).is_err());
    }
}
