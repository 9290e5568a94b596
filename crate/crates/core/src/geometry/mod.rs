//! Convex bodies with exact membership, axis-chord and general-chord oracles.
//!
//! Bodies are closed: boundary points are members and chords include their
//! endpoints. Every body kind has a closed-form chord, so no oracle here ever
//! falls back to bisection.

mod affine;
mod polytope;
mod prism;
mod simplex;
mod stats;

pub use affine::AffineImage;
pub use polytope::{HPolytope, ResidualCache};
pub use prism::{regular_simplex_volume, Prism};
pub use simplex::{regular_simplex_normals, Simplex};
pub use stats::{estimate_stats, BodyStats};

use crate::error::{Error, Result};

/// Relative slack used by membership tests.
pub const CONTAIN_TOL: f64 = 1e-12;

/// Parameter interval `[t_lo, t_hi]` of a line `base + t·dir` inside a body.
/// The base point and direction stay with the caller; `t_lo ≤ 0 ≤ t_hi`
/// whenever the base point is in the body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chord {
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Chord {
    pub fn len(&self) -> f64 {
        self.t_hi - self.t_lo
    }

    pub fn is_empty(&self) -> bool {
        self.t_hi <= self.t_lo
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bounds {
    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn diagonal(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct BoxBody {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxBody {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::InvalidBody("dimension must be at least 1".into()));
        }
        Error::check_dim(lo.len(), hi.len())?;
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::InvalidBody("box needs lo < hi in every coordinate".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }
}

#[derive(Debug, Clone)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidBody("dimension must be at least 1".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidBody("ball needs a finite positive radius".into()));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Intersection of the line `p + t d` with the sphere, using the
    /// cancellation-free form of the quadratic roots.
    fn chord_raw(&self, p: &[f64], d: &[f64]) -> Result<Chord> {
        let mut a = 0.0;
        let mut half_b = 0.0;
        let mut c = 0.0;
        for ((&pi, &di), &ci) in p.iter().zip(d).zip(&self.center) {
            let w = pi - ci;
            a += di * di;
            half_b += di * w;
            c += w * w;
        }
        c -= self.radius * self.radius;
        if a == 0.0 {
            return Err(Error::InvalidParameter("zero direction".into()));
        }
        let disc = (half_b * half_b - a * c).max(0.0);
        let q = -(half_b + half_b.signum() * disc.sqrt());
        let q = if half_b == 0.0 { -disc.sqrt() } else { q };
        let (t1, t2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
        polytope::finish_chord(t1.min(t2), t1.max(t2))
    }
}

/// A convex body in `R^n`.
#[derive(Debug, Clone)]
pub enum Body {
    Box(BoxBody),
    Ball(Ball),
    Simplex(Simplex),
    Polytope(HPolytope),
    Prism(Prism),
    Affine(AffineImage),
}

impl Body {
    pub fn unit_cube(dim: usize) -> Result<Self> {
        Self::cuboid(vec![0.0; dim], vec![1.0; dim])
    }

    pub fn cuboid(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        BoxBody::new(lo, hi).map(Body::Box)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Ball::new(center, radius).map(Body::Ball)
    }

    pub fn unit_ball(dim: usize) -> Result<Self> {
        Self::ball(vec![0.0; dim], 1.0)
    }

    pub fn standard_simplex(dim: usize) -> Result<Self> {
        Simplex::standard(dim).map(Body::Simplex)
    }

    pub fn simplex(vertices: Vec<Vec<f64>>) -> Result<Self> {
        Simplex::from_vertices(vertices).map(Body::Simplex)
    }

    /// `{x : A x ≤ b}`, `a` row-major.
    pub fn polytope(dim: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        HPolytope::new(dim, a, b).map(Body::Polytope)
    }

    pub fn dim(&self) -> usize {
        match self {
            Body::Box(b) => b.lo.len(),
            Body::Ball(b) => b.center.len(),
            Body::Simplex(s) => s.dim(),
            Body::Polytope(p) => p.dim(),
            Body::Prism(p) => p.dim(),
            Body::Affine(a) => a.dim(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Body::Box(_) => "box",
            Body::Ball(_) => "ball",
            Body::Simplex(_) => "simplex",
            Body::Polytope(_) => "hpolytope",
            Body::Prism(_) => "prism",
            Body::Affine(_) => "affine",
        }
    }

    /// Facet description, for bodies that carry one.
    pub fn as_polytope(&self) -> Option<&HPolytope> {
        match self {
            Body::Simplex(s) => Some(&s.poly),
            Body::Polytope(p) => Some(p),
            Body::Prism(p) => Some(&p.poly),
            _ => None,
        }
    }

    pub fn contains(&self, p: &[f64]) -> Result<bool> {
        Error::check_dim(self.dim(), p.len())?;
        Ok(self.contains_tol(p, CONTAIN_TOL))
    }

    /// Membership with relative slack `tol`; the caller guarantees the
    /// dimension.
    pub fn contains_tol(&self, p: &[f64], tol: f64) -> bool {
        match self {
            Body::Box(b) => p.iter().zip(b.lo.iter().zip(&b.hi)).all(|(&x, (&l, &h))| {
                x >= l - tol * l.abs().max(1.0) && x <= h + tol * h.abs().max(1.0)
            }),
            Body::Ball(b) => {
                let d2: f64 = p.iter().zip(&b.center).map(|(x, c)| (x - c).powi(2)).sum();
                d2.sqrt() <= b.radius + tol * b.radius.max(1.0)
            }
            Body::Affine(a) => a.inner.contains_tol(&a.pull_back(p), tol),
            _ => self.as_polytope().expect("facet body").contains_tol(p, tol),
        }
    }

    /// Maximal `[t_lo, t_hi]` with `p + t e_j ∈ K`.
    pub fn axis_chord(&self, p: &[f64], j: usize) -> Result<Chord> {
        Error::check_dim(self.dim(), p.len())?;
        if j >= self.dim() {
            return Err(Error::InvalidParameter(format!(
                "axis {j} out of range for dimension {}",
                self.dim()
            )));
        }
        if !self.contains_tol(p, CONTAIN_TOL) {
            return Err(Error::NotInBody);
        }
        self.axis_chord_unchecked(p, j)
    }

    /// [`Body::axis_chord`] without the dimension and membership checks.
    pub fn axis_chord_unchecked(&self, p: &[f64], j: usize) -> Result<Chord> {
        match self {
            Body::Box(b) => Ok(Chord {
                t_lo: (b.lo[j] - p[j]).min(0.0),
                t_hi: (b.hi[j] - p[j]).max(0.0),
            }),
            Body::Ball(b) => {
                let mut d = vec![0.0; p.len()];
                d[j] = 1.0;
                b.chord_raw(p, &d)
            }
            Body::Affine(a) => a.inner.chord_unchecked(&a.pull_back(p), &a.inverse_column(j)),
            _ => {
                let poly = self.as_polytope().expect("facet body");
                poly.axis_chord_from_residuals(&poly.residuals(p), j)
            }
        }
    }

    /// Maximal chord along a unit direction `d`.
    pub fn chord(&self, p: &[f64], d: &[f64]) -> Result<Chord> {
        Error::check_dim(self.dim(), p.len())?;
        Error::check_dim(self.dim(), d.len())?;
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "direction must have unit norm, got {norm}"
            )));
        }
        if !self.contains_tol(p, CONTAIN_TOL) {
            return Err(Error::NotInBody);
        }
        self.chord_unchecked(p, d)
    }

    /// Chord along any nonzero direction; `t` is measured in units of `d`.
    pub fn chord_unchecked(&self, p: &[f64], d: &[f64]) -> Result<Chord> {
        match self {
            Body::Box(b) => {
                let mut t_lo = f64::NEG_INFINITY;
                let mut t_hi = f64::INFINITY;
                for k in 0..p.len() {
                    if d[k] == 0.0 {
                        continue;
                    }
                    let (a, c) = ((b.lo[k] - p[k]) / d[k], (b.hi[k] - p[k]) / d[k]);
                    t_lo = t_lo.max(a.min(c));
                    t_hi = t_hi.min(a.max(c));
                }
                polytope::finish_chord(t_lo, t_hi)
            }
            Body::Ball(b) => b.chord_raw(p, d),
            Body::Affine(a) => a
                .inner
                .chord_unchecked(&a.pull_back(p), &a.pull_back_direction(d)),
            _ => self.as_polytope().expect("facet body").chord_raw(p, d),
        }
    }

    pub fn bounding_box(&self) -> Result<Bounds> {
        match self {
            Body::Box(b) => Ok(Bounds {
                lo: b.lo.clone(),
                hi: b.hi.clone(),
            }),
            Body::Ball(b) => Ok(Bounds {
                lo: b.center.iter().map(|c| c - b.radius).collect(),
                hi: b.center.iter().map(|c| c + b.radius).collect(),
            }),
            Body::Simplex(s) => Ok(s.bounding_box()),
            Body::Polytope(p) => p.bounding_box(),
            Body::Prism(p) => Ok(p.bounding_box()),
            Body::Affine(a) => a.bounding_box(),
        }
    }

    /// A known point of the interior.
    pub fn interior_point(&self) -> Result<Vec<f64>> {
        match self {
            Body::Box(b) => Ok(b.lo.iter().zip(&b.hi).map(|(l, h)| 0.5 * (l + h)).collect()),
            Body::Ball(b) => Ok(b.center.clone()),
            Body::Simplex(s) => Ok(s.barycenter()),
            Body::Polytope(p) => p.chebyshev_center().map(|(c, _)| c),
            Body::Prism(p) => Ok(p.center()),
            Body::Affine(a) => Ok(a.forward(&a.inner.interior_point()?)),
        }
    }

    /// Exact volume where a closed form is known.
    pub fn volume(&self) -> Option<f64> {
        match self {
            Body::Box(b) => Some(b.lo.iter().zip(&b.hi).map(|(l, h)| h - l).product()),
            Body::Ball(b) => Some(unit_ball_volume(b.center.len()) * b.radius.powi(b.center.len() as i32)),
            Body::Simplex(s) => Some(s.volume()),
            Body::Polytope(_) => None,
            Body::Prism(p) => Some(p.volume()),
            Body::Affine(a) => a.inner.volume().map(|v| v * a.determinant().abs()),
        }
    }
}

/// Volume of the unit ball in `R^n`, via the recursion `V_n = 2π/n · V_{n−2}`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Lower-bound body: the slanted simplex prism of length `length` in `R^n`.
/// Requires `n ≥ 2` and `length ≥ 2n`.
pub fn make_lower_bound_body(n: usize, length: f64) -> Result<Body> {
    Prism::new(n, length).map(Body::Prism)
}

/// `{M x + v : x ∈ body}`; `map` is row-major.
pub fn apply_affine(body: Body, map: Vec<f64>, shift: Vec<f64>) -> Result<Body> {
    AffineImage::new(body, map, shift).map(Body::Affine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn cube_membership() {
        let cube = Body::unit_cube(2).unwrap();
        assert!(cube.contains(&[0.5, 0.5]).unwrap());
        assert!(cube.contains(&[1.0, 0.3]).unwrap());
        assert!(!cube.contains(&[1.0 + 1e-9, 0.3]).unwrap());
        assert_eq!(
            cube.contains(&[0.5]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn ball_membership() {
        let ball = Body::unit_ball(3).unwrap();
        assert!(!ball.contains(&[1.1, 0.0, 0.0]).unwrap());
        assert!(ball.contains(&[1.0, 0.0, 0.0]).unwrap());
    }

    #[test]
    fn axis_chord_examples() {
        let cube = Body::unit_cube(2).unwrap();
        let c = cube.axis_chord(&[0.25, 0.7], 0).unwrap();
        assert!(close(c.t_lo, -0.25, 1e-15) && close(c.t_hi, 0.75, 1e-15));

        let ball = Body::unit_ball(3).unwrap();
        for j in 0..3 {
            let c = ball.axis_chord(&[0.0; 3], j).unwrap();
            assert!(close(c.t_lo, -1.0, 1e-15) && close(c.t_hi, 1.0, 1e-15));
        }

        let simplex = Body::standard_simplex(2).unwrap();
        let c = simplex.axis_chord(&[0.25, 0.25], 0).unwrap();
        assert!(close(c.t_lo, -0.25, 1e-12) && close(c.t_hi, 0.5, 1e-12));

        assert_eq!(cube.axis_chord(&[1.5, 0.5], 0), Err(Error::NotInBody));
    }

    #[test]
    fn general_chord_examples() {
        let cube = Body::unit_cube(2).unwrap();
        let c = cube.chord(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert!(close(c.t_lo, -0.5, 1e-15) && close(c.t_hi, 0.5, 1e-15));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = cube.chord(&[0.5, 0.5], &[s, s]).unwrap();
        assert!(close(c.t_lo, -s, 1e-12) && close(c.t_hi, s, 1e-12));

        let ball = Body::unit_ball(2).unwrap();
        let c = ball.chord(&[0.5, 0.0], &[0.0, 1.0]).unwrap();
        let h = 0.75_f64.sqrt();
        assert!(close(c.t_lo, -h, 1e-12) && close(c.t_hi, h, 1e-12));

        assert!(cube.chord(&[0.5, 0.5], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn ball_chord_near_tangency_is_stable() {
        let ball = Body::unit_ball(2).unwrap();
        let y = 1.0 - 1e-10;
        let c = ball.axis_chord(&[0.0, y], 0).unwrap();
        let expected = (1.0 - y * y).sqrt();
        assert!(close(c.t_hi, expected, 1e-12 * expected.max(1e-6)));
        let c = ball.axis_chord(&[0.999_999, 0.0], 0).unwrap();
        assert!(close(c.t_hi, 1e-6, 1e-15));
        assert!(close(c.t_lo, -1.999_999, 1e-12));
    }

    #[test]
    fn lower_bound_body_examples() {
        let body = make_lower_bound_body(2, 4.0).unwrap();
        let bb = body.bounding_box().unwrap();
        assert_eq!(bb.lo, vec![0.0, -1.0]);
        assert_eq!(bb.hi, vec![4.0, 5.0]);
        assert!(body.contains(&[2.0, 2.0]).unwrap());
        assert!(!body.contains(&[-0.1, 0.0]).unwrap());
        assert!(matches!(make_lower_bound_body(1, 4.0), Err(Error::InvalidParameter(_))));
        let p = body.as_polytope().unwrap();
        assert_eq!(p.num_rows(), 4);
        let body = make_lower_bound_body(5, 10.0).unwrap();
        assert_eq!(body.as_polytope().unwrap().num_rows(), 7);
        let c = body.interior_point().unwrap();
        assert!(body.contains(&c).unwrap());
    }

    #[test]
    fn prism_slices_contain_unit_balls_and_vanish_outside() {
        let mut rng = stream_rng(11, 0);
        for n in 2..=6 {
            let len = 2.0 * n as f64 + 3.0;
            let body = make_lower_bound_body(n, len).unwrap();
            for _ in 0..200 {
                let x1 = rng.random_range(0.0..=len);
                // Random point on the unit (n−1)-sphere around the slice center.
                let mut y: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
                let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                y.iter_mut().for_each(|v| *v /= norm);
                y[0] += x1;
                let mut p = vec![x1];
                p.extend(y);
                assert!(body.contains_tol(&p, 1e-9), "n={n} p={p:?}");
                // Same slice shape, first coordinate outside [0, D].
                let mut outside = p.clone();
                outside[0] = -rng.random_range(1e-6..1.0);
                assert!(!body.contains_tol(&outside, 1e-12));
                outside[0] = len + rng.random_range(1e-6..1.0);
                assert!(!body.contains_tol(&outside, 1e-12));
            }
        }
    }

    #[test]
    fn affine_examples() {
        let square = Body::unit_cube(2).unwrap();
        let id = apply_affine(square.clone(), vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let mut rng = stream_rng(5, 0);
        for _ in 0..100 {
            let p = [rng.random_range(-0.5..1.5), rng.random_range(-0.5..1.5)];
            assert_eq!(square.contains(&p).unwrap(), id.contains(&p).unwrap());
        }

        let double = apply_affine(square.clone(), vec![2.0, 0.0, 0.0, 2.0], vec![0.0, 0.0]).unwrap();
        for _ in 0..50 {
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            let y = [2.0 * x[0], 2.0 * x[1]];
            for j in 0..2 {
                let inner = square.axis_chord(&x, j).unwrap();
                let outer = double.axis_chord(&y, j).unwrap();
                assert_eq!(outer.t_lo, 2.0 * inner.t_lo);
                assert_eq!(outer.t_hi, 2.0 * inner.t_hi);
            }
        }

        let stretched = apply_affine(square.clone(), vec![1.0, 0.0, 0.0, 3.0], vec![0.0, 0.0]).unwrap();
        let c = stretched.axis_chord(&[0.5, 1.0], 1).unwrap();
        assert!(close(c.len(), 3.0, 1e-12));
        assert!(close(stretched.volume().unwrap(), 3.0, 1e-12));

        assert_eq!(
            apply_affine(square, vec![1.0, 2.0, 2.0, 4.0], vec![0.0, 0.0]).unwrap_err(),
            Error::SingularMatrix
        );
    }

    #[test]
    fn affine_membership_commutes_with_map() {
        let simplex = Body::standard_simplex(3).unwrap();
        let map = vec![1.0, 0.5, 0.0, 0.0, 2.0, 0.3, -0.4, 0.0, 1.5];
        let shift = vec![0.3, -1.0, 2.0];
        let image = apply_affine(simplex.clone(), map.clone(), shift.clone()).unwrap();
        let Body::Affine(a) = &image else { unreachable!() };
        assert!(a.condition_number() >= 1.0);
        let mut rng = stream_rng(6, 0);
        for _ in 0..500 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-0.3..1.0)).collect();
            let y = a.forward(&x);
            assert_eq!(simplex.contains(&x).unwrap(), image.contains(&y).unwrap());
        }
    }

    #[test]
    fn volumes() {
        assert!(close(unit_ball_volume(2), std::f64::consts::PI, 1e-14));
        assert!(close(unit_ball_volume(3), 4.0 / 3.0 * std::f64::consts::PI, 1e-14));
        assert!(close(Body::standard_simplex(3).unwrap().volume().unwrap(), 1.0 / 6.0, 1e-15));
        assert_eq!(Body::polytope(1, vec![1.0, -1.0], vec![1.0, 1.0]).unwrap().volume(), None);
    }

    fn random_bodies(rng: &mut impl Rng) -> Vec<Body> {
        let n = rng.random_range(2..=5);
        vec![
            Body::cuboid(vec![-1.0; n], (0..n).map(|_| rng.random_range(0.5..2.0)).collect())
                .unwrap(),
            Body::unit_ball(n).unwrap(),
            Body::standard_simplex(n).unwrap(),
            make_lower_bound_body(n, 2.0 * n as f64 + 1.0).unwrap(),
        ]
    }

    fn interior_sample(body: &Body, rng: &mut impl Rng) -> Vec<f64> {
        let bb = body.bounding_box().unwrap();
        loop {
            let p: Vec<f64> = bb
                .lo
                .iter()
                .zip(&bb.hi)
                .map(|(l, h)| rng.random_range(*l..*h))
                .collect();
            if body.contains(&p).unwrap() {
                return p;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn chord_endpoints_are_tight(seed in any::<u64>()) {
            let mut rng = stream_rng(seed, 0);
            for body in random_bodies(&mut rng) {
                let p = interior_sample(&body, &mut rng);
                for j in 0..body.dim() {
                    let c = body.axis_chord(&p, j).unwrap();
                    prop_assert!(c.t_lo <= 0.0 && 0.0 <= c.t_hi);
                    for (t, inside) in [
                        (c.t_lo, true),
                        (c.t_hi, true),
                        (c.t_hi + 1e-6, false),
                        (c.t_lo - 1e-6, false),
                    ] {
                        let mut q = p.clone();
                        q[j] += t;
                        prop_assert_eq!(body.contains(&q).unwrap(), inside, "{} axis {} t {}", body.kind_name(), j, t);
                    }
                    let mut e = vec![0.0; body.dim()];
                    e[j] = 1.0;
                    let g = body.chord(&p, &e).unwrap();
                    prop_assert!((g.t_lo - c.t_lo).abs() <= 1e-12 && (g.t_hi - c.t_hi).abs() <= 1e-12);
                }
            }
        }
    }
}
