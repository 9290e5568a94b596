use coordwalk::diagnostics::{mixing_curve, monotone_smooth, Binning, StartSpec};
use coordwalk::geometry::{make_lower_bound_body, ResidualCache};
use coordwalk::kernel::{ls93_bound, transition_prob, BoundInputs, Region};
use coordwalk::rng::stream_rng;
use coordwalk::samplers::{ChainState, CoordinateHitAndRun, PointSampler, Stepper, UniformSampler, Walk};
use coordwalk::Body;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

/// `[-1, 1]^n` cut by `extra` random halfspaces through points at distance
/// at least 1/2 from the origin.
fn random_polytope(n: usize, extra: usize, seed: u64) -> Body {
    let mut rng = stream_rng(seed, 0);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for j in 0..n {
        for s in [1.0, -1.0] {
            let mut row = vec![0.0; n];
            row[j] = s;
            a.extend(row);
            b.push(1.0);
        }
    }
    for _ in 0..extra {
        a.extend((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        b.push(0.5 + rng.random::<f64>());
    }
    Body::polytope(n, a, b).unwrap()
}

fn body_strategy() -> impl Strategy<Value = Body> {
    prop_oneof![
        (1usize..6).prop_map(|n| Body::unit_cube(n).unwrap()),
        (1usize..6).prop_map(|n| Body::standard_simplex(n).unwrap()),
        (2usize..5).prop_map(|n| Body::unit_ball(n).unwrap()),
        (2usize..5, 4.0f64..20.0).prop_map(|(n, d)| make_lower_bound_body(n, d.max(2.0 * n as f64)).unwrap()),
        (2usize..6, 0usize..10, any::<u64>()).prop_map(|(n, m, s)| random_polytope(n, m, s)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chords_contain_the_point_and_end_on_the_boundary(body in body_strategy(), seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 0);
        let x = UniformSampler::new(&body).unwrap().sample(&body, &mut rng).unwrap();
        for j in 0..body.dim() {
            let c = body.axis_chord(&x, j).unwrap();
            prop_assert!(c.t_lo <= 0.0 && c.t_hi >= 0.0);
            for t in [c.t_lo, c.t_hi] {
                let mut end = x.clone();
                end[j] += t;
                prop_assert!(body.contains_tol(&end, 1e-9));
                end[j] += 1e-6 * t.signum();
                prop_assert!(!body.contains_tol(&end, 1e-9));
            }
        }
    }

    #[test]
    fn kernel_splits_between_a_set_and_its_complement(
        body in body_strategy(),
        seed in any::<u64>(),
        offset in -0.5f64..0.5,
    ) {
        let mut rng = stream_rng(seed, 0);
        let x = UniformSampler::new(&body).unwrap().sample(&body, &mut rng).unwrap();
        let normal: Vec<f64> = (0..body.dim()).map(|_| rng.sample(StandardNormal)).collect();
        let s = Region::halfspace(normal, offset).unwrap();
        let p = transition_prob(&body, &x, &s).unwrap();
        let q = transition_prob(&body, &x, &s.clone().complement()).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((p + q - 1.0).abs() < 1e-12);
    }

    #[test]
    fn walks_never_leave_the_body(body in body_strategy(), seed in any::<u64>(), lazy in any::<bool>()) {
        let mut rng = stream_rng(seed, 1);
        let x0 = body.interior_point().unwrap();
        for walk in [Walk { lazy, ..Walk::CHAR }, Walk { lazy, ..Walk::HAR }] {
            let mut st = ChainState::new(&body, x0.clone(), 0).unwrap();
            for _ in 0..200 {
                walk.step(&body, &mut st, &mut rng).unwrap();
                prop_assert!(body.contains_tol(st.x(), 1e-9));
            }
        }
    }

    #[test]
    fn cached_chain_matches_recomputing_chain(
        n in 2usize..12,
        extra in 0usize..30,
        seed in any::<u64>(),
    ) {
        let body = random_polytope(n, extra, seed);
        let poly = body.as_polytope().unwrap();
        let x0 = body.interior_point().unwrap();
        let mut cached = ChainState::new(&body, x0.clone(), 0).unwrap().with_residual_cache(&body).unwrap();
        let mut plain = ChainState::new(&body, x0, 0).unwrap();
        let (mut ra, mut rb) = (stream_rng(seed, 2), stream_rng(seed, 2));
        let walk = CoordinateHitAndRun::uniform();
        for _ in 0..2000 {
            walk.step(&body, &mut cached, &mut ra).unwrap();
            walk.step(&body, &mut plain, &mut rb).unwrap();
        }
        prop_assert_eq!(cached.x(), plain.x());
        let fresh = poly.residuals(plain.x());
        prop_assert_eq!(cached.residuals().unwrap(), fresh.as_slice());
    }

    #[test]
    fn residual_shifts_compose(n in 2usize..8, seed in any::<u64>()) {
        let body = random_polytope(n, 6, seed);
        let poly = body.as_polytope().unwrap();
        let mut rng = stream_rng(seed, 3);
        let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-0.3..0.3)).collect();
        let mut cache = ResidualCache::new(poly, &x);
        for _ in 0..500 {
            let j = rng.random_range(0..n);
            let to = rng.random_range(-0.3..0.3);
            cache.shift_axis(poly, j, x[j], to);
            x[j] = to;
        }
        let fresh = poly.residuals(&x);
        prop_assert_eq!(cache.values(), fresh.as_slice());
    }

    #[test]
    fn isotonic_fit_is_non_increasing_and_idempotent(v in prop::collection::vec(0.0f64..1.0, 1..40)) {
        let fit = monotone_smooth(&v);
        prop_assert_eq!(fit.len(), v.len());
        prop_assert!(fit.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let again = monotone_smooth(&fit);
        prop_assert!(fit.iter().zip(&again).all(|(a, b)| (a - b).abs() < 1e-12));
        let (sa, sb): (f64, f64) = (v.iter().sum(), fit.iter().sum());
        prop_assert!((sa - sb).abs() < 1e-9);
    }

    #[test]
    fn convergence_bound_decreases_in_t(h in 0.0f64..=1.0, s in 0.01f64..=0.5, phi in 0.0f64..=1.0, t in 0u64..1000) {
        let at = |t| ls93_bound(&BoundInputs { h_s: h, s, phi_s: phi, t }).unwrap();
        prop_assert!(at(t + 1).raw <= at(t).raw);
        prop_assert!(at(t).raw >= h);
        prop_assert!((0.0..=1.0).contains(&at(t).value));
    }
}

#[test]
fn long_prism_mixes_slower_than_cube() {
    let ts: Vec<u64> = (0..=60).step_by(5).collect();
    let cube = Body::unit_cube(3).unwrap();
    let prism = make_lower_bound_body(3, 12.0).unwrap();
    let mut rng = stream_rng(21, 0);
    let mut sampler = UniformSampler::new(&prism).unwrap();
    let end = (0..2000)
        .map(|_| sampler.sample(&prism, &mut rng).unwrap())
        .min_by(|a, b| a[0].total_cmp(&b[0]))
        .unwrap();
    let curve = |body: &Body, x: Vec<f64>| {
        let b = body.bounding_box().unwrap();
        let binning = Binning::new(b.lo, b.hi, vec![4, 1, 1]).unwrap();
        mixing_curve(body, &Walk::CHAR, &ts, 2000, &StartSpec::Point { x }, &binning, 22).unwrap()
    };
    let c = curve(&cube, vec![0.05; 3]);
    let p = curve(&prism, end);
    let tc = c.mixing_time(0.25).unwrap();
    assert!(p.mixing_time(0.25).is_none_or(|tp| tp > tc), "cube {tc}, prism {:?}", p.mixing_time(0.25));
    assert!(p.tv_smoothed.last().unwrap() > c.tv_smoothed.last().unwrap());
}
