use super::*;
use crate::geometry::{make_lower_bound_body, regular_simplex_normals};
use crate::rng::stream_rng;
use crate::stats::{chi_square_p_value, ks_one_sample, MeanAccumulator};

fn random_polytope(n: usize, m: usize, seed: u64) -> Body {
    let mut rng = stream_rng(seed, 0);
    let mut a = Vec::with_capacity(m * n);
    for u in regular_simplex_normals(n) {
        a.extend(u);
    }
    while a.len() < m * n {
        let d = random_unit_vector(n, &mut rng);
        a.extend(d);
    }
    let b = (0..m).map(|_| 1.0 + rng.random::<f64>()).collect();
    Body::polytope(n, a, b).unwrap()
}

#[test]
fn cube_axis_update_is_uniform() {
    let body = Body::unit_cube(3).unwrap();
    let walk = CoordinateHitAndRun::uniform();
    let mut rng = stream_rng(11, 0);
    let mut moved = vec![Vec::new(); 3];
    for _ in 0..30_000 {
        let mut s = ChainState::new(&body, vec![0.9, 0.1, 0.5], 0).unwrap();
        let before = s.x().to_vec();
        walk.step(&body, &mut s, &mut rng).unwrap();
        let j = (0..3).find(|&j| s.x()[j] != before[j]).unwrap();
        moved[j].push(s.x()[j]);
    }
    for draws in &moved {
        assert!(ks_one_sample(draws, |x| x.clamp(0.0, 1.0)).p_value > 0.001);
    }
}

#[test]
fn one_dimensional_step_is_exact() {
    let body = Body::unit_cube(1).unwrap();
    let mut rng = stream_rng(12, 0);
    let draws: Vec<f64> = (0..20_000)
        .map(|_| {
            let mut s = ChainState::new(&body, vec![0.99], 0).unwrap();
            CoordinateHitAndRun::uniform().step(&body, &mut s, &mut rng).unwrap();
            s.x()[0]
        })
        .collect();
    assert!(ks_one_sample(&draws, |x| x.clamp(0.0, 1.0)).p_value > 0.001);
}

#[test]
fn residual_cache_tracks_recomputation() {
    for (n, m, seed) in [(5, 12, 1), (20, 60, 2), (50, 200, 3)] {
        let body = random_polytope(n, m, seed);
        let poly = body.as_polytope().unwrap();
        let x0 = body.interior_point().unwrap();
        let mut s = ChainState::new(&body, x0, 0).unwrap().with_residual_cache(&body).unwrap();
        let mut rng = stream_rng(seed, 1);
        CoordinateHitAndRun::uniform().run(&body, &mut s, 10_000, &mut rng).unwrap();
        let fresh = poly.residuals(s.x());
        for (c, f) in s.residuals().unwrap().iter().zip(&fresh) {
            assert!((c - f).abs() < 1e-9, "n={n} cached={c} fresh={f}");
        }
        assert!(body.contains(s.x()).unwrap());
    }
}

#[test]
fn cached_and_plain_chains_agree() {
    let body = random_polytope(8, 20, 4);
    let x0 = body.interior_point().unwrap();
    let mut plain = ChainState::new(&body, x0.clone(), 0).unwrap();
    let mut cached = ChainState::new(&body, x0, 0).unwrap().with_residual_cache(&body).unwrap();
    let walk = CoordinateHitAndRun::uniform();
    walk.run(&body, &mut plain, 5000, &mut stream_rng(9, 0)).unwrap();
    walk.run(&body, &mut cached, 5000, &mut stream_rng(9, 0)).unwrap();
    for (a, b) in plain.x().iter().zip(cached.x()) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn residual_cache_needs_facets() {
    let body = Body::unit_ball(2).unwrap();
    let s = ChainState::new(&body, vec![0.0, 0.0], 0).unwrap();
    assert!(matches!(s.with_residual_cache(&body), Err(Error::Unsupported(_))));
}

#[test]
fn walks_stay_inside() {
    let bodies = vec![
        Body::unit_cube(4).unwrap(),
        Body::unit_ball(3).unwrap(),
        Body::standard_simplex(5).unwrap(),
        make_lower_bound_body(4, 8.0).unwrap(),
        apply_diag(Body::unit_cube(3).unwrap()),
    ];
    let walks = [
        Walk::CHAR,
        Walk::HAR,
        Walk::new(WalkKind::BallWalk { delta: 0.3 }, true).unwrap(),
    ];
    for body in &bodies {
        for walk in &walks {
            let mut s = ChainState::new(body, body.interior_point().unwrap(), 0).unwrap();
            let mut rng = stream_rng(13, 0);
            for _ in 0..20_000 {
                walk.step(body, &mut s, &mut rng).unwrap();
                assert!(body.contains_tol(s.x(), 1e-9), "{} left the body", body.kind_name());
            }
            assert_eq!(s.steps(), 20_000);
        }
    }
}

fn apply_diag(body: Body) -> Body {
    crate::geometry::apply_affine(body, vec![1.0, 0.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0], vec![1.0, -1.0, 0.0])
        .unwrap()
}

#[test]
fn degenerate_corner_fails_loudly() {
    // No axis line through the apex meets the triangle in more than a point.
    let body = Body::simplex(vec![vec![0.0, 0.0], vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
    let mut s = ChainState::new(&body, vec![0.0, 0.0], 0).unwrap();
    let err = CoordinateHitAndRun::uniform()
        .step(&body, &mut s, &mut stream_rng(0, 0))
        .unwrap_err();
    assert!(matches!(err, Error::DegenerateGeometry(_)));
}

#[test]
fn har_from_ball_center_is_isotropic() {
    let body = Body::unit_ball(2).unwrap();
    let mut rng = stream_rng(14, 0);
    let bins = 16;
    let mut counts = vec![0u64; bins];
    for _ in 0..100_000 {
        let mut s = ChainState::new(&body, vec![0.0, 0.0], 0).unwrap();
        HitAndRun.step(&body, &mut s, &mut rng).unwrap();
        let angle = s.x()[1].atan2(s.x()[0]) + std::f64::consts::PI;
        let b = ((angle / std::f64::consts::TAU) * bins as f64) as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let probs = vec![1.0 / bins as f64; bins];
    assert!(chi_square_p_value(&counts, &probs) > 0.001);
}

#[test]
fn har_in_one_dimension_matches_char() {
    let body = Body::unit_cube(1).unwrap();
    let mut rng = stream_rng(15, 0);
    let draws: Vec<f64> = (0..20_000)
        .map(|_| {
            let mut s = ChainState::new(&body, vec![0.3], 0).unwrap();
            HitAndRun.step(&body, &mut s, &mut rng).unwrap();
            s.x()[0]
        })
        .collect();
    assert!(ks_one_sample(&draws, |x| x.clamp(0.0, 1.0)).p_value > 0.001);
}

#[test]
fn ball_walk_acceptance() {
    let cube = Body::unit_cube(2).unwrap();
    let walk = BallWalk::new(0.1).unwrap();
    let mut rng = stream_rng(16, 0);
    let mut s = ChainState::new(&cube, vec![0.5, 0.5], 0).unwrap();
    for _ in 0..1000 {
        let before = s.x().to_vec();
        walk.step(&cube, &mut s, &mut rng).unwrap();
        assert_ne!(before, s.x());
        s = ChainState::new(&cube, vec![0.5, 0.5], 0).unwrap();
    }
    // At a corner a quarter of the proposal disk lies inside.
    let trials = 100_000;
    let accepted = (0..trials)
        .filter(|_| {
            let mut s = ChainState::new(&cube, vec![0.0, 0.0], 0).unwrap();
            walk.step(&cube, &mut s, &mut rng).unwrap();
            s.x() != [0.0, 0.0]
        })
        .count() as f64;
    let p = accepted / trials as f64;
    let se = (0.25 * 0.75 / trials as f64).sqrt();
    assert!((p - 0.25).abs() < 3.0 * se, "p={p}");
    assert!(BallWalk::new(0.0).is_err());
}

#[test]
fn lazy_holds_half_the_time() {
    let body = Body::unit_cube(2).unwrap();
    let mut rng = stream_rng(17, 0);
    let mut s = ChainState::new(&body, vec![0.5, 0.5], 0).unwrap();
    let lazy = Lazy(CoordinateHitAndRun::uniform());
    let mut holds = 0;
    for _ in 0..100_000 {
        let before = s.x().to_vec();
        lazy.step(&body, &mut s, &mut rng).unwrap();
        holds += (before == s.x()) as u32;
    }
    assert_eq!(s.steps(), 100_000);
    assert!((holds as f64 / 1e5 - 0.5).abs() < 0.01);

    let double = Lazy(Lazy(CoordinateHitAndRun::uniform()));
    let mut holds = 0;
    for _ in 0..100_000 {
        let before = s.x().to_vec();
        double.step(&body, &mut s, &mut rng).unwrap();
        holds += (before == s.x()) as u32;
    }
    assert!((holds as f64 / 1e5 - 0.75).abs() < 0.01);
}

#[test]
fn gaussian_target_in_wide_box() {
    // The box is wide enough that truncation is negligible.
    let body = Body::cuboid(vec![-20.0, -20.0], vec![20.0, 20.0]).unwrap();
    let walk = CoordinateHitAndRun::gaussian(vec![1.0, -2.0], 1.5).unwrap();
    let mut rng = stream_rng(18, 0);
    let mut s = ChainState::new(&body, vec![0.0, 0.0], 0).unwrap();
    walk.run(&body, &mut s, 100, &mut rng).unwrap();
    let mut m0 = MeanAccumulator::default();
    let mut v1 = MeanAccumulator::default();
    for _ in 0..200_000 {
        walk.step(&body, &mut s, &mut rng).unwrap();
        m0.push(s.x()[0]);
        v1.push((s.x()[1] + 2.0).powi(2));
    }
    assert!((m0.mean() - 1.0).abs() < 0.05);
    assert!((v1.mean() - 2.25).abs() < 0.1);
    assert!(CoordinateHitAndRun::gaussian(vec![0.0], 0.0).is_err());
}

#[test]
fn stationarity_on_simplex() {
    let body = Body::standard_simplex(3).unwrap();
    let mut rng = stream_rng(19, 0);
    let mut sampler = RejectionSampler::new(&body).unwrap();
    for walk in [Walk::CHAR, Walk::HAR, Walk::new(WalkKind::Char, true).unwrap()] {
        let mut out = Vec::new();
        for _ in 0..20_000 {
            let x = sampler.sample(&body, &mut rng).unwrap();
            let mut s = ChainState::new(&body, x, 0).unwrap();
            walk.run(&body, &mut s, 5, &mut rng).unwrap();
            out.push(s.x()[0]);
        }
        // Marginal of x0 on the standard 3-simplex: density 3(1 − x)².
        let ks = ks_one_sample(&out, |x| 1.0 - (1.0 - x.clamp(0.0, 1.0)).powi(3));
        assert!(ks.p_value > 0.001, "{walk:?} p={}", ks.p_value);
    }
}

#[test]
fn walk_kind_serde() {
    let w: WalkKind = serde_json::from_str(r#"{"kind":"ball_walk","delta":0.2}"#).unwrap();
    assert_eq!(w, WalkKind::BallWalk { delta: 0.2 });
    assert_eq!(WalkKind::Char.name(), "char");
    assert!(WalkKind::BallWalk { delta: -1.0 }.validate().is_err());
}
