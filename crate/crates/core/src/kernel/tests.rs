use super::*;
use crate::geometry::make_lower_bound_body;
use crate::samplers::{ChainState, CoordinateHitAndRun, Stepper};

fn lazy_char() -> Walk {
    Walk::new(WalkKind::Char, true).unwrap()
}

/// Midpoint-rule integral of `f` over the unit square, `m × m` nodes.
fn quadrature_unit_square(m: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let h = 1.0 / m as f64;
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..m {
            total += f(&[(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
        }
    }
    total * h * h
}

#[test]
fn hand_computed_transition() {
    let cube = Body::unit_cube(2).unwrap();
    let s = Region::axis_cut(2, 0, 0.5).complement();
    let p = transition_prob(&cube, &[0.25, 0.7], &s).unwrap();
    assert!((p - 0.25).abs() < 1e-15);
}

#[test]
fn whole_and_empty_regions() {
    let bodies = [
        Body::unit_cube(3).unwrap(),
        Body::unit_ball(3).unwrap(),
        Body::standard_simplex(3).unwrap(),
        make_lower_bound_body(3, 6.0).unwrap(),
    ];
    for body in &bodies {
        let x = body.interior_point().unwrap();
        assert!((transition_prob(body, &x, &Region::whole()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(transition_prob(body, &x, &Region::empty()).unwrap(), 0.0);
    }
    let cube = Body::unit_cube(2).unwrap();
    assert_eq!(
        transition_prob(&cube, &[1.5, 0.5], &Region::whole()),
        Err(Error::NotInBody)
    );
    assert!(transition_prob(&cube, &[0.5, 0.5], &Region::axis_cut(3, 0, 0.5)).is_err());
}

#[test]
fn threshold_is_strict() {
    let cube = Body::unit_cube(2).unwrap();
    let s1 = Region::axis_cut(2, 0, 0.5);
    let labels =
        classify_prime_sets(&cube, &s1, &[vec![0.49, 0.5], vec![0.1, 0.5], vec![0.9, 0.5]]).unwrap();
    assert_eq!(labels, vec![PrimeLabel::Neither; 3]);
    // On a 4 × 1 box cut at x₀ = 1 the larger side keeps most x₀-moves.
    let wide = Body::cuboid(vec![0.0, 0.0], vec![4.0, 1.0]).unwrap();
    let s1 = Region::axis_cut(2, 0, 1.0);
    let labels = classify_prime_sets(&wide, &s1, &[vec![0.5, 0.5], vec![3.0, 0.5]]).unwrap();
    assert_eq!(labels, vec![PrimeLabel::Neither, PrimeLabel::S2Prime]);
}

#[test]
fn cube_half_cut_flow_matches_quadrature() {
    let cube = Body::unit_cube(2).unwrap();
    let s = Region::axis_cut(2, 0, 0.5);
    let out = s.clone().complement();
    let exact = quadrature_unit_square(200, |x| {
        if s.contains(x) {
            transition_prob(&cube, x, &out).unwrap()
        } else {
            0.0
        }
    });
    assert!((exact - 0.125).abs() < 1e-12, "quadrature {exact}");
    let est = ergodic_flow(&cube, &s, 200_000, &Walk::CHAR, 1).unwrap();
    assert!((est.p_s - exact).abs() < 3.0 * est.se_p.max(1e-12), "{est:?}");
    assert!((est.phi - 0.25).abs() < 3.0 * est.se_phi.max(1e-12));
    let lazy = conductance(&cube, &s, 200_000, &lazy_char(), 1).unwrap();
    assert!((lazy.p_s - 0.0625).abs() < 3.0 * lazy.se_p);
    assert!((lazy.phi - 0.125).abs() < 3.0 * lazy.se_phi);
}

#[test]
fn simplex_flow_matches_quadrature() {
    let body = Body::standard_simplex(2).unwrap();
    let s = Region::halfspace(vec![1.0, -2.0], 0.1).unwrap();
    let out = s.clone().complement();
    let integrand = quadrature_unit_square(400, |x| {
        if body.contains_tol(x, 0.0) && s.contains(x) {
            transition_prob(&body, x, &out).unwrap()
        } else {
            0.0
        }
    });
    let exact = integrand / 0.5;
    let est = ergodic_flow(&body, &s, 200_000, &Walk::CHAR, 2).unwrap();
    assert!((est.p_s - exact).abs() < 3.0 * est.se_p + 2e-3, "{} vs {exact}", est.p_s);
}

#[test]
fn symmetric_cut_has_symmetric_conductance() {
    let cube = Body::unit_cube(3).unwrap();
    let s = Region::axis_cut(3, 1, 0.5);
    let a = conductance(&cube, &s, 100_000, &Walk::CHAR, 3).unwrap();
    let b = conductance(&cube, &s.clone().complement(), 100_000, &Walk::CHAR, 3).unwrap();
    // Same draws on both sides: p_S agrees up to rounding.
    assert!((a.phi - b.phi).abs() < 1e-9 + 3.0 * (a.se_phi + b.se_phi));
}

#[test]
fn whole_body_has_zero_flow() {
    let cube = Body::unit_cube(2).unwrap();
    let est = ergodic_flow(&cube, &Region::whole(), 5000, &Walk::CHAR, 4).unwrap();
    assert_eq!(est.p_s, 0.0);
    assert_eq!(est.pi_s, 1.0);
    let err = ergodic_flow(&cube, &Region::axis_cut(2, 0, 1e-6), 5000, &Walk::CHAR, 4).unwrap_err();
    assert!(matches!(err, Error::InsufficientSamples(_)));
}

#[test]
fn flows_are_reversible() {
    let body = Body::standard_simplex(3).unwrap();
    let a = Region::boxes(vec![AxisBox::new(vec![0.0, 0.0, 0.0], vec![0.3, 0.4, 0.5]).unwrap()]);
    let b = Region::boxes(vec![AxisBox::new(vec![0.35, 0.0, 0.1], vec![0.9, 0.3, 0.4]).unwrap()]);
    for walk in [Walk::CHAR, Walk::HAR] {
        let (ab, se_ab) = cross_flow(&body, &a, &b, 200_000, &walk, 5).unwrap();
        let (ba, se_ba) = cross_flow(&body, &b, &a, 200_000, &walk, 6).unwrap();
        assert!(ab > 0.0);
        assert!((ab - ba).abs() < 3.0 * (se_ab * se_ab + se_ba * se_ba).sqrt(), "{walk:?}: {ab} vs {ba}");
    }
}

#[test]
fn monte_carlo_step_matches_kernel() {
    let body = Body::standard_simplex(3).unwrap();
    let s = Region::halfspace(vec![0.3, -1.0, 0.5], 0.05).unwrap();
    let x = vec![0.2, 0.25, 0.1];
    let p = transition_prob(&body, &x, &s).unwrap();
    let mut rng = stream_rng(7, 0);
    let trials = 100_000;
    let mut hits = 0u32;
    for _ in 0..trials {
        let mut st = ChainState::new(&body, x.clone(), 0).unwrap();
        CoordinateHitAndRun::uniform().step(&body, &mut st, &mut rng).unwrap();
        hits += u32::from(s.contains(st.x()));
    }
    let freq = hits as f64 / trials as f64;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((freq - p).abs() < 3.0 * se, "freq={freq} p={p}");
}

#[test]
fn flow_is_deterministic_given_seed() {
    let body = make_lower_bound_body(3, 8.0).unwrap();
    let s = Region::axis_cut(3, 0, 4.0);
    let a = ergodic_flow(&body, &s, 20_000, &Walk::HAR, 9).unwrap();
    let b = ergodic_flow(&body, &s, 20_000, &Walk::HAR, 9).unwrap();
    assert_eq!(a, b);
    let json = serde_json::to_value(&a).unwrap();
    for key in ["p_S", "pi_S", "phi", "se_p", "se_pi", "n_samples", "seed"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn prism_conductance_decreases_with_length() {
    let mut last = f64::INFINITY;
    for d in [8.0, 16.0, 32.0] {
        let body = make_lower_bound_body(3, d).unwrap();
        let est = conductance(&body, &Region::axis_cut(3, 0, d / 2.0), 100_000, &Walk::CHAR, 10).unwrap();
        assert!(est.phi < last, "D={d}: {est:?}");
        last = est.phi;
    }
}

#[test]
fn ls93_values() {
    let b = ls93_bound(&BoundInputs { h_s: 0.1, s: 0.1, phi_s: 0.3, t: 0 }).unwrap();
    assert!((b.raw - 1.1).abs() < 1e-12);
    assert_eq!(b.value, 1.0);
    let flat = |t| ls93_bound(&BoundInputs { h_s: 0.2, s: 0.25, phi_s: 0.0, t }).unwrap().raw;
    assert_eq!(flat(0), flat(1000));
    let mut last = f64::INFINITY;
    for t in [0, 1, 10, 100, 1000, 100_000] {
        let v = ls93_bound(&BoundInputs { h_s: 0.05, s: 0.2, phi_s: 0.1, t }).unwrap().raw;
        assert!(v <= last);
        last = v;
    }
    assert!((last - 0.05).abs() < 1e-12);
    let direct = 0.05 + (0.05 / 0.2) * (1.0 - 0.01 / 2.0_f64).powi(37);
    let got = ls93_bound(&BoundInputs { h_s: 0.05, s: 0.2, phi_s: 0.1, t: 37 }).unwrap().raw;
    assert!((got - direct).abs() < 1e-12);
    assert!(ls93_bound(&BoundInputs { h_s: 0.1, s: 0.6, phi_s: 0.1, t: 1 }).is_err());
    assert!(ls93_bound(&BoundInputs { h_s: 1.1, s: 0.2, phi_s: 0.1, t: 1 }).is_err());
}

#[test]
fn mixing_budget_scaling() {
    let b = mixing_time_budget(5, 1.0).unwrap();
    assert!((mixing_time_budget(5, 2.0).unwrap() / b - 4.0).abs() < 1e-12);
    assert!(mixing_time_budget(10, 1.0).unwrap() / b >= 512.0);
    let one = mixing_time_budget(1, 1.0).unwrap();
    assert!(one.is_finite() && one > 0.0);
    assert!(mixing_time_budget(0, 1.0).is_err());
}

#[test]
fn s_conductance_picks_the_tightest_admissible_cut() {
    let body = Body::standard_simplex(2).unwrap();
    let cuts = vec![
        Region::axis_cut(2, 1, 0.3),
        Region::halfspace(vec![1.0, 1.0], 0.7).unwrap(),
        Region::axis_cut(2, 0, 0.02),
    ];
    let (i, est) = s_conductance_over_cuts(&body, &cuts, 0.1, 50_000, &Walk::CHAR, 11).unwrap().unwrap();
    let phis: Vec<f64> = cuts[..2]
        .iter()
        .enumerate()
        .map(|(k, c)| ergodic_flow(&body, c, 50_000, &Walk::CHAR, crate::rng::derive_seed(11, k as u64)).unwrap().phi)
        .collect();
    assert!(i < 2);
    assert_eq!(est.phi, phis[0].min(phis[1]));
}
