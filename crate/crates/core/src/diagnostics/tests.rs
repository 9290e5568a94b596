use super::*;

#[test]
fn coupon_small_cases() {
    let one = coupon_collector_check(1, 1000, 1).unwrap();
    assert_eq!(one.mean, 1.0);
    assert_eq!(one.ci_lo, one.ci_hi);
    let two = coupon_collector_check(2, 100_000, 2).unwrap();
    assert_eq!(two.expected, 3.0);
    assert!(two.ci_lo <= 3.0 && 3.0 <= two.ci_hi, "{two:?}");
    let ten = coupon_collector_check(10, 20_000, 3).unwrap();
    assert!(ten.ci_lo <= ten.expected && ten.expected <= ten.ci_hi, "{ten:?}");
    assert!(coupon_collector_check(0, 1000, 0).is_err());
    assert!(coupon_collector_check(3, 999, 0).is_err());
}

#[test]
fn cube_exactness_small() {
    let r = cube_exactness(3, 20_000, 20, 4).unwrap();
    assert!(r.covered > 15_000);
    assert!(r.ks_p.iter().all(|&p| p > 0.001), "{r:?}");
    assert!(r.tv_octants < 0.05);
}

fn ar1(rho: f64, len: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 0);
    let normal = rand_distr::StandardNormal;
    let scale = (1.0 - rho * rho).sqrt();
    let mut x = 0.0;
    (0..len)
        .map(|_| {
            x = rho * x + scale * rng.sample::<f64, _>(normal);
            x
        })
        .collect()
}

#[test]
fn ess_of_iid_draws() {
    let body = Body::unit_cube(2).unwrap();
    let t = iid_trajectory(&body, 10_000, 5).unwrap();
    for j in 0..2 {
        let ratio = ess(&t, j).unwrap() / 10_000.0;
        assert!((0.8..=1.2).contains(&ratio), "{ratio}");
    }
    assert!(ess(&t, 2).is_err());
}

#[test]
fn ess_of_constant_series_is_floored() {
    let e = ess_series(&[0.3; 500]).unwrap();
    assert_eq!(e.ess, ESS_FLOOR);
    assert!(e.tau.is_finite());
}

#[test]
fn ar1_autocorrelation_time() {
    // τ = (1 + ρ)/(1 − ρ) for a stationary AR(1) series.
    let x = ar1(0.9, 400_000, 6);
    let e = ess_series(&x).unwrap();
    assert!((e.tau / 19.0 - 1.0).abs() < 0.1, "{e:?}");
}

#[test]
fn thinning_scales_autocorrelation_time() {
    let x = ar1(0.99, 1_000_000, 7);
    let full = ess_series(&x).unwrap().tau;
    let thin: Vec<f64> = x.iter().step_by(10).copied().collect();
    let thinned = ess_series(&thin).unwrap().tau;
    assert!((10.0 * thinned / full - 1.0).abs() < 0.2, "{full} {thinned}");
}

#[test]
fn lower_bound_table_shape() {
    let t = lower_bound_experiment(&[2], &[4.0, 8.0, 16.0], 20_000, 8).unwrap();
    assert_eq!(t.rows.len(), 6);
    assert_eq!(t.fits.len(), 2);
    let char_fit = t.fits.iter().find(|f| f.walk == "char").unwrap();
    assert!(char_fit.slope < -0.5, "{char_fit:?}");
    for r in &t.rows {
        assert!((r.pi_s - 0.5).abs() < 0.02);
    }
    assert!(lower_bound_experiment(&[3], &[4.0], 10_000, 0).is_err());
    assert!(lower_bound_experiment(&[9], &[40.0], 10_000, 0).is_err());
}

#[test]
fn replica_doubling_shrinks_stderr() {
    let cube = Body::unit_cube(3).unwrap();
    let bins = Binning::over_body(&cube, 2).unwrap();
    let start = StartSpec::Point { x: vec![0.1; 3] };
    let ts = [2, 4];
    let a = mixing_curve(&cube, &Walk::CHAR, &ts, 4000, &start, &bins, 9).unwrap();
    let b = mixing_curve(&cube, &Walk::CHAR, &ts, 8000, &start, &bins, 9).unwrap();
    for i in 0..ts.len() {
        let r = b.stderr[i] / a.stderr[i];
        assert!((r * 2f64.sqrt() - 1.0).abs() < 0.3, "{r}");
    }
}
