use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::geometry::Chord;

/// One-dimensional density along a line, in the line's `t` parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LineDensity {
    Uniform,
    Gaussian { mean: f64, sigma: f64 },
}

/// Draws `t ∈ [t_lo, t_hi]` from `density` restricted to the chord. A
/// zero-length chord returns `t_lo`.
pub fn line_resample<R: Rng + ?Sized>(chord: &Chord, density: &LineDensity, rng: &mut R) -> f64 {
    let width = chord.t_hi - chord.t_lo;
    if width <= 0.0 {
        return chord.t_lo;
    }
    match *density {
        LineDensity::Uniform => {
            let u: f64 = rng.random();
            (chord.t_lo + u * width).min(chord.t_hi)
        }
        LineDensity::Gaussian { mean, sigma } => {
            assert!(sigma > 0.0, "Gaussian line density needs sigma > 0");
            let a = (chord.t_lo - mean) / sigma;
            let b = (chord.t_hi - mean) / sigma;
            let z = truncated_standard_normal(a, b, rng);
            (mean + sigma * z).clamp(chord.t_lo, chord.t_hi)
        }
    }
}

/// Beyond this standardized distance the upper-tail probabilities underflow
/// and sampling switches to an exact exponential-proposal rejection step.
const FAR_TAIL: f64 = 30.0;

/// Standard normal truncated to `[a, b]`.
pub fn truncated_standard_normal<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    debug_assert!(a <= b);
    if a >= FAR_TAIL {
        return far_tail(a, b, rng);
    }
    if b <= -FAR_TAIL {
        return -far_tail(-b, -a, rng);
    }
    let u: f64 = rng.random();
    truncated_normal_quantile(a, b, u)
}

/// Inverse CDF of the standard normal truncated to `[a, b]` at level `u`.
///
/// Uses upper-tail probabilities `Q(x) = erfc(x/√2)/2` when the interval
/// lies to the right of zero (and the mirror image to the left), so the
/// subtraction `Q(a) − Q(b)` never cancels for tail intervals.
pub fn truncated_normal_quantile(a: f64, b: f64, u: f64) -> f64 {
    let sqrt2 = std::f64::consts::SQRT_2;
    let x = if a >= 0.0 {
        let qa = 0.5 * erfc(a / sqrt2);
        let qb = 0.5 * erfc(b / sqrt2);
        let q = qa - u * (qa - qb);
        sqrt2 * erfc_inv(2.0 * q)
    } else if b <= 0.0 {
        -truncated_normal_quantile(-b, -a, 1.0 - u)
    } else {
        let pa = 0.5 * erfc(-a / sqrt2);
        let pb = 0.5 * erfc(-b / sqrt2);
        let p = pa + u * (pb - pa);
        -sqrt2 * erfc_inv(2.0 * p)
    };
    if x.is_nan() {
        a
    } else {
        x.clamp(a, b)
    }
}

fn far_tail<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    // Proposal density ∝ a·exp(−a (x − a)) on [a, b]; acceptance
    // exp(−(x − a)²/2) makes the result exact.
    let span = b - a;
    let cap = -(-a * span).exp_m1();
    loop {
        let u: f64 = rng.random();
        let x = a - (-u * cap).ln_1p() / a;
        let v: f64 = rng.random();
        if v <= (-(x - a).powi(2) / 2.0).exp() {
            return x.min(b);
        }
    }
}
