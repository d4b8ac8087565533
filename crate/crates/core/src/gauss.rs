//! Standard normal helpers evaluated in the log domain.
//!
//! The one-bit probit likelihood needs `phi(z)/Phi(z)` (the inverse Mills
//! ratio) far into both tails: for large positive `z` it underflows quietly
//! to zero, for large negative `z` it grows like `-z`.

use std::f64::consts::{PI, SQRT_2};

use libm::erfc;

/// Below this argument the asymptotic expansion replaces `erfc`.
const ASYMPTOTIC_CUTOFF: f64 = -30.0;

#[inline]
pub fn ln_pdf(z: f64) -> f64 {
    -0.5 * z * z - 0.5 * (2.0 * PI).ln()
}

/// `phi(z)/Phi(z)` for `z < ASYMPTOTIC_CUTOFF`, from the tail series of
/// `Phi(-t) = phi(t)/t * (1 - 1/t^2 + 3/t^4 - ...)`.
fn mills_asymptotic(z: f64) -> f64 {
    let t = -z;
    let u = 1.0 / (t * t);
    // t + 1/t - 2/t^3 + 10/t^5 - 74/t^7 + 706/t^9 - 8162/t^11
    t + (1.0 / t) * (1.0 + u * (-2.0 + u * (10.0 + u * (-74.0 + u * (706.0 - 8162.0 * u)))))
}

/// `ln Phi(z)`.
pub fn ln_cdf(z: f64) -> f64 {
    if z >= 0.0 {
        (-0.5 * erfc(z / SQRT_2)).ln_1p()
    } else if z >= ASYMPTOTIC_CUTOFF {
        (0.5 * erfc(-z / SQRT_2)).ln()
    } else {
        ln_pdf(z) - mills_asymptotic(z).ln()
    }
}

/// Inverse Mills ratio `phi(z)/Phi(z)`.
pub fn inverse_mills(z: f64) -> f64 {
    if z < ASYMPTOTIC_CUTOFF {
        mills_asymptotic(z)
    } else {
        (ln_pdf(z) - ln_cdf(z)).exp()
    }
}
