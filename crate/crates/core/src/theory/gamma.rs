//! Complex Gamma function.
//!
//! Arguments with `Re z < 1/2` go through the reflection formula; the rest
//! are shifted up by the recurrence until `|z|` is large enough for the
//! Stirling series to converge to double precision.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Distance to the nearest pole below which evaluation is refused.
pub const POLE_GUARD: f64 = 1e-8;

// B_{2k} / (2k (2k-1)) for k = 1..=10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

const SHIFT_TARGET: f64 = 18.0;

/// Distance from `z` to the nearest non-positive integer.
pub fn pole_distance(z: Complex64) -> f64 {
    if z.re > 0.5 {
        return f64::INFINITY;
    }
    let k = z.re.round().min(0.0);
    Complex64::new(z.re - k, z.im).norm()
}

/// `Γ(z)`, refusing arguments within [`POLE_GUARD`] of a pole.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    let distance = pole_distance(z);
    if distance < POLE_GUARD {
        return Err(Error::GammaPole { distance });
    }
    Ok(gamma_unchecked(z))
}

fn gamma_unchecked(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (z * PI).sin();
        return PI / (s * gamma_unchecked(1.0 - z));
    }
    let mut w = z;
    let mut product = Complex64::new(1.0, 0.0);
    while w.norm() < SHIFT_TARGET {
        product *= w;
        w += 1.0;
    }
    ln_gamma_stirling(w).exp() / product
}

/// Stirling series for `ln Γ(w)`, valid for large `|w|` with `Re w > 0`.
fn ln_gamma_stirling(w: Complex64) -> Complex64 {
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut term = inv;
    let mut series = Complex64::new(0.0, 0.0);
    for c in STIRLING {
        series += term * c;
        term *= inv2;
    }
    (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series
}
