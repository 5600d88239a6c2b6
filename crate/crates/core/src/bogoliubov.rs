//! Bogoliubov dispersion, thermal occupation weight and the interference
//! factors of the double-well geometry.
//!
//! `ε = k²/2` is the free-boson energy in the dimensionless units of
//! [`crate::params`].

use crate::error::{domain, Result};

/// One point of the excitation spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub k: f64,
    pub eps: f64,
    pub energy: f64,
}

/// `E(k) = sqrt(ε(ε + 2u))`, computed as `k·sqrt(k²/4 + u)` to keep full
/// relative precision near `k = 0`.
pub fn dispersion(k: f64, u: f64) -> Result<DispersionPoint> {
    if !(k >= 0.0) || !(u >= 0.0) {
        return Err(domain(format!("dispersion needs k >= 0 and u >= 0, got k={k}, u={u}")));
    }
    Ok(DispersionPoint {
        k,
        eps: 0.5 * k * k,
        energy: energy(k, u),
    })
}

#[inline]
pub(crate) fn energy(k: f64, u: f64) -> f64 {
    k * (0.25 * k * k + u).sqrt()
}

/// `dE/dk`.
#[inline]
pub(crate) fn group_velocity(k: f64, u: f64) -> f64 {
    let s = (0.25 * k * k + u).sqrt();
    s + 0.25 * k * k / s
}

const COTH_SERIES_BELOW: f64 = 1e-4;

/// `coth(E/2θ)`. Equal to 1 at `θ = 0`, infinite at `E = 0 < θ`.
pub fn thermal_factor(energy: f64, theta: f64) -> f64 {
    if theta == 0.0 {
        return 1.0;
    }
    if energy == 0.0 {
        return f64::INFINITY;
    }
    let x = energy / (2.0 * theta);
    if x < COTH_SERIES_BELOW {
        1.0 / x + x / 3.0
    } else if x > 20.0 {
        // coth x − 1 = 2e^{−2x}/(1 − e^{−2x}) < 1e-17
        1.0 + 2.0 * (-2.0 * x).exp()
    } else {
        1.0 / x.tanh()
    }
}

const SINC_SERIES_BELOW: f64 = 1e-4;

/// `sin(x)/x`, equal to 1 at the origin.
pub fn sinc2(x: f64) -> f64 {
    let ax = x.abs();
    if ax < SINC_SERIES_BELOW {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    } else if ax.is_infinite() {
        0.0
    } else {
        x.sin() / x
    }
}

/// `1 − sin(x)/x`, accurate for small arguments.
fn one_minus_sinc(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 0.1 {
        let x2 = x * x;
        // x²/6 − x⁴/120 + x⁶/5040 − x⁸/362880
        x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        1.0 - sinc2(x)
    }
}

/// `1 − sinc(2kL)`: interference inside one double well.
pub fn geometric_single(k: f64, l_sep: f64) -> f64 {
    one_minus_sinc(2.0 * k * l_sep)
}

/// `−2 sinc(2kD) + sinc(2k(D+L)) + sinc(2k(D−L))`: interference between the
/// two double wells. Zero when `D` is infinite.
pub fn geometric_cross(k: f64, d_sep: f64, l_sep: f64) -> f64 {
    if d_sep.is_infinite() {
        return 0.0;
    }
    if k == 0.0 {
        return 0.0;
    }
    let a = 2.0 * k * d_sep;
    let b = 2.0 * k * l_sep;
    // Written as differences of (1 − sinc) so that the k → 0 cancellation
    // keeps its relative precision.
    2.0 * one_minus_sinc(a) - one_minus_sinc(a + b) - one_minus_sinc(a - b)
}
