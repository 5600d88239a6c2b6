//! Decoherence factors of the two-qubit dephasing map.
//!
//! Every factor is a wavenumber integral of the kernel
//!
//! ```text
//! W(k) = (2 g_AB² n₀/π²) · k² e^{−k²/2} / (E (ε + 2u))
//! ```
//!
//! times a geometric factor and a time dependence:
//!
//! | quantity | integrand |
//! |---|---|
//! | `Γ₀(t)` | `W · coth(E/2θ) · G · sin²(E t/2)` |
//! | `δ(t)`  | `W · coth(E/2θ) · g_× · sin²(E t/2)` |
//! | `Π_zz(t)` | `−½ W · g_× · (E t − sin E t)` |
//!
//! with `G = geometric_single` and `g_× = geometric_cross`. Rates replace
//! `sin²(E t/2)` by `(E/2) sin(E t)`; stationary values replace it by `1/2`.
//! `Γ± = 2Γ₀ ± δ`.
//!
//! `Π_zz` is the conditional phase of the effective `σ_z σ_z` coupling. A
//! coherence between basis states `a`, `b` with `σ_z σ_z` eigenvalues `z_a`,
//! `z_b` acquires `exp(i Π_zz (z_a − z_b)/4)`. It follows from the exact
//! displaced-oscillator solution of each mode and does not depend on θ.

mod oracle;
mod profile;

pub use oracle::{discrete_bath_oracle, discrete_bath_oracle_checked, OracleEstimate};
pub use profile::{build_profile, grid, DecoherenceProfile, ProfileRates, ProfileSample};

use crate::bogoliubov::{geometric_cross, geometric_single, group_velocity, thermal_factor};
use crate::error::{domain, Result};
use crate::params::ReservoirParams;
use crate::quadrature::{self, Estimate, Options};

/// Nominal upper wavenumber. The Gaussian cutoff makes everything beyond it
/// negligible; [`k_cut`] trims it further for a given tolerance.
pub const K_MAX: f64 = 10.0;

/// Default relative quadrature tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Largest panel width in k.
const MAX_PANEL: f64 = 0.25;

/// Upper limit of integration for tolerance `tol`: the point beyond which
/// `k⁴ e^{−k²/2}` stays below `1e-3 · tol`.
pub fn k_cut(tol: f64) -> f64 {
    let target = 1e-3 * tol.max(1e-16);
    let mut k = 4.0;
    while k < K_MAX && k.powi(4) * (-0.5 * k * k).exp() > target {
        k += 0.05;
    }
    k.min(K_MAX)
}

/// Which decoherence factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Single-qubit factor `Γ₀`.
    Zero,
    /// `Γ₊ = 2Γ₀ + δ`.
    Plus,
    /// `Γ₋ = 2Γ₀ − δ`.
    Minus,
}

/// Geometric factor used by [`bracket_factor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Single,
    Cross,
    /// `2G + g_×`.
    Plus,
    /// `2G − g_×`.
    Minus,
}

/// Per-wavenumber factors that do not depend on time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Statics {
    pub energy: f64,
    /// `W`.
    pub w: f64,
    /// `W · coth(E/2θ)`.
    pub w_thermal: f64,
    pub single: f64,
    pub cross: f64,
}

impl Statics {
    const ZERO: Statics = Statics {
        energy: 0.0,
        w: 0.0,
        w_thermal: 0.0,
        single: 0.0,
        cross: 0.0,
    };
}

pub(crate) fn statics(p: &ReservoirParams, pref: f64, k: f64) -> Statics {
    if k <= 0.0 {
        return Statics::ZERO;
    }
    let s = (0.25 * k * k + p.u).sqrt();
    let e = k * s;
    // k² e^{−k²/2} / (E (ε + 2u)) with E = k s
    let w = pref * k * (-0.5 * k * k).exp() / (s * (0.5 * k * k + 2.0 * p.u));
    let coth = thermal_factor(e, p.theta);
    Statics {
        energy: e,
        w,
        w_thermal: w * coth,
        single: geometric_single(k, p.l_sep),
        cross: geometric_cross(k, p.d_sep, p.l_sep),
    }
}

/// `x − sin x` without cancellation at small `x`.
pub(crate) fn x_minus_sin(x: f64, sin_x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        x - sin_x
    }
}

/// Number of integrated components.
pub(crate) const NCOMP: usize = 6;

/// Component layout of the time-dependent integrand.
pub(crate) mod comp {
    pub const GAMMA0: usize = 0;
    pub const DELTA: usize = 1;
    pub const RATE0: usize = 2;
    pub const RATE_DELTA: usize = 3;
    pub const PI_ZZ: usize = 4;
    pub const PI_RATE: usize = 5;
}

#[inline]
pub(crate) fn components(st: &Statics, t: f64) -> [f64; NCOMP] {
    let (s, c) = (0.5 * st.energy * t).sin_cos();
    components_with(st, t, s, c)
}

/// [`components`] given `(s, c) = (sin, cos)(E t/2)`.
#[inline]
pub(crate) fn components_with(st: &Statics, t: f64, s: f64, c: f64) -> [f64; NCOMP] {
    let x = st.energy * t;
    let s2 = s * s;
    let sc = s * c;
    let sin_x = 2.0 * sc;
    let wc = st.w_thermal;
    [
        wc * st.single * s2,
        wc * st.cross * s2,
        wc * st.single * st.energy * sc,
        wc * st.cross * st.energy * sc,
        -0.5 * st.w * st.cross * x_minus_sin(x, sin_x),
        -st.w * st.cross * st.energy * s2,
    ]
}

/// Panel boundaries on `[0, k_end]`. Widths are at most [`MAX_PANEL`], half
/// an oscillation period `π/(t · dE/dk)` of the time dependence and half a
/// period `π/(2(D + L))` of the geometric factors.
pub(crate) fn breaks(p: &ReservoirParams, t: f64, k_end: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut k = 0.0;
    let mut h_geo = MAX_PANEL.min(std::f64::consts::PI / (2.0 * p.l_sep));
    if p.d_sep.is_finite() {
        h_geo = h_geo.min(std::f64::consts::PI / (2.0 * (p.d_sep + p.l_sep)));
    }
    while k < k_end {
        let mut h = h_geo;
        if t > 0.0 {
            h = h.min(std::f64::consts::PI / (t * group_velocity(k, p.u)));
            h = h.min(std::f64::consts::PI / (t * group_velocity(k + h, p.u)));
        }
        k = (k + h).min(k_end);
        if k_end - k < 1e-3 * h {
            k = k_end;
        }
        out.push(k);
    }
    out
}

fn check_inputs(t: f64, p: &ReservoirParams, tol: f64) -> Result<()> {
    p.validate()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(domain(format!("time must be finite and >= 0, got {t}")));
    }
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be > 0, got {tol}")));
    }
    Ok(())
}

/// All time-dependent factors at one time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Factors {
    pub gamma0: f64,
    pub delta: f64,
    /// `dΓ₀/dt`.
    pub rate0: f64,
    /// `dδ/dt`.
    pub rate_delta: f64,
    pub pi_zz: f64,
    /// `dΠ_zz/dt`.
    pub pi_rate: f64,
}

impl Factors {
    pub(crate) fn from_components(v: &[f64; NCOMP]) -> Self {
        Self {
            gamma0: v[comp::GAMMA0],
            delta: v[comp::DELTA],
            rate0: v[comp::RATE0],
            rate_delta: v[comp::RATE_DELTA],
            pi_zz: v[comp::PI_ZZ],
            pi_rate: v[comp::PI_RATE],
        }
    }

    pub fn gamma(&self, ch: Channel) -> f64 {
        match ch {
            Channel::Zero => self.gamma0,
            Channel::Plus => 2.0 * self.gamma0 + self.delta,
            Channel::Minus => 2.0 * self.gamma0 - self.delta,
        }
    }

    pub fn rate(&self, ch: Channel) -> f64 {
        match ch {
            Channel::Zero => self.rate0,
            Channel::Plus => 2.0 * self.rate0 + self.rate_delta,
            Channel::Minus => 2.0 * self.rate0 - self.rate_delta,
        }
    }
}

/// Adaptive evaluation of every component at time `t`.
pub(crate) fn integrate_components(p: &ReservoirParams, t: f64, tol: f64) -> Result<Estimate<NCOMP>> {
    let pref = p.prefactor();
    let br = breaks(p, t, k_cut(tol));
    quadrature::integrate(|k| components(&statics(p, pref, k), t), &br, &Options::new(tol))
}

/// `Γ₀`, `δ`, their rates, `Π_zz` and its rate at time `t`, each to relative
/// tolerance `tol` (measured against the integral of the absolute integrand).
pub fn factors(t: f64, p: &ReservoirParams, tol: f64) -> Result<Factors> {
    check_inputs(t, p, tol)?;
    if t == 0.0 {
        return Ok(Factors::default());
    }
    let est = integrate_components(p, t, tol)?;
    Ok(Factors::from_components(&est.value))
}

pub fn gamma0(t: f64, p: &ReservoirParams, tol: f64) -> Result<f64> {
    factors(t, p, tol).map(|f| f.gamma0)
}

/// Cross-talk factor; may be negative.
pub fn delta(t: f64, p: &ReservoirParams, tol: f64) -> Result<f64> {
    factors(t, p, tol).map(|f| f.delta)
}

/// `(Γ₊, Γ₋)`.
pub fn gamma_pm(t: f64, p: &ReservoirParams, tol: f64) -> Result<(f64, f64)> {
    factors(t, p, tol).map(|f| (f.gamma(Channel::Plus), f.gamma(Channel::Minus)))
}

/// Time derivative of the chosen factor.
pub fn gamma_rate(t: f64, p: &ReservoirParams, tol: f64, which: Channel) -> Result<f64> {
    factors(t, p, tol).map(|f| f.rate(which))
}

pub fn pi_zz(t: f64, p: &ReservoirParams, tol: f64) -> Result<f64> {
    factors(t, p, tol).map(|f| f.pi_zz)
}

/// Integrate one geometric bracket directly, without assembling it from
/// `Γ₀` and `δ`.
pub fn bracket_factor(t: f64, p: &ReservoirParams, tol: f64, geometry: Geometry) -> Result<f64> {
    check_inputs(t, p, tol)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let pref = p.prefactor();
    let br = breaks(p, t, k_cut(tol));
    let est = quadrature::integrate(
        |k| {
            let st = statics(p, pref, k);
            let g = match geometry {
                Geometry::Single => st.single,
                Geometry::Cross => st.cross,
                Geometry::Plus => 2.0 * st.single + st.cross,
                Geometry::Minus => 2.0 * st.single - st.cross,
            };
            let s = (0.5 * st.energy * t).sin();
            [st.w_thermal * g * s * s]
        },
        &br,
        &Options::new(tol),
    )?;
    Ok(est.value[0])
}

/// Stationary values `(Γ₀(∞), δ(∞))`.
pub fn stationary(p: &ReservoirParams, tol: f64) -> Result<(f64, f64)> {
    check_inputs(0.0, p, tol)?;
    let pref = p.prefactor();
    let br = breaks(p, 0.0, k_cut(tol));
    let est = quadrature::integrate(
        |k| {
            let st = statics(p, pref, k);
            [0.5 * st.w_thermal * st.single, 0.5 * st.w_thermal * st.cross]
        },
        &br,
        &Options::new(tol),
    )?;
    Ok((est.value[0], est.value[1]))
}

/// Long-time limit of the chosen factor: the time average of its integrand.
pub fn gamma_infinity(p: &ReservoirParams, tol: f64, which: Channel) -> Result<f64> {
    let (g0, d) = stationary(p, tol)?;
    Ok(match which {
        Channel::Zero => g0,
        Channel::Plus => 2.0 * g0 + d,
        Channel::Minus => 2.0 * g0 - d,
    })
}

/// Integrand of `Γ₀` at one `(k, t)`; exposed for kernel property checks.
pub fn gamma0_integrand(k: f64, t: f64, p: &ReservoirParams) -> f64 {
    components(&statics(p, p.prefactor(), k), t)[comp::GAMMA0]
}

/// Wavenumber-resolved kernel `W(k)` without thermal weight.
pub fn kernel(k: f64, p: &ReservoirParams) -> f64 {
    statics(p, p.prefactor(), k).w
}
