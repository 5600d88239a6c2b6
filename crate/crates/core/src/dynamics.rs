//! Exact dephasing map, the equivalent time-local master equation, and
//! divisibility diagnostics.
//!
//! Populations never change. The coherence between basis states `a ≠ b` is
//! multiplied by `exp(−Γ_ab(t) + i m_ab Π_zz(t))`:
//!
//! | pair | factor | `m_ab` |
//! |---|---|---|
//! | `(LL,RR)` | `Γ₋` | 0 |
//! | `(LR,RL)` | `Γ₊` | 0 |
//! | single flips | `Γ₀` | `(z_a − z_b)/4 = ±1/2` |
//!
//! where `z = (+1, −1, −1, +1)` are the `σ_z σ_z` eigenvalues. Local phase
//! shifts are dropped: they are local unitaries.

use num_complex::Complex64;

use crate::decoherence::{Channel, DecoherenceProfile};
use crate::error::{domain, Error, Result};
use crate::state::{hermitian_part, Mat4, TwoQubitState};

/// `σ_z σ_z` eigenvalues in basis order.
pub const ZZ: [f64; 4] = [1.0, -1.0, -1.0, 1.0];
/// `σ_z` eigenvalues of qubit a and qubit b.
const ZA: [f64; 4] = [1.0, 1.0, -1.0, -1.0];
const ZB: [f64; 4] = [1.0, -1.0, 1.0, -1.0];

/// Decay channel and phase multiplier of coherence `(i, j)`, `i ≠ j`.
pub fn element_assignment(i: usize, j: usize) -> (Channel, f64) {
    assert!(i < 4 && j < 4 && i != j, "off-diagonal index pair required");
    let phase = (ZZ[i] - ZZ[j]) / 4.0;
    let ch = match (i.min(j), i.max(j)) {
        (0, 3) => Channel::Minus,
        (1, 2) => Channel::Plus,
        _ => Channel::Zero,
    };
    (ch, phase)
}

/// Apply the map with explicit factors.
pub fn apply_factors(rho0: &TwoQubitState, gamma0: f64, gamma_plus: f64, gamma_minus: f64, pi_zz: f64) -> TwoQubitState {
    let mut rho = *rho0.matrix();
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let (ch, m) = element_assignment(i, j);
            let g = match ch {
                Channel::Zero => gamma0,
                Channel::Plus => gamma_plus,
                Channel::Minus => gamma_minus,
            };
            let factor = if m == 0.0 {
                Complex64::new((-g).exp(), 0.0)
            } else {
                Complex64::from_polar((-g).exp(), m * pi_zz)
            };
            rho[(i, j)] *= factor;
        }
    }
    TwoQubitState::from_matrix_unchecked(rho)
}

/// `ρ(t)` from `ρ(0)`, with profile values interpolated linearly in t.
pub fn apply_map(rho0: &TwoQubitState, profile: &DecoherenceProfile, t: f64) -> Result<TwoQubitState> {
    let s = profile.sample(t)?;
    Ok(apply_factors(rho0, s.gamma0, s.gamma_plus, s.gamma_minus, s.pi_zz))
}

/// Generator of the master equation:
///
/// ```text
/// dρ/dt = (r₊/8) D[σ_z^a − σ_z^b]ρ + (r₋/8) D[σ_z^a + σ_z^b]ρ + i[(π̇/4) σ_z^a σ_z^b, ρ]
/// ```
///
/// with `D[A]ρ = AρA − ½{A², ρ}`. The sign of the commutator term makes its
/// phase match the map's `exp(+i m_ab Π_zz)`.
pub fn me_rhs(rho: &Mat4, rate_plus: f64, rate_minus: f64, pi_rate: f64) -> Mat4 {
    let diag = |v: [f64; 4]| Mat4::from_diagonal(&nalgebra::Vector4::from(v.map(|x| Complex64::new(x, 0.0))));
    let minus = diag(std::array::from_fn(|i| ZA[i] - ZB[i]));
    let plus = diag(std::array::from_fn(|i| ZA[i] + ZB[i]));
    let zz = diag(ZZ);
    let dissipator = |a: &Mat4| {
        let a2 = a * a;
        a * rho * a - (a2 * rho + rho * a2) * Complex64::new(0.5, 0.0)
    };
    let mut out = dissipator(&minus) * Complex64::new(rate_plus / 8.0, 0.0)
        + dissipator(&plus) * Complex64::new(rate_minus / 8.0, 0.0);
    if pi_rate != 0.0 {
        let h = zz * Complex64::new(pi_rate / 4.0, 0.0);
        out += (h * rho - rho * h) * Complex64::new(0.0, 1.0);
    }
    out
}

/// Settings for [`integrate_me`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeOptions {
    /// Local error bound per unit time.
    pub error_per_time: f64,
    /// Include the `σ_z σ_z` phase generator.
    pub phase_generator: bool,
    /// Smallest step before giving up, relative to `max(1, t)`.
    pub min_step: f64,
}

impl Default for MeOptions {
    fn default() -> Self {
        Self {
            error_per_time: 1e-9,
            phase_generator: true,
            min_step: 1e-13,
        }
    }
}

/// States of an integrated trajectory at the profile grid points in
/// `[0, t_end]`, plus `t_end` itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub states: Vec<TwoQubitState>,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn max_abs(m: &Mat4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Integrate the master equation from `rho0` to `t_end` with rates taken
/// from the profile's Hermite interpolant.
///
/// Steps never straddle a profile grid point. With the default options the
/// state at each grid point agrees with [`apply_map`] to well below `1e-6`.
pub fn integrate_me(
    rho0: &TwoQubitState,
    profile: &DecoherenceProfile,
    t_end: f64,
    opts: &MeOptions,
) -> Result<Trajectory> {
    if !(t_end >= 0.0) || t_end > profile.t_max() {
        return Err(Error::OutOfRange {
            t: t_end,
            lo: 0.0,
            hi: profile.t_max(),
        });
    }
    if !(opts.error_per_time > 0.0) {
        return Err(domain("error_per_time must be > 0"));
    }
    let rhs = |t: f64, rho: &Mat4| -> Result<Mat4> {
        let r = profile.hermite_rates(t)?;
        let pi_rate = if opts.phase_generator { r.pi_rate } else { 0.0 };
        Ok(me_rhs(rho, r.rate_plus, r.rate_minus, pi_rate))
    };
    let mut stops: Vec<f64> = profile.t_grid().iter().copied().filter(|&t| t > 0.0 && t < t_end).collect();
    if t_end > 0.0 {
        stops.push(t_end);
    }
    let mut rho = *rho0.matrix();
    let mut t = 0.0;
    let mut out_t = vec![0.0];
    let mut out_s = vec![rho0.clone()];
    let mut h = stops.first().map_or(0.0, |s| 0.1 * s);
    for &stop in &stops {
        while t < stop {
            let mut step = h.min(stop - t);
            let last = step >= stop - t;
            let mut k: [Mat4; 7] = [Mat4::zeros(); 7];
            k[0] = rhs(t, &rho)?;
            for s in 1..7 {
                let mut y = rho;
                for (a, kk) in A[s].iter().zip(&k[..s]) {
                    if *a != 0.0 {
                        y += kk * Complex64::new(step * a, 0.0);
                    }
                }
                let ts = if s == 6 || last && C[s] == 1.0 { stop.min(t + step) } else { t + C[s] * step };
                k[s] = rhs(ts, &y)?;
            }
            let mut y5 = rho;
            let mut err = Mat4::zeros();
            for s in 0..7 {
                if B5[s] != 0.0 {
                    y5 += k[s] * Complex64::new(step * B5[s], 0.0);
                }
                err += k[s] * Complex64::new(step * (B5[s] - B4[s]), 0.0);
            }
            let e = max_abs(&err);
            let bound = opts.error_per_time * step;
            if e <= bound {
                t = if last { stop } else { t + step };
                rho = y5;
            }
            let factor = if e == 0.0 { 5.0 } else { (0.9 * (bound / e).powf(0.25)).clamp(0.2, 5.0) };
            if e > bound {
                step *= factor.min(0.9);
                if step < opts.min_step * t.max(1.0) {
                    return Err(Error::Integration {
                        t,
                        message: format!("step size {step:e} underflow (error {e:e})"),
                    });
                }
                h = step;
                continue;
            }
            h = (step * factor).max(opts.min_step * t.max(1.0));
        }
        out_t.push(stop);
        out_s.push(TwoQubitState::from_matrix_unchecked(hermitian_part(&rho)));
    }
    Ok(Trajectory { t: out_t, states: out_s })
}

/// Negative-rate intervals and the complete-positivity flag of a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct NonMarkovReport {
    pub negative_plus: Vec<(f64, f64)>,
    pub negative_minus: Vec<(f64, f64)>,
    /// All `Γ±` on the grid are `≥ −1e-9`.
    pub completely_positive: bool,
    pub min_gamma: f64,
}

impl NonMarkovReport {
    pub fn is_divisible(&self) -> bool {
        self.negative_plus.is_empty() && self.negative_minus.is_empty()
    }
}

/// Smallest `Γ±` tolerated by the complete-positivity check.
pub const CP_TOL: f64 = 1e-9;

fn bisect_rate(profile: &DecoherenceProfile, ch: Channel, mut lo: f64, mut hi: f64) -> f64 {
    let rate = |t: f64| {
        let r = profile.hermite_rates(t).expect("inside grid");
        match ch {
            Channel::Plus => r.rate_plus,
            _ => r.rate_minus,
        }
    };
    let neg_lo = rate(lo) < 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if (rate(mid) < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn negative_intervals(profile: &DecoherenceProfile, ch: Channel) -> Vec<(f64, f64)> {
    let t = profile.t_grid();
    let r = profile.rate(ch);
    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    for i in 0..t.len() {
        let neg = r[i] < 0.0;
        match (start, neg) {
            (None, true) => {
                start = Some(if i == 0 { 0.0 } else { bisect_rate(profile, ch, t[i - 1], t[i]) });
            }
            (Some(s), false) => {
                out.push((s, bisect_rate(profile, ch, t[i - 1], t[i])));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, *t.last().unwrap()));
    }
    out
}

pub fn non_markov_report(profile: &DecoherenceProfile) -> NonMarkovReport {
    let min_gamma = profile
        .gamma_plus()
        .iter()
        .chain(profile.gamma_minus())
        .copied()
        .fold(f64::INFINITY, f64::min);
    NonMarkovReport {
        negative_plus: negative_intervals(profile, Channel::Plus),
        negative_minus: negative_intervals(profile, Channel::Minus),
        completely_positive: min_gamma >= -CP_TOL,
        min_gamma,
    }
}

/// Modulus gain of the intermediate map from `t1` to `t2` on coherences of
/// the given channel, `exp(Γ(t1) − Γ(t2))`. A value above 1 cannot come from
/// a completely positive dephasing propagator.
pub fn propagator_gain(profile: &DecoherenceProfile, ch: Channel, t1: f64, t2: f64) -> Result<f64> {
    let a = profile.sample(t1)?.gamma(ch);
    let b = profile.sample(t2)?.gamma(ch);
    Ok((a - b).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoherence::{build_profile, grid};
    use crate::params::presets;
    use crate::state::{make_product_plus, make_werner, Sign};

    fn max_dev(a: &Mat4, b: &Mat4) -> f64 {
        max_abs(&(a - b))
    }

    #[test]
    fn assignment_table() {
        assert_eq!(element_assignment(0, 3), (Channel::Minus, 0.0));
        assert_eq!(element_assignment(3, 0), (Channel::Minus, 0.0));
        assert_eq!(element_assignment(1, 2), (Channel::Plus, 0.0));
        assert_eq!(element_assignment(0, 1), (Channel::Zero, 0.5));
        assert_eq!(element_assignment(1, 0), (Channel::Zero, -0.5));
        assert_eq!(element_assignment(2, 3), (Channel::Zero, -0.5));
        assert_eq!(element_assignment(0, 2), (Channel::Zero, 0.5));
    }

    #[test]
    fn map_edges() {
        let prof = build_profile(&presets::benchmark(), &grid::uniform(1.0, 0.1).unwrap(), 1e-8).unwrap();
        let rho = make_product_plus();
        assert_eq!(apply_map(&rho, &prof, 0.0).unwrap(), rho);
        let full = apply_factors(&rho, 800.0, 800.0, 800.0, 1.0);
        assert!(max_dev(full.matrix(), &(Mat4::identity() * Complex64::new(0.25, 0.0))) < 1e-300);
        let w = make_werner(0.8, Sign::Plus).unwrap();
        let out = apply_factors(&w, 0.0, 0.0, std::f64::consts::LN_2, 0.0);
        assert!((out.get(0, 3).re - 0.2).abs() < 1e-15);
        assert_eq!(out.populations(), w.populations());
        assert!(apply_map(&rho, &prof, 1.5).is_err());
    }

    #[test]
    fn generator_bookkeeping() {
        let rho = make_product_plus();
        assert_eq!(me_rhs(rho.matrix(), 0.0, 0.0, 0.0), Mat4::zeros());
        let (rp, rm) = (0.7, 0.3);
        let d = me_rhs(rho.matrix(), rp, rm, 0.0);
        let rate = |i, j| -d[(i, j)].re / rho.get(i, j).re;
        assert!((rate(0, 1) - (rp + rm) / 4.0).abs() < 1e-15);
        assert!((rate(0, 3) - rm).abs() < 1e-15);
        assert!((rate(1, 2) - rp).abs() < 1e-15);
        for i in 0..4 {
            assert_eq!(d[(i, i)], Complex64::new(0.0, 0.0));
        }
        let d = me_rhs(rho.matrix(), 0.0, 0.0, 2.0);
        // d ρ_{LL,LR}/dt = i (π̇/2) ρ_{LL,LR}
        assert!((d[(0, 1)] - Complex64::new(0.0, 0.25)).norm() < 1e-15);
        assert_eq!(d[(0, 3)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn integrator_agrees_with_map() {
        let prof = build_profile(&presets::benchmark(), &grid::uniform(1.0, 0.01).unwrap(), 1e-9).unwrap();
        let w = make_werner(1.0, Sign::Plus).unwrap();
        let tr = integrate_me(&w, &prof, 1.0, &MeOptions::default()).unwrap();
        for (t, s) in tr.t.iter().zip(&tr.states) {
            let exact = apply_map(&w, &prof, *t).unwrap();
            assert!(max_dev(s.matrix(), exact.matrix()) < 1e-6);
        }
        let p = make_product_plus();
        let tr = integrate_me(&p, &prof, 1.0, &MeOptions::default()).unwrap();
        for s in &tr.states {
            for (a, b) in s.populations().iter().zip(p.populations()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_rates_leave_state_constant() {
        let prof = build_profile(&presets::benchmark(), &[0.0], 1e-8).unwrap();
        let tr = integrate_me(&make_product_plus(), &prof, 0.0, &MeOptions::default()).unwrap();
        assert_eq!(tr.states.len(), 1);
        let prof = crate::decoherence::DecoherenceProfile::from_columns(
            presets::benchmark(),
            1e-8,
            vec![0.0, 1.0],
            vec![0.0; 2],
            vec![0.0; 2],
            vec![0.0; 2],
            vec![0.0; 2],
            vec![0.0; 2],
            vec![0.0; 2],
        )
        .unwrap();
        let rho = make_product_plus();
        let tr = integrate_me(&rho, &prof, 1.0, &MeOptions::default()).unwrap();
        assert!(tr.states.iter().all(|s| max_dev(s.matrix(), rho.matrix()) == 0.0));
    }

    #[test]
    fn negative_rate_intervals_are_found() {
        let prof = build_profile(&presets::benchmark(), &grid::uniform(6.0, 0.02).unwrap(), 1e-8).unwrap();
        let rep = non_markov_report(&prof);
        assert!(rep.completely_positive);
        assert!(!rep.negative_minus.is_empty());
        let (a, b) = rep.negative_minus[0];
        assert!(b > a);
        let mid = 0.5 * (a + b);
        assert!(prof.hermite_rates(mid).unwrap().rate_minus < 0.0);
        assert!(propagator_gain(&prof, Channel::Minus, a, b).unwrap() > 1.0);
    }
}
