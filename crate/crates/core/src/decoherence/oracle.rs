//! Discretized-bath reference for the quadrature path.
//!
//! The reservoir is replaced by `n_modes` spherical shells of width
//! `Δk = k_max/n_modes` at midpoints `k_j`. Each shell is a harmonic mode
//! conditionally displaced by the qubit configuration `s ∈ {LL, LR, RL, RR}`
//! with coupling `f_s(k) = a(k) Σ_{x ∈ s} e^{i k·x}` over the two occupied
//! well positions on a line. The exact single-mode solution gives, per shell,
//!
//! ```text
//! decay(s, s') = ⟨|f_s − f_s'|²⟩ coth(E/2θ) (1 − cos E t) / E²
//! phase(s)     = ⟨|f_s|²⟩ (E t − sin E t) / E²
//! ```
//!
//! where `⟨·⟩` averages over directions: `⟨|Σ c_j e^{ik·x_j}|²⟩ =
//! Σ c_j c_l sin(k r_jl)/(k r_jl)`. The mode density and coupling are
//! normalised so that `|a|²/E²` per unit `k` equals `W(k)/4`.

use crate::error::{domain, Error, Result};
use crate::params::ReservoirParams;

const LL: usize = 0;
const LR: usize = 1;
const RL: usize = 2;
const RR: usize = 3;

/// Oracle output for one time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OracleEstimate {
    /// Single-qubit factor from the `(LL, LR)` coherence.
    pub gamma0: f64,
    /// Half the difference of the `(LR, RL)` and `(LL, RR)` decay exponents.
    pub delta: f64,
    /// `φ_LL − φ_LR + φ_RR − φ_RL`.
    pub pi_zz: f64,
    /// Decay exponents of all six coherences `(a, b)`, `a < b`, in the order
    /// `(LL,LR) (LL,RL) (LL,RR) (LR,RL) (LR,RR) (RL,RR)`.
    pub decay: [f64; 6],
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Positions of the two occupied wells for each configuration. Qubit 1 sits
/// at `−D`, qubit 2 at `+D`; `L`/`R` are offsets `∓L` from each centre.
fn configurations(l: f64, d: f64) -> [[f64; 2]; 4] {
    let (q1l, q1r, q2l, q2r) = (-d - l, -d + l, d - l, d + l);
    [[q1l, q2l], [q1l, q2r], [q1r, q2l], [q1r, q2r]]
}

/// A coupling term: coefficient, position, owning qubit.
type Term = (f64, f64, usize);

/// `⟨|Σ_j c_j e^{i k x_j}|²⟩` for points on a line. With `independent`, terms
/// of different qubits do not interfere.
fn angular_average(k: f64, terms: &[Term], independent: bool) -> f64 {
    let mut acc = 0.0;
    for &(ca, xa, qa) in terms {
        for &(cb, xb, qb) in terms {
            if independent && qa != qb {
                continue;
            }
            acc += ca * cb * sinc(k * (xa - xb).abs());
        }
    }
    acc
}

/// Discretized-bath estimates of `(Γ₀, δ, Π_zz)` at time `t`.
///
/// With `D = ∞` each qubit couples to its own environment.
pub fn discrete_bath_oracle(t: f64, p: &ReservoirParams, n_modes: usize, k_max: f64) -> Result<OracleEstimate> {
    p.validate()?;
    if n_modes < 100 {
        return Err(domain(format!("oracle needs at least 100 modes, got {n_modes}")));
    }
    if !(k_max >= 8.0) {
        return Err(domain(format!("oracle needs k_max >= 8, got {k_max}")));
    }
    if !(t >= 0.0) {
        return Err(domain(format!("time must be >= 0, got {t}")));
    }
    let independent = p.d_sep.is_infinite();
    let conf = configurations(p.l_sep, if independent { 0.0 } else { p.d_sep });
    let pairs = [(LL, LR), (LL, RL), (LL, RR), (LR, RL), (LR, RR), (RL, RR)];
    let pref = 2.0 * p.g_ab * p.g_ab * p.n0 / (std::f64::consts::PI * std::f64::consts::PI);
    let dk = k_max / n_modes as f64;
    let mut decay = [0.0; 6];
    let mut phase = [0.0; 4];
    for j in 0..n_modes {
        let k = (j as f64 + 0.5) * dk;
        let eps = 0.5 * k * k;
        let e = (eps * (eps + 2.0 * p.u)).sqrt();
        let w = pref * k * k * (-eps).exp() / (e * (eps + 2.0 * p.u));
        let weight = 0.25 * w * dk;
        let coth = if p.theta == 0.0 {
            1.0
        } else {
            1.0 / (e / (2.0 * p.theta)).tanh()
        };
        let osc = 1.0 - (e * t).cos();
        let ramp = e * t - (e * t).sin();
        for (n, &(a, b)) in pairs.iter().enumerate() {
            let terms = [
                (1.0, conf[a][0], 0),
                (1.0, conf[a][1], 1),
                (-1.0, conf[b][0], 0),
                (-1.0, conf[b][1], 1),
            ];
            decay[n] += weight * angular_average(k, &terms, independent) * coth * osc;
        }
        for (s, ph) in phase.iter_mut().enumerate() {
            let terms = [(1.0, conf[s][0], 0), (1.0, conf[s][1], 1)];
            *ph += weight * angular_average(k, &terms, independent) * ramp;
        }
    }
    Ok(OracleEstimate {
        gamma0: decay[0],
        delta: 0.5 * (decay[3] - decay[2]),
        pi_zz: phase[LL] - phase[LR] + phase[RR] - phase[RL],
        decay,
    })
}

/// Run the oracle at `n_modes` and `2·n_modes`; fail if `Γ₀` or `δ` moved
/// by more than `rel_tol` relative to `Γ₀`, or `Π_zz` by more than
/// `rel_tol` relative to itself.
pub fn discrete_bath_oracle_checked(
    t: f64,
    p: &ReservoirParams,
    n_modes: usize,
    k_max: f64,
    rel_tol: f64,
) -> Result<OracleEstimate> {
    let coarse = discrete_bath_oracle(t, p, n_modes, k_max)?;
    let fine = discrete_bath_oracle(t, p, 2 * n_modes, k_max)?;
    let scale = fine.gamma0.abs().max(f64::MIN_POSITIVE);
    let moved = [
        (fine.gamma0 - coarse.gamma0).abs() / scale,
        (fine.delta - coarse.delta).abs() / scale,
        (fine.pi_zz - coarse.pi_zz).abs() / fine.pi_zz.abs().max(f64::MIN_POSITIVE),
    ];
    let worst = moved.iter().copied().fold(0.0, f64::max);
    let phase_moved = fine.pi_zz != 0.0 && moved[2] > rel_tol;
    if moved[0] > rel_tol || moved[1] > rel_tol || phase_moved {
        return Err(Error::Numerical {
            message: format!("oracle not converged with {n_modes} → {} modes", 2 * n_modes),
            achieved: worst,
        });
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::presets;

    #[test]
    fn vanishes_at_zero_time() {
        let o = discrete_bath_oracle(0.0, &presets::benchmark(), 500, 10.0).unwrap();
        assert_eq!(o.gamma0, 0.0);
        assert_eq!(o.delta, 0.0);
        assert_eq!(o.pi_zz, 0.0);
    }

    #[test]
    fn needs_enough_modes() {
        assert!(discrete_bath_oracle(1.0, &presets::benchmark(), 50, 10.0).is_err());
        assert!(discrete_bath_oracle(1.0, &presets::benchmark(), 500, 5.0).is_err());
    }

    #[test]
    fn single_flips_share_one_factor() {
        let o = discrete_bath_oracle(1.3, &presets::adjacent(), 400, 10.0).unwrap();
        for n in [1, 4, 5] {
            assert!((o.decay[n] / o.decay[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn self_convergence() {
        let p = presets::benchmark();
        let a = discrete_bath_oracle(1.0, &p, 2000, 10.0).unwrap();
        let b = discrete_bath_oracle(1.0, &p, 4000, 10.0).unwrap();
        assert!((a.gamma0 / b.gamma0 - 1.0).abs() < 1e-3);
        assert!(discrete_bath_oracle_checked(1.0, &p, 2000, 10.0, 1e-3).is_ok());
    }

    #[test]
    fn independent_environments() {
        let p = presets::benchmark().independent();
        let o = discrete_bath_oracle(2.0, &p, 500, 10.0).unwrap();
        assert!(o.delta.abs() < 1e-12 * o.gamma0);
        assert_eq!(o.pi_zz, 0.0);
    }
}
