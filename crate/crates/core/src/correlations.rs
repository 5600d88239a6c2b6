//! Concurrence, quantum mutual information and discord.
//!
//! Entropies are in bits with `0·log 0 = 0`. Discord measures the second
//! qubit.

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::state::{c, hermitian_part, Mat4, TwoQubitState};

type Mat2 = Matrix2<Complex64>;

/// Tolerance of the Bell-diagonal precondition.
pub const BELL_DIAGONAL_TOL: f64 = 1e-9;

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

fn pauli() -> [Mat2; 3] {
    let (o, l) = (c(0.0), c(1.0));
    [
        Mat2::new(o, l, l, o),
        Mat2::new(o, -i(), i(), o),
        Mat2::new(l, o, o, -l),
    ]
}

fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

fn entropy_of(eigs: impl IntoIterator<Item = f64>) -> f64 {
    eigs.into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// Binary entropy `h((1 + r)/2)` of a qubit with Bloch length `r`.
fn qubit_entropy(r: f64) -> f64 {
    let r = r.clamp(0.0, 1.0);
    entropy_of([(1.0 + r) / 2.0, (1.0 - r) / 2.0])
}

fn bloch(m: &Mat2) -> Vector3<f64> {
    // m = (tr m/2)(𝕀 + r·σ) for a positive 2×2 matrix
    let tr = (m[(0, 0)] + m[(1, 1)]).re;
    if tr <= 0.0 {
        return Vector3::zeros();
    }
    Vector3::new(2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re) / tr
}

/// Von Neumann entropy of the 4×4 state.
pub fn entropy(rho: &TwoQubitState) -> f64 {
    entropy_of(hermitian_part(rho.matrix()).symmetric_eigenvalues().iter().copied())
}

/// Reduced state of qubit a.
pub fn reduced_a(rho: &TwoQubitState) -> Mat2 {
    let r = rho.matrix();
    Mat2::from_fn(|x, y| r[(2 * x, 2 * y)] + r[(2 * x + 1, 2 * y + 1)])
}

/// Reduced state of qubit b.
pub fn reduced_b(rho: &TwoQubitState) -> Mat2 {
    let r = rho.matrix();
    Mat2::from_fn(|x, y| r[(x, y)] + r[(x + 2, y + 2)])
}

/// `S(ρ_A) + S(ρ_B) − S(ρ)`.
pub fn mutual_information(rho: &TwoQubitState) -> f64 {
    let sa = qubit_entropy(bloch(&reduced_a(rho)).norm());
    let sb = qubit_entropy(bloch(&reduced_b(rho)).norm());
    (sa + sb - entropy(rho)).max(0.0)
}

/// Square roots `λ₁ ≥ … ≥ λ₄` of the eigenvalues of `ρ ρ̃`, with
/// `ρ̃ = (σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y)`.
///
/// With `ρ = W W†` they are the singular values of `Wᵀ (σ_y ⊗ σ_y) W`, which
/// avoids the square root of tiny eigenvalues near pure states.
pub fn wootters_lambdas(rho: &TwoQubitState) -> [f64; 4] {
    let eig = hermitian_part(rho.matrix()).symmetric_eigen();
    let mut w = eig.eigenvectors;
    for (j, &p) in eig.eigenvalues.iter().enumerate() {
        let s = p.max(0.0).sqrt();
        w.column_mut(j).scale_mut(s);
    }
    let yy = kron(&pauli()[1], &pauli()[1]);
    let tau = w.transpose() * yy * w;
    let mut l: Vec<f64> = tau.singular_values().iter().copied().collect();
    l.sort_by(|a, b| b.total_cmp(a));
    [l[0], l[1], l[2], l[3]]
}

/// `ρ̃` trace check: `Σ λᵢ² = Tr(ρ ρ̃)`.
pub fn wootters_trace(rho: &TwoQubitState) -> f64 {
    let yy = kron(&pauli()[1], &pauli()[1]);
    let r = rho.matrix();
    (r * yy * r.conjugate() * yy).trace().re
}

/// Wootters concurrence.
pub fn concurrence(rho: &TwoQubitState) -> Result<f64> {
    let rep = rho.report();
    if !rep.passed() {
        return Err(domain(format!("concurrence of an invalid state: {rep}")));
    }
    let l = wootters_lambdas(rho);
    Ok((l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0))
}

/// Closed form for X-shaped states (only diagonal and anti-diagonal entries).
pub fn concurrence_x_state(rho: &TwoQubitState) -> Result<f64> {
    let r = rho.matrix();
    for a in 0..4 {
        for b in 0..4 {
            if a != b && a + b != 3 && r[(a, b)].norm() > BELL_DIAGONAL_TOL {
                return Err(Error::Precondition(format!(
                    "state is not X-shaped: |ρ[{a},{b}]| = {:e}; use `concurrence`",
                    r[(a, b)].norm()
                )));
            }
        }
    }
    let p = |k: usize| r[(k, k)].re.max(0.0);
    let x = r[(1, 2)].norm() - (p(0) * p(3)).sqrt();
    let y = r[(0, 3)].norm() - (p(1) * p(2)).sqrt();
    Ok((2.0 * x.max(y)).clamp(0.0, 1.0))
}

/// `max{0, c·e^{−γ} − (1 − c)/2}`.
pub fn concurrence_werner(mix: f64, gamma: f64) -> f64 {
    (mix * (-gamma).exp() - 0.5 * (1.0 - mix)).max(0.0)
}

/// `Tr[ρ σ_i ⊗ σ_j]`.
pub fn correlation_tensor(rho: &TwoQubitState) -> [[f64; 3]; 3] {
    let s = pauli();
    let r = rho.matrix();
    std::array::from_fn(|a| std::array::from_fn(|b| (r * kron(&s[a], &s[b])).trace().re))
}

/// Closed-form discord of a Bell-diagonal state
/// `ρ = ¼(𝕀 + Σ cᵢ σᵢ ⊗ σᵢ)`: `I(ρ) − C(ρ)` with `C` the binary-entropy
/// deficit at `max |cᵢ|`.
pub fn discord_bell_diagonal(rho: &TwoQubitState) -> Result<f64> {
    if !rho.is_bell_diagonal(BELL_DIAGONAL_TOL) {
        return Err(Error::Precondition(
            "state is not Bell-diagonal; use `discord_bruteforce`".into(),
        ));
    }
    let t = correlation_tensor(rho);
    let cmax = (0..3).map(|k| t[k][k].abs()).fold(0.0, f64::max);
    let classical = 1.0 - qubit_entropy(cmax);
    Ok((mutual_information(rho) - classical).max(0.0))
}

/// Measurement-angle grid for [`discord_bruteforce`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscordGrid {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for DiscordGrid {
    fn default() -> Self {
        Self { n_theta: 100, n_phi: 200 }
    }
}

/// Conditional entropy of qubit a after measuring qubit b along `n`.
fn conditional_entropy(rho: &Mat4, n: &Vector3<f64>) -> f64 {
    let s = pauli();
    let dot = s[0] * c(n[0]) + s[1] * c(n[1]) + s[2] * c(n[2]);
    let mut total = 0.0;
    for sign in [1.0, -1.0] {
        let proj = (Mat2::identity() + dot * c(sign)) * c(0.5);
        // Tr_B[(𝕀 ⊗ Π) ρ]
        let cond = Mat2::from_fn(|x, y| {
            let mut acc = c(0.0);
            for b in 0..2 {
                for b2 in 0..2 {
                    acc += proj[(b, b2)] * rho[(2 * x + b2, 2 * y + b)];
                }
            }
            acc
        });
        let p = (cond[(0, 0)] + cond[(1, 1)]).re;
        if p > 1e-300 {
            total += p * qubit_entropy(bloch(&cond).norm());
        }
    }
    total
}

fn direction(theta: f64, phi: f64) -> Vector3<f64> {
    Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// Discord by direct minimization of the conditional entropy over projective
/// measurements on qubit b: a `θ × φ` grid, then a compass search around the
/// best grid point.
pub fn discord_bruteforce(rho: &TwoQubitState, grid: DiscordGrid) -> Result<f64> {
    let rep = rho.report();
    if !rep.passed() {
        return Err(domain(format!("discord of an invalid state: {rep}")));
    }
    if grid.n_theta < 2 || grid.n_phi < 1 {
        return Err(domain("discord grid needs n_theta >= 2 and n_phi >= 1"));
    }
    let r = hermitian_part(rho.matrix());
    let f = |th: f64, ph: f64| conditional_entropy(&r, &direction(th, ph));
    let pi = std::f64::consts::PI;
    let dth = pi / (grid.n_theta - 1) as f64;
    let dph = 2.0 * pi / grid.n_phi as f64;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for a in 0..grid.n_theta {
        let th = a as f64 * dth;
        for b in 0..grid.n_phi {
            let ph = b as f64 * dph;
            let v = f(th, ph);
            if v < best.0 {
                best = (v, th, ph);
            }
        }
    }
    let (mut v, mut th, mut ph) = best;
    let (mut sth, mut sph) = (dth, dph);
    while sth > 1e-10 || sph > 1e-10 {
        let mut moved = false;
        for (a, b) in [(sth, 0.0), (-sth, 0.0), (0.0, sph), (0.0, -sph)] {
            let w = f(th + a, ph + b);
            if w < v {
                v = w;
                th += a;
                ph += b;
                moved = true;
                break;
            }
        }
        if !moved {
            sth *= 0.5;
            sph *= 0.5;
        }
    }
    let sa = qubit_entropy(bloch(&reduced_a(rho)).norm());
    let classical = sa - v;
    Ok((mutual_information(rho) - classical).max(0.0))
}

/// How [`CorrelationTrajectory::from_states`] evaluates discord.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscordMethod {
    Skip,
    BellDiagonal,
    BruteForce(DiscordGrid),
    /// Closed form on Bell-diagonal states, brute force otherwise.
    Auto(DiscordGrid),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTrajectory {
    pub t: Vec<f64>,
    pub concurrence: Vec<f64>,
    pub discord: Vec<Option<f64>>,
    pub mutual_information: Vec<f64>,
}

impl CorrelationTrajectory {
    pub fn from_states(t: &[f64], states: &[TwoQubitState], method: DiscordMethod) -> Result<Self> {
        if t.len() != states.len() {
            return Err(domain("time and state counts differ"));
        }
        let mut out = Self {
            t: t.to_vec(),
            concurrence: Vec::with_capacity(t.len()),
            discord: Vec::with_capacity(t.len()),
            mutual_information: Vec::with_capacity(t.len()),
        };
        for s in states {
            out.concurrence.push(concurrence(s)?);
            out.mutual_information.push(mutual_information(s));
            out.discord.push(match method {
                DiscordMethod::Skip => None,
                DiscordMethod::BellDiagonal => Some(discord_bell_diagonal(s)?),
                DiscordMethod::BruteForce(g) => Some(discord_bruteforce(s, g)?),
                DiscordMethod::Auto(g) => Some(if s.is_bell_diagonal(BELL_DIAGONAL_TOL) {
                    discord_bell_diagonal(s)?
                } else {
                    discord_bruteforce(s, g)?
                }),
            });
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{make_product_plus, make_werner, swap, Sign};

    fn werner_mi(mix: f64) -> f64 {
        let p1 = (1.0 + 3.0 * mix) / 4.0;
        let p2 = (1.0 - mix) / 4.0;
        let term = |p: f64| if p > 0.0 { p * p.log2() } else { 0.0 };
        2.0 + term(p1) + 3.0 * term(p2)
    }

    #[test]
    fn trivial_values() {
        let bell = make_werner(1.0, Sign::Plus).unwrap();
        let mixed = TwoQubitState::maximally_mixed();
        assert!((concurrence(&bell).unwrap() - 1.0).abs() < 1e-12);
        assert!(concurrence(&mixed).unwrap() < 1e-12);
        assert!((mutual_information(&bell) - 2.0).abs() < 1e-12);
        assert!(mutual_information(&mixed).abs() < 1e-12);
        assert!(discord_bell_diagonal(&mixed).unwrap().abs() < 1e-12);
        assert!((discord_bell_diagonal(&bell).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(concurrence_werner(1.0, 0.0), 1.0);
        assert_eq!(concurrence_werner(1.0 / 3.0, 0.0), 0.0);
        assert_eq!(concurrence_werner(0.6, 3f64.ln()), 0.0);
    }

    #[test]
    fn werner_closed_forms() {
        for k in 0..=20 {
            let mix = k as f64 / 20.0;
            for sign in [Sign::Plus, Sign::Minus] {
                let w = make_werner(mix, sign).unwrap();
                let expect = (0.5 * (3.0 * mix - 1.0)).max(0.0);
                assert!((concurrence(&w).unwrap() - expect).abs() < 1e-9, "{mix}");
                assert!((concurrence_x_state(&w).unwrap() - expect).abs() < 1e-12);
                assert!((mutual_information(&w) - werner_mi(mix)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wootters_sanity() {
        let w = make_werner(0.7, Sign::Minus).unwrap();
        let l = wootters_lambdas(&w);
        let sum: f64 = l.iter().map(|x| x * x).sum();
        assert!((sum - wootters_trace(&w)).abs() < 1e-12);
    }

    #[test]
    fn bruteforce_agrees_with_closed_form() {
        for mix in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let w = make_werner(mix, Sign::Plus).unwrap();
            let a = discord_bell_diagonal(&w).unwrap();
            let b = discord_bruteforce(&w, DiscordGrid::default()).unwrap();
            assert!((a - b).abs() < 1e-6, "{mix}: {a} vs {b}");
        }
    }

    #[test]
    fn zero_discord_classes() {
        let p = make_product_plus();
        assert!(discord_bruteforce(&p, DiscordGrid::default()).unwrap() < 1e-6);
        let mut m = Mat4::zeros();
        m[(0, 0)] = c(0.5);
        m[(3, 3)] = c(0.5);
        let cc = TwoQubitState::from_matrix(m).unwrap();
        assert!(discord_bruteforce(&cc, DiscordGrid::default()).unwrap() < 1e-9);
        assert!(discord_bell_diagonal(&p).is_err());
        assert!(concurrence_x_state(&p).is_err());
    }

    #[test]
    fn measured_side_is_immaterial_on_swap_symmetric_states() {
        let w = make_werner(0.6, Sign::Minus).unwrap();
        let s = swap();
        let swapped = TwoQubitState::from_matrix(s * w.matrix() * s).unwrap();
        let a = discord_bruteforce(&w, DiscordGrid::default()).unwrap();
        let b = discord_bruteforce(&swapped, DiscordGrid::default()).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn trajectory_lengths() {
        let s = vec![make_werner(0.5, Sign::Plus).unwrap(), make_product_plus()];
        let tr = CorrelationTrajectory::from_states(&[0.0, 1.0], &s, DiscordMethod::Auto(DiscordGrid::default()))
            .unwrap();
        assert_eq!(tr.len(), 2);
        assert!(tr.discord.iter().all(|d| d.is_some()));
        assert!(CorrelationTrajectory::from_states(&[0.0], &s, DiscordMethod::Skip).is_err());
    }
}
