//! Two-qubit density matrices in the basis `(LL, LR, RL, RR)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};

pub type Mat4 = Matrix4<Complex64>;

/// Basis labels in storage order.
pub const BASIS: [&str; 4] = ["LL", "LR", "RL", "RR"];

/// Hermiticity and trace tolerance of a valid state.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Most negative eigenvalue tolerated in a valid state.
pub const EIGEN_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Which Bell state a Werner family is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    /// `|Φ⁺⟩ = (|LL⟩ + |RR⟩)/√2`.
    Plus,
    /// `|Ψ⁺⟩ = (|LR⟩ + |RL⟩)/√2`.
    Minus,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            _ => Err(Error::Config(format!("sign must be `+` or `-`, got `{s}`"))),
        }
    }
}

/// A 4×4 density matrix. Constructors from this module always return valid
/// states; [`TwoQubitState::from_matrix`] checks the invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    rho: Mat4,
}

impl TwoQubitState {
    /// Wrap a matrix after checking Hermiticity, trace and positivity.
    pub fn from_matrix(rho: Mat4) -> Result<Self> {
        let report = validate_matrix(&rho);
        if report.passed() {
            Ok(Self { rho })
        } else {
            Err(domain(format!("invalid density matrix: {report}")))
        }
    }

    /// Wrap without checks. Callers must guarantee validity.
    pub(crate) fn from_matrix_unchecked(rho: Mat4) -> Self {
        Self { rho }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.rho
    }

    pub fn into_matrix(self) -> Mat4 {
        self.rho
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.rho[(i, j)]
    }

    pub fn populations(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| self.rho[(i, i)].re)
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    pub fn report(&self) -> StateReport {
        validate_matrix(&self.rho)
    }

    /// `|ψ⟩⟨ψ|` for a normalized or unnormalized vector.
    pub fn pure(psi: Vector4<Complex64>) -> Result<Self> {
        let norm2 = psi.norm_squared();
        if !(norm2 > 0.0) {
            return Err(domain("zero state vector"));
        }
        let rho = psi * psi.adjoint() / c(norm2);
        Ok(Self { rho })
    }

    pub fn maximally_mixed() -> Self {
        Self {
            rho: Mat4::identity() / c(4.0),
        }
    }

    /// A computational basis state by label (`LL`, `LR`, `RL` or `RR`).
    pub fn basis(label: &str) -> Result<Self> {
        let idx = BASIS
            .iter()
            .position(|b| *b == label)
            .ok_or_else(|| Error::Config(format!("unknown basis label `{label}`")))?;
        let mut rho = Mat4::zeros();
        rho[(idx, idx)] = c(1.0);
        Ok(Self { rho })
    }

    /// True when every entry outside the Bell-diagonal pattern
    /// (diagonal plus the `(LL,RR)` and `(LR,RL)` anti-diagonal) vanishes and
    /// the state is Bell-diagonal: equal populations on `LL`/`RR` and on
    /// `LR`/`RL` with real anti-diagonal coherences.
    pub fn is_bell_diagonal(&self, tol: f64) -> bool {
        let r = &self.rho;
        for i in 0..4 {
            for j in 0..4 {
                if i != j && i + j != 3 && r[(i, j)].norm() > tol {
                    return false;
                }
            }
        }
        (r[(0, 0)].re - r[(3, 3)].re).abs() <= tol
            && (r[(1, 1)].re - r[(2, 2)].re).abs() <= tol
            && r[(0, 3)].im.abs() <= tol
            && r[(1, 2)].im.abs() <= tol
    }
}

/// Diagnostic for a candidate density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateReport {
    /// `max |ρ_ij − conj(ρ_ji)|`.
    pub hermiticity_defect: f64,
    /// `|Tr ρ − 1|`.
    pub trace_defect: f64,
    /// Smallest eigenvalue of the Hermitian part.
    pub min_eigenvalue: f64,
}

impl StateReport {
    pub fn passed(&self) -> bool {
        self.hermiticity_defect <= HERMITIAN_TOL
            && self.trace_defect <= HERMITIAN_TOL
            && self.min_eigenvalue >= -EIGEN_TOL
    }
}

impl fmt::Display for StateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "hermiticity defect {:e}, trace defect {:e}, min eigenvalue {:e} ({})",
            self.hermiticity_defect,
            self.trace_defect,
            self.min_eigenvalue,
            if self.passed() { "pass" } else { "fail" }
        )
    }
}

/// Hermitian part `(A + A†)/2`.
pub(crate) fn hermitian_part(m: &Mat4) -> Mat4 {
    (m + m.adjoint()) * c(0.5)
}

/// Check the density-matrix invariants of an arbitrary 4×4 matrix.
pub fn validate_matrix(m: &Mat4) -> StateReport {
    let mut herm = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            herm = herm.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    let trace = m.trace();
    let trace_defect = (trace - c(1.0)).norm();
    let eig = hermitian_part(m).symmetric_eigenvalues();
    let min_eigenvalue = eig.iter().copied().fold(f64::INFINITY, f64::min);
    StateReport {
        hermiticity_defect: herm,
        trace_defect,
        min_eigenvalue,
    }
}

pub fn validate_state(s: &TwoQubitState) -> StateReport {
    validate_matrix(s.matrix())
}

fn check_mixing(value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(domain(format!("mixing parameter must lie in [0, 1], got {value}")))
    }
}

/// Bell vector of a Werner family.
pub fn bell_vector(sign: Sign) -> Vector4<Complex64> {
    let a = c(std::f64::consts::FRAC_1_SQRT_2);
    let z = c(0.0);
    match sign {
        Sign::Plus => Vector4::new(a, z, z, a),
        Sign::Minus => Vector4::new(z, a, a, z),
    }
}

/// `mix·|ψ⟩⟨ψ| + (1 − mix)·𝕀/4`.
fn mix_with_identity(psi: &Vector4<Complex64>, mix: f64) -> Mat4 {
    psi * psi.adjoint() * c(mix) + Mat4::identity() * c((1.0 - mix) / 4.0)
}

/// Werner state `c|B⟩⟨B| + (1 − c)𝕀/4` on `Φ⁺` (`Sign::Plus`) or `Ψ⁺`.
pub fn make_werner(mix: f64, sign: Sign) -> Result<TwoQubitState> {
    check_mixing(mix)?;
    Ok(TwoQubitState::from_matrix_unchecked(mix_with_identity(&bell_vector(sign), mix)))
}

/// Equal superposition of all four basis states.
pub fn make_product_plus() -> TwoQubitState {
    TwoQubitState::from_matrix_unchecked(Mat4::from_element(c(0.25)))
}

/// The two-qubit gate acting on `(|00⟩, |01⟩, |10⟩, |11⟩)`:
/// identity on `|00⟩`, `|11⟩` and a real rotation by π/4 on the middle block.
pub fn sqrt_swap() -> Mat4 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let o = 0.0;
    Matrix4::<f64>::new(
        1.0, o, o, o, //
        o, h, h, o, //
        o, -h, h, o, //
        o, o, o, 1.0,
    )
    .map(c)
}

pub fn swap() -> Mat4 {
    let o = 0.0;
    Matrix4::<f64>::new(
        1.0, o, o, o, //
        o, o, 1.0, o, //
        o, 1.0, o, o, //
        o, o, o, 1.0,
    )
    .map(c)
}

/// Simulate the gate-based preparation: a weight-`mix` basis input (`|10⟩`
/// for `Sign::Plus`, `|01⟩` otherwise) mixed with `𝕀/4`, then [`sqrt_swap`],
/// then `|0⟩ → |L⟩`, `|1⟩ → |R⟩`, which keeps index order.
///
/// The output carries the same concurrence and discord as
/// `make_werner(mix, sign)`; it is a Werner state on a different Bell vector.
pub fn prepare_werner_via_protocol(mix: f64, sign: Sign) -> Result<TwoQubitState> {
    check_mixing(mix)?;
    let input = match sign {
        Sign::Plus => 2,
        Sign::Minus => 1,
    };
    let mut rho = Mat4::identity() * c((1.0 - mix) / 4.0);
    rho[(input, input)] += c(mix);
    let u = sqrt_swap();
    let out = u * rho * u.adjoint();
    Ok(TwoQubitState::from_matrix_unchecked(hermitian_part(&out)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_dev(a: &Mat4, b: &Mat4) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn werner_edges() {
        let w0 = make_werner(0.0, Sign::Plus).unwrap();
        assert!(max_dev(w0.matrix(), TwoQubitState::maximally_mixed().matrix()) < 1e-16);
        let w1 = make_werner(1.0, Sign::Plus).unwrap();
        let phi = TwoQubitState::pure(bell_vector(Sign::Plus)).unwrap();
        assert!(max_dev(w1.matrix(), phi.matrix()) < 1e-15);
        assert!((w1.purity() - 1.0).abs() < 1e-15);
        assert!(make_werner(1.1, Sign::Minus).is_err());
        assert!(make_werner(-0.1, Sign::Minus).is_err());
    }

    #[test]
    fn werner_spectrum() {
        for mix in [0.0, 0.2, 1.0 / 3.0, 0.7, 1.0] {
            for sign in [Sign::Plus, Sign::Minus] {
                let w = make_werner(mix, sign).unwrap();
                let mut ev: Vec<f64> = w.matrix().symmetric_eigenvalues().iter().copied().collect();
                ev.sort_by(f64::total_cmp);
                let low = (1.0 - mix) / 4.0;
                for e in &ev[..3] {
                    assert!((e - low).abs() < 1e-14);
                }
                assert!((ev[3] - (1.0 + 3.0 * mix) / 4.0).abs() < 1e-14);
                assert!(w.report().passed());
                assert!(w.is_bell_diagonal(1e-14));
            }
        }
    }

    #[test]
    fn product_plus_entries() {
        let p = make_product_plus();
        assert!(p.matrix().iter().all(|z| *z == c(0.25)));
        assert!((p.purity() - 1.0).abs() < 1e-15);
        assert!(!p.is_bell_diagonal(1e-9));
    }

    #[test]
    fn validation_reports() {
        let ok = validate_matrix(TwoQubitState::maximally_mixed().matrix());
        assert!(ok.passed());
        let bad = Mat4::identity() * c(0.225);
        let r = validate_matrix(&bad);
        assert!(!r.passed());
        assert!((r.trace_defect - 0.1).abs() < 1e-12);
        let phi = validate_matrix(make_werner(1.0, Sign::Plus).unwrap().matrix());
        assert!(phi.passed());
        assert!(phi.min_eigenvalue.abs() < 1e-15);
        let mut skew = Mat4::identity() * c(0.25);
        skew[(0, 1)] = c(0.1);
        assert!(validate_matrix(&skew).hermiticity_defect > 0.09);
        assert!(TwoQubitState::from_matrix(skew).is_err());
        let mut negative = Mat4::zeros();
        negative[(0, 0)] = c(1.5);
        negative[(1, 1)] = c(-0.5);
        assert!(validate_matrix(&negative).min_eigenvalue < -0.4);
    }

    #[test]
    fn protocol_at_zero_mixing_is_maximally_mixed() {
        for sign in [Sign::Plus, Sign::Minus] {
            let s = prepare_werner_via_protocol(0.0, sign).unwrap();
            assert!(max_dev(s.matrix(), TwoQubitState::maximally_mixed().matrix()) < 1e-16);
        }
    }

    #[test]
    fn protocol_outputs_are_werner_states_on_psi_vectors() {
        let s = prepare_werner_via_protocol(1.0, Sign::Plus).unwrap();
        let psi_plus = TwoQubitState::pure(bell_vector(Sign::Minus)).unwrap();
        assert!(max_dev(s.matrix(), psi_plus.matrix()) < 1e-15);
        let s = prepare_werner_via_protocol(1.0, Sign::Minus).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = TwoQubitState::pure(Vector4::new(c(0.0), c(h), c(-h), c(0.0))).unwrap();
        assert!(max_dev(s.matrix(), singlet.matrix()) < 1e-15);
    }

    #[test]
    fn gate_is_unitary_and_squares_to_signed_swap() {
        let u = sqrt_swap();
        assert!(max_dev(&(u * u.adjoint()), &Mat4::identity()) < 1e-15);
        let mut signed = swap();
        signed[(2, 1)] = c(-1.0);
        assert!(max_dev(&(u * u), &signed) < 1e-15);
        assert!(max_dev(&(u * u), &swap()) > 1.0);
    }

    #[test]
    fn basis_and_sign_parsing() {
        assert_eq!(TwoQubitState::basis("RL").unwrap().populations(), [0.0, 0.0, 1.0, 0.0]);
        assert!(TwoQubitState::basis("XX").is_err());
        assert_eq!("+".parse::<Sign>().unwrap(), Sign::Plus);
        assert!("*".parse::<Sign>().is_err());
    }
}
