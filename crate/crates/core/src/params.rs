//! Physical and dimensionless parameter sets.
//!
//! The simulator works in units with `ħ = m_B = σ = 1`: lengths in units of
//! the impurity wavefunction width `σ`, energies in `ħ²/(m_B σ²)` and times in
//! `m_B σ²/ħ`. [`to_dimensionless`] maps SI inputs onto this scheme.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{domain, Error, Result};

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Atomic mass unit (kg).
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Bohr radius (m).
pub const BOHR: f64 = 5.291_772_109_03e-11;
/// Reference ⁸⁷Rb scattering length used when reporting `a_B` (m).
pub const A_RB: f64 = 100.4 * BOHR;

/// Parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Impurity mass (kg).
    pub m_a: f64,
    /// Condensate boson mass (kg).
    pub m_b: f64,
    /// Boson-boson scattering length (m).
    pub a_b: f64,
    /// Impurity-boson scattering length (m).
    pub a_ab: f64,
    /// Condensate density (m⁻³).
    pub n0: f64,
    /// Impurity wavefunction width (m).
    pub sigma: f64,
    /// Intra-double-well separation parameter (m).
    pub l: f64,
    /// Inter-qubit separation parameter (m).
    pub d: f64,
    /// Temperature (K).
    pub t: f64,
}

impl PhysicalParams {
    /// ¹³³Cs impurities in a ⁸⁷Rb condensate. Density, width, lattice spacing
    /// and `a_AB` are representative values (see `configs/cs_in_rb.cfg`), with
    /// `L = λ/4`, `D = 5λ` for an 800 nm lattice and `T = 10 nK`.
    pub fn cs_in_rb() -> Self {
        Self {
            m_a: 132.905 * AMU,
            m_b: 86.909 * AMU,
            a_b: A_RB,
            a_ab: 330.0 * BOHR,
            n0: 3.0e20,
            sigma: 100e-9,
            l: 200e-9,
            d: 4000e-9,
            t: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("m_A", self.m_a),
            ("m_B", self.m_b),
            ("a_B", self.a_b),
            ("a_AB", self.a_ab),
            ("n0", self.n0),
            ("sigma", self.sigma),
            ("L", self.l),
            ("D", self.d),
            ("T", self.t),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Boson scattering length in units of the ⁸⁷Rb reference value.
    pub fn a_b_over_a_rb(&self) -> f64 {
        self.a_b / A_RB
    }

    /// Time unit `m_B σ²/ħ` in seconds.
    pub fn time_unit(&self) -> f64 {
        self.m_b * self.sigma * self.sigma / HBAR
    }
}

/// Dimensionless reservoir and geometry parameters.
///
/// `u` is the interaction energy `g_B n₀`; the Bogoliubov dispersion reads
/// `E = sqrt(ε (ε + 2u))`. The coupling prefactor of every decoherence
/// integral is `2 g_AB² n₀ / π²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirParams {
    pub u: f64,
    pub g_ab: f64,
    /// `n₀ σ³`.
    pub n0: f64,
    /// `κ_B T / (ħ²/(m_B σ²))`; zero means the ground state.
    pub theta: f64,
    /// `L/σ`.
    pub l_sep: f64,
    /// `D/σ`; `f64::INFINITY` switches the cross talk off entirely.
    pub d_sep: f64,
}

impl ReservoirParams {
    pub fn new(u: f64, g_ab: f64, n0: f64, theta: f64, l_sep: f64, d_sep: f64) -> Result<Self> {
        let p = Self {
            u,
            g_ab,
            n0,
            theta,
            l_sep,
            d_sep,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("u", self.u), ("g_AB", self.g_ab), ("n0", self.n0), ("L", self.l_sep)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !(self.theta >= 0.0) || !self.theta.is_finite() {
            return Err(domain(format!("theta must be finite and >= 0, got {}", self.theta)));
        }
        if !(self.d_sep > 0.0) {
            return Err(domain(format!("D must be > 0, got {}", self.d_sep)));
        }
        Ok(())
    }

    /// `2 g_AB² n₀ / π²`.
    pub fn prefactor(&self) -> f64 {
        2.0 * self.g_ab * self.g_ab * self.n0 / (PI * PI)
    }

    /// Speed of sound `sqrt(u)`.
    pub fn sound_speed(&self) -> f64 {
        self.u.sqrt()
    }

    pub fn has_cross_talk(&self) -> bool {
        self.d_sep.is_finite()
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_d_sep(mut self, d_sep: f64) -> Self {
        self.d_sep = d_sep;
        self
    }

    /// Scale the boson scattering length; `u` is proportional to `a_B`.
    pub fn with_scattering_scale(mut self, factor: f64) -> Self {
        self.u *= factor;
        self
    }

    /// The same reservoir with the qubits in independent environments.
    pub fn independent(self) -> Self {
        self.with_d_sep(f64::INFINITY)
    }
}

impl fmt::Display for ReservoirParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "u={} g_AB={} n0={} theta={} L={} D={}",
            self.u, self.g_ab, self.n0, self.theta, self.l_sep, self.d_sep
        )
    }
}

/// Map SI parameters onto the `ħ = m_B = σ = 1` scheme.
pub fn to_dimensionless(p: &PhysicalParams) -> Result<ReservoirParams> {
    p.validate()?;
    let g_b = 4.0 * PI * p.a_b / p.sigma;
    let g_ab = 2.0 * PI * (p.a_ab / p.sigma) * (1.0 + p.m_b / p.m_a);
    let n0 = p.n0 * p.sigma.powi(3);
    let energy_unit = HBAR * HBAR / (p.m_b * p.sigma * p.sigma);
    ReservoirParams::new(
        g_b * n0,
        g_ab,
        n0,
        K_B * p.t / energy_unit,
        p.l / p.sigma,
        p.d / p.sigma,
    )
}

/// Named dimensionless parameter sets used by the scenarios, tests and CLI.
pub mod presets {
    use super::ReservoirParams;
    use std::f64::consts::PI;

    /// Strong-coupling quadrature benchmark: `u = g_AB = 4π`, `n₀ = 1`,
    /// `L = 2`, `D = 2L`, zero temperature.
    pub fn benchmark() -> ReservoirParams {
        ReservoirParams {
            u: 4.0 * PI,
            g_ab: 4.0 * PI,
            n0: 1.0,
            theta: 0.0,
            l_sep: 2.0,
            d_sep: 4.0,
        }
    }

    /// Reservoir close to `PhysicalParams::cs_in_rb` with `a_B = a_Rb`,
    /// qubits at `D = 20 L` and `θ = 0.02` (about 10 nK at σ = 100 nm).
    /// Used for the `(c, a_B)` dynamics diagram.
    pub fn trapping() -> ReservoirParams {
        ReservoirParams {
            u: 0.2,
            g_ab: 1.0,
            n0: 1.0,
            theta: 0.02,
            l_sep: 2.0,
            d_sep: 40.0,
        }
    }

    /// [`trapping`] with neighbouring double wells, `D = 2L`.
    pub fn adjacent() -> ReservoirParams {
        trapping().with_d_sep(4.0)
    }

    /// [`trapping`] with `D = 10 L`, the revival regime used for discord runs.
    pub fn discord() -> ReservoirParams {
        trapping().with_d_sep(20.0)
    }

    /// Weakly coupled, compact geometry (`L = 1`, `D = 2L`) in which the
    /// condensate-induced phase entangles an initial product state.
    pub fn generation() -> ReservoirParams {
        ReservoirParams {
            u: 0.1,
            g_ab: 0.3f64.sqrt(),
            n0: 1.0,
            theta: 0.02,
            l_sep: 1.0,
            d_sep: 2.0,
        }
    }

    /// Narrow double wells in a soft condensate (`L = 0.5`, `u = 0.02`), where
    /// neighbouring qubits are super-decoherent for `ρ_W^+`.
    pub fn narrow() -> ReservoirParams {
        ReservoirParams {
            u: 0.02,
            g_ab: NARROW_COUPLING,
            n0: 1.0,
            theta: 0.0,
            l_sep: 0.5,
            d_sep: 1.0,
        }
    }

    pub(super) const NARROW_COUPLING: f64 = 0.521;

    pub const NAMES: [&str; 6] = ["benchmark", "trapping", "adjacent", "discord", "generation", "narrow"];

    pub fn by_name(name: &str) -> Option<ReservoirParams> {
        match name {
            "benchmark" => Some(benchmark()),
            "trapping" => Some(trapping()),
            "adjacent" => Some(adjacent()),
            "discord" => Some(discord()),
            "generation" => Some(generation()),
            "narrow" => Some(narrow()),
            _ => None,
        }
    }
}

/// An ordered list of `key = value` entries read from a parameter file.
///
/// Lines are `key = value [unit]`; `#` starts a comment; blank lines are
/// ignored. Keys may appear once.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: Vec<(String, String)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KeyValues::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(Error::Config(format!("line {}: bad key `{key}`", lineno + 1)));
            }
            if kv.get(key).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
            kv.entries.push((key.to_string(), value.trim().to_string()));
        }
        Ok(kv)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    /// Insert or replace.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn parse_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| parse_number(v).map_err(|e| Error::Config(format!("{key}: {e}"))))
            .transpose()
    }
}

fn parse_number(s: &str) -> std::result::Result<f64, String> {
    match s.trim() {
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|_| format!("not a number: `{t}`")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dimension {
    Mass,
    Length,
    Density,
    Temperature,
}

fn unit_factor(dim: Dimension, unit: &str) -> Option<f64> {
    use Dimension::*;
    let f = match (dim, unit) {
        (Mass, "kg") => 1.0,
        (Mass, "u" | "amu") => AMU,
        (Length, "m") => 1.0,
        (Length, "cm") => 1e-2,
        (Length, "mm") => 1e-3,
        (Length, "um") => 1e-6,
        (Length, "nm") => 1e-9,
        (Length, "a0") => BOHR,
        (Length, "a_Rb") => A_RB,
        (Density, "m^-3") => 1.0,
        (Density, "cm^-3") => 1e6,
        (Temperature, "K") => 1.0,
        (Temperature, "mK") => 1e-3,
        (Temperature, "uK") => 1e-6,
        (Temperature, "nK") => 1e-9,
        _ => return None,
    };
    Some(f)
}

fn parse_quantity(key: &str, raw: &str, dim: Dimension) -> Result<f64> {
    let mut parts = raw.split_whitespace();
    let value = parts
        .next()
        .ok_or_else(|| Error::Config(format!("{key}: missing value")))
        .and_then(|v| parse_number(v).map_err(|e| Error::Config(format!("{key}: {e}"))))?;
    let factor = match parts.next() {
        None => 1.0,
        Some(unit) => unit_factor(dim, unit)
            .ok_or_else(|| Error::Config(format!("{key}: unknown unit `{unit}` for {dim:?}")))?,
    };
    if let Some(extra) = parts.next() {
        return Err(Error::Config(format!("{key}: unexpected trailing `{extra}`")));
    }
    Ok(value * factor)
}

/// SI parameter keys with their dimensions, in file order.
const PHYSICAL_KEYS: [(&str, Dimension); 9] = [
    ("m_A", Dimension::Mass),
    ("m_B", Dimension::Mass),
    ("a_B", Dimension::Length),
    ("a_AB", Dimension::Length),
    ("n0", Dimension::Density),
    ("sigma", Dimension::Length),
    ("L", Dimension::Length),
    ("D", Dimension::Length),
    ("T", Dimension::Temperature),
];

/// Dimensionless parameter keys, in file order.
pub const DIMENSIONLESS_KEYS: [&str; 6] = ["u", "g_AB", "n0_tilde", "theta", "L_over_sigma", "D_over_sigma"];

pub fn is_physical_key(key: &str) -> bool {
    PHYSICAL_KEYS.iter().any(|(k, _)| *k == key)
}

pub fn is_dimensionless_key(key: &str) -> bool {
    DIMENSIONLESS_KEYS.contains(&key)
}

impl PhysicalParams {
    /// Read all nine SI keys. Units default to SI when omitted.
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let mut vals = [0.0; 9];
        for (slot, (key, dim)) in vals.iter_mut().zip(PHYSICAL_KEYS) {
            let raw = kv
                .get(key)
                .ok_or_else(|| Error::Config(format!("missing physical parameter `{key}`")))?;
            *slot = parse_quantity(key, raw, dim)?;
        }
        let p = Self {
            m_a: vals[0],
            m_b: vals[1],
            a_b: vals[2],
            a_ab: vals[3],
            n0: vals[4],
            sigma: vals[5],
            l: vals[6],
            d: vals[7],
            t: vals[8],
        };
        p.validate()?;
        Ok(p)
    }

    /// SI values, one key per line, with explicit units.
    pub fn write_key_values(&self, kv: &mut KeyValues) {
        kv.set("m_A", format!("{:e} kg", self.m_a));
        kv.set("m_B", format!("{:e} kg", self.m_b));
        kv.set("a_B", format!("{:e} m", self.a_b));
        kv.set("a_AB", format!("{:e} m", self.a_ab));
        kv.set("n0", format!("{:e} m^-3", self.n0));
        kv.set("sigma", format!("{:e} m", self.sigma));
        kv.set("L", format!("{:e} m", self.l));
        kv.set("D", format!("{:e} m", self.d));
        kv.set("T", format!("{:e} K", self.t));
    }
}

impl ReservoirParams {
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let mut vals = [0.0; 6];
        for (slot, key) in vals.iter_mut().zip(DIMENSIONLESS_KEYS) {
            *slot = kv
                .parse_f64(key)?
                .ok_or_else(|| Error::Config(format!("missing dimensionless parameter `{key}`")))?;
        }
        ReservoirParams::new(vals[0], vals[1], vals[2], vals[3], vals[4], vals[5])
    }

    pub fn write_key_values(&self, kv: &mut KeyValues) {
        let fmt = |v: f64| if v.is_infinite() { "inf".to_string() } else { format!("{v:?}") };
        kv.set("u", fmt(self.u));
        kv.set("g_AB", fmt(self.g_ab));
        kv.set("n0_tilde", fmt(self.n0));
        kv.set("theta", fmt(self.theta));
        kv.set("L_over_sigma", fmt(self.l_sep));
        kv.set("D_over_sigma", fmt(self.d_sep));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(a.abs())
    }

    fn unit_sigma(a_b: f64, a_ab: f64, m_ratio: f64) -> PhysicalParams {
        PhysicalParams {
            m_a: m_ratio * 87.0 * AMU,
            m_b: 87.0 * AMU,
            a_b,
            a_ab,
            n0: 1.0,
            sigma: 1.0,
            l: 2.0,
            d: 4.0,
            t: 1e-30,
        }
    }

    #[test]
    fn boson_coupling_by_substitution() {
        let r = to_dimensionless(&unit_sigma(1.0, 1.0, 1.0)).unwrap();
        assert!(close(r.u, 4.0 * PI, 1e-15));
        assert!(close(r.n0, 1.0, 1e-15));
    }

    #[test]
    fn equal_masses_give_4pi_impurity_coupling() {
        let r = to_dimensionless(&unit_sigma(1.0, 1.0, 1.0)).unwrap();
        assert!(close(r.g_ab, 4.0 * PI, 1e-15));
    }

    #[test]
    fn cs_in_rb_mass_ratio() {
        let r = to_dimensionless(&unit_sigma(1.0, 1.0, 133.0 / 87.0)).unwrap();
        let expected = 2.0 * PI * (1.0 + 87.0 / 133.0);
        assert!(close(r.g_ab, expected, 1e-13));
        assert!(close(r.g_ab / (2.0 * PI), 1.654, 1e-3));
    }

    #[test]
    fn non_positive_inputs_rejected() {
        let mut p = PhysicalParams::cs_in_rb();
        p.n0 = 0.0;
        assert!(matches!(to_dimensionless(&p), Err(Error::Domain(_))));
        let mut p = PhysicalParams::cs_in_rb();
        p.t = -1.0;
        assert!(to_dimensionless(&p).is_err());
        assert!(ReservoirParams::new(1.0, 1.0, 1.0, -0.1, 1.0, 2.0).is_err());
        assert!(ReservoirParams::new(1.0, 1.0, 1.0, 0.0, 1.0, f64::INFINITY).is_ok());
    }

    #[test]
    fn length_rescaling_leaves_dimensionless_set_unchanged() {
        let p = PhysicalParams::cs_in_rb();
        let q = PhysicalParams {
            a_b: 2.0 * p.a_b,
            a_ab: 2.0 * p.a_ab,
            n0: p.n0 / 8.0,
            sigma: 2.0 * p.sigma,
            l: 2.0 * p.l,
            d: 2.0 * p.d,
            t: p.t / 4.0,
            ..p
        };
        let (a, b) = (to_dimensionless(&p).unwrap(), to_dimensionless(&q).unwrap());
        for (x, y) in [
            (a.u, b.u),
            (a.g_ab, b.g_ab),
            (a.n0, b.n0),
            (a.theta, b.theta),
            (a.l_sep, b.l_sep),
            (a.d_sep, b.d_sep),
        ] {
            assert!(close(x, y, 1e-12), "{x} vs {y}");
        }
    }

    #[test]
    fn cs_in_rb_defaults_land_near_the_trapping_preset() {
        let r = to_dimensionless(&PhysicalParams::cs_in_rb()).unwrap();
        let pre = presets::trapping();
        assert!(close(r.u, pre.u, 0.01), "u = {}", r.u);
        assert!(close(r.g_ab * r.g_ab * r.n0, pre.g_ab * pre.g_ab * pre.n0, 0.02));
        assert!(close(r.theta, pre.theta, 0.15), "theta = {}", r.theta);
        assert!(close(r.l_sep, pre.l_sep, 1e-12));
        assert!(close(r.d_sep, pre.d_sep, 1e-12));
    }

    #[test]
    fn parameter_file_with_units() {
        let text = "\
            # Cs in Rb\n\
            m_A = 132.905 u\n\
            m_B = 86.909 u   # boson\n\
            a_B = 1 a_Rb\n\
            a_AB = 330 a0\n\
            n0 = 3e14 cm^-3\n\
            sigma = 100 nm\n\
            L = 200 nm\n\
            D = 4 um\n\
            T = 10 nK\n";
        let kv = KeyValues::parse(text).unwrap();
        let p = PhysicalParams::from_key_values(&kv).unwrap();
        let expected = PhysicalParams::cs_in_rb();
        assert!(close(p.n0, expected.n0, 1e-12));
        assert!(close(p.d, expected.d, 1e-12));
        assert!(close(p.t, expected.t, 1e-12));
        assert!(close(p.a_b, A_RB, 1e-12));
        let mut echo = KeyValues::default();
        p.write_key_values(&mut echo);
        let q = PhysicalParams::from_key_values(&KeyValues::parse(&echo.to_text()).unwrap()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn malformed_parameter_files() {
        assert!(KeyValues::parse("u 1.0").is_err());
        assert!(KeyValues::parse("u = 1\nu = 2").is_err());
        let kv = KeyValues::parse("m_A = 1 parsec").unwrap();
        assert!(PhysicalParams::from_key_values(&kv).is_err());
        let kv = KeyValues::parse("u = abc").unwrap();
        assert!(kv.parse_f64("u").is_err());
    }

    #[test]
    fn dimensionless_echo_is_exact() {
        let p = presets::generation().independent();
        let mut kv = KeyValues::default();
        p.write_key_values(&mut kv);
        let q = ReservoirParams::from_key_values(&KeyValues::parse(&kv.to_text()).unwrap()).unwrap();
        assert_eq!(p, q);
    }
}
