use crate::error::{domain, Error, Result};
use crate::params::ReservoirParams;
use crate::quadrature::{self, panel_nodes, Estimate, NODES};

use super::{breaks, components_with, integrate_components, k_cut, statics, Channel, Factors, Statics, NCOMP};

/// Decoherence factors tabulated on an ascending time grid starting at 0.
///
/// Alongside the exported columns the profile keeps `dΠ_zz/dt`, which the
/// master-equation integrator needs for its phase generator.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceProfile {
    params: ReservoirParams,
    tol: f64,
    t: Vec<f64>,
    gamma0: Vec<f64>,
    delta: Vec<f64>,
    gamma_plus: Vec<f64>,
    gamma_minus: Vec<f64>,
    rate_plus: Vec<f64>,
    rate_minus: Vec<f64>,
    pi_zz: Vec<f64>,
    pi_rate: Vec<f64>,
}

/// Linearly interpolated profile values at one time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProfileSample {
    pub gamma0: f64,
    pub delta: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub pi_zz: f64,
}

impl ProfileSample {
    pub fn gamma(&self, ch: Channel) -> f64 {
        match ch {
            Channel::Zero => self.gamma0,
            Channel::Plus => self.gamma_plus,
            Channel::Minus => self.gamma_minus,
        }
    }
}

/// Rates from the cubic Hermite interpolant through `(Γ, dΓ/dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProfileRates {
    pub rate_plus: f64,
    pub rate_minus: f64,
    pub pi_rate: f64,
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.first() != Some(&0.0) {
        return Err(domain("time grid must start at 0"));
    }
    for w in t_grid.windows(2) {
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return Err(domain(format!("time grid must be strictly ascending and finite near t = {}", w[0])));
        }
    }
    Ok(())
}

impl DecoherenceProfile {
    /// Assemble from stored columns, re-checking every profile invariant.
    #[allow(clippy::too_many_arguments)]
    pub fn from_columns(
        params: ReservoirParams,
        tol: f64,
        t: Vec<f64>,
        gamma0: Vec<f64>,
        delta: Vec<f64>,
        rate_plus: Vec<f64>,
        rate_minus: Vec<f64>,
        pi_zz: Vec<f64>,
        pi_rate: Vec<f64>,
    ) -> Result<Self> {
        params.validate()?;
        if !(tol > 0.0) {
            return Err(domain("tolerance must be > 0"));
        }
        check_grid(&t)?;
        let n = t.len();
        for (name, col) in [
            ("gamma0", &gamma0),
            ("delta", &delta),
            ("rate_plus", &rate_plus),
            ("rate_minus", &rate_minus),
            ("pi_zz", &pi_zz),
            ("pi_rate", &pi_rate),
        ] {
            if col.len() != n {
                return Err(domain(format!("column {name} has {} rows, expected {n}", col.len())));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical {
                    message: format!("non-finite entry in {name}"),
                    achieved: f64::NAN,
                });
            }
        }
        if gamma0[0] != 0.0 || delta[0] != 0.0 || pi_zz[0] != 0.0 {
            return Err(domain("profile must vanish at t = 0"));
        }
        let gamma_plus = gamma0.iter().zip(&delta).map(|(g, d)| 2.0 * g + d).collect();
        let gamma_minus = gamma0.iter().zip(&delta).map(|(g, d)| 2.0 * g - d).collect();
        Ok(Self {
            params,
            tol,
            t,
            gamma0,
            delta,
            gamma_plus,
            gamma_minus,
            rate_plus,
            rate_minus,
            pi_zz,
            pi_rate,
        })
    }

    pub fn params(&self) -> &ReservoirParams {
        &self.params
    }
    pub fn tol(&self) -> f64 {
        self.tol
    }
    pub fn t_grid(&self) -> &[f64] {
        &self.t
    }
    pub fn gamma0(&self) -> &[f64] {
        &self.gamma0
    }
    pub fn delta(&self) -> &[f64] {
        &self.delta
    }
    pub fn gamma_plus(&self) -> &[f64] {
        &self.gamma_plus
    }
    pub fn gamma_minus(&self) -> &[f64] {
        &self.gamma_minus
    }
    pub fn rate_plus(&self) -> &[f64] {
        &self.rate_plus
    }
    pub fn rate_minus(&self) -> &[f64] {
        &self.rate_minus
    }
    pub fn pi_zz(&self) -> &[f64] {
        &self.pi_zz
    }
    pub fn pi_rate(&self) -> &[f64] {
        &self.pi_rate
    }

    pub fn gamma(&self, ch: Channel) -> &[f64] {
        match ch {
            Channel::Zero => &self.gamma0,
            Channel::Plus => &self.gamma_plus,
            Channel::Minus => &self.gamma_minus,
        }
    }

    pub fn rate(&self, ch: Channel) -> Vec<f64> {
        match ch {
            Channel::Zero => self
                .rate_plus
                .iter()
                .zip(&self.rate_minus)
                .map(|(p, m)| 0.25 * (p + m))
                .collect(),
            Channel::Plus => self.rate_plus.clone(),
            Channel::Minus => self.rate_minus.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.t.last().expect("profile grid is never empty")
    }

    /// Index `i` with `t[i] ≤ t ≤ t[i+1]` and the fractional position.
    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let hi = self.t_max();
        if !(t >= 0.0 && t <= hi) {
            return Err(Error::OutOfRange { t, lo: 0.0, hi });
        }
        if self.t.len() == 1 {
            return Ok((0, 0.0));
        }
        let i = match self.t.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i.min(self.t.len() - 2),
            Err(i) => i - 1,
        };
        let h = self.t[i + 1] - self.t[i];
        Ok((i, (t - self.t[i]) / h))
    }

    /// Values at `t`, linear between grid points.
    pub fn sample(&self, t: f64) -> Result<ProfileSample> {
        let (i, s) = self.locate(t)?;
        let lerp = |v: &[f64]| {
            if s == 0.0 {
                v[i]
            } else if s == 1.0 {
                v[i + 1]
            } else {
                v[i] + s * (v[i + 1] - v[i])
            }
        };
        Ok(ProfileSample {
            gamma0: lerp(&self.gamma0),
            delta: lerp(&self.delta),
            gamma_plus: lerp(&self.gamma_plus),
            gamma_minus: lerp(&self.gamma_minus),
            pi_zz: lerp(&self.pi_zz),
        })
    }

    /// Rates at `t` from the derivative of the cubic Hermite interpolant of
    /// each factor with the tabulated rates as slopes. The interpolant passes
    /// through every grid value, so integrating these rates reproduces the
    /// tabulated factors at grid points.
    pub fn hermite_rates(&self, t: f64) -> Result<ProfileRates> {
        let (i, s) = self.locate(t)?;
        if self.t.len() == 1 {
            return Ok(ProfileRates::default());
        }
        let h = self.t[i + 1] - self.t[i];
        // d/dt of the Hermite basis, in units of 1/h for the value terms
        let dh00 = (6.0 * s * s - 6.0 * s) / h;
        let dh10 = 3.0 * s * s - 4.0 * s + 1.0;
        let dh01 = -dh00;
        let dh11 = 3.0 * s * s - 2.0 * s;
        let d = |v: &[f64], r: &[f64]| dh00 * v[i] + dh10 * r[i] + dh01 * v[i + 1] + dh11 * r[i + 1];
        Ok(ProfileRates {
            rate_plus: d(&self.gamma_plus, &self.rate_plus),
            rate_minus: d(&self.gamma_minus, &self.rate_minus),
            pi_rate: d(&self.pi_zz, &self.pi_rate),
        })
    }

    /// The same profile with the conditional phase removed.
    pub fn without_phase(&self) -> Self {
        let mut p = self.clone();
        p.pi_zz.iter_mut().for_each(|v| *v = 0.0);
        p.pi_rate.iter_mut().for_each(|v| *v = 0.0);
        p
    }
}

/// Nodes shared by all times of one block, with the half-angle phasors
/// `e^{iE t/2}` of the most recent time.
struct NodeSet {
    statics: Vec<Statics>,
    half: Vec<f64>,
    phasor: Vec<(f64, f64)>,
    step: Vec<(f64, f64)>,
    last_t: f64,
    step_dt: f64,
    since_sync: usize,
}

/// Phasors are advanced by complex multiplication for at most this many
/// equal steps before being recomputed exactly.
const RESYNC: usize = 64;

impl NodeSet {
    fn new(p: &ReservoirParams, t_ref: f64, tol: f64) -> Self {
        let pref = p.prefactor();
        let br = breaks(p, t_ref, k_cut(tol));
        let mut st = Vec::with_capacity(NODES * br.len());
        let mut half = Vec::with_capacity(br.len());
        for w in br.windows(2) {
            st.extend(panel_nodes(w[0], w[1]).map(|k| statics(p, pref, k)));
            half.push(0.5 * (w[1] - w[0]));
        }
        let n = st.len();
        Self {
            statics: st,
            half,
            phasor: vec![(0.0, 1.0); n],
            step: vec![(0.0, 1.0); n],
            last_t: f64::NAN,
            step_dt: f64::NAN,
            since_sync: 0,
        }
    }

    fn advance(&mut self, t: f64) {
        let dt = t - self.last_t;
        let same_step = (dt - self.step_dt).abs() <= 1e-13 * dt.abs();
        if same_step && self.since_sync < RESYNC {
            for (z, w) in self.phasor.iter_mut().zip(&self.step) {
                let (s, c) = *z;
                *z = (s * w.1 + c * w.0, c * w.1 - s * w.0);
            }
            self.since_sync += 1;
        } else {
            if !same_step && dt.is_finite() {
                for (w, st) in self.step.iter_mut().zip(&self.statics) {
                    *w = (0.5 * st.energy * dt).sin_cos();
                }
                self.step_dt = dt;
            }
            for (z, st) in self.phasor.iter_mut().zip(&self.statics) {
                *z = (0.5 * st.energy * t).sin_cos();
            }
            self.since_sync = 0;
        }
        self.last_t = t;
    }

    fn evaluate(&mut self, t: f64) -> Estimate<NCOMP> {
        self.advance(t);
        let mut total = Estimate::<NCOMP>::zero();
        for (n, &half) in self.half.iter().enumerate() {
            let base = n * NODES;
            let mut columns = [[0.0; NODES]; NCOMP];
            for j in 0..NODES {
                let (s, c) = self.phasor[base + j];
                let v = components_with(&self.statics[base + j], t, s, c);
                for i in 0..NCOMP {
                    columns[i][j] = v[i];
                }
            }
            let e = quadrature::combine_columns(&columns, half);
            for i in 0..NCOMP {
                total.value[i] += e.value[i];
                total.error[i] += e.error[i];
                total.abs[i] += e.abs[i];
            }
        }
        total
    }
}

fn accepted(e: &Estimate<NCOMP>, tol: f64) -> bool {
    (0..NCOMP).all(|i| e.error[i] <= tol * e.abs[i] || e.error[i] <= 1e-300)
}

/// Times up to this value share a single node set.
const FIRST_BLOCK: f64 = 2.0;
/// Ratio of consecutive block ends.
const BLOCK_GROWTH: f64 = 1.25;

/// Tabulate every factor on `t_grid`.
///
/// Grid times are processed in blocks `(T/g, T]` with geometrically growing
/// `T`. Each
/// block evaluates the time-independent parts of the integrand once on a
/// node set fine enough for its largest time, and only the oscillating
/// factors per time. A time whose error estimate misses `tol` is redone
/// with the fully adaptive integrator.
pub fn build_profile(p: &ReservoirParams, t_grid: &[f64], tol: f64) -> Result<DecoherenceProfile> {
    p.validate()?;
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be > 0, got {tol}")));
    }
    check_grid(t_grid)?;
    let n = t_grid.len();
    let mut rows = vec![Factors::default(); n];
    let mut i = 1;
    let mut block_end = FIRST_BLOCK;
    while i < n {
        while t_grid[i] > block_end {
            block_end *= BLOCK_GROWTH;
        }
        let mut j = i;
        while j < n && t_grid[j] <= block_end {
            j += 1;
        }
        let mut nodes = NodeSet::new(p, t_grid[j - 1], tol);
        for (row, &t) in rows[i..j].iter_mut().zip(&t_grid[i..j]) {
            let est = nodes.evaluate(t);
            let est = if accepted(&est, tol) {
                est
            } else {
                integrate_components(p, t, tol).map_err(|e| match e {
                    Error::Numerical { message, achieved } => Error::Numerical {
                        message: format!("{message} at t = {t}"),
                        achieved,
                    },
                    other => other,
                })?
            };
            *row = Factors::from_components(&est.value);
        }
        i = j;
    }
    let col = |f: fn(&Factors) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    DecoherenceProfile::from_columns(
        *p,
        tol,
        t_grid.to_vec(),
        col(|r| r.gamma0),
        col(|r| r.delta),
        col(|r| r.rate(Channel::Plus)),
        col(|r| r.rate(Channel::Minus)),
        col(|r| r.pi_zz),
        col(|r| r.pi_rate),
    )
}

/// Time grid helpers.
pub mod grid {
    use crate::error::{domain, Result};

    /// `0, dt, 2dt, …` up to and including `t_max` (the last step may be
    /// shorter).
    pub fn uniform(t_max: f64, dt: f64) -> Result<Vec<f64>> {
        if !(t_max >= 0.0) || !(dt > 0.0) || !t_max.is_finite() {
            return Err(domain(format!("bad grid t_max={t_max}, dt={dt}")));
        }
        let n = (t_max / dt * (1.0 + 1e-12)).floor() as usize;
        let mut g: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
        let last = g[n];
        if t_max - last > 1e-9 * dt {
            g.push(t_max);
        } else {
            g[n] = t_max;
        }
        Ok(g)
    }

    /// Fine steps `dt_fine` up to `t_switch`, then `dt_coarse` up to `t_max`.
    pub fn two_stage(t_switch: f64, dt_fine: f64, t_max: f64, dt_coarse: f64) -> Result<Vec<f64>> {
        if !(t_switch <= t_max) {
            return Err(domain(format!("switch time {t_switch} beyond t_max {t_max}")));
        }
        let mut g = uniform(t_switch, dt_fine)?;
        let tail = uniform(t_max - t_switch, dt_coarse)?;
        g.extend(tail.into_iter().skip(1).map(|t| t + t_switch));
        Ok(g)
    }
}
