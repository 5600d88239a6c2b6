//! Experiment drivers: dynamics classification, phase diagrams, stationary
//! scans, entanglement generation and the discord comparison.
//!
//! Every driver takes a [`ProfileProvider`] so callers can add caching. All
//! outputs are deterministic: parallel maps keep input order.

use std::fmt;
use std::str::FromStr;

use crate::correlations::{concurrence, concurrence_werner, CorrelationTrajectory, DiscordMethod};
use crate::decoherence::{build_profile, gamma_infinity, Channel, DecoherenceProfile, DEFAULT_TOL};
use crate::dynamics::apply_factors;
use crate::error::{domain, Error, Result};
use crate::params::ReservoirParams;
use crate::state::{make_product_plus, make_werner, Sign, TwoQubitState};

/// Source of decoherence profiles.
pub trait ProfileProvider: Sync {
    fn profile(&self, p: &ReservoirParams, t_grid: &[f64], tol: f64) -> Result<DecoherenceProfile>;
}

/// Builds every profile from scratch.
#[derive(Debug, Clone, Copy, Default)]
pub struct Direct;

impl ProfileProvider for Direct {
    fn profile(&self, p: &ReservoirParams, t_grid: &[f64], tol: f64) -> Result<DecoherenceProfile> {
        build_profile(p, t_grid, tol)
    }
}

/// Map `f` over `items` on all cores, keeping order. The first error wins.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> Result<R> + Sync) -> Result<Vec<R>> {
    let n = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    if n <= 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(n);
    let parts: Vec<Result<Vec<R>>> = std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                s.spawn(move || part.iter().map(f).collect::<Result<Vec<R>>>())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(items.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Decay channel of the Werner family's Bell coherence.
pub fn werner_channel(sign: Sign) -> Channel {
    match sign {
        Sign::Plus => Channel::Minus,
        Sign::Minus => Channel::Plus,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseLabel {
    SuddenDeath,
    Revivals,
    Trapping,
    /// The horizon was too short for the decoherence factor to settle.
    Inconclusive,
}

impl PhaseLabel {
    pub const ALL: [PhaseLabel; 4] = [Self::SuddenDeath, Self::Revivals, Self::Trapping, Self::Inconclusive];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::SuddenDeath => "SUDDEN_DEATH",
            Self::Revivals => "REVIVALS",
            Self::Trapping => "TRAPPING",
            Self::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhaseLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown phase label `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    /// Concurrence below this counts as zero.
    pub eps_c: f64,
    /// Largest relative spread of `Γ` over the last 10% of the horizon.
    pub drift_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            eps_c: 1e-6,
            drift_tol: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsClass {
    pub label: PhaseLabel,
    /// Concurrence at the horizon.
    pub residual: f64,
    /// First time the concurrence drops to `eps_c`; 0 for initially
    /// separable states.
    pub death_time: Option<f64>,
    pub revival_count: usize,
    /// Relative spread of `Γ` over the last 10% of the horizon.
    pub drift: f64,
}

/// Relative spread of `g` over `t ≥ 0.9 t_end`.
fn tail_drift(t: &[f64], g: &[f64]) -> f64 {
    let t_end = *t.last().unwrap();
    let tail: Vec<f64> = t.iter().zip(g).filter(|(&ti, _)| ti >= 0.9 * t_end).map(|(_, &v)| v).collect();
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = g.last().unwrap().abs().max(1e-12);
    (hi - lo) / scale
}

/// Time in `[t0, t1]` where `C(t) = eps` with `Γ` interpolated linearly.
fn crossing(profile: &DecoherenceProfile, ch: Channel, mix: f64, eps: f64, t0: f64, t1: f64) -> f64 {
    let f = |t: f64| concurrence_werner(mix, profile.sample(t).expect("inside grid").gamma(ch)) - eps;
    let (mut lo, mut hi) = (t0, t1);
    let lo_alive = f(lo) > 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == lo_alive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Classify the Werner dynamics `C(t) = max{0, c e^{−Γ∓} − (1 − c)/2}` on
/// the profile grid. The last grid point is the horizon.
pub fn classify(profile: &DecoherenceProfile, mix: f64, sign: Sign, opts: &ClassifyOptions) -> Result<DynamicsClass> {
    if !(0.0..=1.0).contains(&mix) {
        return Err(domain(format!("mixing parameter must lie in [0, 1], got {mix}")));
    }
    if profile.len() < 2 {
        return Err(domain("classification needs at least two grid points"));
    }
    let ch = werner_channel(sign);
    let t = profile.t_grid();
    let g = profile.gamma(ch);
    let cv: Vec<f64> = g.iter().map(|&x| concurrence_werner(mix, x)).collect();
    let mut death_time = None;
    let mut revivals = 0;
    if cv[0] <= opts.eps_c {
        death_time = Some(0.0);
    }
    for i in 1..t.len() {
        let (was, is) = (cv[i - 1] > opts.eps_c, cv[i] > opts.eps_c);
        if was && !is && death_time.is_none() {
            death_time = Some(crossing(profile, ch, mix, opts.eps_c, t[i - 1], t[i]));
        }
        if !was && is && death_time.is_some() {
            revivals += 1;
        }
    }
    let residual = *cv.last().unwrap();
    let drift = tail_drift(t, g);
    let label = if drift >= opts.drift_tol {
        PhaseLabel::Inconclusive
    } else if revivals >= 1 {
        PhaseLabel::Revivals
    } else if residual > opts.eps_c {
        PhaseLabel::Trapping
    } else {
        PhaseLabel::SuddenDeath
    };
    Ok(DynamicsClass {
        label,
        residual,
        death_time,
        revival_count: revivals,
        drift,
    })
}

/// Werner-family classification grid over `(a_B, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    pub c: Vec<f64>,
    /// Scattering lengths in units of the template's reference value.
    pub a_b: Vec<f64>,
    /// `cells[i][j]` belongs to `a_b[i]` and `c[j]`.
    pub cells: Vec<Vec<DynamicsClass>>,
    pub params: ReservoirParams,
    pub sign: Sign,
}

impl PhaseDiagram {
    pub fn count(&self, label: PhaseLabel) -> usize {
        self.cells.iter().flatten().filter(|d| d.label == label).count()
    }

    /// Cells `(i, j)` labelled sudden death although a smaller `c` in the
    /// same row is trapping.
    pub fn monotonicity_violations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, row) in self.cells.iter().enumerate() {
            let mut trapped = false;
            for (j, cell) in row.iter().enumerate() {
                if cell.label == PhaseLabel::SuddenDeath && trapped {
                    out.push((i, j));
                }
                trapped |= cell.label == PhaseLabel::Trapping;
            }
        }
        out
    }

    /// Width in `c` of the band holding non-sudden-death cells below the
    /// first fully trapping stretch, per row: `(c of first non-death cell,
    /// c of first trapping cell after which all are trapping)`.
    pub fn transition_band(&self, row: usize) -> Option<(f64, f64)> {
        let cells = &self.cells[row];
        let first = cells.iter().position(|d| d.label != PhaseLabel::SuddenDeath)?;
        let mut start_trap = None;
        for j in (0..cells.len()).rev() {
            if cells[j].label == PhaseLabel::Trapping {
                start_trap = Some(j);
            } else {
                break;
            }
        }
        Some((self.c[first], self.c[start_trap?]))
    }
}

/// Classify every `(a_B, c)` cell. `a_B` values scale `u` relative to the
/// template; one profile serves a whole row.
pub fn phase_diagram(
    provider: &dyn ProfileProvider,
    template: &ReservoirParams,
    c_values: &[f64],
    a_b_values: &[f64],
    sign: Sign,
    t_grid: &[f64],
    tol: f64,
    opts: &ClassifyOptions,
) -> Result<PhaseDiagram> {
    if c_values.is_empty() || a_b_values.is_empty() {
        return Err(domain("phase diagram ranges must be nonempty"));
    }
    let cells = par_map(a_b_values, |&a| {
        let p = template.with_scattering_scale(a);
        p.validate()?;
        let prof = provider.profile(&p, t_grid, tol)?;
        c_values.iter().map(|&c| classify(&prof, c, sign, opts)).collect()
    })?;
    Ok(PhaseDiagram {
        c: c_values.to_vec(),
        a_b: a_b_values.to_vec(),
        cells,
        params: *template,
        sign,
    })
}

/// What a scan varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanVariable {
    /// Scattering length relative to the template (scales `u`).
    ScatteringLength,
    /// Distance between the double wells.
    Distance,
}

impl FromStr for ScanVariable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a_B" | "a_b" | "ab" => Ok(Self::ScatteringLength),
            "D" | "d" => Ok(Self::Distance),
            _ => Err(Error::Config(format!("scan variable must be `a_B` or `D`, got `{s}`"))),
        }
    }
}

impl ScanVariable {
    pub fn apply(self, template: &ReservoirParams, x: f64) -> Result<ReservoirParams> {
        let p = match self {
            Self::ScatteringLength => template.with_scattering_scale(x),
            Self::Distance => template.with_d_sep(x),
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPoint {
    pub x: f64,
    pub residual: f64,
}

/// Stationary Werner concurrence `concurrence_werner(c, Γ∓(∞))` along a scan.
pub fn stationary_scan(
    template: &ReservoirParams,
    variable: ScanVariable,
    values: &[f64],
    mix: f64,
    sign: Sign,
    tol: f64,
) -> Result<Vec<StationaryPoint>> {
    par_map(values, |&x| {
        let p = variable.apply(template, x)?;
        let g = gamma_infinity(&p, tol, werner_channel(sign))?;
        Ok(StationaryPoint {
            x,
            residual: concurrence_werner(mix, g),
        })
    })
}

/// Large-distance limit of a distance scan: the stationary value with the
/// cross-talk switched off.
pub fn independent_residual(template: &ReservoirParams, mix: f64, sign: Sign, tol: f64) -> Result<f64> {
    let g = gamma_infinity(&template.independent(), tol, werner_channel(sign))?;
    Ok(concurrence_werner(mix, g))
}

/// Fast-path residual against the concurrence at a finite horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonCheck {
    pub x: f64,
    pub stationary: f64,
    pub at_horizon: f64,
}

/// Compare [`stationary_scan`] against the profile value at `horizon` on the
/// first, middle and last scan points.
pub fn stationary_crosscheck(
    template: &ReservoirParams,
    variable: ScanVariable,
    values: &[f64],
    mix: f64,
    sign: Sign,
    horizon: f64,
    tol: f64,
) -> Result<Vec<HorizonCheck>> {
    if values.is_empty() {
        return Ok(Vec::new());
    }
    let mut picks = vec![values[0], values[values.len() / 2], values[values.len() - 1]];
    picks.dedup();
    par_map(&picks, |&x| {
        let p = variable.apply(template, x)?;
        let ch = werner_channel(sign);
        let g_inf = gamma_infinity(&p, tol, ch)?;
        let g_t = crate::decoherence::factors(horizon, &p, tol)?.gamma(ch);
        Ok(HorizonCheck {
            x,
            stationary: concurrence_werner(mix, g_inf),
            at_horizon: concurrence_werner(mix, g_t),
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationResult {
    pub c_max: f64,
    pub t_max: f64,
    /// False when the peak sits on the last grid point.
    pub interior: bool,
}

/// Peak of a sampled curve: the earliest local maximum reaching 90% of the
/// global maximum, refined by a parabola through its neighbours.
pub fn find_peak(t: &[f64], y: &[f64]) -> GenerationResult {
    let n = y.len();
    let global = y.iter().copied().fold(0.0, f64::max);
    if n < 3 || global <= 0.0 {
        let (i, &v) = y.iter().enumerate().fold((0, &0.0), |a, b| if b.1 > a.1 { b } else { a });
        return GenerationResult {
            c_max: v,
            t_max: t.get(i).copied().unwrap_or(0.0),
            interior: false,
        };
    }
    for i in 1..n - 1 {
        if y[i] >= 0.9 * global && y[i] >= y[i - 1] && y[i] >= y[i + 1] {
            let (t0, t1, t2) = (t[i - 1], t[i], t[i + 1]);
            let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
            // vertex of the interpolating parabola
            let d0 = (y1 - y0) / (t1 - t0);
            let d1 = (y2 - y1) / (t2 - t1);
            let a = (d1 - d0) / (t2 - t0);
            if a < 0.0 {
                let tv = 0.5 * (t0 + t1) - d0 / (2.0 * a);
                let tv = tv.clamp(t0, t2);
                let yv = y1 + (tv - t1) * (d0 + a * (tv - t0));
                return GenerationResult {
                    c_max: yv.max(y1),
                    t_max: tv,
                    interior: true,
                };
            }
            return GenerationResult {
                c_max: y1,
                t_max: t1,
                interior: true,
            };
        }
    }
    GenerationResult {
        c_max: y[n - 1],
        t_max: t[n - 1],
        interior: false,
    }
}

/// Evolve `rho0` with the exact map on every profile grid point.
pub fn evolve_on_grid(rho0: &TwoQubitState, profile: &DecoherenceProfile) -> Vec<TwoQubitState> {
    (0..profile.len())
        .map(|i| {
            apply_factors(
                rho0,
                profile.gamma0()[i],
                profile.gamma_plus()[i],
                profile.gamma_minus()[i],
                profile.pi_zz()[i],
            )
        })
        .collect()
}

fn max_concurrence(states: &[TwoQubitState]) -> Result<f64> {
    states.iter().try_fold(0.0f64, |m, s| Ok(m.max(concurrence(s)?)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRun {
    pub trajectory: CorrelationTrajectory,
    pub result: GenerationResult,
    /// Largest concurrence reached from `|LL⟩`.
    pub control_ll: f64,
    /// Largest concurrence reached from `|LR⟩`.
    pub control_lr: f64,
    /// Largest concurrence with the phase `Π_zz` forced to zero.
    pub control_no_phase: f64,
}

/// Entanglement generation from the equal superposition of all basis states.
pub fn generation_run(profile: &DecoherenceProfile, discord: DiscordMethod) -> Result<GenerationRun> {
    let states = evolve_on_grid(&make_product_plus(), profile);
    let trajectory = CorrelationTrajectory::from_states(profile.t_grid(), &states, discord)?;
    let result = find_peak(&trajectory.t, &trajectory.concurrence);
    let control_ll = max_concurrence(&evolve_on_grid(&TwoQubitState::basis("LL")?, profile))?;
    let control_lr = max_concurrence(&evolve_on_grid(&TwoQubitState::basis("LR")?, profile))?;
    let control_no_phase = max_concurrence(&evolve_on_grid(&make_product_plus(), &profile.without_phase()))?;
    Ok(GenerationRun {
        trajectory,
        result,
        control_ll,
        control_lr,
        control_no_phase,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationPoint {
    pub x: f64,
    pub c_max: f64,
    pub t_max: f64,
    pub interior: bool,
}

/// Peak generated concurrence along a scan.
pub fn generation_scan(
    provider: &dyn ProfileProvider,
    template: &ReservoirParams,
    variable: ScanVariable,
    values: &[f64],
    t_grid: &[f64],
    tol: f64,
) -> Result<Vec<GenerationPoint>> {
    par_map(values, |&x| {
        let p = variable.apply(template, x)?;
        let prof = provider.profile(&p, t_grid, tol)?;
        let states = evolve_on_grid(&make_product_plus(), &prof);
        let conc: Vec<f64> = states.iter().map(concurrence).collect::<Result<_>>()?;
        let r = find_peak(prof.t_grid(), &conc);
        Ok(GenerationPoint {
            x,
            c_max: r.c_max,
            t_max: r.t_max,
            interior: r.interior,
        })
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscordComparison {
    pub trajectory: CorrelationTrajectory,
    /// Grid indices where the concurrence is at most `eps_c` while the
    /// discord exceeds `10 eps_c`.
    pub hidden: Vec<usize>,
    /// Maximal index ranges `[start, end]` with concurrence at most `eps_c`
    /// that begin after the concurrence was positive.
    pub gaps: Vec<(usize, usize)>,
}

/// Concurrence and discord of an evolving Werner state.
pub fn discord_comparison_run(profile: &DecoherenceProfile, mix: f64, sign: Sign, eps_c: f64) -> Result<DiscordComparison> {
    let states = evolve_on_grid(&make_werner(mix, sign)?, profile);
    let trajectory = CorrelationTrajectory::from_states(profile.t_grid(), &states, DiscordMethod::BellDiagonal)?;
    let zero: Vec<bool> = trajectory.concurrence.iter().map(|&c| c <= eps_c).collect();
    let hidden = (0..states.len())
        .filter(|&i| zero[i] && trajectory.discord[i].unwrap_or(0.0) > 10.0 * eps_c)
        .collect();
    let mut gaps = Vec::new();
    let mut start = None;
    for i in 0..zero.len() {
        match (start, zero[i]) {
            (None, true) if i > 0 && !zero[i - 1] => start = Some(i),
            (Some(s), false) => {
                gaps.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        gaps.push((s, zero.len() - 1));
    }
    Ok(DiscordComparison { trajectory, hidden, gaps })
}

/// Indices of strict interior local maxima of `y` above `floor`.
pub fn local_maxima(y: &[f64], floor: f64) -> Vec<usize> {
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > floor && y[i] > y[i - 1] && y[i] >= y[i + 1])
        .collect()
}

/// Default quadrature tolerance of the drivers.
pub const SCENARIO_TOL: f64 = DEFAULT_TOL;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoherence::{grid, DecoherenceProfile};
    use crate::params::presets;

    fn synthetic(gamma_minus: Vec<f64>) -> DecoherenceProfile {
        let n = gamma_minus.len();
        let t: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let delta: Vec<f64> = gamma_minus.iter().map(|g| -g).collect();
        // Γ₀ = 0, δ = −Γ₋ gives Γ₋ = −δ and Γ₊ = δ
        DecoherenceProfile::from_columns(
            presets::benchmark(),
            1e-8,
            t,
            vec![0.0; n],
            delta,
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
        )
        .unwrap()
    }

    #[test]
    fn label_logic() {
        let opts = ClassifyOptions::default();
        let tail = |v: f64| vec![v; 12];
        let mut g = vec![0.0, 0.2, 0.5];
        g.extend(tail(0.5));
        let d = classify(&synthetic(g), 1.0, Sign::Plus, &opts).unwrap();
        assert_eq!(d.label, PhaseLabel::Trapping);
        assert!((d.residual - (-0.5f64).exp()).abs() < 1e-15);
        let mut g = vec![0.0, 1.0, 3.0, 0.2];
        g.extend(tail(0.2));
        let d = classify(&synthetic(g), 0.8, Sign::Plus, &opts).unwrap();
        assert_eq!(d.label, PhaseLabel::Revivals);
        assert_eq!(d.revival_count, 1);
        let dt = d.death_time.unwrap();
        assert!(dt > 1.0 && dt < 2.0);
        let d = classify(&synthetic(vec![0.0; 15]), 0.3, Sign::Plus, &opts).unwrap();
        assert_eq!(d.label, PhaseLabel::SuddenDeath);
        assert_eq!(d.death_time, Some(0.0));
        let g: Vec<f64> = (0..15).map(|i| i as f64).collect();
        let d = classify(&synthetic(g), 1.0, Sign::Plus, &opts).unwrap();
        assert_eq!(d.label, PhaseLabel::Inconclusive);
    }

    #[test]
    fn labels_round_trip() {
        for l in PhaseLabel::ALL {
            assert_eq!(l.as_str().parse::<PhaseLabel>().unwrap(), l);
        }
    }

    #[test]
    fn peak_refinement() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|&x| 1.0 - (x - 2.03) * (x - 2.03)).collect();
        let r = find_peak(&t, &y);
        assert!(r.interior);
        assert!((r.t_max - 2.03).abs() < 1e-12);
        assert!((r.c_max - 1.0).abs() < 1e-12);
        let r = find_peak(&t, &vec![0.0; 50]);
        assert_eq!(r.c_max, 0.0);
    }

    #[test]
    fn one_cell_diagram_equals_classify() {
        let p = presets::trapping();
        let t = grid::uniform(20.0, 0.5).unwrap();
        let opts = ClassifyOptions {
            drift_tol: f64::INFINITY,
            ..Default::default()
        };
        let d = phase_diagram(&Direct, &p, &[0.7], &[1.0], Sign::Minus, &t, 1e-8, &opts).unwrap();
        let prof = build_profile(&p, &t, 1e-8).unwrap();
        assert_eq!(d.cells[0][0], classify(&prof, 0.7, Sign::Minus, &opts).unwrap());
    }

    #[test]
    fn generation_controls_vanish() {
        let p = presets::generation();
        let prof = build_profile(&p, &grid::uniform(40.0, 1.0).unwrap(), 1e-8).unwrap();
        let run = generation_run(&prof, DiscordMethod::Skip).unwrap();
        assert!(run.control_ll <= 1e-12);
        assert!(run.control_lr <= 1e-12);
        assert!(run.control_no_phase <= 1e-12);
        assert!(run.trajectory.concurrence.iter().any(|&c| c > 1e-3));
    }
}
