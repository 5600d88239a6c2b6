use std::path::{Path, PathBuf};

use bec_dephasing::correlations::{
    concurrence, concurrence_werner, discord_bell_diagonal, discord_bruteforce, CorrelationTrajectory, DiscordGrid,
    DiscordMethod,
};
use bec_dephasing::decoherence::{
    build_profile, discrete_bath_oracle, factors, grid, stationary, DecoherenceProfile,
};
use bec_dephasing::dynamics::{apply_map, integrate_me, non_markov_report, MeOptions};
use bec_dephasing::output;
use bec_dephasing::params::presets;
use bec_dephasing::scenarios::{self, ClassifyOptions, Direct, PhaseLabel, ProfileProvider, ScanVariable};
use bec_dephasing::state::{make_product_plus, make_werner, prepare_werner_via_protocol, Mat4, Sign};
use bec_dephasing::{ReservoirParams, TwoQubitState};

use crate::cache::{CachedProvider, ENV_VAR};
use crate::config::Resolver;
use crate::error::CliError;
use crate::{Common, GridArgs, ScanArgs};

const DEFAULT_TOL: f64 = 1e-8;

struct GridDefaults {
    t_max: f64,
    dt: f64,
    t_switch: f64,
    dt_fine: f64,
}

impl GridDefaults {
    const fn uniform(t_max: f64, dt: f64) -> Self {
        Self {
            t_max,
            dt,
            t_switch: 0.0,
            dt_fine: 0.0,
        }
    }
}

/// Everything a command needs before its own options.
struct Setup {
    resolver: Resolver,
    params: ReservoirParams,
    tol: f64,
    provider: Box<dyn ProfileProvider>,
}

fn setup(command: &str, common: &Common, default_preset: &str) -> Result<Setup, CliError> {
    let mut resolver = Resolver::new(command, common.config.as_deref())?;
    let mut args = common.params.clone();
    if args.preset.is_none() && args.params.is_none() && !resolver_has_params(common)? {
        args.preset = Some(default_preset.to_string());
    }
    let params = resolver.reservoir(&args)?;
    let tol = resolver.get("tol", common.tol, DEFAULT_TOL)?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(CliError::config(format!("tol must lie in (0, 1), got {tol}")));
    }
    let provider: Box<dyn ProfileProvider> = match (&common.cache_dir, std::env::var_os(ENV_VAR)) {
        _ if common.no_cache => Box::new(Direct),
        (Some(dir), _) => Box::new(CachedProvider::new(dir)),
        (None, Some(dir)) if !dir.is_empty() => Box::new(CachedProvider::new(PathBuf::from(dir))),
        _ => Box::new(Direct),
    };
    Ok(Setup {
        resolver,
        params,
        tol,
        provider,
    })
}

fn resolver_has_params(common: &Common) -> Result<bool, CliError> {
    let Some(path) = &common.config else { return Ok(false) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
    let kv = bec_dephasing::params::KeyValues::parse(&text)?;
    let found = kv.keys().any(bec_dephasing::params::is_dimensionless_key);
    Ok(found)
}

fn time_grid(r: &mut Resolver, g: &GridArgs, d: GridDefaults) -> Result<Vec<f64>, CliError> {
    let t_max = r.get("t_max", g.t_max, d.t_max)?;
    let dt = r.get("dt", g.dt, d.dt)?;
    let t_switch = r.get("t_switch", g.t_switch, d.t_switch)?;
    if t_switch > 0.0 {
        let dt_fine = r.get("dt_fine", g.dt_fine, d.dt_fine.max(0.0))?;
        Ok(grid::two_stage(t_switch, dt_fine, t_max, dt)?)
    } else {
        Ok(grid::uniform(t_max, dt)?)
    }
}

fn parse_sign(s: &str) -> Result<Sign, CliError> {
    Ok(s.parse::<Sign>()?)
}

fn write_output(common: &Common, r: &Resolver, text: &str) -> Result<(), CliError> {
    match &common.output {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            write_file(path, text)?;
            let mut meta = r.sidecar_text();
            meta.push_str(&format!("output = {}\n", path.display()));
            write_file(&sidecar_path(path), &meta)
        }
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

pub fn rates(common: &Common, g: &GridArgs) -> Result<(), CliError> {
    let mut s = setup("rates", common, "trapping")?;
    let t = time_grid(&mut s.resolver, g, GridDefaults::uniform(50.0, 0.05))?;
    s.resolver.finish()?;
    let prof = s.provider.profile(&s.params, &t, s.tol)?;
    let (g0, d) = stationary(&s.params, s.tol)?;
    eprintln!("stationary: gamma0 {g0:.10e}, delta {d:.10e}");
    write_output(common, &s.resolver, &output::profile_csv(&prof))
}

/// Initial-state specifiers.
pub fn parse_state(spec: &str) -> Result<TwoQubitState, CliError> {
    let bad = || CliError::config(format!("bad state `{spec}`; use werner:+:0.8, protocol:-:0.5, product+ or basis:LR"));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["product+"] => Ok(make_product_plus()),
        ["basis", label] => Ok(TwoQubitState::basis(label)?),
        [kind @ ("werner" | "protocol"), sign, c] => {
            let sign = parse_sign(sign)?;
            let c: f64 = c.parse().map_err(|_| bad())?;
            Ok(if *kind == "werner" {
                make_werner(c, sign)?
            } else {
                prepare_werner_via_protocol(c, sign)?
            })
        }
        _ => Err(bad()),
    }
}

fn parse_discord(s: &str) -> Result<DiscordMethod, CliError> {
    let g = DiscordGrid::default();
    match s {
        "none" => Ok(DiscordMethod::Skip),
        "bell" => Ok(DiscordMethod::BellDiagonal),
        "brute" => Ok(DiscordMethod::BruteForce(g)),
        "auto" => Ok(DiscordMethod::Auto(g)),
        _ => Err(CliError::config(format!("discord must be none, bell, brute or auto, got `{s}`"))),
    }
}

pub fn evolve(
    common: &Common,
    g: &GridArgs,
    state: Option<String>,
    method: Option<String>,
    no_phase_generator: bool,
    discord: Option<String>,
    density: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut s = setup("evolve", common, "generation")?;
    let t = time_grid(&mut s.resolver, g, GridDefaults::uniform(20.0, 0.05))?;
    let spec = s.resolver.get("state", state, "product+".to_string())?;
    let method = s.resolver.get("method", method, "map".to_string())?;
    let phase = !s.resolver.get("no_phase_generator", no_phase_generator.then_some(true), false)?;
    let discord = parse_discord(&s.resolver.get("discord", discord, "auto".to_string())?)?;
    s.resolver.finish()?;
    let rho0 = parse_state(&spec)?;
    let prof = s.provider.profile(&s.params, &t, s.tol)?;
    let (times, states) = match method.as_str() {
        "map" => (
            prof.t_grid().to_vec(),
            prof.t_grid()
                .iter()
                .map(|&ti| apply_map(&rho0, &prof, ti))
                .collect::<bec_dephasing::Result<Vec<_>>>()?,
        ),
        "me" => {
            let opts = MeOptions {
                phase_generator: phase,
                ..Default::default()
            };
            let tr = integrate_me(&rho0, &prof, prof.t_max(), &opts)?;
            (tr.t, tr.states)
        }
        _ => return Err(CliError::config(format!("method must be map or me, got `{method}`"))),
    };
    let traj = CorrelationTrajectory::from_states(&times, &states, discord)?;
    if let Some(path) = &density {
        write_file(path, &output::density_csv(&times, &states))?;
    }
    write_output(common, &s.resolver, &output::trajectory_csv(&traj))
}

pub struct DiagramRanges {
    pub c_min: Option<f64>,
    pub c_max: Option<f64>,
    pub c_n: Option<usize>,
    pub ab_min: Option<f64>,
    pub ab_max: Option<f64>,
    pub ab_n: Option<usize>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if n == 0 || !(lo <= hi) {
        return Err(CliError::config(format!("bad range [{lo}, {hi}] with {n} points")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

pub fn phase_diagram(
    common: &Common,
    g: &GridArgs,
    ranges: DiagramRanges,
    sign: Option<String>,
    eps_c: Option<f64>,
) -> Result<(), CliError> {
    let mut s = setup("phase-diagram", common, "trapping")?;
    let t = time_grid(
        &mut s.resolver,
        g,
        GridDefaults {
            t_max: 300.0,
            dt: 0.5,
            t_switch: 40.0,
            dt_fine: 0.05,
        },
    )?;
    let r = &mut s.resolver;
    let c = linspace(
        r.get("c_min", ranges.c_min, 0.25)?,
        r.get("c_max", ranges.c_max, 0.55)?,
        r.get("c_n", ranges.c_n, 31)?,
    )?;
    let a = linspace(
        r.get("ab_min", ranges.ab_min, 1.0)?,
        r.get("ab_max", ranges.ab_max, 5.0)?,
        r.get("ab_n", ranges.ab_n, 21)?,
    )?;
    let sign = parse_sign(&r.get("sign", sign, "-".to_string())?)?;
    let opts = ClassifyOptions {
        eps_c: r.get("eps_c", eps_c, 1e-6)?,
        ..Default::default()
    };
    r.finish()?;
    let d = scenarios::phase_diagram(s.provider.as_ref(), &s.params, &c, &a, sign, &t, s.tol, &opts)?;
    let counts: Vec<String> = PhaseLabel::ALL.iter().map(|&l| format!("{l} {}", d.count(l))).collect();
    eprintln!("{}", counts.join(", "));
    let violations = d.monotonicity_violations();
    if !violations.is_empty() {
        eprintln!("warning: {} cells break the trapping-before-death ordering", violations.len());
    }
    write_output(common, &s.resolver, &output::phase_diagram_csv(&d))?;
    match d.count(PhaseLabel::Inconclusive) {
        0 => Ok(()),
        n => Err(CliError::inconclusive(format!(
            "{n} cells did not settle within the horizon; raise --t-max"
        ))),
    }
}

fn scan_setup(r: &mut Resolver, scan: &ScanArgs, default: &[f64]) -> Result<(ScanVariable, Vec<f64>), CliError> {
    let variable: ScanVariable = r.get("variable", scan.variable.clone(), "a_B".to_string())?.parse()?;
    let values = r.list("values", scan.values.as_deref())?.unwrap_or_else(|| default.to_vec());
    if values.is_empty() {
        return Err(CliError::config("scan needs at least one value"));
    }
    r.list("values", Some(&values))?;
    Ok((variable, values))
}

pub fn scan_stationary(common: &Common, scan: &ScanArgs, c: Option<f64>, sign: Option<String>) -> Result<(), CliError> {
    let mut s = setup("scan-stationary", common, "trapping")?;
    let (variable, values) = scan_setup(&mut s.resolver, scan, &[0.5, 1.0, 2.0, 4.0, 8.0])?;
    let c = s.resolver.get("c", c, 0.5)?;
    let sign = parse_sign(&s.resolver.get("sign", sign, "+".to_string())?)?;
    s.resolver.finish()?;
    let points = scenarios::stationary_scan(&s.params, variable, &values, c, sign, s.tol)?;
    if variable == ScanVariable::Distance {
        let limit = scenarios::independent_residual(&s.params, c, sign, s.tol)?;
        eprintln!("independent-bath limit {limit:.10e}");
    }
    write_output(common, &s.resolver, &output::stationary_csv(&points))
}

pub fn scan_generation(common: &Common, g: &GridArgs, scan: &ScanArgs) -> Result<(), CliError> {
    let mut s = setup("scan-generation", common, "generation")?;
    let t = time_grid(&mut s.resolver, g, GridDefaults::uniform(800.0, 1.0))?;
    let (variable, values) = scan_setup(&mut s.resolver, scan, &[1.0, 1.5, 2.0])?;
    s.resolver.finish()?;
    let points = scenarios::generation_scan(s.provider.as_ref(), &s.params, variable, &values, &t, s.tol)?;
    for p in points.iter().filter(|p| !p.interior) {
        eprintln!("warning: no interior peak for x = {}; raise --t-max", p.x);
    }
    write_output(common, &s.resolver, &output::generation_scan_csv(&points))
}

pub fn discord_compare(
    common: &Common,
    g: &GridArgs,
    c: Option<f64>,
    sign: Option<String>,
    eps_c: Option<f64>,
) -> Result<(), CliError> {
    let mut s = setup("discord-compare", common, "discord")?;
    let t = time_grid(&mut s.resolver, g, GridDefaults::uniform(60.0, 0.02))?;
    let c = s.resolver.get("c", c, 0.393)?;
    let sign = parse_sign(&s.resolver.get("sign", sign, "+".to_string())?)?;
    let eps = s.resolver.get("eps_c", eps_c, 1e-6)?;
    s.resolver.finish()?;
    let prof = s.provider.profile(&s.params, &t, s.tol)?;
    let run = scenarios::discord_comparison_run(&prof, c, sign, eps)?;
    eprintln!(
        "{} concurrence-free gaps; {} grid points with zero concurrence and positive discord",
        run.gaps.len(),
        run.hidden.len()
    );
    write_output(common, &s.resolver, &output::trajectory_csv(&run.trajectory))
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn max_dev(a: &Mat4, b: &Mat4) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_oracle(full: bool) -> Result<Check, CliError> {
    let times: &[f64] = if full { &[0.5, 1.0, 2.0, 5.0, 10.0] } else { &[1.0, 5.0] };
    let sets = if full {
        vec![presets::benchmark(), presets::adjacent(), presets::generation()]
    } else {
        vec![presets::benchmark()]
    };
    let mut worst: f64 = 0.0;
    for p in &sets {
        for &t in times {
            let q = factors(t, p, DEFAULT_TOL)?;
            let o = discrete_bath_oracle(t, p, if full { 4000 } else { 1000 }, 10.0)?;
            for (a, b) in [(q.gamma0, o.gamma0), (q.delta, o.delta), (q.pi_zz, o.pi_zz)] {
                worst = worst.max((a - b).abs() / b.abs().max(1e-300));
            }
        }
    }
    Ok(Check {
        name: "quadrature vs discretized bath",
        pass: worst <= 0.01,
        detail: format!("max rel dev {worst:.2e}"),
    })
}

fn check_master_equation(full: bool) -> Result<Check, CliError> {
    let t_end = if full { 5.0 } else { 2.0 };
    let prof = build_profile(&presets::benchmark(), &grid::uniform(t_end, 0.01)?, 1e-9)?;
    let mut states = vec![make_product_plus(), make_werner(0.8, Sign::Plus)?];
    if full {
        states.push(make_werner(0.6, Sign::Minus)?);
        states.push(prepare_werner_via_protocol(0.9, Sign::Plus)?);
    }
    let mut worst: f64 = 0.0;
    for rho in &states {
        let tr = integrate_me(rho, &prof, t_end, &MeOptions::default())?;
        for (t, st) in tr.t.iter().zip(&tr.states) {
            worst = worst.max(max_dev(st.matrix(), apply_map(rho, &prof, *t)?.matrix()));
        }
    }
    Ok(Check {
        name: "master equation vs exact map",
        pass: worst <= 1e-6,
        detail: format!("max dev {worst:.2e}"),
    })
}

fn check_werner(full: bool, prof: &DecoherenceProfile) -> Result<Check, CliError> {
    let n = if full { 20 } else { 5 };
    let mut worst: f64 = 0.0;
    for sign in [Sign::Plus, Sign::Minus] {
        let ch = scenarios::werner_channel(sign);
        for a in 0..n {
            let c = a as f64 / (n - 1) as f64;
            let rho = make_werner(c, sign)?;
            for b in 0..n {
                let t = prof.t_max() * b as f64 / (n - 1) as f64;
                let g = prof.sample(t)?.gamma(ch);
                worst = worst.max((concurrence(&apply_map(&rho, prof, t)?)? - concurrence_werner(c, g)).abs());
            }
        }
    }
    Ok(Check {
        name: "Werner concurrence closed form",
        pass: worst <= 1e-10,
        detail: format!("max dev {worst:.2e}"),
    })
}

fn check_positivity(prof: &DecoherenceProfile) -> Check {
    let rep = non_markov_report(prof);
    Check {
        name: "complete positivity",
        pass: rep.completely_positive && !rep.is_divisible(),
        detail: format!(
            "min gamma {:.2e}, {} negative-rate intervals",
            rep.min_gamma,
            rep.negative_plus.len() + rep.negative_minus.len()
        ),
    }
}

fn check_discord(full: bool) -> Result<Check, CliError> {
    let n = if full { 10 } else { 3 };
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let c = (i as f64 + 0.5) / n as f64;
        let rho = scenarios::evolve_on_grid(&make_werner(c, Sign::Minus)?, &shallow_profile()?)
            .pop()
            .expect("nonempty");
        let a = discord_bell_diagonal(&rho)?;
        let b = discord_bruteforce(&rho, DiscordGrid::default())?;
        worst = worst.max((a - b).abs());
    }
    Ok(Check {
        name: "Bell-diagonal discord vs brute force",
        pass: worst <= 1e-4,
        detail: format!("max dev {worst:.2e}"),
    })
}

fn shallow_profile() -> Result<DecoherenceProfile, CliError> {
    Ok(build_profile(&presets::benchmark(), &[0.0, 0.5], DEFAULT_TOL)?)
}

fn check_protocol(full: bool) -> Result<Check, CliError> {
    let n = if full { 50 } else { 10 };
    let mut worst: f64 = 0.0;
    for sign in [Sign::Plus, Sign::Minus] {
        for i in 0..n {
            let c = i as f64 / (n - 1) as f64;
            let a = prepare_werner_via_protocol(c, sign)?;
            let b = make_werner(c, sign)?;
            worst = worst.max((concurrence(&a)? - concurrence(&b)?).abs());
            worst = worst.max((discord_bell_diagonal(&a)? - discord_bell_diagonal(&b)?).abs());
        }
    }
    Ok(Check {
        name: "gate-based preparation",
        pass: worst <= 1e-9,
        detail: format!("max dev {worst:.2e}"),
    })
}

pub fn validate(level: Option<String>) -> Result<(), CliError> {
    let full = match level.as_deref().unwrap_or("quick") {
        "quick" => false,
        "full" => true,
        other => return Err(CliError::config(format!("level must be quick or full, got `{other}`"))),
    };
    let prof = build_profile(&presets::benchmark(), &grid::uniform(10.0, 0.02)?, DEFAULT_TOL)?;
    let checks = [
        check_oracle(full)?,
        check_master_equation(full)?,
        check_werner(full, &prof)?,
        check_positivity(&prof),
        check_discord(full)?,
        check_protocol(full)?,
    ];
    let mut failed = 0;
    for c in &checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.pass);
    }
    if failed > 0 {
        return Err(CliError::validation(format!("{failed} checks failed")));
    }
    Ok(())
}
