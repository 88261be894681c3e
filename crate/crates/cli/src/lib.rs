//! Command-line front end for the `mimo-dof` analyzer.
//!
//! Each subcommand renders to a string and reports whether its checks passed;
//! `main` only writes the output and maps the outcome to an exit status.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use mimo_dof::channel::{AntennaConfig, CognitionScenario};
use mimo_dof::dof::{
    dof_cooperation, dof_cooperation_upper_bounds, dof_formula, inner_region, outer_region, verify_lemma5,
    verify_regions, CheckTally, RegionJson,
};
use mimo_dof::rates::{cooperation_dof_gap_check, log_grid, simulate_point, RateError, BOUND_SLOPE_TOL};
use mimo_dof::region::{regions_equal, DofPoint, Region2D};
use mimo_dof::zf::{achievability_sweep, run_cell, ZfError};

/// Environment variable naming the default directory for simulation output.
pub const OUT_DIR_ENV: &str = "MIMO_DOF_OUT_DIR";

/// Relative slope tolerance for `simulate`.
pub const SLOPE_REL_TOL: f64 = 0.03;

#[derive(Debug, Parser)]
#[command(name = "mimo-dof", version, about = "Degrees of freedom of the two-user MIMO interference channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Base seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Regions,
    Lemma5,
    Ordering,
    All,
}

fn parse_point(s: &str) -> Result<[u32; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([a.parse().map_err(|e| format!("{e}"))?, b.parse().map_err(|e| format!("{e}"))?]),
        _ => Err(format!("expected d1,d2, got `{s}`")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form sum DOF.
    Dof {
        /// Antenna counts M1,M2,N1,N2.
        #[arg(long)]
        config: AntennaConfig,
        /// Cognition bits T1,T2,R1,R2.
        #[arg(long, default_value = "0,0,0,0")]
        scenario: CognitionScenario,
        /// Print all 16 scenarios.
        #[arg(long)]
        all_scenarios: bool,
        /// Sum DOF with full cooperation and its two genie bounds.
        #[arg(long)]
        cooperation: bool,
    },
    /// Inner and outer DOF regions and their equality.
    Region {
        #[arg(long)]
        config: AntennaConfig,
        #[arg(long, default_value = "0,0,0,0")]
        scenario: CognitionScenario,
    },
    /// Exhaustive exact identity checks.
    Verify {
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=5))]
        max_antennas: u32,
        #[arg(long, value_enum, default_value_t = Which::All)]
        which: Which,
    },
    /// Build and verify the zero-forcing scheme on random channels.
    Achieve {
        #[arg(long, required_unless_present = "sweep")]
        config: Option<AntennaConfig>,
        #[arg(long, default_value = "0,0,0,0")]
        scenario: CognitionScenario,
        #[arg(long, value_parser = parse_point, required_unless_present = "sweep")]
        point: Option<[u32; 2]>,
        #[arg(long, default_value_t = 20)]
        trials: u32,
        /// Sweep every config with counts up to this value instead.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=5))]
        sweep: Option<u32>,
    },
    /// High-SNR sum-rate slope of a zero-forcing scheme.
    Simulate {
        #[arg(long)]
        config: AntennaConfig,
        #[arg(long, default_value = "0,0,0,0")]
        scenario: CognitionScenario,
        #[arg(long, value_parser = parse_point)]
        point: [u32; 2],
        #[arg(long, default_value_t = 1e4)]
        rho_min: f64,
        #[arg(long, default_value_t = 1e10)]
        rho_max: f64,
        #[arg(long, default_value_t = 7)]
        points: usize,
        /// Fit the slope on this many of the highest powers (0 = all).
        #[arg(long, default_value_t = mimo_dof::rates::DEFAULT_FIT_POINTS)]
        fit_points: usize,
        #[arg(long, default_value_t = 10)]
        trials: u32,
        /// Output stem; writes `<stem>.csv` and `<stem>.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Growth of the per-antenna genie term in the cooperative converse.
    CoopBound {
        #[arg(long)]
        config: AntennaConfig,
        #[arg(long, default_value_t = 10)]
        trials: u32,
    },
}

/// Rendered output and whether every requested check passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Outcome { body, passed: true }
    }
}

/// Failure kinds with their own exit codes.
#[derive(Debug)]
pub enum CliError {
    NotAchievable(String),
    Precondition(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::NotAchievable(m) | CliError::Precondition(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

/// Four significant digits for text output.
pub fn sig4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        let decimals = (3 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.3e}")
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn vertex_list(r: &Region2D) -> String {
    r.vertices().iter().map(DofPoint::to_string).collect::<Vec<_>>().join(" ")
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let fmt = cli.common.format;
    let seed = cli.common.seed;
    match &cli.command {
        Command::Dof { config, scenario, all_scenarios, cooperation } => {
            cmd_dof(*config, *scenario, *all_scenarios, *cooperation, fmt)
        }
        Command::Region { config, scenario } => cmd_region(*config, *scenario, fmt),
        Command::Verify { max_antennas, which } => cmd_verify(*max_antennas, *which, fmt),
        Command::Achieve { config, scenario, point, trials, sweep } => match sweep {
            Some(max) => cmd_achieve_sweep(*max, *trials, seed, fmt),
            None => cmd_achieve(
                config.expect("clap enforces --config"),
                *scenario,
                point.expect("clap enforces --point"),
                *trials,
                seed,
                fmt,
            ),
        },
        Command::Simulate { config, scenario, point, rho_min, rho_max, points, fit_points, trials, out } => {
            let grid = log_grid(*rho_min, *rho_max, *points);
            let stem = out.clone().unwrap_or_else(|| default_stem(*config, *scenario, *point));
            cmd_simulate(*config, *scenario, *point, &grid, *fit_points, *trials, seed, &stem, fmt)
        }
        Command::CoopBound { config, trials } => cmd_coop_bound(*config, *trials, seed, fmt),
    }
}

fn default_stem(config: AntennaConfig, scenario: CognitionScenario, point: [u32; 2]) -> PathBuf {
    let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    let b = scenario.bits();
    dir.join(format!(
        "simulate_{}-{}-{}-{}_{}{}{}{}_{}-{}",
        config.m1, config.m2, config.n1, config.n2, b[0], b[1], b[2], b[3], point[0], point[1]
    ))
}

pub fn cmd_dof(
    config: AntennaConfig,
    scenario: CognitionScenario,
    all_scenarios: bool,
    cooperation: bool,
    fmt: Format,
) -> Result<Outcome> {
    if cooperation {
        let eta = dof_cooperation(config);
        let bounds = dof_cooperation_upper_bounds(config);
        return Ok(Outcome::ok(match fmt {
            Format::Json => to_json(&json!({"config": config, "cooperation": true, "eta": eta, "bounds": [bounds.0, bounds.1]}))?,
            Format::Csv => format!("eta,bound1,bound2\n{eta},{},{}\n", bounds.0, bounds.1),
            Format::Text => format!("{eta}\nbounds ({}, {})\n", bounds.0, bounds.1),
        }));
    }
    if all_scenarios {
        let rows: Vec<(CognitionScenario, u32)> = CognitionScenario::all().map(|s| (s, dof_formula(config, s))).collect();
        return Ok(Outcome::ok(match fmt {
            Format::Json => to_json(&json!({
                "config": config,
                "scenarios": rows.iter().map(|(s, e)| json!({"scenario": s, "eta": e})).collect::<Vec<_>>(),
            }))?,
            Format::Csv => {
                let mut out = String::from("t1,t2,r1,r2,eta\n");
                for (s, e) in &rows {
                    let b = s.bits();
                    writeln!(out, "{},{},{},{},{e}", b[0], b[1], b[2], b[3])?;
                }
                out
            }
            Format::Text => {
                let mut out = String::from("scenario   eta\n");
                for (s, e) in &rows {
                    writeln!(out, "{s}  {e}")?;
                }
                out
            }
        }));
    }
    let eta = dof_formula(config, scenario);
    Ok(Outcome::ok(match fmt {
        Format::Json => to_json(&json!({"config": config, "scenario": scenario, "eta": eta}))?,
        Format::Csv => format!("eta\n{eta}\n"),
        Format::Text => format!("{eta}\n"),
    }))
}

pub fn cmd_region(config: AntennaConfig, scenario: CognitionScenario, fmt: Format) -> Result<Outcome> {
    let inner = inner_region(config, scenario);
    let outer = outer_region(config, scenario);
    let equal = regions_equal(&inner, &outer);
    let inner_json = RegionJson::new(config, scenario, &inner);
    let outer_json = RegionJson::new(config, scenario, &outer);
    let body = match fmt {
        Format::Json => to_json(&json!({"inner": inner_json, "outer": outer_json, "equal": equal}))?,
        Format::Csv => {
            let mut out = String::from("region,d1,d2\n");
            for (name, r) in [("inner", &inner), ("outer", &outer)] {
                for v in r.vertices() {
                    let [a, b] = v.to_strings();
                    writeln!(out, "{name},{a},{b}")?;
                }
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "config {config} scenario {scenario}")?;
            writeln!(out, "inner vertices: {}", vertex_list(&inner))?;
            writeln!(out, "outer vertices: {}", vertex_list(&outer))?;
            writeln!(out, "outer halfspaces:")?;
            for h in outer.halfspaces() {
                writeln!(out, "  {h}")?;
            }
            writeln!(out, "sum_dof {}", outer_json.sum_dof)?;
            writeln!(out, "equal={equal}")?;
            out
        }
    };
    Ok(Outcome { body, passed: equal })
}

#[derive(Serialize)]
struct VerifyJson<'a> {
    max_antennas: u32,
    checks: Vec<(&'a str, &'a CheckTally)>,
    passed: bool,
}

pub fn cmd_verify(max_antennas: u32, which: Which, fmt: Format) -> Result<Outcome> {
    let mut checks: Vec<(&str, CheckTally)> = Vec::new();
    if matches!(which, Which::Regions | Which::Ordering | Which::All) {
        let rep = verify_regions(max_antennas);
        for (name, tally) in rep.tallies() {
            let wanted = match which {
                Which::Ordering => name == "ordering",
                Which::Regions => name != "ordering",
                _ => true,
            };
            if wanted {
                checks.push((name, tally.clone()));
            }
        }
    }
    if matches!(which, Which::Lemma5 | Which::All) {
        checks.push(("lemma5", verify_lemma5(8, 20)));
    }
    let passed = checks.iter().all(|(_, t)| t.passed());
    let body = match fmt {
        Format::Json => to_json(&VerifyJson {
            max_antennas,
            checks: checks.iter().map(|(n, t)| (*n, t)).collect(),
            passed,
        })?,
        Format::Csv => {
            let mut out = String::from("check,performed,failures\n");
            for (name, t) in &checks {
                writeln!(out, "{name},{},{}", t.performed, t.failures.len())?;
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for (name, t) in &checks {
                let tag = if t.passed() { "PASS" } else { "FAIL" };
                writeln!(out, "{tag} {name}: {} checks", t.performed)?;
                for f in t.failures.iter().take(10) {
                    writeln!(out, "  counterexample: {f}")?;
                }
            }
            writeln!(out, "{}", if passed { "PASS" } else { "FAIL" })?;
            out
        }
    };
    Ok(Outcome { body, passed })
}

fn zf_error(e: ZfError) -> anyhow::Error {
    match e {
        ZfError::NotAchievable { .. } => CliError::NotAchievable(e.to_string()).into(),
        other => other.into(),
    }
}

pub fn cmd_achieve(
    config: AntennaConfig,
    scenario: CognitionScenario,
    point: [u32; 2],
    trials: u32,
    seed: u64,
    fmt: Format,
) -> Result<Outcome> {
    let outcome = run_cell(config, scenario, point[0], point[1], trials, seed).map_err(zf_error)?;
    let cell = &outcome.cell;
    let passed = cell.all_passed();
    let body = match fmt {
        Format::Json => to_json(&json!({
            "report": cell,
            "sample_diagnostics": outcome.sample,
            "first_failure": outcome.first_failure,
        }))?,
        Format::Csv => format!(
            "trials,passes,worst_null_residual\n{},{},{}\n",
            cell.trials, cell.passes, cell.worst_null_residual
        ),
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "config {config} scenario {scenario} point ({},{})", point[0], point[1])?;
            writeln!(out, "{}/{} trials pass, worst null residual {}", cell.passes, cell.trials, sig4(cell.worst_null_residual))?;
            if let Some(d) = outcome.sample {
                writeln!(
                    out,
                    "rx1: signal {} interference {} overlap {} | rx2: signal {} interference {} overlap {}",
                    d.signal_dim_rx1,
                    d.interference_dim_rx1,
                    d.intersection_dim_rx1,
                    d.signal_dim_rx2,
                    d.interference_dim_rx2,
                    d.intersection_dim_rx2
                )?;
            }
            if let Some(f) = outcome.first_failure {
                writeln!(out, "first failure: {f:?}")?;
            }
            out
        }
    };
    Ok(Outcome { body, passed })
}

pub fn cmd_achieve_sweep(max_antennas: u32, trials: u32, seed: u64, fmt: Format) -> Result<Outcome> {
    let rep = achievability_sweep(max_antennas, trials, seed);
    let passed = rep.failures().next().is_none();
    let body = match fmt {
        Format::Json => to_json(&rep)?,
        Format::Csv => {
            let mut out = String::from("m1,m2,n1,n2,t1,t2,r1,r2,d1,d2,trials,passes,worst_null_residual\n");
            for c in &rep.cells {
                let b = c.scenario.bits();
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    c.config.m1, c.config.m2, c.config.n1, c.config.n2, b[0], b[1], b[2], b[3], c.point[0], c.point[1],
                    c.trials, c.passes, c.worst_null_residual
                )?;
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            writeln!(
                out,
                "{} cells, {}/{} trials pass, worst null residual {}",
                rep.cells.len(),
                rep.total_passes(),
                rep.total_trials(),
                sig4(rep.worst_null_residual())
            )?;
            for c in rep.failures().take(20) {
                writeln!(out, "  FAIL {} {} ({},{}): {}/{}", c.config, c.scenario, c.point[0], c.point[1], c.passes, c.trials)?;
            }
            out
        }
    };
    Ok(Outcome { body, passed })
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_simulate(
    config: AntennaConfig,
    scenario: CognitionScenario,
    point: [u32; 2],
    grid: &[f64],
    fit_points: usize,
    trials: u32,
    seed: u64,
    stem: &Path,
    fmt: Format,
) -> Result<Outcome> {
    let summary = simulate_point(config, scenario, point[0], point[1], grid, fit_points, trials, seed).map_err(|e| match e {
        RateError::Zf(z) => zf_error(z),
        other => anyhow::Error::from(other),
    })?;
    let sweep = &summary.mean;
    let eta = dof_formula(config, scenario);
    let target = (point[0] + point[1]) as f64;
    let passed = (sweep.slope - target).abs() <= SLOPE_REL_TOL * target.max(1.0);

    let csv_path = stem.with_extension("csv");
    let json_path = stem.with_extension("json");
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(&csv_path, sweep.to_csv()).with_context(|| format!("writing {}", csv_path.display()))?;
    let sidecar = json!({
        "slope": sweep.slope,
        "intercept": sweep.intercept,
        "config": config,
        "scenario": scenario,
        "point": point,
    });
    std::fs::write(&json_path, to_json(&sidecar)?).with_context(|| format!("writing {}", json_path.display()))?;

    let body = match fmt {
        Format::Json => to_json(&json!({
            "slope": sweep.slope,
            "intercept": sweep.intercept,
            "eta": eta,
            "point": point,
            "per_channel_slopes": summary.per_channel_slopes,
            "csv": csv_path,
            "sidecar": json_path,
        }))?,
        Format::Csv => sweep.to_csv(),
        Format::Text => format!(
            "slope {}  eta {eta}  target {}\nwrote {} and {}\n",
            sig4(sweep.slope),
            point[0] + point[1],
            csv_path.display(),
            json_path.display()
        ),
    };
    Ok(Outcome { body, passed })
}

pub fn cmd_coop_bound(config: AntennaConfig, trials: u32, seed: u64, fmt: Format) -> Result<Outcome> {
    let rep = cooperation_dof_gap_check(config, trials, seed).map_err(|e| match e {
        RateError::HypothesisViolated { m1, n2 } => anyhow::Error::from(CliError::Precondition(format!(
            "the cooperative genie bound needs N2 >= M1 (got N2 = {n2}, M1 = {m1})"
        ))),
        other => other.into(),
    })?;
    let passed = rep.passed();
    let body = match fmt {
        Format::Json => to_json(&rep)?,
        Format::Csv => {
            let mut out = String::from("trial,antenna,slope\n");
            for (t, row) in rep.term_slopes.iter().enumerate() {
                for (j, s) in row.iter().enumerate() {
                    writeln!(out, "{t},{},{s}", j + 1)?;
                }
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "config {config}, {} channels", rep.trials)?;
            for (t, row) in rep.term_slopes.iter().enumerate() {
                let cols: Vec<String> = row.iter().map(|s| sig4(*s)).collect();
                writeln!(out, "  trial {t}: term slopes {}", cols.join(" "))?;
            }
            writeln!(
                out,
                "max term slope {} ({} {})",
                sig4(rep.max_term_slope),
                if rep.terms_bounded() { "<" } else { ">=" },
                BOUND_SLOPE_TOL
            )?;
            writeln!(
                out,
                "eta = {} <= min({}, {})",
                rep.dof_cooperation, rep.upper_bounds.0, rep.upper_bounds.1
            )?;
            out
        }
    };
    Ok(Outcome { body, passed })
}

/// Exit status for an error returned by [`run`].
pub fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<CliError>() {
        Some(CliError::NotAchievable(_)) => 3,
        Some(CliError::Precondition(_)) => 2,
        None => 4,
    }
}

/// Writes the rendered output to `--output` or stdout.
pub fn emit(outcome: &Outcome, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, &outcome.body).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{}", outcome.body);
            Ok(())
        }
    }
}
