use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use wlab_cli::acceptance;
use wlab_cli::config::{ScenarioConfig, ScenarioId};
use wlab_cli::error::{CliError, CliResult};
use wlab_cli::load::load_measures;
use wlab_cli::report::emit_report;
use wlab_cli::scenarios::run_scenario;
use wlab_core::base_space::BaseRay;
use wlab_core::measure::DiscreteMeasure;
use wlab_core::transport::wasserstein_exact;
use wlab_core::viscosity::{
    dlg_test, greedy_descent, local_slope_estimate, viscosity_sphere_test, DescentOptions, DlgOptions,
    MeasureField, MeasureFieldConfig, SphereTestOptions,
};
use wlab_core::wgeom::{busemann_estimate, displacement_path, WassersteinRay};
use wlab_core::Verdict;

/// Exact Wasserstein distances, geodesics, Busemann limits and eikonal
/// viscosity checks on discrete measures.
///
/// Measure files hold one `{"dim","support","weights"}` object or an array of
/// them; the first measure is used. Field files hold a field description such
/// as `{"type":"lifted","base":{"type":"busemann","direction":[1,0]}}`.
#[derive(Parser)]
#[command(name = "wlab", version)]
struct Cli {
    /// Scenario config JSON; explicit flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Transport exponent p ≥ 1 [default: 2].
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Seed for every randomized choice [default: 0].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Numeric agreement tolerance [default: 1e-9; limits use 1e-6].
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output directory for reports [default: out/<scenario>].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Upper end of the sequence range of a scenario.
    #[arg(long, global = true)]
    n_max: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact W_p between two measures, with the optimal plan.
    Wp { mu: PathBuf, nu: PathBuf },
    /// Displacement interpolation between two measures at arc lengths `--t`.
    Geodesic {
        mu: PathBuf,
        nu: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        t: Vec<f64>,
    },
    /// Busemann function of the ray translating `--base` along `--direction`.
    Busemann {
        omega: PathBuf,
        #[arg(long)]
        base: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        direction: Vec<f64>,
        #[arg(long, default_value_t = 1e6)]
        t_max: f64,
    },
    /// Certified lower bound on the local slope of a field.
    Slope {
        #[arg(long)]
        field: PathBuf,
        omega: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.1")]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 12)]
        budget: usize,
    },
    /// Sphere-infimum test, and the dl_G test when `--levels` is given.
    CheckViscosity {
        #[arg(long)]
        field: PathBuf,
        omega: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.1")]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        levels: Vec<f64>,
        #[arg(long, default_value_t = 12)]
        budget: usize,
        /// Verdict that counts as success for the exit code.
        #[arg(long, value_enum, default_value = "pass")]
        expect: Expect,
    },
    /// ε-negative-gradient polyline from a measure.
    Descend {
        #[arg(long)]
        field: PathBuf,
        omega: PathBuf,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        step_length: f64,
        #[arg(long, default_value_t = 6)]
        budget: usize,
    },
    /// Run a scenario and write report.json plus CSV tables.
    Reproduce {
        #[arg(value_enum)]
        scenario: Option<ScenarioId>,
    },
    /// Run every acceptance criterion and print one line per criterion.
    Acceptance,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Expect {
    Pass,
    Fail,
    Inconclusive,
}

impl From<Expect> for Verdict {
    fn from(e: Expect) -> Self {
        match e {
            Expect::Pass => Verdict::Pass,
            Expect::Fail => Verdict::Fail,
            Expect::Inconclusive => Verdict::Inconclusive,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn config(cli: &Cli) -> CliResult<ScenarioConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(p) = cli.p {
        cfg.p = p;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.tol {
        cfg.tol = t;
    }
    if let Some(n) = cli.n_max {
        cfg.n_max = Some(n);
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    Ok(cfg)
}

fn first_measure(path: &Path) -> CliResult<DiscreteMeasure> {
    let loaded = load_measures(path)?;
    for w in &loaded.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    if loaded.measures.len() > 1 {
        eprintln!("warning: {}: using the first of {} measures", path.display(), loaded.measures.len());
    }
    loaded.measures.into_iter().next().ok_or_else(|| CliError::Config(format!("{}: no measures", path.display())))
}

fn load_field(path: &Path, p: f64) -> CliResult<MeasureField> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    let cfg: MeasureFieldConfig = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.into(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    Ok(cfg.build(p)?)
}

fn print(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value serializes"));
}

fn run(cli: Cli) -> CliResult<bool> {
    let cfg = config(&cli)?;
    let p = cfg.p;
    match cli.command {
        Command::Wp { mu, nu } => {
            let res = wasserstein_exact(&first_measure(&mu)?, &first_measure(&nu)?, p)?;
            print(&serde_json::to_value(&res).expect("result serializes"));
            Ok(true)
        }
        Command::Geodesic { mu, nu, t } => {
            let path = displacement_path(&first_measure(&mu)?, &first_measure(&nu)?, p)?;
            let points = t
                .iter()
                .map(|&s| Ok(json!({"t": s, "measure": path.eval(s)?})))
                .collect::<CliResult<Vec<_>>>()?;
            print(&json!({"length": path.length(), "non_unique": path.non_unique, "points": points}));
            Ok(true)
        }
        Command::Busemann { omega, base, direction, t_max } => {
            let base = first_measure(&base)?;
            let rays = base
                .support()
                .iter()
                .map(|x| BaseRay::unit(x.clone(), direction.clone()))
                .collect::<wlab_core::Result<Vec<_>>>()?;
            let ray = WassersteinRay::new(base, rays, p)?;
            let tol = cli.tol.unwrap_or(1e-6);
            let est = busemann_estimate(&ray, &first_measure(&omega)?, tol, t_max)?;
            print(&serde_json::to_value(&est).expect("estimate serializes"));
            Ok(est.converged)
        }
        Command::Slope { field, omega, radii, budget } => {
            let field = load_field(&field, p)?;
            let est = local_slope_estimate(&field, &first_measure(&omega)?, &radii, budget, cfg.seed)?;
            print(&serde_json::to_value(&est).expect("estimate serializes"));
            Ok(true)
        }
        Command::CheckViscosity { field, omega, radii, eps, levels, budget, expect } => {
            let field = load_field(&field, p)?;
            let omega = first_measure(&omega)?;
            let opts = SphereTestOptions { radii, eps, budget, seed: cfg.seed };
            let sphere = viscosity_sphere_test(&field, &omega, &opts)?;
            let mut verdicts = vec![sphere.verdict];
            let mut out = vec![sphere.to_json()];
            if !levels.is_empty() {
                let dlg = dlg_test(&field, &omega, &levels, &DlgOptions { budget, seed: cfg.seed, ..DlgOptions::default() })?;
                verdicts.push(dlg.verdict);
                out.push(dlg.to_json());
            }
            print(&serde_json::Value::Array(out));
            Ok(Verdict::all(verdicts) == Verdict::from(expect))
        }
        Command::Descend { field, omega, eps, steps, step_length, budget } => {
            let field = load_field(&field, p)?;
            let opts = DescentOptions { eps, steps, step_length, budget, seed: cfg.seed };
            match greedy_descent(&field, &first_measure(&omega)?, &opts) {
                Ok(line) => {
                    print(&json!({"max_slack": line.max_slack(), "polyline": line}));
                    Ok(true)
                }
                Err(e @ wlab_core::Error::DescentStalled { .. }) => {
                    print(&json!({"stalled": e.to_string()}));
                    Ok(false)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Reproduce { scenario } => {
            let mut cfg = cfg;
            if let Some(s) = scenario {
                cfg.scenario = s;
            } else if cli.config.is_none() {
                return Err(CliError::Config("give a scenario or --config".into()));
            }
            let report = run_scenario(&cfg);
            let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out").join(cfg.scenario.as_str()));
            for f in emit_report(&report, &dir)? {
                eprintln!("wrote {}", f.display());
            }
            for c in &report.checks {
                let mark = if c.matches() { "ok" } else { "MISMATCH" };
                println!("{:<8} {:<28} verdict {:<12} expected {}", mark, c.name, c.verdict, c.expected);
            }
            if let Some(e) = &report.error {
                println!("incomplete: {e}");
            }
            Ok(report.expectations_met())
        }
        Command::Acceptance => {
            let outcomes = acceptance::run_all(cfg.seed);
            for o in &outcomes {
                println!("{}", o.line());
            }
            if let Some(dir) = &cfg.out {
                let report = run_scenario(&ScenarioConfig { scenario: ScenarioId::Acceptance, ..cfg.clone() });
                emit_report(&report, dir)?;
            }
            Ok(outcomes.iter().all(|o| o.matches_expectation()))
        }
    }
}
