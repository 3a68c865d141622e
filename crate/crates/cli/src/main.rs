//! `riskclaim`: solve, sweep, verify and inspect risk-minimal claims.

mod error;
mod output;
mod spec;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use riskclaim::oracle::{verify, VERIFY_TOL};
use riskclaim::solvers::risk_curve;
use riskclaim::{solve, Measure, PriceDensity, ProblemSpec, Solution, SolverSettings};
use serde::{Deserialize, Serialize};
use serde_json::json;

use error::CliError;
use output::{emit, fmt12, to_csv, to_json};

/// Environment override for the default verification tolerance.
const TOL_ENV: &str = "RISKCLAIM_TOL";

#[derive(Parser)]
#[command(name = "riskclaim", version, about = "Risk-minimal contingent claims under a budget constraint")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for a single budget and print the solution.
    Solve(Flags),
    /// Minimal risk over a budget grid, as CSV plus a shape summary.
    Curve(Flags),
    /// Compare the solver against the discrete oracle.
    Verify(Flags),
    /// Print density diagnostics.
    Inspect(Flags),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Default)]
struct Flags {
    /// JSON file with any of the flags below; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `uniform:<lo>,<hi>`, `plq:<t>:<q>,...[,tail:<rate>]` or `atoms:<file.csv>`.
    #[arg(long)]
    density: Option<String>,
    /// `avar:<l>`, `var:<l>`, `rho_k:<weight>`, `robust:<loss>,<l>` or `shifted:<loss>,<l>,<x0>`.
    #[arg(long)]
    measure: Option<String>,
    /// Budget.
    #[arg(long = "v", allow_negative_numbers = true)]
    v: Option<f64>,
    /// Budget grid `lo:hi:n`.
    #[arg(long)]
    grid: Option<String>,
    /// Payoff cap K [default: 1].
    #[arg(long)]
    cap: Option<f64>,
    /// Oracle atom count [default: 2000].
    #[arg(long)]
    n: Option<usize>,
    /// Verification tolerance [default: 2e-3, or $RISKCLAIM_TOL].
    #[arg(long)]
    tol: Option<f64>,
    /// Output file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

/// The config file mirrors the flags; `settings` tunes the solvers.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    density: Option<String>,
    measure: Option<String>,
    v: Option<f64>,
    grid: Option<String>,
    cap: Option<f64>,
    n: Option<usize>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    settings: Option<SolverSettings>,
}

/// Flags merged over the config file.
struct RunConfig {
    density: Option<String>,
    measure: Option<String>,
    v: Option<f64>,
    grid: Option<String>,
    cap: f64,
    n: usize,
    tol: Option<f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    settings: SolverSettings,
    /// Relative `atoms:` paths resolve against this directory.
    base: PathBuf,
}

impl RunConfig {
    fn load(flags: Flags) -> Result<Self, CliError> {
        let (file, base) = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let file: ConfigFile = serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (file, dir)
            }
            None => (ConfigFile::default(), PathBuf::new()),
        };
        let density_from_file = flags.density.is_none() && file.density.is_some();
        let cap = flags.cap.or(file.cap).unwrap_or(1.0);
        if !(cap.is_finite() && cap > 0.0) {
            return Err(CliError::Config(format!("cap must be positive, got {cap}")));
        }
        Ok(Self {
            density: flags.density.or(file.density),
            measure: flags.measure.or(file.measure),
            v: flags.v.or(file.v),
            grid: flags.grid.or(file.grid),
            cap,
            n: flags.n.or(file.n).unwrap_or(2000),
            tol: flags.tol.or(file.tol),
            out: flags.out.or(file.out),
            format: flags.format.or(file.format),
            settings: file.settings.unwrap_or_default(),
            base: if density_from_file { base } else { PathBuf::new() },
        })
    }

    fn required<'a>(value: &'a Option<String>, flag: &str) -> Result<&'a str, CliError> {
        value.as_deref().ok_or_else(|| CliError::Config(format!("missing --{flag}")))
    }

    fn density(&self) -> Result<PriceDensity, CliError> {
        spec::parse_density(Self::required(&self.density, "density")?, &self.base)
    }

    fn measure(&self) -> Result<Measure, CliError> {
        spec::parse_measure(Self::required(&self.measure, "measure")?)
    }

    fn budget(&self) -> Result<f64, CliError> {
        let v = self.v.ok_or_else(|| CliError::Config("missing --v".into()))?;
        self.check_budget(v)?;
        Ok(v)
    }

    fn check_budget(&self, v: f64) -> Result<(), CliError> {
        if (0.0..=self.cap).contains(&v) {
            Ok(())
        } else {
            Err(CliError::Config(format!("budget {v} outside [0, {}]", self.cap)))
        }
    }

    fn problem(&self, budget: f64) -> Result<ProblemSpec, CliError> {
        let mut p = ProblemSpec::new(self.measure()?, self.density()?, budget, self.cap)
            .map_err(|e| CliError::Config(e.to_string()))?;
        p.settings = self.settings.clone();
        Ok(p)
    }

    fn tolerance(&self) -> Result<f64, CliError> {
        let tol = match self.tol {
            Some(t) => t,
            None => match std::env::var(TOL_ENV) {
                Ok(s) => s
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("{TOL_ENV}=`{s}` is not a number")))?,
                Err(_) => VERIFY_TOL,
            },
        };
        if tol.is_finite() && tol >= 0.0 {
            Ok(tol)
        } else {
            Err(CliError::Config(format!("tolerance must be nonnegative, got {tol}")))
        }
    }

    fn json_only(&self, command: &str) -> Result<(), CliError> {
        match self.format {
            Some(Format::Csv) => Err(CliError::Config(format!("`{command}` only writes JSON"))),
            _ => Ok(()),
        }
    }
}

/// The parameter shown in the last curve column.
fn headline_param(s: &Solution) -> Option<f64> {
    let name = match s.measure {
        Measure::QuantileBased { .. } => "x_star",
        Measure::Shifted { .. } => "alpha",
        Measure::ValueAtRisk { .. } => "r",
        _ => "beta",
    };
    s.param(name)
}

fn run_solve(cfg: &RunConfig) -> Result<(), CliError> {
    let sol = solve(&cfg.problem(cfg.budget()?)?)?;
    let text = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&sol)?,
        Format::Csv => {
            let mut rows = vec![
                vec!["measure".into(), sol.measure.name().into()],
                vec!["regime".into(), regime_name(&sol)],
                vec!["risk".into(), fmt12(sol.risk)],
                vec!["budget_residual".into(), fmt12(sol.budget_residual)],
                vec!["critical_value".into(), sol.critical_value.map_or("NA".into(), fmt12)],
            ];
            rows.extend(sol.params.iter().map(|(k, v)| vec![format!("param.{k}"), fmt12(*v)]));
            to_csv(&["field", "value"], &rows)?
        }
    };
    emit(cfg.out.as_deref(), &text)
}

fn regime_name(s: &Solution) -> String {
    serde_json::to_value(s.regime).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

#[derive(Serialize)]
struct CurveSummary {
    points: usize,
    failed: usize,
    monotone: bool,
    strictly_increasing: bool,
    convex: serde_json::Value,
}

fn run_curve(cfg: &RunConfig) -> Result<(), CliError> {
    let grid = spec::parse_grid(RunConfig::required(&cfg.grid, "grid")?)?;
    for &v in &grid {
        cfg.check_budget(v)?;
    }
    let report = risk_curve(&cfg.problem(grid[0])?, &grid)?;
    let summary = CurveSummary {
        points: report.points.len(),
        failed: report.failed,
        monotone: report.monotone,
        strictly_increasing: report.strictly_increasing,
        convex: match report.convex {
            Some(b) => json!(b),
            None => json!("skipped (non-convex measure)"),
        },
    };
    let rows: Vec<Vec<String>> = report
        .points
        .iter()
        .map(|p| match &p.solution {
            Ok(s) => vec![fmt12(p.v), fmt12(s.risk), regime_name(s), headline_param(s).map_or(String::new(), fmt12)],
            Err(_) => vec![fmt12(p.v), "NA".into(), "NA".into(), "NA".into()],
        })
        .collect();
    for p in &report.points {
        if let Err(e) = &p.solution {
            eprintln!("warning: v = {}: {e}", p.v);
        }
    }
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            emit(cfg.out.as_deref(), &to_csv(&["v", "risk", "regime", "beta_or_xstar"], &rows)?)?;
            let summary = to_json(&summary)?;
            match &cfg.out {
                Some(out) => {
                    let mut side = out.clone().into_os_string();
                    side.push(".summary.json");
                    emit(Some(Path::new(&side)), &summary)
                }
                None => {
                    eprint!("{summary}");
                    Ok(())
                }
            }
        }
        Format::Json => {
            let points: Vec<_> = report
                .points
                .iter()
                .map(|p| match &p.solution {
                    Ok(s) => json!({ "v": p.v, "solution": s }),
                    Err(e) => json!({ "v": p.v, "error": e.to_string() }),
                })
                .collect();
            emit(cfg.out.as_deref(), &to_json(&json!({ "points": points, "summary": summary }))?)
        }
    }
}

fn run_verify(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.json_only("verify")?;
    if cfg.n < 2 {
        return Err(CliError::Config(format!("verify needs n >= 2, got {}", cfg.n)));
    }
    let tol = cfg.tolerance()?;
    let problem = cfg.problem(cfg.budget()?)?;
    if !matches!(problem.measure, Measure::Avar { .. } | Measure::QuantileBased { .. } | Measure::RobustUtility { .. }) {
        return Err(CliError::Config(format!(
            "verify supports avar, rho_k and robust measures, not {}",
            problem.measure.name()
        )));
    }
    let report = verify(&problem, cfg.n, tol)?;
    emit(cfg.out.as_deref(), &to_json(&report)?)?;
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Verification(format!("gap {:e} exceeds tolerance {:e}", report.gap, tol)))
    }
}

fn finite_or_inf(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!("inf")
    }
}

fn run_inspect(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.json_only("inspect")?;
    let d = cfg.density()?;
    // Quantile and capital integral at levels 0, 0.05, ..., 1.
    let mut table = vec![];
    for i in 0..=20 {
        let t = i as f64 / 20.0;
        let q = if i == 20 { d.ess_sup() } else { d.quantile(t)? };
        table.push(json!({ "level": t, "quantile": finite_or_inf(q), "capital_integral": d.capital_integral(t)? }));
    }
    let doc = json!({
        "mean": d.mean(),
        "ess_sup": finite_or_inf(d.ess_sup()),
        "continuous": d.is_continuous(),
        "validation": d.validate(),
        "table": table,
    });
    emit(cfg.out.as_deref(), &to_json(&doc)?)
}

type Runner = fn(&RunConfig) -> Result<(), CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (command, flags): (Runner, Flags) = match cli.command {
        Command::Solve(f) => (run_solve, f),
        Command::Curve(f) => (run_curve, f),
        Command::Verify(f) => (run_verify, f),
        Command::Inspect(f) => (run_inspect, f),
    };
    command(&RunConfig::load(flags)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
