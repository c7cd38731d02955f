use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use hsdl_core::fields::FieldSpec;
use hsdl_core::geometry::BodySpec;
use hsdl_core::harness::plot::{self, PlotKind};
use hsdl_core::harness::{self, CampaignReport, RunOptions};
use hsdl_core::norms::NormSpec;
use hsdl_core::{
    displacement, vi, BoundKind, ConvexBody, Error, EstimatorConfig, Norm, SolverConfig, VIProblem, VectorField,
    Verdict,
};

/// Numerical laboratory for lower bounds on the maximum displacement of
/// nonvanishing vector fields.
#[derive(Parser)]
#[command(name = "hsdl", version = hsdl_core::VERSION)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Seed for every randomized component.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; standard output when omitted (where meaningful).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Multiplier on multistart counts.
    #[arg(long, global = true)]
    budget: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve VI(K, f) by extragradient with a multistart fallback.
    ViSolve {
        /// Body descriptor: inline JSON, or a path to a JSON file.
        #[arg(long)]
        body: String,
        /// Field descriptor: inline JSON, or a path to a JSON file.
        #[arg(long)]
        field: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
    },
    /// Estimate both sides of a displacement lower bound.
    CheckBound {
        /// thm22, thm31, thm35, cor36 or thm42.
        #[arg(long)]
        kind: String,
        /// Ignored for thm42, which works on the real line.
        #[arg(long)]
        body: Option<String>,
        #[arg(long)]
        field: String,
        /// Norm descriptor; Euclidean when omitted.
        #[arg(long)]
        norm: Option<String>,
        /// Eigenvalue parameter for thm42.
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Sweep planar rotations over [-pi, pi] and write a CSV curve.
    SweepRotation {
        #[arg(long, default_value_t = 25)]
        alphas: usize,
    },
    /// Run the preset campaign for one of the six questions.
    Theorem {
        /// q1 … q6.
        #[arg(long)]
        id: String,
    },
    /// Campaign operations.
    Campaign {
        #[command(subcommand)]
        action: CampaignAction,
    },
    /// Render SVG plots from a campaign report or a rotation CSV.
    Plot {
        /// Campaign report (JSON) or rotation curve (CSV).
        input: PathBuf,
        /// rotation_sweep, growth_profile or slack_histogram. Without it,
        /// every plottable item is rendered into the --out directory.
        #[arg(long)]
        kind: Option<String>,
        /// Item id when the report holds several sweeps or profiles.
        #[arg(long)]
        item: Option<String>,
    },
}

#[derive(Subcommand)]
enum CampaignAction {
    /// Execute a campaign config and write its JSON report.
    Run { config: PathBuf },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
}

/// Read a descriptor given inline or as a file path.
fn descriptor<T: serde::de::DeserializeOwned>(what: &str, arg: &str) -> anyhow::Result<T> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("reading {what} descriptor {arg}"))?
    };
    serde_json::from_str(&text).map_err(|e| {
        Error::Schema(format!("{what} descriptor: {}", hsdl_core::json_location(&e))).into()
    })
}

fn emit(value: &impl serde::Serialize, out: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn estimator(common: &Common) -> EstimatorConfig {
    EstimatorConfig {
        seed: common.seed.unwrap_or(0),
        budget: common.budget.unwrap_or(1.0),
        ..EstimatorConfig::default()
    }
}

fn report_exit(report: &CampaignReport, path: &Path) -> ExitCode {
    let a = &report.aggregate;
    eprintln!(
        "{}: {} items ({} ok, {} errors), verdicts {:?}, violated nonvanishing {} -> {}",
        report.campaign,
        a.items,
        a.ok,
        a.errors,
        a.verdicts,
        a.violated_nonvanishing,
        path.display()
    );
    ExitCode::from(a.exit_code as u8)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let common = cli.common;
    let out = common.out.as_deref();
    match cli.command {
        Command::ViSolve {
            body,
            field,
            tol,
            max_iter,
        } => {
            let body = ConvexBody::from_spec(&descriptor::<BodySpec>("body", &body)?)?;
            let field = VectorField::from_spec(&descriptor::<FieldSpec>("field", &field)?)?;
            let cfg = SolverConfig {
                tol,
                max_iter,
                seed: common.seed.unwrap_or(0),
                ..SolverConfig::default()
            };
            let sol = vi::solve(&VIProblem::new(&body, &field)?, &cfg)?;
            emit(&sol, out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckBound {
            kind,
            body,
            field,
            norm,
            mu,
        } => {
            let kind = BoundKind::parse(&kind)?;
            let field = VectorField::from_spec(&descriptor::<FieldSpec>("field", &field)?)?;
            let cfg = estimator(&common);
            let report = if kind == BoundKind::EigenThm42 {
                let Some(mu) = mu else { bail!(Error::Input("thm42 needs --mu".into())) };
                displacement::check_eigen_bound(&field, mu, &cfg)?
            } else {
                let Some(body) = body else { bail!(Error::Input(format!("{} needs --body", kind.short_name()))) };
                let body = ConvexBody::from_spec(&descriptor::<BodySpec>("body", &body)?)?;
                let norm = match norm {
                    Some(n) => Norm::from_spec(&descriptor::<NormSpec>("norm", &n)?)?,
                    None => Norm::Euclidean,
                };
                displacement::check_lower_bound(&field, &body, &norm, kind, &cfg)?
            };
            emit(&report, out)?;
            let violated = report.claimed_nonvanishing && report.verdict == Verdict::NumericallyViolated;
            Ok(if violated { ExitCode::from(3) } else { ExitCode::SUCCESS })
        }
        Command::SweepRotation { alphas } => {
            let rows = displacement::rotation_sweep(alphas, &estimator(&common))?;
            let path = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("curve.csv"));
            harness::write_rotation_csv(&rows, &path)?;
            let worst = rows
                .iter()
                .map(|r| (r.d_estimate - r.d_closed_form).abs())
                .fold(0.0, f64::max);
            eprintln!("{} angles, max |estimate - 2 sin(|alpha|/2)| = {worst:.3e} -> {}", rows.len(), path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Theorem { id } => {
            let text = harness::preset(&id)?;
            let report = harness::run_campaign_str(&text, &run_options(&common))?;
            let path = out
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from(format!("{id}.report.json")));
            let written = harness::write_report(report, &path)?;
            Ok(report_exit(&written.report, &written.report_path))
        }
        Command::Campaign { action } => match action {
            CampaignAction::Run { config } => {
                let written = harness::run_campaign(&config, out, &run_options(&common))?;
                Ok(report_exit(&written.report, &written.report_path))
            }
            CampaignAction::Validate { config } => {
                let text = std::fs::read_to_string(&config)?;
                let parsed = harness::parse_config(&text)?;
                eprintln!("{}: {} items, schema ok", parsed.campaign, parsed.items.len());
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Plot { input, kind, item } => plot_command(&input, kind.as_deref(), item.as_deref(), out),
    }
}

fn run_options(common: &Common) -> RunOptions {
    RunOptions {
        seed: common.seed,
        budget: common.budget,
    }
}

fn plot_command(input: &Path, kind: Option<&str>, item: Option<&str>, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    let is_csv = input.extension().is_some_and(|e| e == "csv");
    if is_csv {
        if kind.is_some_and(|k| k != "rotation_sweep") {
            bail!(Error::Input("a CSV input only supports the rotation_sweep plot".into()));
        }
        let svg = plot::rotation_svg(&harness::read_rotation_csv(input)?)?;
        let path = out.map(Path::to_path_buf).unwrap_or_else(|| input.with_extension("svg"));
        std::fs::write(&path, svg)?;
        eprintln!("wrote {}", path.display());
        return Ok(ExitCode::SUCCESS);
    }
    let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let report: CampaignReport = serde_json::from_str(&text)
        .map_err(|e| Error::Schema(format!("{}: not a campaign report: {e}", input.display())))?;
    match kind {
        Some(k) => {
            let svg = plot::render_plot(&report, k.parse::<PlotKind>()?, item)?;
            let path = out
                .map(Path::to_path_buf)
                .unwrap_or_else(|| input.with_file_name(format!("{}-{k}.svg", report.campaign)));
            std::fs::write(&path, svg)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let dir = out.map(Path::to_path_buf).unwrap_or_else(|| {
                input.parent().map(Path::to_path_buf).unwrap_or_default().join("plots")
            });
            for p in plot::plot_report(&report, &dir)? {
                eprintln!("wrote {}", p.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("HSDL_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::Input(format!("HSDL_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            bail!(Error::Input("HSDL_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

/// 1 for bad input, 2 when an iterative method ran out of budget.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Numeric { .. }) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(code) => code,
        Err(err) => {
            if let Some(Error::Numeric { best, .. }) = err.downcast_ref::<Error>() {
                eprintln!("error: {err}");
                eprintln!("best iterate {best:?}");
            } else {
                eprintln!("error: {err:#}");
            }
            ExitCode::from(exit_code_for(&err))
        }
    }
}
