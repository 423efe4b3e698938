//! Command-line surface over the epsiray toolkit.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on input-data errors.
//! All output is deterministic plain text or CSV; file outputs are written
//! in one shot, so a failing run never leaves a partial file behind.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use epsiray::angle_channel::{self, closed_form_area, closed_form_precision, threshold};
use epsiray::growth;
use epsiray::optics::{
    manufacturing_sensitivity, trace_ball, BallRadii, Budget, FirstOrderGrowth, OpticsError,
    SceneTemplate, TraceResult,
};
use epsiray::precision::{self, ErrorPair, Precision, ScanBounds};

#[derive(Parser)]
#[command(
    name = "epsiray",
    version,
    about = "Precision-aware experiments: angle-channel corrigibility sweeps, \
             resource dominance, and 2D ray-trace reachability",
    long_about = None,
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Angle store/retrieve channel experiments.
    Channel {
        #[command(subcommand)]
        command: ChannelCommand,
    },
    /// Grid-scan the corrigible region of the n-bit angle channel.
    Region {
        /// Stored value width in bits (1..=12).
        #[arg(long)]
        n: u32,
        /// Grid cells per error axis.
        #[arg(long, default_value_t = 500)]
        cells: u32,
    },
    /// Trace a scene file exactly and report the reachability verdict.
    Trace {
        #[command(flatten)]
        scene: SceneArgs,
    },
    /// Trace a scene file under positional/angular uncertainty radii.
    TraceBall {
        #[command(flatten)]
        scene: SceneArgs,
        /// Initial positional uncertainty radius (scene units).
        #[arg(long, default_value_t = 0.0)]
        eps_pos: f64,
        /// Initial angular uncertainty radius (radians).
        #[arg(long, default_value_t = 0.0)]
        eps_ang: f64,
    },
    /// Mark dominant resources in a spec file and print the overall
    /// complexity (format: `name coeff base poly logexp` per line).
    Dominance {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Re-trace a scene for each approximation of one named parameter and
    /// count verdict flips.
    Sensitivity {
        #[command(flatten)]
        scene: SceneArgs,
        /// Parameter name to substitute.
        #[arg(long)]
        param: String,
        /// Comma-separated approximation values.
        #[arg(long)]
        values: String,
    },
}

#[derive(Subcommand)]
enum ChannelCommand {
    /// Sweep n = 1..n-max: measured corrigible area and precision per n,
    /// against the closed form, as CSV.
    Sweep {
        /// Largest channel width (1..=12).
        #[arg(long)]
        n_max: u32,
        /// Grid cells per error axis (default keeps the full sweep under a
        /// minute).
        #[arg(long, default_value_t = 500)]
        cells: u32,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide corrigibility of one error pair for the n-bit channel.
    Check {
        /// Channel width in bits (1..=20).
        #[arg(long)]
        n: u32,
        /// Input-side error magnitude (radians).
        #[arg(long)]
        eps1: f64,
        /// Output-side error magnitude (radians).
        #[arg(long)]
        eps2: f64,
    },
}

#[derive(Args)]
struct SceneArgs {
    /// Scene file path.
    #[arg(long)]
    scene: PathBuf,
    /// Interaction cap.
    #[arg(long, default_value_t = 10_000)]
    max_bounces: usize,
    /// Path-length cap (scene units).
    #[arg(long, default_value_t = 1e6)]
    max_path: f64,
}

enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
    fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }
}

fn optics_err(e: OpticsError) -> CliError {
    match e {
        OpticsError::InvalidBudget(_) | OpticsError::NoValues | OpticsError::UnknownParam(_) => {
            CliError::Usage(e.to_string())
        }
        _ => CliError::Data(e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Channel { command } => match command {
            ChannelCommand::Sweep { n_max, cells, out } => channel_sweep(n_max, cells, out.as_deref()),
            ChannelCommand::Check { n, eps1, eps2 } => channel_check(n, eps1, eps2),
        },
        Command::Region { n, cells } => region(n, cells),
        Command::Trace { scene } => {
            let result = run_trace(&scene, BallRadii::ZERO)?;
            print_trace(&result);
            Ok(())
        }
        Command::TraceBall { scene, eps_pos, eps_ang } => {
            let radii = BallRadii::new(eps_pos, eps_ang)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let result = run_trace(&scene, radii)?;
            print_trace(&result);
            Ok(())
        }
        Command::Dominance { spec } => dominance(&spec),
        Command::Sensitivity { scene, param, values } => sensitivity(&scene, &param, &values),
    }
}

fn check_width(n: u32, max: u32) -> Result<(), CliError> {
    if n < 1 || n > max {
        return Err(CliError::usage(format!("n must be between 1 and {max}, got {n}")));
    }
    Ok(())
}

/// Lossless decimal rendering for CSV fields (18 significant digits).
fn full(v: f64) -> String {
    format!("{v:.17e}")
}

fn precision_field(p: &Precision) -> String {
    match p.value() {
        Some(v) => full(v),
        None => "inf".to_string(),
    }
}

fn channel_sweep(n_max: u32, cells: u32, out: Option<&Path>) -> Result<(), CliError> {
    check_width(n_max, 12)?;
    if cells < 1 {
        return Err(CliError::usage("cells must be at least 1"));
    }
    let rows = precision::precision_complexity(
        |n| angle_channel::as_channel(n).expect("width checked"),
        n_max,
        &precision::SweepSettings { cells_per_axis: cells },
    )
    .map_err(|e| CliError::data(e.to_string()))?;

    let mut csv = String::from("n,area,precision,closed_form_precision,rel_err\n");
    for row in &rows {
        let closed = closed_form_precision(row.n);
        let rel_err = match row.precision.value() {
            Some(p) => full((p - closed).abs() / closed),
            None => "inf".to_string(),
        };
        writeln!(
            csv,
            "{},{},{},{},{}",
            row.n,
            full(row.estimate.area),
            precision_field(&row.precision),
            full(closed),
            rel_err
        )
        .expect("string write");
    }

    match out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn channel_check(n: u32, eps1: f64, eps2: f64) -> Result<(), CliError> {
    check_width(n, angle_channel::MAX_BITS)?;
    let channel = angle_channel::as_channel(n).expect("width checked");
    let verdict = precision::corrigible(&channel, ErrorPair::new(eps1, eps2))
        .map_err(|e| CliError::usage(e.to_string()))?;
    println!("corrigible {verdict}");
    Ok(())
}

fn region(n: u32, cells: u32) -> Result<(), CliError> {
    check_width(n, 12)?;
    if cells < 1 {
        return Err(CliError::usage("cells must be at least 1"));
    }
    let channel = angle_channel::as_channel(n).expect("width checked");
    let side = 2.0 * threshold(n);
    let resolution = side / cells as f64;
    let estimate = precision::region_area(
        &channel,
        ScanBounds { eps1_max: side, eps2_max: side },
        resolution,
    )
    .map_err(|e| CliError::data(e.to_string()))?;
    let precision = precision::precision_of(&estimate);
    println!("n {n}");
    println!("cells {cells}");
    println!("resolution {}", full(estimate.resolution));
    println!("bounds {} {}", full(estimate.bounds.eps1_max), full(estimate.bounds.eps2_max));
    println!("corrigible_cells {}", estimate.corrigible_cells);
    println!("area {}", full(estimate.area));
    println!("precision {}", precision_field(&precision));
    println!("closed_form_area {}", full(closed_form_area(n)));
    println!("closed_form_precision {}", full(closed_form_precision(n)));
    Ok(())
}

fn load_template(path: &Path) -> Result<SceneTemplate, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    SceneTemplate::parse(&text).map_err(optics_err)
}

fn budget_from(args: &SceneArgs) -> Result<Budget, CliError> {
    Budget::new(args.max_bounces, args.max_path).map_err(|e| CliError::usage(e.to_string()))
}

fn run_trace(args: &SceneArgs, radii: BallRadii) -> Result<TraceResult, CliError> {
    let template = load_template(&args.scene)?;
    let scene = template.resolve().map_err(optics_err)?;
    let budget = budget_from(args)?;
    Ok(trace_ball(&scene, radii, &FirstOrderGrowth::default(), &budget))
}

fn print_trace(result: &TraceResult) {
    for v in &result.path {
        println!("{} {}", v.x, v.y);
    }
    println!(
        "verdict {} bounces {} path_length {}",
        result.verdict, result.bounces, result.path_length
    );
}

fn dominance(spec: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(spec)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", spec.display())))?;
    let profiles = growth::parse_profiles(&text).map_err(|e| CliError::data(e.to_string()))?;
    let dominant = growth::dominant_set(&profiles).map_err(|e| CliError::data(e.to_string()))?;
    let overall = growth::overall_complexity(&profiles).map_err(|e| CliError::data(e.to_string()))?;
    for p in &profiles {
        let mark = if dominant.iter().any(|d| std::ptr::eq(*d, p)) { "dominant" } else { "-" };
        let t = &p.complexity;
        println!(
            "resource {} {} {} {} {} {} {}",
            p.name,
            t.coeff(),
            t.base(),
            t.poly(),
            t.logexp(),
            mark,
            t
        );
    }
    println!(
        "overall {} {} {} {} {}",
        overall.coeff(),
        overall.base(),
        overall.poly(),
        overall.logexp(),
        overall
    );
    Ok(())
}

fn sensitivity(args: &SceneArgs, param: &str, values: &str) -> Result<(), CliError> {
    let parsed: Result<Vec<f64>, _> = values
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse::<f64>)
        .collect();
    let parsed = parsed.map_err(|e| CliError::usage(format!("bad --values list: {e}")))?;
    let template = load_template(&args.scene)?;
    let budget = budget_from(args)?;
    let report = manufacturing_sensitivity(&template, param, &parsed, &budget).map_err(optics_err)?;
    for row in &report.rows {
        println!(
            "approx {} verdict {} bounces {} path_length {}",
            row.value, row.result.verdict, row.result.bounces, row.result.path_length
        );
    }
    println!("flips {}", report.flips);
    Ok(())
}
