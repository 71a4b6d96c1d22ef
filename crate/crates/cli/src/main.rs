use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use pmdecomp::cellgraph::{minimal_components, DecomposeParams, TransitionGraph};
use pmdecomp::invariants::{complexity_cap_from_env, ClosureOps};
use pmdecomp::pwmap::{MapConfig, OrbitPoint};
use pmdecomp::report::{self, RunParams};
use pmdecomp::scalar::parse_scalar;
use pmdecomp::{oracle, Model, Rational, Scalar};

const EXIT_IO: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

/// Invariant decompositions of piecewise affine interval maps.
#[derive(Debug, Parser)]
#[command(name = "pmdecomp", version)]
struct Cli {
    /// Map description (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    map: Option<PathBuf>,
    /// Cell resolution as a rational, e.g. 1/256. Defaults to domain length / 1024.
    #[arg(long, global = true, value_name = "RAT")]
    delta: Option<String>,
    /// Preimage depth for the exceptional-set clouds.
    #[arg(long, global = true, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..))]
    depth: u32,
    /// Number of cascade stages (basis cells) per component.
    #[arg(long = "cascade-m", global = true, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    cascade_m: u32,
    /// Forward saturation bound, in graph hops, for each cascade stage.
    #[arg(long, global = true, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..))]
    stages: u32,
    /// Oracle grid size; orbits start at grid+1 equally spaced points.
    #[arg(long, global = true, default_value_t = 1000, value_parser = clap::value_parser!(u32).range(2..))]
    grid: u32,
    /// Oracle orbit length.
    #[arg(long, global = true, default_value_t = 500, value_parser = clap::value_parser!(u32).range(1..))]
    steps: u32,
    /// Output file (validate, decompose) or directory (plotdata). Stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the map and print its pieces and exceptional set.
    Validate,
    /// Compute components, transitivity, cascades and the oracle check.
    Decompose,
    /// Print the exact orbit of a point.
    Orbit {
        #[arg(long, value_name = "RAT", allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
    /// Write cobweb.csv, regions.csv and oracle.csv.
    Plotdata,
}

struct Failure {
    code: u8,
    kind: String,
    message: String,
}

impl Failure {
    fn invalid(kind: &str, message: impl ToString) -> Self {
        Failure {
            code: EXIT_INVALID,
            kind: kind.to_string(),
            message: message.to_string(),
        }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            kind: "Io".to_string(),
            message: format!("{}: {err}", path.display()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", json!({ "error": f.kind, "message": f.message }));
            ExitCode::from(f.code)
        }
    }
}

fn load_model(cli: &Cli) -> Result<Model, Failure> {
    let path = cli
        .map
        .as_ref()
        .ok_or_else(|| Failure::invalid("Config", "--map is required"))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let config = MapConfig::from_json(&text).map_err(|e| Failure::invalid(e.kind(), &e))?;
    config.to_model().map_err(|e| Failure::invalid(e.kind(), &e))
}

fn run_params(cli: &Cli, model: &Model) -> Result<RunParams<Rational>, Failure> {
    let cap = complexity_cap_from_env().map_err(|e| Failure::invalid("Config", e))?;
    let mut params = match &cli.delta {
        Some(text) => {
            let delta: Rational = parse_scalar(text).map_err(|e| Failure::invalid("Config", e))?;
            if delta <= Rational::from_int(0) {
                return Err(Failure::invalid(
                    "Config",
                    format!("--delta must be positive, got {text}"),
                ));
            }
            RunParams::with_delta(delta, cap)
        }
        None => RunParams::defaults(model, cap),
    };
    params.depth = cli.depth as usize;
    params.cascade_m = cli.cascade_m as usize;
    params.stages = cli.stages as usize;
    params.grid = cli.grid as usize;
    params.steps = cli.steps as usize;
    Ok(params)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let model = load_model(cli)?;
    match &cli.command {
        Command::Validate => {
            let pieces: Vec<_> = model
                .pieces()
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    let domain = model.piece_interval(k);
                    let image = &model.piece_images()[k];
                    json!({
                        "interval": [domain.lo.to_string(), domain.hi.to_string()],
                        "slope": p.slope.to_string(),
                        "intercept": p.intercept.to_string(),
                        "image": [image.lo.to_string(), image.hi.to_string()],
                    })
                })
                .collect();
            let summary = json!({
                "valid": true,
                "domain": [model.lower().to_string(), model.upper().to_string()],
                "pieces": pieces,
                "exceptional": model.exceptional(),
                "checks": {
                    "strictly_monotone_pieces": true,
                    "images_within_domain": true,
                    "breakpoints_exceptional": true,
                },
            });
            let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            text.push('\n');
            emit(cli.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Decompose => {
            let params = run_params(cli, &model)?;
            let report = report::decompose(&model, &params);
            emit(cli.out.as_deref(), &report.to_json())?;
            Ok(if report.complete { 0 } else { EXIT_PARTIAL })
        }
        Command::Orbit { x, n } => {
            let x: Rational = parse_scalar(x).map_err(|e| Failure::invalid("Config", e))?;
            let orbit = model
                .forward_orbit(&x, *n)
                .map_err(|e| Failure::invalid(e.kind(), &e))?;
            let end = orbit
                .iter()
                .position(OrbitPoint::is_bullet)
                .map_or(orbit.len(), |k| k + 1);
            let text: Vec<String> = orbit[..end].iter().map(|p| p.to_string()).collect();
            emit(cli.out.as_deref(), &format!("{}\n", text.join(",")))?;
            Ok(0)
        }
        Command::Plotdata => {
            let params = run_params(cli, &model)?;
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            fs::create_dir_all(&dir).map_err(|e| Failure::io(&dir, e))?;
            let graph =
                TransitionGraph::build(&model, params.delta.clone(), params.complexity_cap).map_err(|e| Failure {
                    code: EXIT_PARTIAL,
                    kind: "ComplexityExceeded".to_string(),
                    message: e.to_string(),
                })?;
            let ops = ClosureOps::new(&model, params.complexity_cap);
            let decomp = minimal_components(&graph, &ops, &DecomposeParams::new(params.depth));
            let samples = oracle::sweep(&model, Some(graph.partition()), params.grid, params.steps);
            let files = [
                ("cobweb.csv", report::cobweb_csv(&model, &graph)),
                ("regions.csv", report::regions_csv(&decomp)),
                ("oracle.csv", oracle::samples_csv(&decomp, &samples)),
            ];
            for (name, body) in files {
                let path = dir.join(name);
                fs::write(&path, body).map_err(|e| Failure::io(&path, e))?;
            }
            Ok(if decomp.status().is_complexity_exceeded() {
                EXIT_PARTIAL
            } else {
                0
            })
        }
    }
}
