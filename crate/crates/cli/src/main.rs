//! Command-line driver: build and export chains, verify the convergence
//! checks, reproduce the conditional-hit counterexample, run mixing sweeps
//! and Monte Carlo trajectories.
//!
//! Every run writes a manifest (`manifest.json` in the output directory)
//! listing the invocation, seed, produced files and outcome — also on
//! failure. Exit codes: 0 = pass, 1 = a verification came out false,
//! 2 = usage or execution error.

use clap::{Parser, Subcommand, ValueEnum};
use mixlab::analysis::{
    mixing_equality_report, restricted_mixing_report, swap_projection_report, sweep, SearchFamily,
};
use mixlab::chains::{build, export_triplets, ChainKind};
use mixlab::counterexample::refute_sst_claim_from;
use mixlab::montecarlo::{
    empirical_z_marginal, run_weight_histograms, ChainVariant, TrajectoryConfig,
};
use mixlab::orbits::verify_randomize_tv;
use mixlab::state::PauliString;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mixlab",
    version,
    about = "finite Markov chain mixing laboratory"
)]
struct Cli {
    /// Master seed for every random choice; omitting it means 0, never entropy.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for reports, tables and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Stdout rendering of the primary report.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Plain,
    Lazy,
}

#[derive(Subcommand)]
enum Command {
    /// Exact conditional-hit enumeration refuting the uniformity claim.
    Counterexample {
        /// Initial state as a digit string over {0,1,2,3}.
        #[arg(long, default_value = "001")]
        initial: String,
        #[arg(long, default_value_t = 2)]
        steps: usize,
    },
    /// Run one of the numbered verification checks (1-4).
    Verify {
        check: u8,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        /// Sample count for check 2.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Ball radius for check 4; defaults to eps/2.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Mixing times (and spectral gaps) across a range of sizes.
    Sweep {
        kind: String,
        n_min: usize,
        n_max: usize,
        eps: f64,
        /// Also compute spectral gaps.
        #[arg(long)]
        gaps: bool,
    },
    /// Dump a chain as exact sparse triplets.
    Export {
        kind: String,
        n: usize,
        /// Output file; defaults to <kind>_<n>.triplets in the out-dir.
        #[arg(long)]
        path: Option<PathBuf>,
    },
    /// Trajectory sampling of the pair-resampling chain with weight histograms.
    Montecarlo {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 10_000)]
        trajectories: usize,
        #[arg(long, value_enum, default_value_t = Variant::Plain)]
        variant: Variant,
        /// Initial state; defaults to a single nonzero coordinate.
        #[arg(long)]
        initial: Option<String>,
    },
}

#[derive(Serialize)]
struct RunManifest {
    subcommand: String,
    arguments: Vec<String>,
    seed: u64,
    version: String,
    outputs: Vec<String>,
    pass: Option<bool>,
    error: Option<String>,
    unix_time: u64,
}

struct Outcome {
    pass: bool,
    report_json: serde_json::Value,
    outputs: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = std::fs::create_dir_all(&cli.out_dir) {
        eprintln!(
            "cannot create output directory {}: {e}",
            cli.out_dir.display()
        );
        return ExitCode::from(2);
    }

    let subcommand = subcommand_name(&cli.command).to_string();
    let result = run(&cli);

    let (pass, error, outputs) = match &result {
        Ok(outcome) => (Some(outcome.pass), None, outcome.outputs.clone()),
        Err(e) => (Some(false), Some(e.to_string()), Vec::new()),
    };
    let manifest = RunManifest {
        subcommand,
        arguments: std::env::args().skip(1).collect(),
        seed: cli.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        pass,
        error,
        unix_time: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    let manifest_path = cli.out_dir.join("manifest.json");
    if let Err(e) = write_json(&manifest_path, &manifest) {
        eprintln!("cannot write manifest: {e}");
    }

    match result {
        Ok(outcome) => {
            render(&cli.format, &outcome.report_json);
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Counterexample { .. } => "counterexample",
        Command::Verify { .. } => "verify",
        Command::Sweep { .. } => "sweep",
        Command::Export { .. } => "export",
        Command::Montecarlo { .. } => "montecarlo",
    }
}

fn run(cli: &Cli) -> mixlab::Result<Outcome> {
    match &cli.command {
        Command::Counterexample { initial, steps } => cmd_counterexample(cli, initial, *steps),
        Command::Verify {
            check,
            n,
            eps,
            samples,
            gamma,
        } => cmd_verify(cli, *check, *n, *eps, *samples, *gamma),
        Command::Sweep {
            kind,
            n_min,
            n_max,
            eps,
            gaps,
        } => cmd_sweep(cli, kind, *n_min, *n_max, *eps, *gaps),
        Command::Export { kind, n, path } => cmd_export(cli, kind, *n, path.as_deref()),
        Command::Montecarlo {
            n,
            steps,
            trajectories,
            variant,
            initial,
        } => cmd_montecarlo(cli, *n, *steps, *trajectories, *variant, initial.as_deref()),
    }
}

fn cmd_counterexample(cli: &Cli, initial: &str, steps: usize) -> mixlab::Result<Outcome> {
    let y: PauliString = initial.parse()?;
    let report = refute_sst_claim_from(&y, steps)?;
    let json_path = cli.out_dir.join("counterexample.json");
    let text_path = cli.out_dir.join("counterexample.txt");
    write_json(&json_path, &report)?;
    std::fs::write(&text_path, report.render_text()).map_err(io_err)?;
    Ok(Outcome {
        pass: report.pass,
        report_json: serde_json::to_value(&report).expect("serializable"),
        outputs: vec![json_path, text_path],
    })
}

fn cmd_verify(
    cli: &Cli,
    check: u8,
    n: usize,
    eps: f64,
    samples: usize,
    gamma: Option<f64>,
) -> mixlab::Result<Outcome> {
    let (pass, json) = match check {
        1 => {
            let rep = mixing_equality_report(n, &[eps])?;
            (rep.pass, serde_json::to_value(&rep).expect("serializable"))
        }
        2 => {
            let rep = verify_randomize_tv(n, samples, cli.seed)?;
            (rep.pass, serde_json::to_value(&rep).expect("serializable"))
        }
        3 => {
            let rep = swap_projection_report(n, eps)?;
            (rep.pass, serde_json::to_value(&rep).expect("serializable"))
        }
        4 => {
            let gamma = gamma.unwrap_or(eps / 2.0);
            let rep = restricted_mixing_report(n, eps, gamma, SearchFamily::default())?;
            (rep.pass, serde_json::to_value(&rep).expect("serializable"))
        }
        other => {
            return Err(mixlab::Error::InvalidParameter(format!(
                "unknown check {other}; valid checks are 1-4"
            )))
        }
    };
    let path = cli.out_dir.join(format!("verify_{check}.json"));
    write_json(&path, &json)?;
    Ok(Outcome {
        pass,
        report_json: json,
        outputs: vec![path],
    })
}

/// At most 12 log-spaced sizes when the range is wide; every size otherwise.
fn size_grid(n_min: usize, n_max: usize) -> Vec<usize> {
    if n_max - n_min <= 15 {
        return (n_min..=n_max).collect();
    }
    let points = 12usize;
    let (a, b) = (n_min as f64, n_max as f64);
    let mut grid: Vec<usize> = (0..points)
        .map(|k| (a * (b / a).powf(k as f64 / (points - 1) as f64)).round() as usize)
        .collect();
    grid.dedup();
    grid
}

fn cmd_sweep(
    cli: &Cli,
    kind: &str,
    n_min: usize,
    n_max: usize,
    eps: f64,
    gaps: bool,
) -> mixlab::Result<Outcome> {
    let kind = ChainKind::parse(kind)?;
    if n_min > n_max {
        return Err(mixlab::Error::InvalidParameter(format!(
            "empty range {n_min}..{n_max}"
        )));
    }
    let (min, max) = kind.n_range();
    if n_min < min || n_max > max {
        return Err(mixlab::Error::SizeLimit {
            kind: kind.name().into(),
            n: n_max,
            min,
            max,
        });
    }
    let grid = size_grid(n_min, n_max);
    let result = sweep(kind, &grid, eps, gaps)?;
    let csv_path = cli.out_dir.join(format!("sweep_{}.csv", kind.name()));
    let mut csv = Vec::new();
    result.write_csv(&mut csv).map_err(io_err)?;
    std::fs::write(&csv_path, &csv).map_err(io_err)?;
    let fit_path = cli.out_dir.join(format!("sweep_{}_fit.json", kind.name()));
    write_json(&fit_path, &result.fit)?;
    let json = serde_json::to_value(&result).expect("serializable");
    Ok(Outcome {
        pass: true,
        report_json: json,
        outputs: vec![csv_path, fit_path],
    })
}

fn cmd_export(cli: &Cli, kind: &str, n: usize, path: Option<&Path>) -> mixlab::Result<Outcome> {
    let kind = ChainKind::parse(kind)?;
    let fam = build(kind, n)?;
    let path = path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cli.out_dir.join(format!("{}_{n}.triplets", kind.name())));
    let mut buf = Vec::new();
    export_triplets(&fam, &mut buf).map_err(io_err)?;
    std::fs::write(&path, &buf).map_err(io_err)?;
    let json = serde_json::json!({
        "kind": kind.name(),
        "n": n,
        "dim": fam.matrix.dim(),
        "nonzeros": fam.matrix.nnz(),
        "path": path.display().to_string(),
    });
    Ok(Outcome {
        pass: true,
        report_json: json,
        outputs: vec![path],
    })
}

fn cmd_montecarlo(
    cli: &Cli,
    n: usize,
    steps: usize,
    trajectories: usize,
    variant: Variant,
    initial: Option<&str>,
) -> mixlab::Result<Outcome> {
    let initial = match initial {
        Some(text) => text.parse::<PauliString>()?,
        None => {
            let mut coords = vec![0u8; n];
            *coords
                .last_mut()
                .ok_or_else(|| mixlab::Error::InvalidParameter("n must be positive".into()))? = 1;
            PauliString::new(coords)?
        }
    };
    if initial.n() != n {
        return Err(mixlab::Error::DimensionMismatch {
            expected: n,
            found: initial.n(),
        });
    }
    let config = TrajectoryConfig {
        n,
        steps,
        trajectories,
        seed: cli.seed,
        variant: match variant {
            Variant::Plain => ChainVariant::Plain,
            Variant::Lazy => ChainVariant::Lazy,
        },
    };
    let marginal = empirical_z_marginal(&config, &initial)?;
    let hist = run_weight_histograms(&config, &initial, &[steps])?;

    let csv_path = cli.out_dir.join("montecarlo_hist.csv");
    let mut csv = Vec::new();
    hist.write_csv(&mut csv).map_err(io_err)?;
    std::fs::write(&csv_path, &csv).map_err(io_err)?;
    let config_path = cli.out_dir.join("montecarlo_config.json");
    write_json(&config_path, &config)?;
    let report_path = cli.out_dir.join("montecarlo_report.json");
    write_json(&report_path, &marginal)?;

    Ok(Outcome {
        pass: true,
        report_json: serde_json::to_value(&marginal).expect("serializable"),
        outputs: vec![csv_path, config_path, report_path],
    })
}

fn render(format: &Format, json: &serde_json::Value) {
    match format {
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(json).expect("serializable")
            );
        }
        Format::Csv => {
            // Flat key,value rendering for quick shell pipelines.
            println!("key,value");
            flatten("", json, &mut |k, v| println!("{k},{v}"));
        }
    }
}

fn flatten(prefix: &str, v: &serde_json::Value, emit: &mut impl FnMut(&str, String)) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, inner) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, inner, emit);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, inner) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), inner, emit);
            }
        }
        other => emit(prefix, other.to_string()),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> mixlab::Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(path, text).map_err(io_err)
}

fn io_err(e: std::io::Error) -> mixlab::Error {
    mixlab::Error::InvalidParameter(format!("io failure: {e}"))
}
