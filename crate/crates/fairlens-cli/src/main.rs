//! fairlens: representation-level bias assessment from the command line.
//!
//! Exit codes: 0 success, 2 input or configuration error, 3 degenerate data
//! (constant attribute), 4 numerical failure (diverged training).

mod assess;
mod compare;
mod config;
mod generate;
mod util;

use clap::{Parser, Subcommand};
use config::RunConfig;
use fairlens::{Error, PerturbationMode};
use generate::MatrixFormat;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "fairlens",
    version,
    about = "Representation-level bias metrics: MI-based bias estimation, comparison metrics, synthetic generators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute bias metrics for a representation/attribute file pair.
    Assess {
        #[arg(long)]
        representations: PathBuf,
        #[arg(long)]
        attributes: PathBuf,
        /// Comma-separated subset of: rlb, mi, entropy, dcor2, probe, ba, cohort.
        #[arg(long, default_value = "rlb")]
        metrics: String,
        /// TOML run configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Report output path (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic dataset from a spec.
    Generate {
        /// Inline spec: semicolon-separated key=value pairs,
        /// e.g. "kind=colored; n=200; class_count=2; sigma=0.1".
        #[arg(long)]
        spec: Option<String>,
        /// TOML config with a [spec] section (an inline --spec wins).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the spec seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "text")]
        format: String,
        /// Output prefix; writes <prefix>.reps.csv/.fmat, <prefix>.attrs.txt,
        /// <prefix>.meta.json.
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Apply a spurious perturbation to an existing dataset.
    Perturb {
        #[arg(long)]
        representations: PathBuf,
        #[arg(long)]
        attributes: PathBuf,
        /// One of R_S, R_G, Z_S, Z_G.
        #[arg(long)]
        mode: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "text")]
        format: String,
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Sweep metrics over datasets × seeds and write a comparison CSV.
    Compare {
        /// TOML config with [[dataset]] entries.
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated metrics; overrides [run].metrics.
        #[arg(long)]
        metrics: Option<String>,
        /// Comma-separated seeds; overrides [run].seeds.
        #[arg(long)]
        seeds: Option<String>,
        /// CSV output path; per-run reports go to <stem>_reports/.
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Dimension(_) | Error::Data(_) | Error::Io(_) => 2,
        Error::DegenerateAttribute(_) => 3,
        Error::Diverged { .. } => 4,
    }
}

fn load_optional_config(path: &Option<PathBuf>) -> fairlens::Result<RunConfig> {
    match path {
        Some(p) => config::load_config(p),
        None => Ok(RunConfig::default()),
    }
}

fn parse_seed_list(s: &str) -> fairlens::Result<Vec<u64>> {
    util::split_list(s)
        .iter()
        .map(|p| {
            p.parse::<u64>()
                .map_err(|_| Error::Config(format!("cannot parse seed {p:?}")))
        })
        .collect()
}

fn run(cli: Cli) -> fairlens::Result<()> {
    match cli.command {
        Command::Assess {
            representations,
            attributes,
            metrics,
            config,
            seed,
            out,
        } => {
            let run_config = load_optional_config(&config)?;
            let report = assess::run_assess(assess::AssessInputs {
                representations: &representations,
                attributes: &attributes,
                metrics: util::split_list(&metrics),
                config: run_config,
                seed,
            })?;
            assess::write_report(&report, &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Generate {
            spec,
            config,
            seed,
            format,
            out_prefix,
        } => {
            let format: MatrixFormat = format.parse()?;
            let doc = match (spec, &config) {
                (Some(inline), _) => config::parse_inline_spec(&inline)?,
                (None, Some(_)) => load_optional_config(&config)?
                    .spec
                    .ok_or_else(|| Error::Config("config has no [spec] section".into()))?,
                (None, None) => {
                    return Err(Error::Config(
                        "generate needs --spec or a --config with a [spec] section".into(),
                    ))
                }
            };
            let paths = generate::run_generate(doc.into_spec()?, seed, format, &out_prefix)?;
            println!(
                "wrote {} {} {}",
                paths.representations.display(),
                paths.attributes.display(),
                paths.sidecar.display()
            );
            Ok(())
        }
        Command::Perturb {
            representations,
            attributes,
            mode,
            seed,
            format,
            out_prefix,
        } => {
            let format: MatrixFormat = format.parse()?;
            let mode: PerturbationMode = mode.parse()?;
            let paths = generate::run_perturb(
                &representations,
                &attributes,
                mode,
                seed,
                format,
                &out_prefix,
            )?;
            println!(
                "wrote {} {} {}",
                paths.representations.display(),
                paths.attributes.display(),
                paths.sidecar.display()
            );
            Ok(())
        }
        Command::Compare {
            config,
            metrics,
            seeds,
            out,
        } => {
            let run_config = config::load_config(&config)?;
            let metrics = metrics.map(|m| util::split_list(&m));
            let seeds = seeds.as_deref().map(parse_seed_list).transpose()?;
            let summary = compare::run_compare(compare::CompareArgs {
                config: run_config,
                metrics,
                seeds,
                out: out.clone(),
            })?;
            println!(
                "wrote {} ({} cells, {} failed)",
                out.display(),
                summary.cells,
                summary.failed
            );
            if let Some(err) = summary.first_error {
                eprintln!("error: {err}");
                std::process::exit(exit_code_for(&err));
            }
            Ok(())
        }
    }
}

fn main() {
    fairlens::sweep::init_thread_pool_from_env();
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        if let Error::Diverged { trace, .. } = &err {
            match serde_json::to_string(trace) {
                Ok(json) => eprintln!("trace: {json}"),
                Err(e) => eprintln!("trace unavailable: {e}"),
            }
        }
        std::process::exit(exit_code_for(&err));
    }
}
