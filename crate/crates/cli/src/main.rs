use std::path::{Path, PathBuf};
use std::process::ExitCode;

use charbench::experiment::{
    compare, comparison_table, preset, refit, run_experiment, write_bundle, ComparisonRow, ExperimentConfig,
    PRESET_NAMES,
};
use charbench::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "charbench", version, about = "CCB/CAB benchmarking simulation lab")]
struct Cli {
    /// Worker threads for the simulator (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write raw.csv, fits.json and summary.json.
    Run(RunArgs),
    /// Run several configs on the same target and noise and tabulate them.
    Compare(CompareArgs),
    /// Refit a raw.csv written by `run`.
    Fit {
        raw: PathBuf,
        /// Write the fit report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List presets, or print one as TOML.
    Presets { name: Option<String> },
}

#[derive(Args)]
struct Source {
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    sequences: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Config files; with one file or a preset, its `compare` list is used.
    #[arg(long = "config", conflicts_with = "preset")]
    configs: Vec<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    sequences: Option<usize>,
    /// Write comparison.json here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_config() => 2,
            CliError::Core(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(s) => f.write_str(s),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn apply_overrides(
    cfg: &mut ExperimentConfig,
    seed: Option<u64>,
    repeats: Option<usize>,
    sequences: Option<usize>,
) {
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = repeats {
        cfg.repeats = r;
    }
    if let Some(k) = sequences {
        cfg.sequences = k;
    }
}

fn load(config: Option<&Path>, preset_name: Option<&str>) -> CliResult<ExperimentConfig> {
    match (config, preset_name) {
        (Some(p), _) => Ok(ExperimentConfig::load(p)?),
        (None, Some(name)) => Ok(preset(name)?),
        (None, None) => Err(CliError::Usage("one of --config or --preset is required".into())),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Core(Error::Parse(e.to_string())))
}

fn print_table(rows: &[ComparisonRow]) {
    println!("{:<6} {:>10} {:>10} {:>10} {:>12} {:>14}", "proto", "mean", "std", "exact", "circuits", "single_shots");
    for r in rows {
        let shots = r.single_shots_per_repeat.map_or("exact".to_string(), |s| s.to_string());
        println!(
            "{:<6} {:>10.6} {:>10.2e} {:>10.6} {:>12} {:>14}",
            r.protocol.as_str(),
            r.mean,
            r.std,
            r.exact_mean,
            r.circuits_per_repeat,
            shots
        );
    }
}

fn cmd_run(args: RunArgs) -> CliResult<()> {
    let mut cfg = load(args.source.config.as_deref(), args.source.preset.as_deref())?;
    apply_overrides(&mut cfg, args.source.seed, args.source.repeats, args.source.sequences);
    let out_dir = args.out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("charbench-out"));
    let outcome = run_experiment(&cfg)?;
    let bundle = write_bundle(&outcome, &out_dir)?;
    print_table(&comparison_table(&outcome.summaries));
    if let Some(r) = &outcome.reference {
        println!("reference-adjusted ccb: {:.6}", r.mean_ratio);
    }
    println!("wrote {}", out_dir.display());
    println!("config hash {}", bundle.provenance.config_hash);
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> CliResult<()> {
    let rows = if args.configs.len() > 1 {
        let mut cfgs = args.configs.iter().map(|p| Ok(ExperimentConfig::load(p)?)).collect::<CliResult<Vec<_>>>()?;
        for c in &mut cfgs {
            apply_overrides(c, args.seed, args.repeats, args.sequences);
        }
        compare(&cfgs)?
    } else {
        let mut cfg = load(args.configs.first().map(PathBuf::as_path), args.preset.as_deref())?;
        apply_overrides(&mut cfg, args.seed, args.repeats, args.sequences);
        comparison_table(&run_experiment(&cfg)?.summaries)
    };
    print_table(&rows);
    if let Some(dir) = args.out {
        std::fs::create_dir_all(&dir).map_err(Error::from)?;
        std::fs::write(dir.join("comparison.json"), to_json(&rows)? + "\n").map_err(Error::from)?;
    }
    Ok(())
}

fn cmd_fit(raw: &Path, out: Option<PathBuf>) -> CliResult<()> {
    let text = to_json(&refit(raw)?)? + "\n";
    match out {
        Some(p) => std::fs::write(p, text).map_err(Error::from)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_presets(name: Option<String>) -> CliResult<()> {
    match name {
        Some(n) => print!("{}", preset(&n)?.to_toml()?),
        None => PRESET_NAMES.iter().for_each(|n| println!("{n}")),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Fit { raw, out } => cmd_fit(&raw, out),
        Command::Presets { name } => cmd_presets(name),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("charbench: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
