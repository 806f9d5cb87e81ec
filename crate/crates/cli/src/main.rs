use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand};

use alloc_bandit_cli::config::{parse_config_with_overrides, ExperimentSpec};
use alloc_bandit_cli::experiment::{
    bounds_rows, format_bounds_table, run_experiment, write_bounds, write_results, ResultRow,
};
use alloc_bandit_cli::presets::preset;

#[derive(Parser)]
#[command(name = "alloc-bandit", version, about = "Monte-Carlo experiments for adaptive sample allocation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Parallel episode workers; the output does not depend on it.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        runs: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Override any config key, e.g. `--set n=[100,200]`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run a built-in experiment.
    Preset {
        /// fig3-left, fig3-right-gauss or fig3-right-rademacher.
        name: String,
        #[arg(long)]
        runs: Option<u64>,
        #[arg(long, env = "ALLOC_BANDIT_SEED")]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the theoretical bounds for a config's instance and budgets.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        /// Write CSV here instead of printing a table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_config(path: &Path, overrides: &[String]) -> anyhow::Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config_with_overrides(&text, overrides).with_context(|| format!("in {}", path.display()))
}

fn with_output<F>(path: Option<&Path>, f: F) -> anyhow::Result<()>
where
    F: FnOnce(&mut dyn Write) -> anyhow::Result<()>,
{
    match path {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            let mut w = BufWriter::new(file);
            f(&mut w).with_context(|| format!("writing {}", p.display()))?;
            w.flush().with_context(|| format!("writing {}", p.display()))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)
        }
    }
}

fn emit(spec: &ExperimentSpec, rows: &[ResultRow]) -> anyhow::Result<()> {
    with_output(spec.out.as_deref(), |w| write_results(rows, w))?;
    if spec.emit_bounds {
        let bounds = bounds_rows(spec)?;
        match &spec.bounds_out {
            Some(p) => with_output(Some(p), |w| write_bounds(&bounds, w))?,
            None => eprint!("{}", format_bounds_table(&bounds)),
        }
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate { config, workers, out, runs, seed, mut overrides } => {
            if let Some(r) = runs {
                overrides.push(format!("runs={r}"));
            }
            if let Some(s) = seed {
                overrides.push(format!("seed={s}"));
            }
            if let Some(p) = out {
                overrides.push(format!("out={}", p.display()));
            }
            let spec = read_config(&config, &overrides)?;
            let rows = run_experiment(&spec, workers)?;
            emit(&spec, &rows)
        }
        Command::Preset { name, runs, seed, workers, out } => {
            let specs = preset(&name)?;
            let mut rows = Vec::new();
            for mut spec in specs {
                if let Some(r) = runs {
                    spec.runs = r;
                }
                spec.master_seed = seed.or(spec.master_seed);
                spec.validate()?;
                rows.extend(run_experiment(&spec, workers)?);
            }
            with_output(out.as_deref(), |w| write_results(&rows, w))
        }
        Command::Bounds { config, out } => {
            let spec = read_config(&config, &[])?;
            let rows = bounds_rows(&spec)?;
            match out {
                Some(p) => with_output(Some(&p), |w| write_bounds(&rows, w)),
                None => {
                    print!("{}", format_bounds_table(&rows));
                    Ok(())
                }
            }
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
