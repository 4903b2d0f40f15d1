use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use udop::harness::{
    run_experiment, theta_sensitivity_sweep, validate_archive, write_archive, ExperimentConfig, ExperimentOutput,
    GeneratorSpec,
};
use udop::instance::{save_instance, Point3};

#[derive(Parser)]
#[command(
    name = "udop",
    version,
    about = "Adaptive UAV charging schedules under uncertain flight power"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file.
    Generate {
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Side of the square deployment area, m.
        #[arg(long, default_value_t = 1000.0)]
        side: f64,
        /// Start and end depot as x,y,z.
        #[arg(long, value_parser = parse_point, default_value = "0,0,0")]
        depot: Point3,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment grid.
    Run(RunArgs),
    /// Rerun the grid with ADAPT once per minimum safety belief.
    SweepTheta {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [0.45, 0.55, 0.65, 0.75, 0.85])]
        theta_min: Vec<f64>,
    },
    /// Audit a trace archive and recompute its metrics.
    Validate {
        /// Directory holding traces.jsonl and metrics.csv.
        dir: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores; overrides the config.
    #[arg(long)]
    workers: Option<usize>,
    /// Root seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_point(s: &str) -> Result<Point3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, z] => Ok(Point3::new(x, y, z)),
        _ => Err(format!("expected x,y,z, got {s:?}")),
    }
}

impl RunArgs {
    fn load(&self) -> Result<(ExperimentConfig, PathBuf)> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
        if let Some(w) = self.workers {
            config.workers = w;
        }
        if let Some(s) = self.seed {
            config.root_seed = s;
        }
        let base = self.config.parent().map(Path::to_path_buf).unwrap_or_default();
        config.validate()?;
        Ok((config, base))
    }
}

fn finish(config: &ExperimentConfig, output: &ExperimentOutput) -> Result<()> {
    write_archive(&config.output_dir, output)?;
    let wins = output.traces.iter().filter(|t| t.succeeded()).count();
    println!(
        "{} missions, {} succeeded; {} metrics rows written to {}",
        output.traces.len(),
        wins,
        output.metrics.len(),
        config.output_dir.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            nodes,
            seed,
            side,
            depot,
            out,
        } => {
            let mut spec = GeneratorSpec::new(nodes, seed);
            spec.area_side = side;
            spec.start_depot = depot;
            spec.end_depot = depot;
            let instance = spec.generate()?;
            save_instance(&instance, &out).with_context(|| format!("saving {}", out.display()))?;
            println!(
                "wrote {} ({} nodes) to {}",
                instance.name,
                instance.len(),
                out.display()
            );
        }
        Command::Run(args) => {
            let (config, base) = args.load()?;
            let output = run_experiment(&config, &base)?;
            finish(&config, &output)?;
        }
        Command::SweepTheta { run, theta_min } => {
            let (config, base) = run.load()?;
            let output = theta_sensitivity_sweep(&config, &theta_min, &base)?;
            finish(&config, &output)?;
        }
        Command::Validate { dir } => {
            let report = validate_archive(&dir)?;
            println!(
                "{} traces audited, {} metrics rows match in {}",
                report.traces,
                report.metrics_rows,
                dir.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
