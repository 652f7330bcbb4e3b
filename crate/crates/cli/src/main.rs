use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use optocool_cli::config::Mode;
use optocool_cli::output;
use optocool_cli::pipeline::{self, SweepRow};
use optocool_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "optocool", version, about = "Non-Markovian optomechanical cooling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Config file, or the name of a shipped config (e.g. fig2_subohmic).
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output directory (default: run.output_dir, then ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `section.key=value`; repeatable.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Relative tolerance for `compare` (overrides run.tolerance_rel).
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured path(s) and write series + manifest.
    Simulate,
    /// Export the memory-kernel tables f and C3.
    Kernel,
    /// Run both paths and check N_b agreement.
    Compare,
    /// One run per value of a parameter.
    Sweep {
        /// drive_E | s | eta | k | kappa
        #[arg(long)]
        axis: String,
        /// Comma-separated values; may be empty (`--values ""`).
        #[arg(long, default_value = "")]
        values: String,
    },
    /// List the shipped configs.
    Configs,
}

fn out_dir(cli: &Cli, cfg: &RunConfig) -> PathBuf {
    cli.out.clone().or_else(|| cfg.run.output_dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| "out".into())
}

fn report(run: &pipeline::RunOutput) {
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(c) = &run.comparison {
        println!(
            "compare: max |dN_b| = {:.4e}, max rel = {:.4e}, worst ratio {:.3} at t = {} ({})",
            c.max_abs,
            c.max_rel,
            c.worst_ratio,
            c.worst_t,
            if c.passed() { "pass" } else { "FAIL" }
        );
    }
    println!("done in {:.2} s", run.wall_time);
}

fn parse_values(list: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse().map_err(|_| CliError::Config(format!("sweep value `{v}` is not a number"))))
        .collect()
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Command::Configs = cli.command {
        for (name, _) in optocool_cli::config::SHIPPED {
            println!("{name}");
        }
        return Ok(());
    }
    let mut cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(t) = cli.tolerance {
        cfg.run.tolerance_rel = t;
    }
    let dir = out_dir(cli, &cfg);
    match &cli.command {
        Command::Simulate => {
            let run = pipeline::execute(&cfg)?;
            output::write_run(&dir, &run)?;
            report(&run);
        }
        Command::Kernel => {
            let (tables, nodes) = pipeline::kernel_tables(&cfg)?;
            let path = output::write_kernel(&dir, &tables)?;
            println!("{} ({} quadrature nodes)", path.display(), nodes);
        }
        Command::Compare => {
            cfg.run.mode = Mode::Both;
            let run = pipeline::execute(&cfg)?;
            output::write_run(&dir, &run)?;
            report(&run);
            let c = run.comparison.expect("both paths ran");
            if !c.passed() {
                return Err(CliError::Tolerance { max_abs: c.max_abs, max_rel: c.max_rel });
            }
        }
        Command::Sweep { axis, values } => {
            let values = parse_values(values)?;
            let results = pipeline::sweep(&cfg, axis, &values)?;
            let mut rows = Vec::new();
            let mut failures = Vec::new();
            for (value, r) in results {
                match r {
                    Ok(run) => {
                        output::write_run(&dir.join(format!("{axis}_{value}")), &run)?;
                        let row = SweepRow::from_run(value, &run);
                        println!("{axis} = {value}: final N_b = {:.6}, min N_b = {:.6}", row.final_n_b, row.min_n_b);
                        rows.push(row);
                    }
                    Err(e) => {
                        eprintln!("{axis} = {value}: {e}");
                        failures.push((value, e.to_string()));
                    }
                }
            }
            output::write_sweep(&dir, axis, &rows, &failures)?;
        }
        Command::Configs => unreachable!(),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
