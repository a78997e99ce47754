use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use bdris_core::circuit::{fit_nmse, SampleGrid};
use bdris_sim::harness::{derive_seed, CellKey, CellSummary, Outcome, SweepOutput};
use bdris_sim::{io, Experiment, ExperimentConfig, Scheme, SweepAxis, SweepRecord};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bdris", version, about = "Wideband BD-RIS design experiments")]
struct Cli {
    /// TOML experiment config; the bundled desk-scale config when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Trials per cell, overriding the config.
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = SchemeArg::Both)]
    scheme: SchemeArg,
    /// Worker threads for trials; all cores when omitted.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Wideband,
    Flat,
    Both,
}

impl SchemeArg {
    fn schemes(self) -> Vec<Scheme> {
        match self {
            SchemeArg::Wideband => vec![Scheme::Wideband],
            SchemeArg::Flat => vec![Scheme::Flat],
            SchemeArg::Both => Scheme::ALL.to_vec(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit the linear susceptance model and write fit_report.csv.
    FitCircuit,
    /// Design one realization and write its records, assignments and traces.
    RunTrial(TrialArgs),
    /// Rate versus transmit power at a fixed element count.
    SweepPower(SweepArgs),
    /// Rate versus element count at a fixed transmit power.
    SweepElements(SweepArgs),
    /// Write the delay-domain taps of every trial to channels.csv.
    ExportChannels(ExportArgs),
}

#[derive(Args)]
struct TrialArgs {
    #[arg(long)]
    elements: Option<usize>,
    #[arg(long)]
    group_size: Option<usize>,
    #[arg(long)]
    power_dbm: Option<f64>,
    /// Position on the power axis used for seed derivation.
    #[arg(long, default_value_t = 0)]
    power_index: usize,
    #[arg(long, default_value_t = 0)]
    trial: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// Element counts; only the first is used by sweep-power.
    #[arg(long, value_delimiter = ',')]
    elements: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    group_sizes: Option<Vec<usize>>,
    /// Transmit powers; only the first is used by sweep-elements.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    power_dbm: Option<Vec<f64>>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    elements: Option<usize>,
    #[arg(long, default_value_t = 0)]
    power_index: usize,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::desk_default(),
    };
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    if let Some(trials) = cli.trials {
        config.trials = trials;
    }
    std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;

    match cli.command {
        Command::FitCircuit => fit_circuit(config, &cli.out),
        Command::RunTrial(args) => run_trial(config, args, &cli.scheme.schemes(), &cli.out),
        Command::SweepPower(args) => sweep(config, args, SweepAxis::Power, &cli.scheme.schemes(), &cli.out),
        Command::SweepElements(args) => sweep(config, args, SweepAxis::Elements, &cli.scheme.schemes(), &cli.out),
        Command::ExportChannels(args) => export_channels(config, args, &cli.out),
    }
}

fn fit_circuit(config: ExperimentConfig, out: &Path) -> Result<ExitCode> {
    let exp = Experiment::new(config)?;
    let c = exp.config();
    let grid = SampleGrid::uniform(&c.circuit, c.band, c.fit_freqs, c.fit_caps);
    let nmse = fit_nmse(exp.model(), &c.circuit, &grid)?;
    let m = exp.model();
    println!("F1(f) = {:e} * f + {:e}", m.alpha1, m.beta1);
    println!("F2(f) = {:e} * f + {:e}  [S]", m.alpha2, m.beta2);
    println!("B_c range [{:e}, {:e}] S at {:e} Hz", m.b_min, m.b_max, m.f_c);
    println!("NMSE {:.4}%", 100.0 * nmse);
    let path = out.join("fit_report.csv");
    io::write_fit_report(&path, m, exp.fit_report(), nmse)?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn run_trial(config: ExperimentConfig, args: TrialArgs, schemes: &[Scheme], out: &Path) -> Result<ExitCode> {
    let elements = args.elements.unwrap_or(config.fixed_elements);
    let group_size = args.group_size.unwrap_or(config.group_sizes[0]);
    let power_dbm = args.power_dbm.unwrap_or(config.fixed_power_dbm);
    let seed = derive_seed(config.master_seed, elements, args.power_index, args.trial);
    let exp = Experiment::new(config)?;
    let channels = exp.channels(elements, seed)?;
    let mut records = Vec::new();
    for &scheme in schemes {
        let start = Instant::now();
        let cell = CellKey {
            scheme,
            elements,
            group_size,
            power_dbm,
        };
        let outcome = match exp.design(scheme, &channels, group_size, power_dbm, seed) {
            Ok(d) => {
                let tag = match scheme {
                    Scheme::Wideband => "wideband",
                    Scheme::Flat => "flat",
                };
                io::write_assignment(&out.join(format!("assignment_{tag}.csv")), &d.assignment)?;
                io::write_trace(&out.join(format!("trace_{tag}.csv")), &d.trace)?;
                println!("{scheme}: rate {:.4} bit/s/Hz, objective {:e}", d.rate, d.objective);
                Outcome::Ok {
                    rate: d.rate,
                    objective: d.objective,
                }
            }
            Err(e) => {
                println!("{scheme}: failed: {e:#}");
                Outcome::Failed {
                    reason: format!("{e:#}"),
                }
            }
        };
        records.push(SweepRecord {
            cell,
            trial: args.trial,
            seed,
            outcome,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }
    io::write_records(&out.join("records.csv"), &records)?;
    let failed = records.iter().any(|r| matches!(r.outcome, Outcome::Failed { .. }));
    Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn sweep(
    mut config: ExperimentConfig,
    args: SweepArgs,
    axis: SweepAxis,
    schemes: &[Scheme],
    out: &Path,
) -> Result<ExitCode> {
    if let Some(elements) = args.elements {
        match axis {
            SweepAxis::Power => config.fixed_elements = elements[0],
            SweepAxis::Elements => config.elements = elements,
        }
    }
    if let Some(powers) = args.power_dbm {
        match axis {
            SweepAxis::Power => config.power_dbm = powers,
            SweepAxis::Elements => config.fixed_power_dbm = powers[0],
        }
    }
    if let Some(g) = args.group_sizes {
        config.group_sizes = g;
    }
    let exp = Experiment::new(config)?;
    let start = Instant::now();
    let output = exp.run_sweep(axis, schemes);
    io::write_records(&out.join("records.csv"), &output.records)?;
    io::write_summary(&out.join("summary.csv"), &output.summaries)?;
    print_summary(&output);
    println!(
        "{} trials in {:.1} s; wrote records.csv and summary.csv to {}",
        output.records.len(),
        start.elapsed().as_secs_f64(),
        out.display()
    );
    Ok(if output.any_cell_wholly_failed() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

fn print_summary(output: &SweepOutput) {
    println!(
        "{:<15} {:>4} {:>4} {:>7} {:>10} {:>9} {:>7}",
        "scheme", "M", "Mbar", "P_dBm", "rate", "stderr", "failed"
    );
    for CellSummary {
        cell,
        trials,
        failed,
        mean_rate,
        stderr_rate,
        ..
    } in &output.summaries
    {
        println!(
            "{:<15} {:>4} {:>4} {:>7.1} {:>10.4} {:>9.4} {:>3}/{:<3}",
            cell.scheme.label(),
            cell.elements,
            cell.group_size,
            cell.power_dbm,
            mean_rate,
            stderr_rate,
            failed,
            trials
        );
    }
}

fn export_channels(config: ExperimentConfig, args: ExportArgs, out: &Path) -> Result<ExitCode> {
    let elements = args.elements.unwrap_or(config.fixed_elements);
    let exp = Experiment::new(config)?;
    let c = exp.config();
    let taps = (0..c.trials)
        .map(|t| {
            Ok((
                t,
                exp.taps(elements, derive_seed(c.master_seed, elements, args.power_index, t))?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let path = out.join("channels.csv");
    io::write_channels(&path, &taps)?;
    println!("wrote {} trials to {}", taps.len(), path.display());
    Ok(ExitCode::SUCCESS)
}
