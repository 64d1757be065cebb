use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use qga::entanglement::JointInit;
use qga::experiments::{
    emit_csv, emit_json, parse_config, run_experiment, selftest, EntanglementMode, ExperimentSpec,
    SweepAxis,
};
use qga::gateset::GateSetId;
use qga::{entanglement, evolution, Result};

#[derive(Parser)]
#[command(name = "qga", about = "Gate-based quantum genetic optimizer", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        /// Path to a `key = value` config file.
        config: PathBuf,
        /// Also write the result table as JSON.
        #[arg(long)]
        json: bool,
        /// Write the final population's circuits (rep 0) to this file.
        #[arg(long)]
        dump_population: Option<PathBuf>,
    },
    /// Sweep circuit depth over a list of fixed depths.
    SweepDepth {
        config: PathBuf,
        /// Comma-separated depths, e.g. 2,4,6,8.
        #[arg(long, value_delimiter = ',', required = true)]
        depths: Vec<usize>,
    },
    /// Sweep the generation budget.
    SweepGenerations {
        config: PathBuf,
        /// Comma-separated generation counts, e.g. 10,20,40.
        #[arg(long, value_delimiter = ',', required = true)]
        generations: Vec<u64>,
    },
    /// Run the config twice, once per gate set, into two CSV files.
    CompareGatesets { config: PathBuf },
    /// Run the config with and without pairwise entanglement.
    CompareEntanglement { config: PathBuf },
    /// Parse and validate a config file without running it.
    ValidateConfig { config: PathBuf },
    /// Check the simulator against its dense reference and the benchmark
    /// anchor values.
    Selftest,
}

fn load(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

fn run_to_csv(spec: &ExperimentSpec, suffix: &str) -> Result<PathBuf> {
    let table = run_experiment(spec)?;
    let path = PathBuf::from(format!("{}{}.csv", spec.output_prefix, suffix));
    emit_csv(&table, &path)?;
    println!("wrote {} rows to {}", table.rows.len(), path.display());
    Ok(path)
}

fn dump_population(spec: &ExperimentSpec, path: &Path) -> Result<()> {
    // re-run repetition 0 to completion and write its final circuits
    let enc = spec.encoding_spec()?;
    let population = match spec.entanglement {
        EntanglementMode::None => evolution::run_evolution(&spec.config, &spec.objective, &enc)?.1,
        EntanglementMode::Pairwise => {
            entanglement::run_entangled_evolution(
                &spec.config,
                &spec.objective,
                &enc,
                spec.pairing,
                JointInit::Bell,
            )?
            .1
        }
    };
    let mut out = String::new();
    for (genome, record) in population.individuals.iter().zip(&population.fitness) {
        out.push_str(&format!("# fitness = {}\n", record.fitness));
        out.push_str(&genome.to_text());
        out.push('\n');
    }
    std::fs::write(path, out)?;
    println!("wrote {} circuits to {}", population.individuals.len(), path.display());
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            json,
            dump_population: dump,
        } => {
            let spec = load(&config)?;
            let table = run_experiment(&spec)?;
            let csv_path = PathBuf::from(format!("{}.csv", spec.output_prefix));
            emit_csv(&table, &csv_path)?;
            println!("wrote {} rows to {}", table.rows.len(), csv_path.display());
            if json {
                let json_path = PathBuf::from(format!("{}.json", spec.output_prefix));
                emit_json(&table, &json_path)?;
                println!("wrote {}", json_path.display());
            }
            if let Some(path) = dump {
                dump_population(&spec, &path)?;
            }
        }
        Command::SweepDepth { config, depths } => {
            let mut spec = load(&config)?;
            spec.sweep = SweepAxis::Depth(depths);
            run_to_csv(&spec, "_depth_sweep")?;
        }
        Command::SweepGenerations { config, generations } => {
            let mut spec = load(&config)?;
            spec.sweep = SweepAxis::Generations(generations);
            run_to_csv(&spec, "_generation_sweep")?;
        }
        Command::CompareGatesets { config } => {
            let base = load(&config)?;
            for (set, suffix) in [(GateSetId::Classical, "_classical"), (GateSetId::Quantum, "_quantum")] {
                let mut spec = base.clone();
                spec.config.gate_set = set;
                run_to_csv(&spec, suffix)?;
            }
        }
        Command::CompareEntanglement { config } => {
            let base = load(&config)?;
            for (mode, suffix) in [
                (EntanglementMode::None, "_independent"),
                (EntanglementMode::Pairwise, "_entangled"),
            ] {
                let mut spec = base.clone();
                spec.entanglement = mode;
                run_to_csv(&spec, suffix)?;
            }
        }
        Command::ValidateConfig { config } => {
            load(&config)?;
            println!("config ok");
        }
        Command::Selftest => {
            selftest()?;
            println!("selftest ok");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
