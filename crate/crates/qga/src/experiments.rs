//! Batch experiment runner: config file parsing, sweeps, repetitions, and
//! CSV/JSON emission.
//!
//! Repetitions and sweep points run in parallel; each repetition derives its
//! own master seed, so output is identical to serial execution. Rows are
//! ordered by (sweep, rep, generation) and the emitters are deterministic,
//! except that elapsed wall time is recorded only when `record_timing = true`
//! (it is 0 otherwise, keeping default output byte-stable).

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use crate::encoding::EncodingSpec;
use crate::entanglement::{run_entangled_evolution, JointInit, PairingPolicy};
use crate::evolution::{run_evolution, DepthMode, EvolutionConfig, GenerationRecord};
use crate::fitness::{Objective, ObjectiveKind};
use crate::gateset::GateSetId;
use crate::{parallel, QgaError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    None,
    Depth(Vec<usize>),
    Generations(Vec<u64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntanglementMode {
    None,
    Pairwise,
}

/// One batch of seeded repetitions, optionally swept over depth or
/// generation count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub objective: Objective,
    pub config: EvolutionConfig,
    pub repetitions: u64,
    pub sweep: SweepAxis,
    pub entanglement: EntanglementMode,
    pub pairing: PairingPolicy,
    pub output_prefix: String,
    pub record_timing: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.repetitions == 0 {
            return Err(QgaError::InvalidConfig {
                field: "repetitions".into(),
                reason: "must be at least 1".into(),
            });
        }
        match &self.sweep {
            SweepAxis::Depth(ds) if ds.contains(&0) => {
                return Err(QgaError::InvalidConfig {
                    field: "sweep".into(),
                    reason: "depth sweep values must be positive".into(),
                });
            }
            _ => {}
        }
        if self.entanglement == EntanglementMode::Pairwise && !self.config.population_size.is_multiple_of(2) {
            return Err(QgaError::InvalidConfig {
                field: "population_size".into(),
                reason: "entangled mode needs an even population".into(),
            });
        }
        Ok(())
    }

    pub fn encoding_spec(&self) -> Result<EncodingSpec> {
        self.objective.encoding_spec(self.config.qubits_per_variable)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep: u64,
    pub generation: u64,
    pub rep: u64,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_entropy: f64,
    pub depth_hist: BTreeMap<usize, usize>,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

fn run_one(
    spec: &ExperimentSpec,
    config: &EvolutionConfig,
    enc: &EncodingSpec,
) -> Result<Vec<GenerationRecord>> {
    let records = match spec.entanglement {
        EntanglementMode::None => run_evolution(config, &spec.objective, enc)?.0,
        EntanglementMode::Pairwise => {
            run_entangled_evolution(config, &spec.objective, enc, spec.pairing, JointInit::Bell)?.0
        }
    };
    Ok(records)
}

/// Execute every (sweep value, repetition) job and collect per-generation
/// rows. Raw rows are emitted so aggregates stay recomputable.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let enc = spec.encoding_spec()?;
    let sweep_points: Vec<(u64, EvolutionConfig)> = match &spec.sweep {
        SweepAxis::None => vec![(0, spec.config.clone())],
        SweepAxis::Depth(depths) => depths
            .iter()
            .map(|&d| {
                let mut c = spec.config.clone();
                c.depth_mode = DepthMode::Fixed(d);
                (d as u64, c)
            })
            .collect(),
        SweepAxis::Generations(gens) => gens
            .iter()
            .map(|&g| {
                let mut c = spec.config.clone();
                c.max_generations = g;
                (g, c)
            })
            .collect(),
    };

    let reps = spec.repetitions;
    let jobs = sweep_points.len() * reps as usize;
    let results: Vec<Result<Vec<ResultRow>>> = parallel::map_indexed(jobs, |job| {
        let (sweep_value, base_config) = &sweep_points[job / reps as usize];
        let rep = (job % reps as usize) as u64;
        let mut config = base_config.clone();
        config.master_seed = spec.config.master_seed.wrapping_add(rep);
        let started = Instant::now();
        let records = run_one(spec, &config, &enc)?;
        let elapsed_ms = if spec.record_timing {
            started.elapsed().as_millis() as u64
        } else {
            0
        };
        Ok(records
            .into_iter()
            .map(|r| ResultRow {
                sweep: *sweep_value,
                generation: r.generation,
                rep,
                best_fitness: r.best_fitness,
                mean_fitness: r.mean_fitness,
                best_entropy: r.best_entropy,
                depth_hist: r.depth_histogram,
                elapsed_ms,
            })
            .collect())
    });

    let mut rows: Vec<ResultRow> = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    rows.sort_by_key(|r| (r.sweep, r.rep, r.generation));
    Ok(ResultTable { rows })
}

pub const CSV_HEADER: &str = "sweep,generation,rep,best_fitness,mean_fitness,best_entropy,depth_hist,elapsed_ms";

fn format_depth_hist(hist: &BTreeMap<usize, usize>) -> String {
    let mut out = String::new();
    for (i, (d, c)) in hist.iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        let _ = write!(out, "{d}:{c}");
    }
    out
}

pub fn table_to_csv(table: &ResultTable) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.sweep,
            r.generation,
            r.rep,
            r.best_fitness,
            r.mean_fitness,
            r.best_entropy,
            format_depth_hist(&r.depth_hist),
            r.elapsed_ms
        );
    }
    out
}

pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<()> {
    std::fs::write(path, table_to_csv(table))?;
    Ok(())
}

pub fn emit_json(table: &ResultTable, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(table)
        .map_err(|e| QgaError::Parse(format!("json serialization failed: {e}")))?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_json(path: &Path) -> Result<ResultTable> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| QgaError::Parse(format!("json parse failed: {e}")))
}

/// Parse the flat `key = value` config format. Unknown keys are rejected so
/// typos fail loudly.
pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(QgaError::Parse(format!(
                "line {}: expected `key = value`, got `{raw}`",
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }

    let known = [
        "objective",
        "num_variables",
        "qubits_per_variable",
        "depth",
        "depth_mode",
        "d_min",
        "d_max",
        "mutation_rate",
        "crossover_rate",
        "elite_fraction",
        "shots",
        "max_generations",
        "population_size",
        "gate_set",
        "depth_mutation_rate",
        "seed",
        "repetitions",
        "entanglement",
        "pairing",
        "output_prefix",
        "record_timing",
    ];
    for key in map.keys() {
        if !known.contains(&key.as_str()) {
            return Err(QgaError::InvalidConfig {
                field: key.clone(),
                reason: "unknown configuration key".into(),
            });
        }
    }

    fn get<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
        match map.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| QgaError::InvalidConfig {
                field: key.into(),
                reason: format!("cannot parse `{v}`"),
            }),
        }
    }

    let objective_kind: ObjectiveKind = get(&map, "objective", ObjectiveKind::Rastrigin)?;
    let num_variables: usize = get(&map, "num_variables", 2)?;
    let objective = Objective::preset(objective_kind, num_variables);

    let depth: usize = get(&map, "depth", 4)?;
    let depth_mode = match map.get("depth_mode").map(String::as_str) {
        None | Some("fixed") => DepthMode::Fixed(depth),
        Some("variable") => DepthMode::Variable {
            min: get(&map, "d_min", 1)?,
            max: get(&map, "d_max", 10)?,
        },
        Some(other) => {
            return Err(QgaError::InvalidConfig {
                field: "depth_mode".into(),
                reason: format!("expected fixed|variable, got `{other}`"),
            })
        }
    };

    let entanglement = match map.get("entanglement").map(String::as_str) {
        None | Some("none") => EntanglementMode::None,
        Some("pairwise") => EntanglementMode::Pairwise,
        Some(other) => {
            return Err(QgaError::InvalidConfig {
                field: "entanglement".into(),
                reason: format!("expected none|pairwise, got `{other}`"),
            })
        }
    };
    let pairing = match map.get("pairing").map(String::as_str) {
        None | Some("per-generation") => PairingPolicy::PerGeneration,
        Some("fixed") => PairingPolicy::Fixed,
        Some(other) => {
            return Err(QgaError::InvalidConfig {
                field: "pairing".into(),
                reason: format!("expected fixed|per-generation, got `{other}`"),
            })
        }
    };

    let config = EvolutionConfig {
        qubits_per_variable: get(&map, "qubits_per_variable", 8)?,
        depth_mode,
        mutation_rate: get(&map, "mutation_rate", 0.3)?,
        crossover_rate: get(&map, "crossover_rate", 0.7)?,
        elite_fraction: get(&map, "elite_fraction", 0.2)?,
        shots: get(&map, "shots", 1024)?,
        max_generations: get(&map, "max_generations", 50)?,
        population_size: get(&map, "population_size", 50)?,
        gate_set: get(&map, "gate_set", GateSetId::Quantum)?,
        depth_mutation_rate: get(&map, "depth_mutation_rate", 0.1)?,
        master_seed: get(&map, "seed", 0)?,
    };

    let spec = ExperimentSpec {
        objective,
        config,
        repetitions: get(&map, "repetitions", 1)?,
        sweep: SweepAxis::None,
        entanglement,
        pairing,
        output_prefix: map.get("output_prefix").cloned().unwrap_or_else(|| "qga_out".into()),
        record_timing: get(&map, "record_timing", false)?,
    };
    spec.validate()?;
    Ok(spec)
}

/// Build-time sanity check used by the `selftest` subcommand: stride
/// simulator vs dense reference on random circuits, plus benchmark anchors.
pub fn selftest() -> Result<()> {
    use crate::evolution::{init_population, EvolutionConfig};
    use crate::fitness::{ackley, griewank, rastrigin, rosenbrock, sphere};
    use crate::rng::derive_rng;
    use crate::simulator::{reference, run_circuit};

    let config = EvolutionConfig {
        qubits_per_variable: 2,
        depth_mode: DepthMode::Variable { min: 1, max: 5 },
        mutation_rate: 0.3,
        crossover_rate: 0.7,
        elite_fraction: 0.2,
        shots: 16,
        max_generations: 0,
        population_size: 50,
        gate_set: GateSetId::Quantum,
        depth_mutation_rate: 0.0,
        master_seed: 0xD5,
    };
    let enc = EncodingSpec::uniform(2, 2, crate::encoding::VariableDomain { lower: -1.0, upper: 1.0 })?;
    let mut rng = derive_rng(config.master_seed, "selftest", 0, 0);
    for genome in init_population(&config, &enc, &mut rng) {
        let fast = run_circuit(&genome)?;
        let dense = reference::run_circuit_dense(&genome)?;
        for (a, b) in fast.amplitudes.iter().zip(&dense.amplitudes) {
            if (a - b).norm() > 1e-8 {
                return Err(QgaError::Parse(format!(
                    "simulator oracle mismatch {:.3e} on genome:\n{}",
                    (a - b).norm(),
                    genome.to_text()
                )));
            }
        }
    }

    let checks = [
        ("rastrigin(0,0)", rastrigin(&[0.0, 0.0]), 0.0, 0.0),
        ("rastrigin(1,0)", rastrigin(&[1.0, 0.0]), 1.0, 1e-12),
        ("sphere(0,0)", sphere(&[0.0, 0.0]), 0.0, 0.0),
        ("ackley(0,0)", ackley(&[0.0, 0.0]), 0.0, 1e-9),
        ("griewank(0,0)", griewank(&[0.0, 0.0]), 0.0, 1e-9),
        ("rosenbrock(1,1)", rosenbrock(&[1.0, 1.0]), 0.0, 1e-9),
    ];
    for (name, got, expect, tol) in checks {
        if (got - expect).abs() > tol {
            return Err(QgaError::Parse(format!("benchmark anchor {name} = {got}, expected {expect}")));
        }
    }
    Ok(())
}
