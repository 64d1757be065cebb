//! Population initialization, elitism, layer crossover, arity-changing
//! mutation, depth mutation, and the generation loop.
//!
//! Elites carry their fitness record across generations, so the best-fitness
//! series is non-increasing by construction. All randomness comes from streams
//! derived from the master seed: `init` for population construction, `ops` per
//! generation for operator draws, `fit` per (generation, individual) for
//! fitness sampling. Fitness evaluations run through [`crate::parallel`].

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::encoding::EncodingSpec;
use crate::fitness::{evaluate_fitness, FitnessRecord, Objective};
use crate::gateset::{GateKind, GateSetId};
use crate::genome::{CircuitGenome, GateInstruction, Layer};
use crate::rng::derive_rng;
use crate::simulator;
use crate::{parallel, QgaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DepthMode {
    Fixed(usize),
    Variable { min: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub qubits_per_variable: usize,
    pub depth_mode: DepthMode,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub elite_fraction: f64,
    pub shots: u64,
    pub max_generations: u64,
    pub population_size: usize,
    pub gate_set: GateSetId,
    /// Probability of a layer insert/delete per offspring in variable mode.
    pub depth_mutation_rate: f64,
    pub master_seed: u64,
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, reason: String| QgaError::InvalidConfig {
            field: name.into(),
            reason,
        };
        if self.qubits_per_variable == 0 {
            return Err(field("qubits_per_variable", "must be at least 1".into()));
        }
        for (name, rate) in [
            ("mutation_rate", self.mutation_rate),
            ("crossover_rate", self.crossover_rate),
            ("depth_mutation_rate", self.depth_mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(field(name, format!("must be in [0, 1], got {rate}")));
            }
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction < 1.0) {
            return Err(field(
                "elite_fraction",
                format!("must be in (0, 1), got {}", self.elite_fraction),
            ));
        }
        if self.population_size < 2 {
            return Err(field("population_size", "must be at least 2".into()));
        }
        if self.shots == 0 {
            return Err(field("shots", "must be at least 1".into()));
        }
        match self.depth_mode {
            DepthMode::Fixed(0) => {
                return Err(field("depth", "must be at least 1".into()));
            }
            DepthMode::Variable { min, max } if min == 0 || min > max => {
                return Err(field("depth_mode", format!("need 1 <= d_min <= d_max, got [{min}, {max}]")));
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Population {
    pub individuals: Vec<CircuitGenome>,
    pub fitness: Vec<FitnessRecord>,
    pub generation: u64,
}

/// Per-generation statistics, one row of the experiment output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: u64,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_entropy: f64,
    pub depth_histogram: BTreeMap<usize, usize>,
    pub best_mean_vector: Vec<f64>,
}

/// How a population's fitness records are produced each generation. The
/// standard evaluator samples each circuit independently; the entangled
/// evaluator in [`crate::entanglement`] samples joint pairs.
pub trait PopulationEvaluator: Sync {
    /// `cached[i] = Some(record)` marks an elite whose record carries over.
    fn evaluate(
        &self,
        genomes: &[CircuitGenome],
        cached: &[Option<FitnessRecord>],
        generation: u64,
    ) -> Result<Vec<FitnessRecord>>;

    /// Entropy diagnostic recorded for the generation's best individual.
    fn best_entropy(&self, genome: &CircuitGenome) -> Result<f64>;
}

pub struct StandardEvaluator<'a> {
    pub objective: &'a Objective,
    pub spec: &'a EncodingSpec,
    pub shots: u64,
    pub master_seed: u64,
}

impl PopulationEvaluator for StandardEvaluator<'_> {
    fn evaluate(
        &self,
        genomes: &[CircuitGenome],
        cached: &[Option<FitnessRecord>],
        generation: u64,
    ) -> Result<Vec<FitnessRecord>> {
        parallel::map_indexed(genomes.len(), |i| match &cached[i] {
            Some(rec) => Ok(rec.clone()),
            None => {
                let mut rng = derive_rng(self.master_seed, "fit", generation, i as u64);
                evaluate_fitness(&genomes[i], self.objective, self.spec, self.shots, &mut rng)
            }
        })
        .into_iter()
        .collect()
    }

    fn best_entropy(&self, genome: &CircuitGenome) -> Result<f64> {
        let state = simulator::run_circuit(genome)?;
        Ok(simulator::shannon_entropy(&simulator::exact_distribution(&state)))
    }
}

/// One random layer: scan qubits in random order, draw a gate uniformly from
/// the set at each free qubit, extra operands uniformly from the remaining
/// free qubits. Falls back to a uniform one-qubit gate when a multi-qubit
/// draw does not fit.
pub fn fill_random_layer(num_qubits: usize, gate_set: GateSetId, rng: &mut ChaCha8Rng) -> Layer {
    let members = gate_set.members(None).expect("unfiltered members");
    let singles = gate_set.members(Some(1)).expect("arity-1 members");
    let mut order: Vec<usize> = (0..num_qubits).collect();
    order.shuffle(rng);
    let mut free = vec![true; num_qubits];
    let mut instructions = Vec::new();
    for &q in &order {
        if !free[q] {
            continue;
        }
        let mut kind = members[rng.gen_range(0..members.len())];
        let extras_needed = kind.arity() - 1;
        let mut available: Vec<usize> = (0..num_qubits).filter(|&p| free[p] && p != q).collect();
        if available.len() < extras_needed {
            kind = singles[rng.gen_range(0..singles.len())];
        }
        let mut qubits = vec![q];
        for _ in 0..kind.arity() - 1 {
            let pick = rng.gen_range(0..available.len());
            qubits.push(available.swap_remove(pick));
        }
        for &p in &qubits {
            free[p] = false;
        }
        instructions.push(GateInstruction::new(kind, qubits));
    }
    Layer::new(instructions)
}

fn random_basis_state(num_qubits: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    (0..num_qubits).map(|_| u8::from(rng.gen_bool(0.5))).collect()
}

fn hadamard_first_layer(num_qubits: usize, rng: &mut ChaCha8Rng) -> Layer {
    let k = rng.gen_range(1..=num_qubits);
    let mut qubits: Vec<usize> = (0..num_qubits).collect();
    qubits.shuffle(rng);
    let mut chosen: Vec<usize> = qubits.into_iter().take(k).collect();
    chosen.sort_unstable();
    Layer::new(chosen.into_iter().map(|q| GateInstruction::new(GateKind::H, vec![q])).collect())
}

fn random_genome(config: &EvolutionConfig, spec: &EncodingSpec, rng: &mut ChaCha8Rng) -> CircuitGenome {
    let num_qubits = spec.total_qubits();
    let depth = match config.depth_mode {
        DepthMode::Fixed(d) => d,
        DepthMode::Variable { min, max } => rng.gen_range(min..=max),
    };
    let initial = random_basis_state(num_qubits, rng);
    let mut layers = Vec::with_capacity(depth);
    if config.gate_set == GateSetId::Quantum {
        layers.push(hadamard_first_layer(num_qubits, rng));
        for _ in 1..depth {
            layers.push(fill_random_layer(num_qubits, config.gate_set, rng));
        }
    } else {
        for _ in 0..depth {
            layers.push(fill_random_layer(num_qubits, config.gate_set, rng));
        }
    }
    CircuitGenome::new(num_qubits, layers, initial).expect("construction preserves invariants")
}

/// Build the initial population. Quantum gate set: first layer is Hadamards
/// on a uniformly sized random subset of qubits.
pub fn init_population(config: &EvolutionConfig, spec: &EncodingSpec, rng: &mut ChaCha8Rng) -> Vec<CircuitGenome> {
    (0..config.population_size).map(|_| random_genome(config, spec, rng)).collect()
}

/// Number of elites: round-half-up of the fraction, floor of one.
pub fn elite_count(population_size: usize, elite_fraction: f64) -> usize {
    ((population_size as f64 * elite_fraction).round() as usize).max(1)
}

/// Indices ranked by (fitness, index); the first `elite_count` are the elites.
pub fn rank_population(fitness: &[FitnessRecord]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&a, &b| {
        fitness[a]
            .fitness
            .partial_cmp(&fitness[b].fitness)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

pub fn select_elites(fitness: &[FitnessRecord], elite_fraction: f64) -> (Vec<usize>, Vec<usize>) {
    let order = rank_population(fitness);
    let count = elite_count(fitness.len(), elite_fraction);
    (order[..count].to_vec(), order[count..].to_vec())
}

/// Exchange-region qubits for parameter `k`: the `k` least significant qubits
/// of every register.
fn exchange_region(num_qubits: usize, qubits_per_variable: usize, k: usize) -> Vec<bool> {
    let n = qubits_per_variable;
    let mut in_region = vec![false; num_qubits];
    for reg_start in (0..num_qubits).step_by(n) {
        for flag in &mut in_region[reg_start + n - k..reg_start + n] {
            *flag = true;
        }
    }
    in_region
}

/// Layer crossover: swap the gates of one second-half layer that are entirely
/// supported on the k least significant qubits of each register. Instructions
/// straddling the region boundary stay put and block colliding incoming
/// gates, which then also stay with their original parent.
pub fn crossover(
    parent1: &CircuitGenome,
    parent2: &CircuitGenome,
    config: &EvolutionConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(CircuitGenome, CircuitGenome)> {
    if parent1.num_qubits != parent2.num_qubits {
        return Err(QgaError::DimensionMismatch(
            "crossover parents act on different qubit counts".into(),
        ));
    }
    if rng.gen::<f64>() >= config.crossover_rate {
        return Ok((parent1.clone(), parent2.clone()));
    }
    let d = parent1.depth().min(parent2.depth());
    let lo = d.div_ceil(2) + 1; // first layer of the strict second half, 1-indexed
    if lo > d {
        return Ok((parent1.clone(), parent2.clone()));
    }
    let delta = rng.gen_range(lo..=d) - 1;
    let k = rng.gen_range(1..=config.qubits_per_variable);
    let region = exchange_region(parent1.num_qubits, config.qubits_per_variable, k);

    let classify = |layer: &Layer| {
        let mut full = Vec::new();
        let mut rest = Vec::new();
        for inst in &layer.instructions {
            if inst.qubits.iter().all(|&q| region[q]) {
                full.push(inst.clone());
            } else {
                rest.push(inst.clone());
            }
        }
        (full, rest)
    };
    let (full1, rest1) = classify(&parent1.layers[delta]);
    let (full2, rest2) = classify(&parent2.layers[delta]);

    // Fixpoint: un-swap any moving gate that would collide with a retained
    // gate at its destination. Staying gates re-occupy their home qubits, so
    // iterate until stable.
    let mut move1 = vec![true; full1.len()];
    let mut move2 = vec![true; full2.len()];
    loop {
        let mut changed = false;
        let occupied = |rest: &[GateInstruction], full: &[GateInstruction], moves: &[bool]| {
            let mut used = vec![false; parent1.num_qubits];
            for inst in rest {
                for &q in &inst.qubits {
                    used[q] = true;
                }
            }
            for (inst, &mv) in full.iter().zip(moves) {
                if !mv {
                    for &q in &inst.qubits {
                        used[q] = true;
                    }
                }
            }
            used
        };
        let dest2 = occupied(&rest2, &full2, &move2); // destination of full1
        for (inst, mv) in full1.iter().zip(move1.iter_mut()) {
            if *mv && inst.qubits.iter().any(|&q| dest2[q]) {
                *mv = false;
                changed = true;
            }
        }
        let dest1 = occupied(&rest1, &full1, &move1); // destination of full2
        for (inst, mv) in full2.iter().zip(move2.iter_mut()) {
            if *mv && inst.qubits.iter().any(|&q| dest1[q]) {
                *mv = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let rebuild = |rest: &[GateInstruction],
                   stay_full: &[GateInstruction],
                   stay_moves: &[bool],
                   incoming: &[GateInstruction],
                   incoming_moves: &[bool]| {
        let mut instructions = rest.to_vec();
        for (inst, &mv) in stay_full.iter().zip(stay_moves) {
            if !mv {
                instructions.push(inst.clone());
            }
        }
        for (inst, &mv) in incoming.iter().zip(incoming_moves) {
            if mv {
                instructions.push(inst.clone());
            }
        }
        Layer::new(instructions)
    };

    let mut child1 = parent1.clone();
    let mut child2 = parent2.clone();
    child1.layers[delta] = rebuild(&rest1, &full1, &move1, &full2, &move2);
    child2.layers[delta] = rebuild(&rest2, &full2, &move2, &full1, &move1);
    debug_assert!(child1.validate().is_ok() && child2.validate().is_ok());
    Ok((child1, child2))
}

fn one_qubit_gate_slots(slots: &[Option<GateInstruction>], exclude: usize) -> Vec<usize> {
    slots
        .iter()
        .enumerate()
        .filter(|(i, s)| {
            *i != exclude
                && s.as_ref().is_some_and(|inst| inst.kind.arity() == 1)
        })
        .map(|(i, _)| i)
        .collect()
}

fn uniform_gate(set: GateSetId, arity: usize, rng: &mut ChaCha8Rng) -> GateKind {
    let members = set.members(Some(arity)).expect("valid arity");
    members[rng.gen_range(0..members.len())]
}

/// Mutate one gene in place within its layer's slot list. Cases follow the
/// arity of a replacement gate drawn uniformly from the whole active set.
fn mutate_gene(
    slots: &mut Vec<Option<GateInstruction>>,
    slot: usize,
    gate_set: GateSetId,
    rng: &mut ChaCha8Rng,
) {
    let original = slots[slot].clone().expect("gene present");
    let members = gate_set.members(None).expect("unfiltered members");
    let replacement = members[rng.gen_range(0..members.len())];
    let old_arity = original.kind.arity();
    let new_arity = replacement.arity();
    match (old_arity, new_arity) {
        // Case 1: same arity, same qubits
        (a, b) if a == b => {
            slots[slot] = Some(GateInstruction::new(replacement, original.qubits.clone()));
        }
        // Case 2: 1 -> 2, original qubit becomes the control
        (1, 2) => {
            let candidates = one_qubit_gate_slots(slots, slot);
            if candidates.is_empty() {
                slots[slot] = Some(GateInstruction::new(
                    uniform_gate(gate_set, 1, rng),
                    original.qubits.clone(),
                ));
                return;
            }
            let target_slot = candidates[rng.gen_range(0..candidates.len())];
            let target_qubit = slots[target_slot].as_ref().unwrap().qubits[0];
            slots[target_slot] = None;
            slots[slot] = Some(GateInstruction::new(
                replacement,
                vec![original.qubits[0], target_qubit],
            ));
        }
        // Case 3: 1 -> 3, two targets taken from one-qubit genes
        (1, 3) => {
            let mut candidates = one_qubit_gate_slots(slots, slot);
            if candidates.len() < 2 {
                slots[slot] = Some(GateInstruction::new(
                    uniform_gate(gate_set, 1, rng),
                    original.qubits.clone(),
                ));
                return;
            }
            let first = candidates.swap_remove(rng.gen_range(0..candidates.len()));
            let second = candidates.swap_remove(rng.gen_range(0..candidates.len()));
            let q1 = slots[first].as_ref().unwrap().qubits[0];
            let q2 = slots[second].as_ref().unwrap().qubits[0];
            slots[first] = None;
            slots[second] = None;
            slots[slot] = Some(GateInstruction::new(replacement, vec![original.qubits[0], q1, q2]));
        }
        // Case 4: 2 -> 1, two independent one-qubit gates
        (2, 1) => {
            let g_a = uniform_gate(gate_set, 1, rng);
            let g_b = uniform_gate(gate_set, 1, rng);
            slots[slot] = Some(GateInstruction::new(g_a, vec![original.qubits[0]]));
            slots.push(Some(GateInstruction::new(g_b, vec![original.qubits[1]])));
        }
        // Case 5: 3 -> 1, three independent one-qubit gates
        (3, 1) => {
            let g_a = uniform_gate(gate_set, 1, rng);
            slots[slot] = Some(GateInstruction::new(g_a, vec![original.qubits[0]]));
            for &q in &original.qubits[1..] {
                let g = uniform_gate(gate_set, 1, rng);
                slots.push(Some(GateInstruction::new(g, vec![q])));
            }
        }
        // Case 6: 2 -> 3, keep one original qubit as control, pull in a third
        (2, 3) => {
            let candidates = one_qubit_gate_slots(slots, slot);
            if candidates.is_empty() {
                slots[slot] = Some(GateInstruction::new(
                    uniform_gate(gate_set, 2, rng),
                    original.qubits.clone(),
                ));
                return;
            }
            let control_pick = rng.gen_range(0..2);
            let control = original.qubits[control_pick];
            let other = original.qubits[1 - control_pick];
            let third_slot = candidates[rng.gen_range(0..candidates.len())];
            let third = slots[third_slot].as_ref().unwrap().qubits[0];
            slots[third_slot] = None;
            slots[slot] = Some(GateInstruction::new(replacement, vec![control, other, third]));
        }
        // Case 7: 3 -> 2, two of the original qubits chosen uniformly
        (3, 2) => {
            let drop = rng.gen_range(0..3);
            let kept: Vec<usize> = original
                .qubits
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, &q)| q)
                .collect();
            slots[slot] = Some(GateInstruction::new(replacement, kept));
        }
        _ => unreachable!("arities are 1..=3"),
    }
}

/// Apply mutation independently to each gene with probability `p_mut`.
/// Genes removed or created by earlier cases in the same layer are skipped.
pub fn mutate(genome: &CircuitGenome, config: &EvolutionConfig, rng: &mut ChaCha8Rng) -> CircuitGenome {
    let mut out = genome.clone();
    for layer in &mut out.layers {
        let original_count = layer.instructions.len();
        let mut slots: Vec<Option<GateInstruction>> =
            layer.instructions.drain(..).map(Some).collect();
        for slot in 0..original_count {
            if slots[slot].is_none() {
                continue;
            }
            if rng.gen::<f64>() < config.mutation_rate {
                mutate_gene(&mut slots, slot, config.gate_set, rng);
            }
        }
        *layer = Layer::new(slots.into_iter().flatten().collect());
    }
    debug_assert!(out.validate().is_ok());
    out
}

/// Variable-depth mode: with probability `p_depth` insert a fresh random layer
/// at a uniform position or delete a uniform layer, clamped to [d_min, d_max].
pub fn mutate_depth(genome: &CircuitGenome, config: &EvolutionConfig, rng: &mut ChaCha8Rng) -> CircuitGenome {
    let DepthMode::Variable { min, max } = config.depth_mode else {
        return genome.clone();
    };
    if rng.gen::<f64>() >= config.depth_mutation_rate {
        return genome.clone();
    }
    let d = genome.depth();
    let mut insert = rng.gen_bool(0.5);
    if insert && d >= max {
        insert = false;
    } else if !insert && d <= min {
        insert = true;
    }
    let mut out = genome.clone();
    if insert {
        let pos = rng.gen_range(0..=d);
        out.layers.insert(pos, fill_random_layer(genome.num_qubits, config.gate_set, rng));
    } else {
        let pos = rng.gen_range(0..d);
        out.layers.remove(pos);
    }
    out
}

fn make_record(
    generation: u64,
    genomes: &[CircuitGenome],
    fitness: &[FitnessRecord],
    evaluator: &dyn PopulationEvaluator,
) -> Result<GenerationRecord> {
    let best_idx = rank_population(fitness)[0];
    let best_fitness = fitness[best_idx].fitness;
    let mean_fitness = fitness.iter().map(|r| r.fitness).sum::<f64>() / fitness.len() as f64;
    let mut depth_histogram = BTreeMap::new();
    for g in genomes {
        *depth_histogram.entry(g.depth()).or_insert(0) += 1;
    }
    Ok(GenerationRecord {
        generation,
        best_fitness,
        mean_fitness,
        best_entropy: evaluator.best_entropy(&genomes[best_idx])?,
        depth_histogram,
        best_mean_vector: fitness[best_idx].mean_vector.clone(),
    })
}

/// Advance one generation: copy elites verbatim (with cached fitness), fill
/// the rest with crossover offspring, mutate them, re-evaluate.
pub fn step_generation(
    population: Population,
    config: &EvolutionConfig,
    evaluator: &dyn PopulationEvaluator,
) -> Result<(Population, GenerationRecord)> {
    let gen = population.generation + 1;
    let mut ops_rng = derive_rng(config.master_seed, "ops", gen, 0);
    let (elites, _) = select_elites(&population.fitness, config.elite_fraction);

    let size = config.population_size;
    let mut genomes: Vec<CircuitGenome> = Vec::with_capacity(size);
    let mut cached: Vec<Option<FitnessRecord>> = Vec::with_capacity(size);
    for &e in &elites {
        genomes.push(population.individuals[e].clone());
        cached.push(Some(population.fitness[e].clone()));
    }
    while genomes.len() < size {
        // uniform parent pair, distinct within the pair, elites included
        let i = ops_rng.gen_range(0..size);
        let mut j = ops_rng.gen_range(0..size - 1);
        if j >= i {
            j += 1;
        }
        let (c1, c2) = crossover(&population.individuals[i], &population.individuals[j], config, &mut ops_rng)?;
        for child in [c1, c2] {
            if genomes.len() >= size {
                break;
            }
            let mutated = mutate(&child, config, &mut ops_rng);
            let depth_mutated = mutate_depth(&mutated, config, &mut ops_rng);
            genomes.push(depth_mutated);
            cached.push(None);
        }
    }

    let fitness = evaluator.evaluate(&genomes, &cached, gen)?;
    let record = make_record(gen, &genomes, &fitness, evaluator)?;
    Ok((
        Population {
            individuals: genomes,
            fitness,
            generation: gen,
        },
        record,
    ))
}

/// Full run with a caller-supplied evaluator.
pub fn run_with_evaluator(
    config: &EvolutionConfig,
    spec: &EncodingSpec,
    evaluator: &dyn PopulationEvaluator,
) -> Result<(Vec<GenerationRecord>, Population)> {
    config.validate()?;
    let mut init_rng = derive_rng(config.master_seed, "init", 0, 0);
    let genomes = init_population(config, spec, &mut init_rng);
    let cached = vec![None; genomes.len()];
    let fitness = evaluator.evaluate(&genomes, &cached, 0)?;
    let mut records = vec![make_record(0, &genomes, &fitness, evaluator)?];
    let mut population = Population {
        individuals: genomes,
        fitness,
        generation: 0,
    };
    for _ in 0..config.max_generations {
        let (next, record) = step_generation(population, config, evaluator)?;
        population = next;
        records.push(record);
    }
    Ok((records, population))
}

/// Standard (non-entangled) evolutionary run.
pub fn run_evolution(
    config: &EvolutionConfig,
    objective: &Objective,
    spec: &EncodingSpec,
) -> Result<(Vec<GenerationRecord>, Population)> {
    let evaluator = StandardEvaluator {
        objective,
        spec,
        shots: config.shots,
        master_seed: config.master_seed,
    };
    run_with_evaluator(config, spec, &evaluator)
}
