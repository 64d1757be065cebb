//! Pairwise inter-individual entanglement: two genomes simulated jointly from
//! a Bell-product initial state and fitted from their halves of each joint
//! sample.
//!
//! The maximally entangled state is a Bell pair between qubit `j` of
//! individual A and qubit `j` of individual B for every `j`; in entangled mode
//! it replaces the individuals' basis-state initialization.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::EncodingSpec;
use crate::evolution::{
    run_with_evaluator, EvolutionConfig, GenerationRecord, Population, PopulationEvaluator,
};
use crate::fitness::{FitnessRecord, Objective};
use crate::genome::{CircuitGenome, GateInstruction, Layer};
use crate::rng::derive_rng;
use crate::simulator::{
    self, exact_distribution, qubit_cap, sample_distribution, SampleCounts, StateVector,
};
use crate::{parallel, QgaError, Result};

/// How the joint register of a pair is initialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JointInit {
    /// Qubit-wise Bell pairs across the A/B bipartition.
    Bell,
    /// Product of the two individuals' basis states (disables entanglement).
    Product,
}

/// Whether pairs are redrawn each generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairingPolicy {
    Fixed,
    PerGeneration,
}

/// A perfect matching of the population.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingPlan {
    pub pairs: Vec<(usize, usize)>,
}

/// Uniform random perfect matching over an even-sized population.
pub fn make_pairing(population_size: usize, rng: &mut ChaCha8Rng) -> Result<PairingPlan> {
    if !population_size.is_multiple_of(2) {
        return Err(QgaError::InvalidConfig {
            field: "population_size".into(),
            reason: format!("entangled mode needs an even population, got {population_size}"),
        });
    }
    let mut indices: Vec<usize> = (0..population_size).collect();
    indices.shuffle(rng);
    let pairs = indices.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    Ok(PairingPlan { pairs })
}

/// Bell-product state on `2 * half_qubits` qubits: amplitude `2^(-mn/2)` on
/// every index whose A half equals its B half.
pub fn bell_product_state(half_qubits: usize) -> StateVector {
    let dim = 1usize << (2 * half_qubits);
    let amp = Complex64::new((1.0 / (1u64 << half_qubits) as f64).sqrt(), 0.0);
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
    for a in 0..1usize << half_qubits {
        amplitudes[(a << half_qubits) | a] = amp;
    }
    StateVector {
        num_qubits: 2 * half_qubits,
        amplitudes,
    }
}

/// Joint initial state for a pair of genomes.
pub fn joint_initial_state(
    genome_a: &CircuitGenome,
    genome_b: &CircuitGenome,
    init: JointInit,
) -> Result<StateVector> {
    if genome_a.num_qubits != genome_b.num_qubits {
        return Err(QgaError::DimensionMismatch(
            "paired genomes act on different qubit counts".into(),
        ));
    }
    let half = genome_a.num_qubits;
    if 2 * half > qubit_cap() {
        return Err(QgaError::QubitCapExceeded {
            requested: 2 * half,
            cap: qubit_cap(),
        });
    }
    match init {
        JointInit::Bell => Ok(bell_product_state(half)),
        JointInit::Product => {
            let mut bits = genome_a.initial_basis_state.clone();
            bits.extend_from_slice(&genome_b.initial_basis_state);
            StateVector::basis(&bits)
        }
    }
}

fn shift_layer(layer: &Layer, offset: usize) -> Layer {
    Layer::new(
        layer
            .instructions
            .iter()
            .map(|inst| {
                GateInstruction::new(inst.kind, inst.qubits.iter().map(|&q| q + offset).collect())
            })
            .collect(),
    )
}

/// Output state of the joint circuit: A's layers on the low qubit indices,
/// B's on the high ones, aligned layer by layer (shorter circuit padded with
/// identity at the tail).
pub fn run_joint_circuit(
    genome_a: &CircuitGenome,
    genome_b: &CircuitGenome,
    init: JointInit,
) -> Result<StateVector> {
    genome_a.validate()?;
    genome_b.validate()?;
    let mut state = joint_initial_state(genome_a, genome_b, init)?;
    let half = genome_a.num_qubits;
    let depth = genome_a.depth().max(genome_b.depth());
    for t in 0..depth {
        if let Some(layer) = genome_a.layers.get(t) {
            state.apply_layer(layer);
        }
        if let Some(layer) = genome_b.layers.get(t) {
            state.apply_layer(&shift_layer(layer, half));
        }
    }
    Ok(state)
}

/// Joint sampling result for one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEvaluation {
    pub pair: (usize, usize),
    pub counts: SampleCounts,
    pub record_a: FitnessRecord,
    pub record_b: FitnessRecord,
}

/// Sample the joint circuit; each shot's first half scores individual A, the
/// second half individual B.
pub fn evaluate_pair(
    genome_a: &CircuitGenome,
    genome_b: &CircuitGenome,
    objective: &Objective,
    spec: &EncodingSpec,
    shots: u64,
    rng: &mut ChaCha8Rng,
    init: JointInit,
) -> Result<JointEvaluation> {
    if genome_a.num_qubits != spec.total_qubits() {
        return Err(QgaError::DimensionMismatch(format!(
            "genome has {} qubits, encoding needs {}",
            genome_a.num_qubits,
            spec.total_qubits()
        )));
    }
    let state = run_joint_circuit(genome_a, genome_b, init)?;
    let dist = exact_distribution(&state);
    let counts = sample_distribution(&dist, shots, rng)?;
    let half = genome_a.num_qubits;
    let mask = (1usize << half) - 1;
    let mut mean_a = vec![0.0; spec.num_variables];
    let mut mean_b = vec![0.0; spec.num_variables];
    for (&index, &count) in &counts.counts {
        let xa = spec.decode_index(index >> half);
        let xb = spec.decode_index(index & mask);
        for i in 0..spec.num_variables {
            mean_a[i] += count as f64 * xa[i];
            mean_b[i] += count as f64 * xb[i];
        }
    }
    for i in 0..spec.num_variables {
        mean_a[i] /= shots as f64;
        mean_b[i] /= shots as f64;
    }
    let record = |mean: Vec<f64>| FitnessRecord {
        fitness: objective.evaluate(&mean),
        mean_vector: mean,
        shots_used: shots,
    };
    Ok(JointEvaluation {
        pair: (0, 0),
        counts,
        record_a: record(mean_a),
        record_b: record(mean_b),
    })
}

/// Evaluates the population through joint pair sampling.
pub struct EntangledEvaluator<'a> {
    pub objective: &'a Objective,
    pub spec: &'a EncodingSpec,
    pub shots: u64,
    pub master_seed: u64,
    pub pairing: PairingPolicy,
    pub init: JointInit,
}

impl PopulationEvaluator for EntangledEvaluator<'_> {
    fn evaluate(
        &self,
        genomes: &[CircuitGenome],
        cached: &[Option<FitnessRecord>],
        generation: u64,
    ) -> Result<Vec<FitnessRecord>> {
        let pairing_gen = match self.pairing {
            PairingPolicy::Fixed => 0,
            PairingPolicy::PerGeneration => generation,
        };
        let mut pair_rng = derive_rng(self.master_seed, "pair", pairing_gen, 0);
        let plan = make_pairing(genomes.len(), &mut pair_rng)?;

        let evaluations: Vec<Option<JointEvaluation>> =
            parallel::map_indexed(plan.pairs.len(), |p| {
                let (a, b) = plan.pairs[p];
                if cached[a].is_some() && cached[b].is_some() {
                    return Ok(None);
                }
                let mut rng = derive_rng(self.master_seed, "fit", generation, p as u64);
                evaluate_pair(
                    &genomes[a],
                    &genomes[b],
                    self.objective,
                    self.spec,
                    self.shots,
                    &mut rng,
                    self.init,
                )
                .map(|mut ev| {
                    ev.pair = (a, b);
                    Some(ev)
                })
            })
            .into_iter()
            .collect::<Result<_>>()?;

        let mut records: Vec<Option<FitnessRecord>> = cached.to_vec();
        for ev in evaluations.into_iter().flatten() {
            let (a, b) = ev.pair;
            if records[a].is_none() {
                records[a] = Some(ev.record_a);
            }
            if records[b].is_none() {
                records[b] = Some(ev.record_b);
            }
        }
        Ok(records.into_iter().map(|r| r.expect("all individuals paired")).collect())
    }

    fn best_entropy(&self, genome: &CircuitGenome) -> Result<f64> {
        // circuit-intrinsic diagnostic: the joint marginal of any half is
        // uniform by construction, so record the standalone output entropy
        let state = simulator::run_circuit(genome)?;
        Ok(simulator::shannon_entropy(&simulator::exact_distribution(&state)))
    }
}

/// Identical to the standard run except fitness comes from joint pair
/// sampling with the chosen initialization and pairing policy.
pub fn run_entangled_evolution(
    config: &EvolutionConfig,
    objective: &Objective,
    spec: &EncodingSpec,
    pairing: PairingPolicy,
    init: JointInit,
) -> Result<(Vec<GenerationRecord>, Population)> {
    if !config.population_size.is_multiple_of(2) {
        return Err(QgaError::InvalidConfig {
            field: "population_size".into(),
            reason: "entangled mode needs an even population".into(),
        });
    }
    if 2 * spec.total_qubits() > qubit_cap() {
        return Err(QgaError::QubitCapExceeded {
            requested: 2 * spec.total_qubits(),
            cap: qubit_cap(),
        });
    }
    let evaluator = EntangledEvaluator {
        objective,
        spec,
        shots: config.shots,
        master_seed: config.master_seed,
        pairing,
        init,
    };
    run_with_evaluator(config, spec, &evaluator)
}
