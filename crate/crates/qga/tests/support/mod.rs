#![allow(dead_code)]

//! Shared fixtures for the integration tests.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use qga::evolution::fill_random_layer;
use qga::gateset::GateSetId;
use qga::genome::CircuitGenome;
use qga::rng::derive_rng;

pub fn random_basis(num_qubits: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    (0..num_qubits).map(|_| u8::from(rng.gen_bool(0.5))).collect()
}

pub fn random_genome(
    num_qubits: usize,
    depth: usize,
    gate_set: GateSetId,
    rng: &mut ChaCha8Rng,
) -> CircuitGenome {
    let layers = (0..depth).map(|_| fill_random_layer(num_qubits, gate_set, rng)).collect();
    let initial = random_basis(num_qubits, rng);
    CircuitGenome::new(num_qubits, layers, initial).expect("random genome is valid")
}

/// `count` genomes with qubit count and depth drawn uniformly from the given
/// inclusive ranges.
pub fn random_corpus(
    count: usize,
    qubits: (usize, usize),
    depth: (usize, usize),
    gate_set: GateSetId,
    seed: u64,
) -> Vec<CircuitGenome> {
    let mut rng = derive_rng(seed, "corpus", 0, 0);
    (0..count)
        .map(|_| {
            let q = rng.gen_range(qubits.0..=qubits.1);
            let d = rng.gen_range(depth.0..=depth.1);
            random_genome(q, d, gate_set, &mut rng)
        })
        .collect()
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
