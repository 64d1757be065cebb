//! Exact statevector simulation of circuit genomes.
//!
//! Amplitude index convention: qubit 0 is the most significant bit of the
//! index, matching the MSB-first variable encoding. Gates are applied in place
//! by stride iteration over the affected qubit subset; no full circuit matrix
//! is ever built on this path. The dense Kronecker route in [`reference`] is
//! the independent check used by `selftest` and the acceptance suite.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::encoding::EncodingSpec;
use crate::genome::{CircuitGenome, GateInstruction, Layer};
use crate::{QgaError, Result};

pub const DEFAULT_QUBIT_CAP: usize = 26;

/// Simulation cap, overridable through `QGA_SIM_QUBIT_CAP`.
pub fn qubit_cap() -> usize {
    std::env::var("QGA_SIM_QUBIT_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_QUBIT_CAP)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub num_qubits: usize,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// |b> for an MSB-first digit string.
    pub fn basis(bits: &[u8]) -> Result<Self> {
        let num_qubits = bits.len();
        let index = crate::encoding::bits_to_integer(bits)? as usize;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amplitudes })
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Apply one gate instruction in place.
    pub fn apply_instruction(&mut self, inst: &GateInstruction) {
        let k = inst.kind.arity();
        let dim = 1usize << k;
        let u = inst.kind.unitary();
        let q = self.num_qubits;
        // bit position of each gate operand; gate-local bit j is operand j,
        // most significant first
        let bitpos: Vec<usize> = inst.qubits.iter().map(|&qi| q - 1 - qi).collect();
        let mask: usize = bitpos.iter().map(|&p| 1usize << p).sum();
        // offset[l] = amplitude-index displacement of local basis state l
        let mut offsets = [0usize; 8];
        for (l, off) in offsets.iter_mut().enumerate().take(dim) {
            *off = bitpos
                .iter()
                .enumerate()
                .filter(|(j, _)| (l >> (k - 1 - j)) & 1 == 1)
                .map(|(_, &p)| 1usize << p)
                .sum();
        }
        let mut scratch = [Complex64::new(0.0, 0.0); 8];
        for base in 0..self.amplitudes.len() {
            if base & mask != 0 {
                continue;
            }
            for l in 0..dim {
                scratch[l] = self.amplitudes[base | offsets[l]];
            }
            for (l, &off) in offsets.iter().enumerate().take(dim) {
                let mut acc = Complex64::new(0.0, 0.0);
                for (lp, &s) in scratch.iter().enumerate().take(dim) {
                    acc += u[l * dim + lp] * s;
                }
                self.amplitudes[base | off] = acc;
            }
        }
    }

    pub fn apply_layer(&mut self, layer: &Layer) {
        for inst in &layer.instructions {
            self.apply_instruction(inst);
        }
    }
}

/// Run a validated genome through the simulator.
pub fn run_circuit(genome: &CircuitGenome) -> Result<StateVector> {
    run_circuit_capped(genome, qubit_cap())
}

pub fn run_circuit_capped(genome: &CircuitGenome, cap: usize) -> Result<StateVector> {
    genome.validate()?;
    if genome.num_qubits > cap {
        return Err(QgaError::QubitCapExceeded {
            requested: genome.num_qubits,
            cap,
        });
    }
    let mut state = StateVector::basis(&genome.initial_basis_state)?;
    for layer in &genome.layers {
        state.apply_layer(layer);
    }
    Ok(state)
}

/// Measurement distribution over basis-state indices.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputDistribution {
    pub num_qubits: usize,
    pub probabilities: Vec<f64>,
}

impl OutputDistribution {
    pub fn iter_nonzero(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probabilities
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, p)| p > 0.0)
    }
}

pub fn exact_distribution(state: &StateVector) -> OutputDistribution {
    OutputDistribution {
        num_qubits: state.num_qubits,
        probabilities: state.amplitudes.iter().map(|a| a.norm_sqr()).collect(),
    }
}

/// Base-2 Shannon entropy; 0 log 0 = 0.
pub fn shannon_entropy(dist: &OutputDistribution) -> f64 {
    -dist
        .probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleCounts {
    pub counts: BTreeMap<usize, u64>,
    pub total: u64,
}

/// Draw i.i.d. shots from the exact distribution. Inverse-CDF sampling, so
/// the result is a pure function of the distribution and the RNG stream.
pub fn sample_distribution(dist: &OutputDistribution, shots: u64, rng: &mut ChaCha8Rng) -> Result<SampleCounts> {
    if shots == 0 {
        return Err(QgaError::InvalidConfig {
            field: "shots".into(),
            reason: "must be at least 1".into(),
        });
    }
    let mut cumulative = Vec::with_capacity(dist.probabilities.len());
    let mut acc = 0.0;
    for &p in &dist.probabilities {
        acc += p;
        cumulative.push(acc);
    }
    let total_mass = acc;
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let r: f64 = rng.gen::<f64>() * total_mass;
        let idx = cumulative.partition_point(|&c| c <= r).min(dist.probabilities.len() - 1);
        *counts.entry(idx).or_insert(0) += 1;
    }
    Ok(SampleCounts { counts, total: shots })
}

pub fn sample(state: &StateVector, shots: u64, rng: &mut ChaCha8Rng) -> Result<SampleCounts> {
    sample_distribution(&exact_distribution(state), shots, rng)
}

/// Exact expectation of the decoded output over the full distribution.
pub fn expected_decoded_from_dist(dist: &OutputDistribution, spec: &EncodingSpec) -> Result<Vec<f64>> {
    if dist.num_qubits != spec.total_qubits() {
        return Err(QgaError::DimensionMismatch(format!(
            "distribution on {} qubits, encoding needs {}",
            dist.num_qubits,
            spec.total_qubits()
        )));
    }
    let mut mean = vec![0.0; spec.num_variables];
    for (index, p) in dist.iter_nonzero() {
        for (i, x) in spec.decode_index(index).into_iter().enumerate() {
            mean[i] += p * x;
        }
    }
    Ok(mean)
}

pub fn expected_decoded_output(genome: &CircuitGenome, spec: &EncodingSpec) -> Result<Vec<f64>> {
    let state = run_circuit(genome)?;
    expected_decoded_from_dist(&exact_distribution(&state), spec)
}

/// Pseudometric on circuit space: Euclidean distance between the two exact
/// expected decoded outputs.
pub fn d_avg(genome_u: &CircuitGenome, genome_v: &CircuitGenome, spec: &EncodingSpec) -> Result<f64> {
    if genome_u.num_qubits != genome_v.num_qubits {
        return Err(QgaError::DimensionMismatch(
            "genomes act on different qubit counts".into(),
        ));
    }
    let eu = expected_decoded_output(genome_u, spec)?;
    let ev = expected_decoded_output(genome_v, spec)?;
    Ok(eu
        .iter()
        .zip(&ev)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// Auxiliary metric: total variation distance between output distributions.
pub fn total_variation(a: &OutputDistribution, b: &OutputDistribution) -> Result<f64> {
    if a.num_qubits != b.num_qubits {
        return Err(QgaError::DimensionMismatch(
            "distributions on different qubit counts".into(),
        ));
    }
    Ok(0.5
        * a.probabilities
            .iter()
            .zip(&b.probabilities)
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>())
}

/// Dense reference route: the full 2^q x 2^q circuit unitary, assembled by
/// embedding each gate matrix and multiplying layer products. Deliberately
/// kept free of the stride-application code so the two paths check each other.
pub mod reference {
    use super::*;

    fn embed_instruction(inst: &GateInstruction, num_qubits: usize) -> Vec<Complex64> {
        let dim = 1usize << num_qubits;
        let k = inst.kind.arity();
        let gdim = 1usize << k;
        let u = inst.kind.unitary();
        let bitpos: Vec<usize> = inst.qubits.iter().map(|&qi| num_qubits - 1 - qi).collect();
        let mask: usize = bitpos.iter().map(|&p| 1usize << p).sum();
        let local = |index: usize| -> usize {
            bitpos
                .iter()
                .enumerate()
                .fold(0usize, |l, (j, &p)| l | (((index >> p) & 1) << (k - 1 - j)))
        };
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        for row in 0..dim {
            for col in 0..dim {
                if row & !mask == col & !mask {
                    m[row * dim + col] = u[local(row) * gdim + local(col)];
                }
            }
        }
        m
    }

    fn matmul(a: &[Complex64], b: &[Complex64], dim: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for k in 0..dim {
                let ark = a[r * dim + k];
                if ark == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..dim {
                    out[r * dim + c] += ark * b[k * dim + c];
                }
            }
        }
        out
    }

    fn identity(dim: usize) -> Vec<Complex64> {
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        for d in 0..dim {
            m[d * dim + d] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Full unitary of the circuit, layers composed first-to-last.
    pub fn full_circuit_unitary(genome: &CircuitGenome) -> Vec<Complex64> {
        let dim = 1usize << genome.num_qubits;
        let mut total = identity(dim);
        for layer in &genome.layers {
            let mut layer_u = identity(dim);
            for inst in &layer.instructions {
                layer_u = matmul(&embed_instruction(inst, genome.num_qubits), &layer_u, dim);
            }
            total = matmul(&layer_u, &total, dim);
        }
        total
    }

    /// Reference output state: full unitary applied to the initial basis column.
    pub fn run_circuit_dense(genome: &CircuitGenome) -> Result<StateVector> {
        genome.validate()?;
        let u = full_circuit_unitary(genome);
        let dim = 1usize << genome.num_qubits;
        let col = crate::encoding::bits_to_integer(&genome.initial_basis_state)? as usize;
        let amplitudes = (0..dim).map(|r| u[r * dim + col]).collect();
        Ok(StateVector {
            num_qubits: genome.num_qubits,
            amplitudes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateset::GateKind::*;
    use crate::genome::{GateInstruction as GI, Layer};
    use crate::rng::derive_rng;

    fn genome(num_qubits: usize, layers: Vec<Layer>) -> CircuitGenome {
        CircuitGenome::new(num_qubits, layers, vec![0; num_qubits]).unwrap()
    }

    #[test]
    fn x_flips_single_qubit() {
        let g = genome(1, vec![Layer::new(vec![GI::new(X, vec![0])])]);
        let s = run_circuit(&g).unwrap();
        assert_eq!(s.amplitudes[0], Complex64::new(0.0, 0.0));
        assert_eq!(s.amplitudes[1], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn hadamard_superposition() {
        let g = genome(1, vec![Layer::new(vec![GI::new(H, vec![0])])]);
        let s = run_circuit(&g).unwrap();
        for a in &s.amplitudes {
            assert!((a.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn bell_preparation() {
        let g = genome(
            2,
            vec![
                Layer::new(vec![GI::new(H, vec![0])]),
                Layer::new(vec![GI::new(CNOT, vec![0, 1])]),
            ],
        );
        let s = run_circuit(&g).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes[0].re - h).abs() < 1e-12);
        assert!(s.amplitudes[1].norm() < 1e-12);
        assert!(s.amplitudes[2].norm() < 1e-12);
        assert!((s.amplitudes[3].re - h).abs() < 1e-12);
    }

    #[test]
    fn distribution_and_entropy() {
        let g = genome(
            2,
            vec![
                Layer::new(vec![GI::new(H, vec![0])]),
                Layer::new(vec![GI::new(CNOT, vec![0, 1])]),
            ],
        );
        let dist = exact_distribution(&run_circuit(&g).unwrap());
        assert!((dist.probabilities[0] - 0.5).abs() < 1e-12);
        assert!((dist.probabilities[3] - 0.5).abs() < 1e-12);
        assert!((shannon_entropy(&dist) - 1.0).abs() < 1e-12);

        let basis = genome(2, vec![Layer::new(vec![GI::new(X, vec![0])])]);
        let dist = exact_distribution(&run_circuit(&basis).unwrap());
        assert_eq!(shannon_entropy(&dist), 0.0);
        assert_eq!(dist.probabilities[2], 1.0);

        let hh = genome(2, vec![Layer::new(vec![GI::new(H, vec![0]), GI::new(H, vec![1])])]);
        let dist = exact_distribution(&run_circuit(&hh).unwrap());
        for p in &dist.probabilities {
            assert!((p - 0.25).abs() < 1e-12);
        }
        assert!((shannon_entropy(&dist) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_basis_state_is_deterministic() {
        let g = genome(2, vec![Layer::new(vec![GI::new(X, vec![1])])]);
        let s = run_circuit(&g).unwrap();
        let counts = sample(&s, 64, &mut derive_rng(1, "t", 0, 0)).unwrap();
        assert_eq!(counts.counts.len(), 1);
        assert_eq!(counts.counts[&1], 64);
    }

    #[test]
    fn sampling_bell_only_hits_support() {
        let g = genome(
            2,
            vec![
                Layer::new(vec![GI::new(H, vec![0])]),
                Layer::new(vec![GI::new(CNOT, vec![0, 1])]),
            ],
        );
        let s = run_circuit(&g).unwrap();
        let counts = sample(&s, 1024, &mut derive_rng(2, "t", 0, 0)).unwrap();
        for idx in counts.counts.keys() {
            assert!(*idx == 0 || *idx == 3);
        }
        let repeat = sample(&s, 1024, &mut derive_rng(2, "t", 0, 0)).unwrap();
        assert_eq!(counts, repeat);
    }

    #[test]
    fn bell_large_sample_frequency() {
        // binomial 4 sigma bound: 0.5 +/- 0.002 at 1e6 shots
        let g = genome(
            2,
            vec![
                Layer::new(vec![GI::new(H, vec![0])]),
                Layer::new(vec![GI::new(CNOT, vec![0, 1])]),
            ],
        );
        let s = run_circuit(&g).unwrap();
        let counts = sample(&s, 1_000_000, &mut derive_rng(3, "t", 0, 0)).unwrap();
        let f00 = counts.counts[&0] as f64 / 1e6;
        assert!((f00 - 0.5).abs() < 0.002, "freq {f00}");
    }

    #[test]
    fn zero_shots_rejected() {
        let g = genome(1, vec![Layer::default()]);
        let s = run_circuit(&g).unwrap();
        assert!(sample(&s, 0, &mut derive_rng(0, "t", 0, 0)).is_err());
    }

    #[test]
    fn qubit_cap_enforced() {
        let g = genome(3, vec![Layer::default()]);
        assert!(matches!(
            run_circuit_capped(&g, 2),
            Err(QgaError::QubitCapExceeded { requested: 3, cap: 2 })
        ));
    }

    #[test]
    fn expected_output_of_deterministic_circuits() {
        let spec = EncodingSpec::uniform(1, 4, crate::encoding::VariableDomain::new(-5.12, 5.12).unwrap()).unwrap();
        let ident = genome(4, vec![Layer::default()]);
        let e = expected_decoded_output(&ident, &spec).unwrap();
        assert_eq!(e, vec![-5.12]);

        // X on the MSB -> z = 2^(n-1)
        let msb = genome(4, vec![Layer::new(vec![GI::new(X, vec![0])])]);
        let e = expected_decoded_output(&msb, &spec).unwrap();
        let expect = crate::encoding::integer_to_real(8, &spec.domains[0], 4).unwrap();
        assert!((e[0] - expect).abs() < 1e-15);
    }

    #[test]
    fn expected_output_uniform_is_grid_midpoint() {
        // oracle: brute-force sum over all z of x(z) / 2^n
        let spec = EncodingSpec::uniform(1, 4, crate::encoding::VariableDomain::new(-5.12, 5.12).unwrap()).unwrap();
        let brute: f64 = (0..16u64)
            .map(|z| crate::encoding::integer_to_real(z, &spec.domains[0], 4).unwrap())
            .sum::<f64>()
            / 16.0;
        assert!(brute.abs() < 1e-12, "symmetric grid mean should be 0, got {brute}");
        let all_h = genome(4, vec![Layer::new((0..4).map(|q| GI::new(H, vec![q])).collect())]);
        let e = expected_decoded_output(&all_h, &spec).unwrap();
        assert!((e[0] - brute).abs() < 1e-10);
    }

    #[test]
    fn d_avg_basics() {
        let spec = EncodingSpec::uniform(1, 3, crate::encoding::VariableDomain::new(-1.0, 1.0).unwrap()).unwrap();
        let ident = genome(3, vec![Layer::default()]);
        let all_x = genome(3, vec![Layer::new((0..3).map(|q| GI::new(X, vec![q])).collect())]);
        assert_eq!(d_avg(&ident, &ident, &spec).unwrap(), 0.0);
        // |0..0> decodes to a, |1..1> to b: distance is the domain width
        assert!((d_avg(&ident, &all_x, &spec).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn distinct_circuits_same_expectation_have_zero_distance() {
        // H and X then H on one qubit give different states but both have
        // symmetric output means on a symmetric domain
        let spec = EncodingSpec::uniform(1, 1, crate::encoding::VariableDomain::new(-1.0, 1.0).unwrap()).unwrap();
        let h1 = genome(1, vec![Layer::new(vec![GI::new(H, vec![0])])]);
        let h2 = genome(
            1,
            vec![
                Layer::new(vec![GI::new(X, vec![0])]),
                Layer::new(vec![GI::new(H, vec![0])]),
            ],
        );
        assert!(d_avg(&h1, &h2, &spec).unwrap() < 1e-12);
    }

    #[test]
    fn total_variation_of_disjoint_supports() {
        let a = genome(1, vec![Layer::default()]);
        let b = genome(1, vec![Layer::new(vec![GI::new(X, vec![0])])]);
        let da = exact_distribution(&run_circuit(&a).unwrap());
        let db = exact_distribution(&run_circuit(&b).unwrap());
        assert!((total_variation(&da, &db).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(total_variation(&da, &da).unwrap(), 0.0);
    }

    #[test]
    fn dense_reference_matches_on_bell() {
        let g = genome(
            2,
            vec![
                Layer::new(vec![GI::new(H, vec![0])]),
                Layer::new(vec![GI::new(CNOT, vec![0, 1])]),
            ],
        );
        let fast = run_circuit(&g).unwrap();
        let dense = reference::run_circuit_dense(&g).unwrap();
        for (a, b) in fast.amplitudes.iter().zip(&dense.amplitudes) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
