//! Benchmark objectives and sampling-based fitness evaluation.
//!
//! Fitness of a circuit is the objective evaluated at the per-variable mean of
//! the decoded samples (mean of decoded reals, not of bitstrings).

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use crate::encoding::{EncodingSpec, VariableDomain};
use crate::genome::CircuitGenome;
use crate::simulator;
use crate::{QgaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveKind {
    Rastrigin,
    Sphere,
    Ackley,
    Griewank,
    Rosenbrock,
}

pub const ALL_OBJECTIVES: [ObjectiveKind; 5] = [
    ObjectiveKind::Rastrigin,
    ObjectiveKind::Sphere,
    ObjectiveKind::Ackley,
    ObjectiveKind::Griewank,
    ObjectiveKind::Rosenbrock,
];

impl ObjectiveKind {
    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::Rastrigin => "Rastrigin",
            ObjectiveKind::Sphere => "Sphere",
            ObjectiveKind::Ackley => "Ackley",
            ObjectiveKind::Griewank => "Griewank",
            ObjectiveKind::Rosenbrock => "Rosenbrock",
        }
    }

    /// Standard search box per variable.
    pub fn standard_domain(self) -> VariableDomain {
        let (a, b) = match self {
            ObjectiveKind::Rastrigin | ObjectiveKind::Sphere => (-5.12, 5.12),
            ObjectiveKind::Ackley => (-32.768, 32.768),
            ObjectiveKind::Griewank => (-600.0, 600.0),
            ObjectiveKind::Rosenbrock => (-2.048, 2.048),
        };
        VariableDomain { lower: a, upper: b }
    }

    /// Location of the global minimum (value 0 for all five benchmarks).
    pub fn optimum(self, m: usize) -> Vec<f64> {
        match self {
            ObjectiveKind::Rosenbrock => vec![1.0; m],
            _ => vec![0.0; m],
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ALL_OBJECTIVES
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown objective `{s}`"))
    }
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|&xi| xi * xi - 10.0 * (2.0 * PI * xi).cos())
            .sum::<f64>()
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|&xi| xi * xi).sum()
}

/// Ackley with a = 20, b = 0.2, c = 2 pi.
pub fn ackley(x: &[f64]) -> f64 {
    let m = x.len() as f64;
    let sum_sq: f64 = x.iter().map(|&xi| xi * xi).sum();
    let sum_cos: f64 = x.iter().map(|&xi| (2.0 * PI * xi).cos()).sum();
    -20.0 * (-0.2 * (sum_sq / m).sqrt()).exp() - (sum_cos / m).exp() + 20.0 + E
}

pub fn griewank(x: &[f64]) -> f64 {
    let sum: f64 = x.iter().map(|&xi| xi * xi / 4000.0).sum();
    let prod: f64 = x
        .iter()
        .enumerate()
        .map(|(i, &xi)| (xi / ((i + 1) as f64).sqrt()).cos())
        .product();
    1.0 + sum - prod
}

/// Rosenbrock with a = 1, b = 100; minimum at (1, ..., 1).
pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

/// A benchmark with its dimensionality and search box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub num_variables: usize,
    pub domains: Vec<VariableDomain>,
}

impl Objective {
    /// Preset on the benchmark's standard box.
    pub fn preset(kind: ObjectiveKind, num_variables: usize) -> Self {
        Self {
            kind,
            num_variables,
            domains: vec![kind.standard_domain(); num_variables],
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match self.kind {
            ObjectiveKind::Rastrigin => rastrigin(x),
            ObjectiveKind::Sphere => sphere(x),
            ObjectiveKind::Ackley => ackley(x),
            ObjectiveKind::Griewank => griewank(x),
            ObjectiveKind::Rosenbrock => rosenbrock(x),
        }
    }

    pub fn encoding_spec(&self, qubits_per_variable: usize) -> Result<EncodingSpec> {
        EncodingSpec::new(self.num_variables, qubits_per_variable, self.domains.clone())
    }
}

/// Result of one fitness evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessRecord {
    pub mean_vector: Vec<f64>,
    pub fitness: f64,
    /// 0 marks an exact (non-sampled) evaluation.
    pub shots_used: u64,
}

fn check_dims(genome: &CircuitGenome, objective: &Objective, spec: &EncodingSpec) -> Result<()> {
    if genome.num_qubits != spec.total_qubits() {
        return Err(QgaError::DimensionMismatch(format!(
            "genome has {} qubits, encoding needs {}",
            genome.num_qubits,
            spec.total_qubits()
        )));
    }
    if objective.num_variables != spec.num_variables {
        return Err(QgaError::DimensionMismatch(format!(
            "objective has {} variables, encoding has {}",
            objective.num_variables, spec.num_variables
        )));
    }
    Ok(())
}

/// Sample `shots` bitstrings, decode each, average per variable, and apply
/// the objective to the mean.
pub fn evaluate_fitness(
    genome: &CircuitGenome,
    objective: &Objective,
    spec: &EncodingSpec,
    shots: u64,
    rng: &mut ChaCha8Rng,
) -> Result<FitnessRecord> {
    check_dims(genome, objective, spec)?;
    let state = simulator::run_circuit(genome)?;
    let counts = simulator::sample(&state, shots, rng)?;
    let mut mean = vec![0.0; spec.num_variables];
    for (&index, &count) in &counts.counts {
        let x = spec.decode_index(index);
        for (i, xi) in x.into_iter().enumerate() {
            mean[i] += count as f64 * xi;
        }
    }
    for mi in &mut mean {
        *mi /= shots as f64;
    }
    let fitness = objective.evaluate(&mean);
    Ok(FitnessRecord {
        mean_vector: mean,
        fitness,
        shots_used: shots,
    })
}

/// Exact limit of the estimator: objective at the exact expected decoded output.
pub fn evaluate_fitness_exact(
    genome: &CircuitGenome,
    objective: &Objective,
    spec: &EncodingSpec,
) -> Result<FitnessRecord> {
    check_dims(genome, objective, spec)?;
    let mean = simulator::expected_decoded_output(genome, spec)?;
    let fitness = objective.evaluate(&mean);
    Ok(FitnessRecord {
        mean_vector: mean,
        fitness,
        shots_used: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateset::GateKind::*;
    use crate::genome::{GateInstruction as GI, Layer};
    use crate::rng::derive_rng;

    #[test]
    fn rastrigin_anchors() {
        assert_eq!(rastrigin(&[0.0, 0.0]), 0.0);
        // direct evaluation: 20 + (1 - 10 cos 2pi) + (0 - 10 cos 0) = 1
        assert!((rastrigin(&[1.0, 0.0]) - 1.0).abs() < 1e-12);
        assert_eq!(sphere(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn all_benchmarks_zero_at_optimum() {
        for kind in ALL_OBJECTIVES {
            let obj = Objective::preset(kind, 2);
            let v = obj.evaluate(&kind.optimum(2));
            assert!(v.abs() < 1e-9, "{kind} at optimum gives {v}");
        }
    }

    #[test]
    fn benchmarks_positive_away_from_optimum() {
        for kind in ALL_OBJECTIVES {
            let obj = Objective::preset(kind, 2);
            let mut x = kind.optimum(2);
            x[0] += 0.37;
            x[1] -= 1.21;
            assert!(obj.evaluate(&x) > 0.0, "{kind} not positive at perturbed point");
        }
    }

    fn basis_genome(bits: Vec<u8>) -> CircuitGenome {
        let n = bits.len();
        CircuitGenome::new(n, vec![Layer::default()], bits).unwrap()
    }

    #[test]
    fn deterministic_circuit_fitness_is_exact() {
        let obj = Objective::preset(ObjectiveKind::Rastrigin, 2);
        let spec = obj.encoding_spec(4).unwrap();
        let g = basis_genome(vec![1, 0, 1, 1, 0, 0, 1, 0]);
        let sampled = evaluate_fitness(&g, &obj, &spec, 128, &mut derive_rng(0, "t", 0, 0)).unwrap();
        let exact = evaluate_fitness_exact(&g, &obj, &spec).unwrap();
        assert_eq!(sampled.mean_vector, exact.mean_vector);
        assert_eq!(sampled.fitness, exact.fitness);
        assert_eq!(exact.shots_used, 0);
        // recomputable invariant
        assert_eq!(sampled.fitness, obj.evaluate(&sampled.mean_vector));
    }

    #[test]
    fn fixed_seed_reproduces_record() {
        let obj = Objective::preset(ObjectiveKind::Rastrigin, 1);
        let spec = obj.encoding_spec(3).unwrap();
        let g = CircuitGenome::new(
            3,
            vec![Layer::new(vec![GI::new(H, vec![0]), GI::new(H, vec![2])])],
            vec![0, 0, 0],
        )
        .unwrap();
        let a = evaluate_fitness(&g, &obj, &spec, 256, &mut derive_rng(9, "t", 0, 0)).unwrap();
        let b = evaluate_fitness(&g, &obj, &spec, 256, &mut derive_rng(9, "t", 0, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bell_pair_exact_fitness_hand_computed() {
        // m=1, n=2: Bell on both qubits gives outcomes 00 and 11 with p=1/2,
        // mean = (a + b)/2 = 0 on the symmetric Rastrigin box
        let obj = Objective::preset(ObjectiveKind::Rastrigin, 1);
        let spec = obj.encoding_spec(2).unwrap();
        let g = CircuitGenome::new(
            2,
            vec![
                Layer::new(vec![GI::new(H, vec![0])]),
                Layer::new(vec![GI::new(CNOT, vec![0, 1])]),
            ],
            vec![0, 0],
        )
        .unwrap();
        let rec = evaluate_fitness_exact(&g, &obj, &spec).unwrap();
        let x00 = crate::encoding::integer_to_real(0, &spec.domains[0], 2).unwrap();
        let x11 = crate::encoding::integer_to_real(3, &spec.domains[0], 2).unwrap();
        let expect_mean = 0.5 * (x00 + x11);
        assert!((rec.mean_vector[0] - expect_mean).abs() < 1e-12);
        assert!((rec.fitness - rastrigin(&[expect_mean])).abs() < 1e-12);
    }

    #[test]
    fn sampled_mean_converges_to_exact() {
        // all-H circuit: componentwise 4 sigma bound with sigma of the uniform grid
        let obj = Objective::preset(ObjectiveKind::Rastrigin, 2);
        let spec = obj.encoding_spec(4).unwrap();
        let g = CircuitGenome::new(
            8,
            vec![Layer::new((0..8).map(|q| GI::new(H, vec![q])).collect())],
            vec![0; 8],
        )
        .unwrap();
        let shots = 1 << 16;
        let rec = evaluate_fitness(&g, &obj, &spec, shots, &mut derive_rng(4, "t", 0, 0)).unwrap();
        let exact = evaluate_fitness_exact(&g, &obj, &spec).unwrap();
        // variance of the uniform decoded grid
        let xs: Vec<f64> = (0..16u64)
            .map(|z| crate::encoding::integer_to_real(z, &spec.domains[0], 4).unwrap())
            .collect();
        let mean: f64 = xs.iter().sum::<f64>() / 16.0;
        let var: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 16.0;
        let bound = 4.0 * (var / shots as f64).sqrt();
        for i in 0..2 {
            assert!(
                (rec.mean_vector[i] - exact.mean_vector[i]).abs() < bound,
                "component {i} off by more than 4 sigma"
            );
        }
    }
}
