//! Parallel vs sequential population fitness evaluation.
//!
//! `map_indexed_par` is compiled only with the `parallel` feature (on by
//! default); run with `--no-default-features` to time the sequential path
//! alone.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qga::encoding::EncodingSpec;
use qga::evolution::{init_population, DepthMode, EvolutionConfig};
use qga::fitness::{evaluate_fitness, Objective, ObjectiveKind};
use qga::gateset::GateSetId;
use qga::genome::CircuitGenome;
use qga::parallel;
use qga::rng::derive_rng;

fn setup(population_size: usize) -> (Vec<CircuitGenome>, Objective, EncodingSpec) {
    let config = EvolutionConfig {
        qubits_per_variable: 6,
        depth_mode: DepthMode::Fixed(6),
        mutation_rate: 0.3,
        crossover_rate: 0.7,
        elite_fraction: 0.2,
        shots: 1024,
        max_generations: 0,
        population_size,
        gate_set: GateSetId::Quantum,
        depth_mutation_rate: 0.0,
        master_seed: 7,
    };
    let objective = Objective::preset(ObjectiveKind::Rastrigin, 2);
    let spec = objective.encoding_spec(6).unwrap();
    let mut rng = derive_rng(7, "bench", 0, 0);
    let genomes = init_population(&config, &spec, &mut rng);
    (genomes, objective, spec)
}

fn eval_one(genomes: &[CircuitGenome], objective: &Objective, spec: &EncodingSpec, i: usize) -> f64 {
    let mut rng = derive_rng(7, "fit", 0, i as u64);
    evaluate_fitness(&genomes[i], objective, spec, 1024, &mut rng)
        .unwrap()
        .fitness
}

fn bench_population_eval(c: &mut Criterion) {
    let mut group = c.benchmark_group("population_fitness");
    for size in [16, 64, 256] {
        let (genomes, objective, spec) = setup(size);
        group.bench_with_input(BenchmarkId::new("sequential", size), &size, |b, _| {
            b.iter(|| {
                parallel::map_indexed_seq(genomes.len(), |i| eval_one(&genomes, &objective, &spec, i))
                    .into_iter()
                    .sum::<f64>()
            })
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", size), &size, |b, _| {
            b.iter(|| {
                parallel::map_indexed_par(genomes.len(), |i| eval_one(&genomes, &objective, &spec, i))
                    .into_iter()
                    .sum::<f64>()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_population_eval);
criterion_main!(benches);
