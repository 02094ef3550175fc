//! Shared fixtures for the criterion benchmarks.

use sparsereg::linalg::{sample_gaussian, SampleSet};
use sparsereg::synth::{gen_planted_dependencies, PlantedDep, PlantedInstance};
use sparsereg::Vector;

/// Planted instance with two dependencies and a 3-sparse truth.
pub fn bench_instance(n: usize) -> PlantedInstance {
    let mut v_star = Vector::zeros(n);
    v_star[0] = 2.0;
    v_star[1] = -1.0;
    v_star[3] = 1.5;
    gen_planted_dependencies(
        n,
        &[
            PlantedDep {
                support: vec![0, 1, 2],
                coefficients: vec![3.0, -3.0, 1.0],
                residual_var: 1e-4,
            },
            PlantedDep {
                support: vec![3, 4],
                coefficients: vec![1.0, 1.0],
                residual_var: 1e-4,
            },
        ],
        1.0,
        v_star,
        0,
    )
    .unwrap()
}

pub fn bench_samples(inst: &PlantedInstance, m: usize) -> SampleSet {
    sample_gaussian(&inst.sigma, m, 0.0, &inst.v_star, 7).unwrap()
}
