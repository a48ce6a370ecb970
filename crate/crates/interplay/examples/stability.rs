//! Rank-one signed matrices are fixed points of the dynamics; this probes one
//! with random perturbations and reports how many trajectories return.

use interplay::analysis::{classify_equilibrium, local_stability_probe};
use interplay::dynamics::{equilibrium_matrix, step};
use interplay::types::{SignVector, DEFAULT_ROW_TOLERANCE};

fn main() {
    let rho = SignVector::new(vec![1, 1, -1, -1, 1]).unwrap();
    let coefficients = [2.0, -1.0, 0.5];
    let y_star = equilibrium_matrix(&coefficients, &rho).unwrap();

    let next = step(&y_star, DEFAULT_ROW_TOLERANCE).unwrap().opinion;
    println!("step residual at the fixed point: {:.3e}", next.max_abs_diff(&y_star));

    let desc = classify_equilibrium(&y_star, 1e-9).unwrap();
    println!(
        "classified: coefficients {:?}, factions {:?}",
        desc.coefficients,
        desc.rho.labels().entries()
    );

    let min_a = coefficients.iter().fold(f64::INFINITY, |a, c| a.min(c.abs()));
    for scale in [0.01 * min_a, 0.1 * min_a, 0.5 * min_a] {
        let report = local_stability_probe(&desc, scale, 200, 42, 500).unwrap();
        println!(
            "perturbation scale {scale:.3}: {:.1}% returned, max final distance {:.3e}",
            100.0 * report.fraction_returning,
            report.max_final_distance
        );
    }
}
