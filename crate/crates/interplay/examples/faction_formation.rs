//! A generic random population splitting into two factions: simulates nine
//! agents on six issues from a seeded uniform initial condition, reports the
//! long-run verdicts, and writes heatmap filmstrips of X and Y.

use interplay::analysis::{
    classify_equilibrium, is_socially_balanced_rows, modulus_sign_consensus, nonvanishing_check,
};
use interplay::dynamics::{simulate, SimulationConfig};
use interplay::montecarlo::generic_initial;
use interplay::render::{default_frames, filmstrip, render_frames, MatrixKind, RenderOptions};

fn main() {
    let (y0, _) = generic_initial(9, 6, 1.0, 7);
    let config = SimulationConfig {
        max_steps: 1000,
        convergence_tolerance: 0.0,
        ..SimulationConfig::default()
    };
    let traj = simulate(&y0, &config);

    println!(
        "non-vanishing appraisals over [100, 1000]: {}",
        nonvanishing_check(&traj, 100, 1000, 0.001)
    );
    let last = traj.last();
    let verdict = modulus_sign_consensus(&last.opinion, 1e-9);
    println!("final consensus: {:?}", verdict.kind);
    if let Some(p) = &verdict.partition {
        println!("factions: {:?}", p.labels().entries());
    }
    if let Some(x) = &last.appraisal {
        println!(
            "final appraisal balance: {}",
            is_socially_balanced_rows(x, 1e-9).balanced
        );
    }
    if let Ok(desc) = classify_equilibrium(&last.opinion, 1e-6) {
        println!("equilibrium coefficients: {:?}", desc.coefficients);
    }

    let options = RenderOptions {
        cell_size: 16,
        ..RenderOptions::default()
    };
    let out = std::path::Path::new("target/faction_formation");
    std::fs::create_dir_all(out).unwrap();
    for kind in [MatrixKind::Appraisal, MatrixKind::Opinion] {
        let frames: Vec<usize> = default_frames(&traj)
            .into_iter()
            .filter(|&t| !(kind == MatrixKind::Appraisal && t == 0))
            .collect();
        let rendered = render_frames(&traj, kind, &frames, &options).unwrap();
        let strip = filmstrip(&rendered, &options).unwrap();
        let path = out.join(format!("filmstrip_{}.png", kind.label()));
        strip.save(&path).unwrap();
        println!("wrote {}", path.display());
    }
}
