//! Four agents, three issues: two camps opposed on the first two issues but
//! sharing a view on the third. The shared issue pulls everyone into a single
//! faction and all opinions collapse onto (0, 0, 5).

use interplay::dynamics::{simulate, SimulationConfig};
use interplay::types::{OpinionMatrix, DEFAULT_ROW_TOLERANCE};

fn main() {
    let y0 = OpinionMatrix::from_rows(
        &[
            vec![1.0, 2.0, 5.0],
            vec![-1.0, -2.0, 5.0],
            vec![-1.0, -2.0, 5.0],
            vec![1.0, 2.0, 5.0],
        ],
        DEFAULT_ROW_TOLERANCE,
    )
    .unwrap();

    let traj = simulate(&y0, &SimulationConfig::default());
    println!("termination: {:?}", traj.termination);

    for &t in &[0usize, 1, 5, traj.last().t] {
        if let Some(snap) = traj.snapshot_at(t) {
            println!("\nY({t}):");
            for i in 0..4 {
                let row: Vec<String> = (0..3)
                    .map(|j| format!("{:8.4}", snap.opinion.get(i, j)))
                    .collect();
                println!("  {}", row.join(" "));
            }
        }
    }

    let x = traj.last().appraisal.as_ref().unwrap();
    println!("\nfinal appraisals (all approach 5):");
    for i in 0..4 {
        let row: Vec<String> = (0..4).map(|j| format!("{:8.4}", x.get(i, j))).collect();
        println!("  {}", row.join(" "));
    }
}
