//! With a single issue the dynamics settle in one step: every opinion jumps
//! to (||y||_2^2 / ||y||_1) * sign(y) and stays there.

use interplay::dynamics::{simulate, single_issue_closed_form, SimulationConfig};
use interplay::types::{OpinionMatrix, DEFAULT_ROW_TOLERANCE};

fn main() {
    let column = [1.0, -2.0, 4.0, -0.5];
    let y0 = OpinionMatrix::from_column(&column, DEFAULT_ROW_TOLERANCE).unwrap();

    let predicted = single_issue_closed_form(&column).unwrap();
    println!("closed form: {predicted:?}");

    let traj = simulate(&y0, &SimulationConfig::default());
    let y1 = &traj.snapshot_at(1).unwrap().opinion;
    let actual: Vec<f64> = (0..column.len()).map(|i| y1.get(i, 0)).collect();
    println!("one step:    {actual:?}");
    println!("termination: {:?}", traj.termination);

    let max_err = predicted
        .iter()
        .zip(&actual)
        .map(|(p, a)| (p - a).abs())
        .fold(0.0f64, f64::max);
    println!("max deviation from closed form: {max_err:.3e}");
}
