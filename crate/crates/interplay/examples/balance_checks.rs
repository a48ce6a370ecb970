//! Social balance of signed appraisal matrices, tested two ways: the O(n^3)
//! triad scan and the row-sign-pattern shortcut. The two always agree.

use interplay::analysis::{is_socially_balanced_rows, is_socially_balanced_triads};
use interplay::types::AppraisalMatrix;

fn show(name: &str, rows: &[Vec<f64>]) {
    let x = AppraisalMatrix::from_rows(rows).unwrap();
    let triads = is_socially_balanced_triads(&x, 1e-9);
    let by_rows = is_socially_balanced_rows(&x, 1e-9);
    assert_eq!(triads.balanced, by_rows.balanced);
    print!("{name}: ");
    if triads.balanced {
        let p = triads.partition.unwrap();
        println!("balanced, factions {:?}", p.labels().entries());
    } else {
        println!("unbalanced, witness {:?}", triads.witness.unwrap());
    }
}

fn main() {
    show(
        "two factions",
        &[
            vec![1.0, 1.0, -1.0, -1.0],
            vec![1.0, 1.0, -1.0, -1.0],
            vec![-1.0, -1.0, 1.0, 1.0],
            vec![-1.0, -1.0, 1.0, 1.0],
        ],
    );
    show("single faction", &vec![vec![5.0; 4]; 4]);
    show(
        "all mutual enemies",
        &[
            vec![1.0, -1.0, -1.0],
            vec![-1.0, 1.0, -1.0],
            vec![-1.0, -1.0, 1.0],
        ],
    );
    show(
        "zero entry",
        &[vec![1.0, 0.0], vec![0.0, 1.0]],
    );
}
