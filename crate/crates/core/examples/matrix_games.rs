//! Solves a few classic zero-sum matrix games with the simplex kernel the
//! per-state analysis is built on, printing values, optimal mixtures, and
//! the security certificate.
//!
//!     cargo run --example matrix_games

use dicerace::matrix_game::solve_matrix_game;

fn show(name: &str, matrix: &[Vec<f64>]) {
    let sol = solve_matrix_game(matrix).expect("well-formed matrix");
    let fmt = |v: &[f64]| {
        v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
    };
    println!("{name}");
    println!("  value {:+.6}", sol.value);
    println!("  row mixture    [{}]", fmt(&sol.row_strategy));
    println!("  column mixture [{}]", fmt(&sol.col_strategy));
    println!("  security gap   {:.2e}", sol.security_gap(matrix));
    println!();
}

fn main() {
    show(
        "matching pennies (fair coin each side, value 0)",
        &[vec![1.0, -1.0], vec![-1.0, 1.0]],
    );
    show(
        "rock paper scissors (uniform thirds)",
        &[
            vec![0.0, -1.0, 1.0],
            vec![1.0, 0.0, -1.0],
            vec![-1.0, 1.0, 0.0],
        ],
    );
    show(
        "a saddle point: row 1 / column 0 dominates",
        &[vec![3.0, 5.0], vec![4.0, 4.5]],
    );
    show(
        "rectangular 2x4: extra columns never help the minimizer",
        &[vec![2.0, -1.0, 0.5, 3.0], vec![-2.0, 3.0, 1.0, -1.0]],
    );
    show(
        "the dice race's per-state shape: stop value vs roll mixture",
        &[vec![0.62], vec![0.58]],
    );
}
