//! Solve the classic race and report the headline numbers: the game value
//! from the initial coin flip, the first mover's edge, and the agreement
//! between the two independent solvers.
//!
//! Usage: solve_and_report [TARGET] [TOL]

use std::time::Instant;

use dicerace::solve::{self, SweepMode};
use dicerace::{GameConfig, PigGame, Player, State};

fn main() {
    let mut args = std::env::args().skip(1);
    let target: u32 = args.next().map_or(200, |a| a.parse().expect("TARGET must be an integer"));
    let tol: f64 = args.next().map_or(1e-10, |a| a.parse().expect("TOL must be a float"));

    let config = GameConfig { target, ..GameConfig::default() };
    let game = PigGame::new(config).expect("valid configuration");
    let space = game.space();
    println!(
        "race to {target}: {} states, {} of them real decisions",
        space.num_states(),
        space.num_decision_states()
    );

    let start = Instant::now();
    let exact = solve::layered_solve(&game).expect("layered solve");
    println!("layered solve            {:>10.2?}", start.elapsed());

    let (iterated, report) = solve::value_iteration(&game, tol, 1_000_000).expect("iteration");
    println!(
        "value iteration          {:>10.2?}   {} sweeps, residual {:.2e}, certified {}",
        report.wall_time, report.iterations, report.final_residual, report.certified
    );

    let (seidel, gs_report) =
        solve::value_iteration_with(&game, tol, 1_000_000, SweepMode::GaussSeidel)
            .expect("iteration");
    println!(
        "in-place (Gauss-Seidel)  {:>10.2?}   {} sweeps, residual {:.2e}",
        gs_report.wall_time, gs_report.iterations, gs_report.final_residual
    );

    let disagreement = iterated
        .values
        .iter()
        .zip(&exact.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let gs_disagreement = seidel
        .values
        .iter()
        .zip(&exact.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("sup disagreement: iterated vs layered {disagreement:.3e}, in-place vs layered {gs_disagreement:.3e}");

    let at = |s: &State| exact.at(space, s).unwrap();
    let first = State::Play { player: Player::One, alpha: 0, beta: 0, tau: 0 };
    let second = State::Play { player: Player::Two, alpha: 0, beta: 0, tau: 0 };
    println!();
    println!("value before the seat coin   {:.12}", exact.values[0]);
    println!("value holding the die        {:.12}", at(&first));
    println!("value waiting for it         {:.12}", at(&second));
    println!("first-mover edge             {:.6} percentage points", 100.0 * (at(&first) - 0.5));
}
