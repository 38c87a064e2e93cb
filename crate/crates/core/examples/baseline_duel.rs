//! Pits the optimal policy against the classic reference strategies:
//! hold-at-20 and the expected-turn minimizer. Reports exact win
//! probabilities from the chain analysis, then replays one matchup by
//! simulation to show the two agree.
//!
//!     cargo run --release --example baseline_duel [TARGET]

use dicerace::baselines::{hold_at_policy, min_expected_turns};
use dicerace::matchup::{exact_matchup, simulate_matchup, EvalMethod};
use dicerace::pig::{GameConfig, PigGame};
use dicerace::solve::{default_tolerance, extract_policy, fixed_point_report, layered_solve};

fn main() {
    let target: u32 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("target"))
        .unwrap_or(200);
    let config = GameConfig { target, ..GameConfig::default() };
    let game = PigGame::new(config).expect("valid configuration");

    let v = layered_solve(&game).expect("solvable");
    let report = fixed_point_report(&game, &v, default_tolerance(&config)).expect("certifiable");
    let optimal = extract_policy(&game, &v, &report).expect("certified report");

    let (turns, minturns) = min_expected_turns(&config).expect("classic rules");
    println!(
        "race to {target}: the turn minimizer finishes a solo race in {:.4} expected turns",
        turns.turns(0)
    );

    let hold20 = hold_at_policy(&config, 20.min(target - 1)).expect("threshold in range");
    for (name, rival) in [("hold-at-20", &hold20), ("turn minimizer", &minturns)] {
        let r = exact_matchup(&game, &optimal, rival).expect("total policies");
        println!(
            "optimal vs {name:<14} exact: first seat {:.6}, second seat {:.6}, fair start {:.6}",
            r.p_win_first_seat, r.p_win_second_seat, r.p_win_fair_start
        );
    }

    let exact = exact_matchup(&game, &optimal, &minturns).expect("total policies");
    let games = 1_000_000;
    let sim = simulate_matchup(&game, &optimal, &minturns, games, 1).expect("total policies");
    let se = match sim.method {
        EvalMethod::Simulated { standard_error, .. } => standard_error,
        _ => unreachable!(),
    };
    println!(
        "replayed vs turn minimizer over {games} seeded games: fair start {:.6} \
         (exact {:.6}, gap {:+.2} standard errors)",
        sim.p_win_fair_start,
        exact.p_win_fair_start,
        (sim.p_win_fair_start - exact.p_win_fair_start) / se
    );
}
