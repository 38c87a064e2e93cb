//! Solver and analysis toolkit for a family of turn-based dice race games,
//! modeled as transient two-player zero-sum stochastic games.
//!
//! Two players take turns rolling a die. Scoring faces add to the turn
//! score; the bust face wipes it and passes the die; stopping banks it.
//! First to the target wins the classic race. The crate solves this game
//! exactly: the full state space ([`pig`]), the one-step game operator and
//! two independent fixed-point solvers ([`solve`]), a transience
//! certificate that proves the solution is meaningful ([`game_model`]),
//! reference opponents ([`baselines`]), head-to-head evaluation exact or
//! simulated ([`matchup`]), a small matrix-game kernel with a security
//! certificate ([`matrix_game`]), and portable policy/value artifacts
//! ([`artifacts`]).
//!
//! Quick start: solve a race and read off the optimal opening move.
//!
//! ```
//! use dicerace::{GameConfig, PigGame, Player, State};
//! use dicerace::solve::{extract_policy, fixed_point_report, layered_solve};
//!
//! let game = PigGame::new(GameConfig { target: 50, ..GameConfig::default() })?;
//! let values = layered_solve(&game)?;
//!
//! // The coin-flip start is worth exactly one half; holding the die is
//! // worth more.
//! assert!((values.values[0] - 0.5).abs() < 1e-12);
//! let space = game.space();
//! assert!(values.values[space.p1_index(0, 0, 0)] > 0.5);
//!
//! // Certify the values as a fixed point, then extract the pure optimal
//! // policy and query it.
//! let report = fixed_point_report(&game, &values, 1e-12)?;
//! assert!(report.certified);
//! let policy = extract_policy(&game, &values, &report)?;
//! let early = State::Play { player: Player::One, alpha: 0, beta: 0, tau: 8 };
//! assert_eq!(policy.action_at(space, &early).unwrap().to_string(), "Roll");
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! The `examples/` directory is the guided tour: `solve_and_report` for
//! headline numbers and solver agreement, `policy_maps` for rendered
//! decision boundaries, `baseline_duel` for matchups against reference
//! opponents, `variants_tour` for the three rule variants side by side,
//! `transience_check` for the certification gate, and `matrix_games` for
//! the LP kernel. The `dicerace` binary wraps the same capabilities as a
//! CLI (`solve`, `evaluate`, `simulate`, `export`, `validate`).

pub mod artifacts;
pub mod baselines;
pub mod game_model;
pub mod matchup;
pub mod matrix_game;
pub mod pig;
pub mod solve;

pub use artifacts::{export_policy_map, fingerprint, policy_map, ExportFormat, PolicyMapGrid};
pub use baselines::{hold_at_policy, min_expected_turns, TurnCountValue};
pub use game_model::{certify_transient, validate_structure, Action, Game, TransienceReport};
pub use matchup::{exact_matchup, simulate_matchup, EvalMethod, MatchResult};
pub use matrix_game::{solve_matrix_game, MatrixGameSolution};
pub use pig::{GameConfig, PigGame, Player, State, StateSpace, Variant};
pub use solve::{
    extract_policy, layered_solve, value_iteration, Policy, SolveReport, ValueFunction,
};
