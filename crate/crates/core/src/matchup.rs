//! Head-to-head evaluation of two pure stationary policies, exactly and
//! by seeded simulation.
//!
//! Policy A always owns the first-mover label, B the second; the seat A
//! actually occupies in a given game is decided by the fair coin of the
//! start state (or by alternation, if asked). Exact evaluation fixes both
//! policies and evaluates the induced Markov chain with the same layered
//! pass the solver uses, so it produces a deterministic target that
//! simulation can be checked against.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::game_model::Action;
use crate::pig::{roll_outcome, PigGame, Player, RollOutcome, State};
use crate::solve::{layered_chain, require_total, Policy, SolveError};

/// Generator identifier recorded next to simulated results; reproducibility
/// is defined by (generator id, seed, game index), not by platform.
pub const RNG_ID: &str = "chacha8";

/// Hard ply cap per simulated game. Only a non-transient configuration can
/// reach it; such games count as losses for policy A and are tallied.
pub const MAX_PLIES: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum MatchupError {
    #[error("policy built for {policy}, game is {game}")]
    ConfigMismatch { game: String, policy: String },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// How the seat of policy A is chosen per game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeatRule {
    /// The start state's coin: A moves first with probability ½.
    FairCoin,
    /// A moves first in even-indexed games, second in odd ones.
    Alternate,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalMethod {
    Exact,
    Simulated { games: u64, seed: u64, standard_error: f64, truncated: u64 },
}

/// Win probabilities for policy A against policy B.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// P(A wins) when A moves first.
    pub p_win_first_seat: f64,
    /// P(A wins) when A moves second.
    pub p_win_second_seat: f64,
    /// P(A wins) from the coin-flip start.
    pub p_win_fair_start: f64,
    pub method: EvalMethod,
}

fn check_config(game: &PigGame, policy: &Policy) -> Result<(), MatchupError> {
    if policy.config != *game.config() {
        return Err(MatchupError::ConfigMismatch {
            game: format!("{:?}", game.config()),
            policy: format!("{:?}", policy.config),
        });
    }
    Ok(())
}

/// Exact win probabilities of A against B by closed-form chain analysis.
/// Both policies must cover every decision state of `game`, which is
/// expected to be a transient configuration.
pub fn exact_matchup(game: &PigGame, a: &Policy, b: &Policy) -> Result<MatchResult, MatchupError> {
    check_config(game, a)?;
    check_config(game, b)?;
    let v = layered_chain(game, a, b)?;
    let space = game.space();
    let first = v.values[space.p1_index(0, 0, 0)];
    let second = v.values[space.p2_index(0, 0, 0)];
    Ok(MatchResult {
        p_win_first_seat: first,
        p_win_second_seat: second,
        p_win_fair_start: 0.5 * (first + second),
        method: EvalMethod::Exact,
    })
}

/// One full game under fixed policies. Scores are tracked by mover label:
/// `s1` belongs to whoever moves first. Returns (A won, hit the ply cap).
fn play_game(
    game: &PigGame,
    first_policy: &Policy,
    second_policy: &Policy,
    rng: &mut ChaCha8Rng,
) -> (bool, bool) {
    let space = game.space();
    let config = game.config();
    let (mut s1, mut s2, mut tau) = (0u32, 0u32, 0u32);
    let mut mover = Player::One;
    let mut plies = 0u64;
    loop {
        let (own, other) = match mover {
            Player::One => (s1, s2),
            Player::Two => (s2, s1),
        };
        if config.is_winning_total(own + tau) {
            return (mover == Player::One, false);
        }
        if plies >= MAX_PLIES {
            return (false, true);
        }
        plies += 1;
        let state = match mover {
            Player::One => State::Play { player: Player::One, alpha: own, beta: other, tau },
            Player::Two => State::Play { player: Player::Two, alpha: other, beta: own, tau },
        };
        let policy = match mover {
            Player::One => first_policy,
            Player::Two => second_policy,
        };
        let action = policy.effective_action(space, &state).expect("play state");
        match action {
            Action::Stop => {
                match mover {
                    Player::One => s1 += tau,
                    Player::Two => s2 += tau,
                }
                tau = 0;
                mover = mover.other();
            }
            Action::Roll => match roll_outcome(config, own, tau, rng.gen_range(1..=config.die_faces)) {
                RollOutcome::Bust => {
                    tau = 0;
                    mover = mover.other();
                }
                RollOutcome::Continue(nt) => tau = nt,
            },
            Action::Wait => unreachable!("the waiting player never acts"),
        }
    }
}

/// Simulate `n_games` independent games with an explicit seat rule. Each
/// game draws from its own generator stream keyed by the game index, so
/// counts are identical regardless of how the games are sharded across
/// threads.
pub fn simulate_matchup_seated(
    game: &PigGame,
    a: &Policy,
    b: &Policy,
    n_games: u64,
    seed: u64,
    seats: SeatRule,
) -> Result<MatchResult, MatchupError> {
    assert!(n_games >= 1, "need at least one game");
    check_config(game, a)?;
    check_config(game, b)?;
    require_total(game, a).map_err(MatchupError::Solve)?;
    require_total(game, b).map_err(MatchupError::Solve)?;

    // (games as first seat, wins as first, wins as second, truncated)
    let (first_games, first_wins, second_wins, truncated) = (0..n_games)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let a_first = match seats {
                SeatRule::FairCoin => rng.gen_range(0..2u8) == 0,
                SeatRule::Alternate => i % 2 == 0,
            };
            let (first_won, cap) = if a_first {
                play_game(game, a, b, &mut rng)
            } else {
                let (b_won, cap) = play_game(game, b, a, &mut rng);
                (!b_won && !cap, cap)
            };
            // after the seat swap `first_won` means "A won"
            let a_won = first_won;
            (
                u64::from(a_first),
                u64::from(a_first && a_won),
                u64::from(!a_first && a_won),
                u64::from(cap),
            )
        })
        .reduce(|| (0, 0, 0, 0), |x, y| (x.0 + y.0, x.1 + y.1, x.2 + y.2, x.3 + y.3));

    let second_games = n_games - first_games;
    let a_wins = first_wins + second_wins;
    let p_fair = a_wins as f64 / n_games as f64;
    let standard_error = (p_fair * (1.0 - p_fair) / n_games as f64).sqrt();
    Ok(MatchResult {
        p_win_first_seat: first_wins as f64 / first_games as f64,
        p_win_second_seat: second_wins as f64 / second_games as f64,
        p_win_fair_start: p_fair,
        method: EvalMethod::Simulated { games: n_games, seed, standard_error, truncated },
    })
}

/// Simulate with the default seat rule: the start state's fair coin.
pub fn simulate_matchup(
    game: &PigGame,
    a: &Policy,
    b: &Policy,
    n_games: u64,
    seed: u64,
) -> Result<MatchResult, MatchupError> {
    simulate_matchup_seated(game, a, b, n_games, seed, SeatRule::FairCoin)
}
