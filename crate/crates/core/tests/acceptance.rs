//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured quantities (visible under --nocapture; the test
//! result line itself is the per-criterion verdict).
//!
//! The classic race to 200 is solved once and shared. Three tests assert
//! claims the true solution provably does not satisfy and fail by
//! design, with the analysis in the failure message: the exact-target
//! mirror identity and transience gate (a 199/199 deadlock makes that
//! variant non-transient at target 200) and the opening-region stop
//! boundary (the optimal policy keeps rolling at exactly tau = 20 when
//! trailing, by margins far above solver error). Everything else must
//! pass.

use std::sync::OnceLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dicerace::baselines::{min_expected_turns, random_threshold_policy};
use dicerace::game_model::{certify_transient, Action};
use dicerace::matchup::{exact_matchup, simulate_matchup, EvalMethod};
use dicerace::matrix_game::solve_matrix_game;
use dicerace::pig::{GameConfig, PigGame, Player, State, Variant};
use dicerace::solve::{
    extract_policy, layered_solve, value_iteration, Policy, SolveReport, ValueFunction,
};

fn config(variant: Variant) -> GameConfig {
    GameConfig { variant, ..GameConfig::default() }
}

struct Solved {
    game: PigGame,
    vi: ValueFunction,
    report: SolveReport,
    layered: ValueFunction,
    policy: Policy,
}

static CLASSIC: OnceLock<Solved> = OnceLock::new();

fn classic() -> &'static Solved {
    CLASSIC.get_or_init(|| {
        let game = PigGame::new(config(Variant::Classic)).unwrap();
        let (vi, report) = value_iteration(&game, 1e-10, 10_000).unwrap();
        let layered = layered_solve(&game).unwrap();
        let policy = extract_policy(&game, &vi, &report).unwrap();
        Solved { game, vi, report, layered, policy }
    })
}

/// Criterion 1: value iteration certifies a sup-norm residual below 1e-10
/// on the classic race to 200, and the layered direct solve agrees on
/// every state within 1e-8.
#[test]
fn criterion_01_fixed_point_certification() {
    let s = classic();
    assert!(s.report.certified, "iteration budget exhausted");
    assert!(
        s.report.final_residual < 1e-10,
        "residual {:.3e} not below 1e-10",
        s.report.final_residual
    );
    let disagreement = s
        .vi
        .values
        .iter()
        .zip(&s.layered.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(disagreement < 1e-8, "solvers disagree by {disagreement:.3e}");
    println!(
        "criterion 01 PASS residual={:.3e} sweeps={} max_disagreement={:.3e}",
        s.report.final_residual, s.report.iterations, disagreement
    );
}

fn max_mirror_sum_deviation(game: &PigGame, v: &ValueFunction, expected_sum: f64) -> (f64, usize) {
    let space = game.space();
    let mut worst = 0.0f64;
    let mut worst_index = 0;
    for i in 2..2 + space.size1() {
        let m = space.mirror_index(i);
        let dev = (v.values[i] + v.values[m] - expected_sum).abs();
        if dev > worst {
            worst = dev;
            worst_index = i;
        }
    }
    (worst, worst_index)
}

/// Criterion 2 (classic): the fair start is worth exactly ½ and swapping
/// seats complements the value. Checked on the layered solution, whose
/// per-layer closed forms leave only rounding error; the iterative
/// solution is tied to it by the fixed-point criterion.
#[test]
fn criterion_02_symmetry_classic() {
    let s = classic();
    let initial = s.layered.values[0];
    assert!((initial - 0.5).abs() <= 1e-9, "v(Initial) = {initial}");
    let (dev, idx) = max_mirror_sum_deviation(&s.game, &s.layered, 1.0);
    assert!(
        dev <= 1e-8,
        "mirror identity off by {dev:.3e} at {}",
        s.game.space().state_at(idx)
    );
    println!("criterion 02 (classic) PASS v0={initial:.12} mirror_dev={dev:.3e}");
}

/// Criterion 2 (exact target): the mirror identity is asserted over all
/// pairs as specified. It cannot hold at (1,199,199,0)/(2,199,199,0):
/// with both players at 199 and the winning gap busted away on both
/// sides, neither can ever finish, the pair is a closed two-cycle, and
/// both values are 0, so their sum is 0 rather than 1. The fair start is
/// still worth ½ because score (0,0) never reaches that cycle's basin
/// asymmetrically. This test fails by design; see the message.
#[test]
fn criterion_02_symmetry_exact_target() {
    let game = PigGame::new(config(Variant::ExactTarget)).unwrap();
    let v = layered_solve(&game).unwrap();
    let initial = v.values[0];
    assert!((initial - 0.5).abs() <= 1e-9, "v(Initial) = {initial}");
    println!("criterion 02 (exact) v0={initial:.12} holds; checking all mirrored pairs");
    let (dev, idx) = max_mirror_sum_deviation(&game, &v, 1.0);
    assert!(
        dev <= 1e-8,
        "mirror identity v(2,a,b,t)+v(1,b,a,t)=1 fails by {dev:.3e} at {}: both sides of the \
         199/199 deadlock are worth 0 because neither player can ever finish, so no value \
         assignment can make this pair sum to 1; the variant is not transient there (see the \
         transience criterion)",
        game.space().state_at(idx)
    );
}

/// Criterion 2 (max difference): mirrored values are antisymmetric within
/// 1e-8 scaled by the target.
#[test]
fn criterion_02_symmetry_maxdiff() {
    let game = PigGame::new(config(Variant::MaxDiff)).unwrap();
    let v = layered_solve(&game).unwrap();
    let (dev, idx) = max_mirror_sum_deviation(&game, &v, 0.0);
    let bound = 1e-8 * 200.0;
    assert!(
        dev <= bound,
        "antisymmetry off by {dev:.3e} at {}",
        game.space().state_at(idx)
    );
    println!("criterion 02 (maxdiff) PASS antisymmetry_dev={dev:.3e} bound={bound:.1e}");
}

/// Criterion 3: in the opening (both banked scores at most 20) the rule
/// is asserted as an exact "roll iff τ < 20". The forward direction holds
/// everywhere: below 20 the optimal action is Roll in all 8 379 cells.
/// The converse provably does not: at exactly τ = 20 a trailing player
/// keeps rolling, with exact-solution margins up to about 9e-4, five
/// orders of magnitude above solver error. Stopping there would be a
/// strictly worse move, so no correct solver can satisfy the iff. This
/// test fails by design; the message carries the measured structure.
#[test]
fn criterion_03_opening_region_rolls_below_twenty() {
    let s = classic();
    let space = s.game.space();
    let val = &s.layered.values;
    // Exact one-step lookahead for player one in the classic race; rolls
    // that reach the target land in forced-stop states already worth 1.
    let roll_minus_stop = |alpha: u32, beta: u32, tau: u32| -> f64 {
        let stop = val[space.p2_index(alpha + tau, beta, 0)];
        let mut sum = val[space.p2_index(alpha, beta, 0)];
        for k in 2..=6u32 {
            sum += val[space.p1_index(alpha, beta, tau + k)];
        }
        sum / 6.0 - stop
    };
    let mut below = 0u64;
    let mut violations = 0u64;
    let mut worst = (0.0f64, 0u32, 0u32, 0u32);
    let mut max_tau = 0u32;
    for alpha in 0..=20u32 {
        for beta in 0..=20u32 {
            for tau in 1..200 - alpha {
                let state = State::Play { player: Player::One, alpha, beta, tau };
                let action = s.policy.action_at(space, &state).unwrap();
                if tau < 20 {
                    assert_eq!(action, Action::Roll, "at {state}");
                    below += 1;
                } else if action == Action::Roll {
                    violations += 1;
                    max_tau = max_tau.max(tau);
                    let margin = roll_minus_stop(alpha, beta, tau);
                    if margin > worst.0 {
                        worst = (margin, alpha, beta, tau);
                    }
                }
            }
        }
    }
    println!("criterion 03 forward direction holds: Roll in all {below} cells with tau < 20");
    assert_eq!(
        violations, 0,
        "the stop side of the iff fails: {violations} opening cells with tau in [20, {max_tau}] \
         still prefer Roll, worst at (alpha={}, beta={}, tau={}) where rolling beats stopping \
         by {:.3e} in the exact solution; a trailing player's roll region extends past tau = 20, \
         so \"roll iff tau < 20\" cannot hold exactly for any correct solver",
        worst.1, worst.2, worst.3, worst.0
    );
}

/// Criterion 4: once the opponent has banked 187 or more, every decision
/// is Roll. The mover's own mirrored states (player two facing a leader
/// at 187+) are covered through the symmetric block.
#[test]
fn criterion_04_endgame_is_all_roll() {
    let s = classic();
    let space = s.game.space();
    let mut checked = 0u64;
    for beta in 187..200u32 {
        for alpha in 0..200u32 {
            for tau in 1..200 - alpha {
                let p1 = State::Play { player: Player::One, alpha, beta, tau };
                assert_eq!(
                    s.policy.action_at(space, &p1),
                    Some(Action::Roll),
                    "trailing the die holder must gamble at {p1}"
                );
                let p2 = State::Play { player: Player::Two, alpha: beta, beta: alpha, tau };
                assert_eq!(
                    s.policy.action_at(space, &p2),
                    Some(Action::Roll),
                    "at {p2}"
                );
                checked += 2;
            }
        }
    }
    println!("criterion 04 PASS all-roll endgame over {checked} states");
}

/// Criterion 5: the optimal policy beats the turn-count minimizer by the
/// published two-digit margin, and a seeded million-game simulation lands
/// within four standard errors of the exact number.
#[test]
fn criterion_05_turn_minimizer_margin() {
    let s = classic();
    let (_, minturns) = min_expected_turns(s.game.config()).unwrap();
    let exact = exact_matchup(&s.game, &s.policy, &minturns).unwrap();
    let fair = exact.p_win_fair_start;
    assert!(
        (0.51..=0.53).contains(&fair),
        "fair-start value {fair} outside the published band"
    );
    let sim = simulate_matchup(&s.game, &s.policy, &minturns, 1_000_000, 1).unwrap();
    let se = match sim.method {
        EvalMethod::Simulated { standard_error, .. } => standard_error,
        _ => unreachable!(),
    };
    let diff = (sim.p_win_fair_start - fair).abs();
    assert!(diff <= 4.0 * se, "simulation off by {diff:.3e} > 4 se = {:.3e}", 4.0 * se);
    println!(
        "criterion 05 PASS exact={fair:.6} simulated={:.6} se={se:.3e}",
        sim.p_win_fair_start
    );
}

/// Criterion 6: minimax security against 25 random threshold opponents.
#[test]
fn criterion_06_security_against_threshold_family() {
    let s = classic();
    let mut worst = 1.0f64;
    for seed in 0..25u64 {
        let q = random_threshold_policy(s.game.config(), seed).unwrap();
        let r = exact_matchup(&s.game, &s.policy, &q).unwrap();
        worst = worst.min(r.p_win_fair_start);
        assert!(
            r.p_win_fair_start >= 0.5 - 1e-9,
            "seed {seed}: fair-start value {} below ½",
            r.p_win_fair_start
        );
    }
    println!("criterion 06 PASS worst fair-start value {worst:.6} over 25 opponents");
}

/// Criterion 7: exact-target transition masses at the figure's anchor
/// states, in exact rational form.
#[test]
fn criterion_07_exact_target_transition_masses() {
    let game = PigGame::new(config(Variant::ExactTarget)).unwrap();
    let space = game.space();
    for beta in [0u32, 57, 199] {
        // (1,180,β,16): faces 5 and 6 overshoot 200 and join the ace
        let s = space.p1_index(180, beta, 16);
        let mut bust = 0u32;
        let mut total = 0u32;
        game.for_each_successor_rational(s, Action::Roll, Action::Wait, &mut |num, next| {
            total += num;
            if next == space.p2_index(180, beta, 0) {
                bust += num;
            }
        });
        assert_eq!(total, 6);
        assert_eq!(bust, 3, "bust mass at (1,180,{beta},16) is {bust}/6, figure says 3/6");

        // own+τ = 194: one face busts, exactly one face wins
        let s = space.p1_index(188, beta, 6);
        let mut bust = 0u32;
        let mut win = 0u32;
        game.for_each_successor_rational(s, Action::Roll, Action::Wait, &mut |num, next| {
            if next == space.p2_index(188, beta, 0) {
                bust += num;
            } else if space.is_win_state(&space.state_at(next)) {
                win += num;
            }
        });
        assert_eq!(bust, 1, "bust mass at own+tau=194 must be exactly 1/6");
        assert_eq!(win, 1, "win mass at own+tau=194 must be exactly 1/6");
    }
    println!("criterion 07 PASS rational masses 3/6 and 1/6+1/6 confirmed");
}

/// Criterion 8: closed-form state counts at target 200 and brute-force
/// agreement at small targets.
#[test]
fn criterion_08_state_counts() {
    let s = classic();
    let space = s.game.space();
    assert_eq!(space.num_states(), 8_520_002);
    assert_eq!(space.num_decision_states_p1(), 3_980_000);
    assert_eq!(space.num_decision_states(), 7_960_000);

    // independent enumerator: count (α,β,τ) triples a game can reach
    for variant in [Variant::Classic, Variant::ExactTarget, Variant::MaxDiff] {
        for target in [12u32, 16, 20] {
            let cfg = GameConfig { variant, target, ..GameConfig::default() };
            let small = PigGame::new(cfg).unwrap();
            let mut brute = 2usize; // start and final
            for own in 0..target {
                let cap = match variant {
                    Variant::ExactTarget => target - own,
                    _ => target - 1 - own + 6,
                };
                brute += 2 * (target as usize) * (cap as usize + 1);
            }
            assert_eq!(
                small.space().num_states(),
                brute,
                "count mismatch for {variant} target {target}"
            );
        }
    }
    println!("criterion 08 PASS 8520002 states, 3980000 player-one decisions");
}

/// Criterion 9 (classic): the certifier accepts the classic race.
#[test]
fn criterion_09_transience_classic() {
    let s = classic();
    let report = certify_transient(&s.game).unwrap();
    assert!(report.certified, "{} offending states", report.offending_states.len());
    println!("criterion 09 (classic) PASS max_rank={}", report.max_rank);
}

/// Criterion 9 (max difference): same race, margin payoffs; accepted.
#[test]
fn criterion_09_transience_maxdiff() {
    let game = PigGame::new(config(Variant::MaxDiff)).unwrap();
    let report = certify_transient(&game).unwrap();
    assert!(report.certified, "{} offending states", report.offending_states.len());
    println!("criterion 09 (maxdiff) PASS max_rank={}", report.max_rank);
}

/// Criterion 9 (exact target): asserted as specified, but the variant is
/// genuinely not transient at target 200, so a sound certifier must
/// reject it. With both players at 199 and the exact gap busted away,
/// (1,199,199,0) and (2,199,199,0) hand the die back and forth forever,
/// and every state (j, own 199-complement) feeding that cycle shares its
/// fate: 400 states in all. This test fails by design; the companion
/// tests show the certifier is sound (it accepts the transient variants
/// and rejects the mutant), which is exactly why it must reject here.
#[test]
fn criterion_09_transience_exact_target() {
    let game = PigGame::new(config(Variant::ExactTarget)).unwrap();
    let report = certify_transient(&game).unwrap();
    assert!(
        report.certified,
        "exact-target at 200 is not transient: {} states (the 199/199 deadlock cycle and its \
         unique-gap feeders) can never be certified; accepting them would require an unsound \
         certifier",
        report.offending_states.len()
    );
}

/// Criterion 9 (mutant): allowing Stop at τ=0 creates an infinite game
/// and the certifier rejects it.
#[test]
fn criterion_09_transience_mutant_rejected() {
    let game = PigGame::with_stop_at_zero(config(Variant::Classic)).unwrap();
    let report = certify_transient(&game).unwrap();
    assert!(!report.certified, "the pass-forever mutant must be rejected");
    assert!(!report.offending_states.is_empty());
    println!(
        "criterion 09 (mutant) PASS rejected with {} offending states",
        report.offending_states.len()
    );
}

/// Criterion 10: matrix-game solver certificate on 10 000 random
/// matrices, plus closed-form 2×2 agreement.
#[test]
fn criterion_10_matrix_game_certificates() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_gap = 0.0f64;
    for round in 0..10_000 {
        let rows = rng.gen_range(1..=6usize);
        let cols = rng.gen_range(1..=6usize);
        let scale = 10f64.powi(rng.gen_range(-2..=2));
        let m: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..cols).map(|_| (rng.gen::<f64>() - 0.5) * scale).collect())
            .collect();
        let sol = solve_matrix_game(&m).unwrap();
        let max_abs = m
            .iter()
            .flatten()
            .fold(0.0f64, |acc, x| acc.max(x.abs()));
        let tol = 1e-9 * (1.0 + max_abs);

        // row strategy must secure at least v against every column
        for c in 0..cols {
            let got: f64 = (0..rows).map(|r| sol.row_strategy[r] * m[r][c]).sum();
            let gap = sol.value - got;
            worst_gap = worst_gap.max(gap);
            assert!(gap <= tol, "round {round}: column {c} exploits the row strategy by {gap:e}");
        }
        // column strategy must concede at most v against every row
        for r in 0..rows {
            let got: f64 = (0..cols).map(|c| sol.col_strategy[c] * m[r][c]).sum();
            let gap = got - sol.value;
            worst_gap = worst_gap.max(gap);
            assert!(gap <= tol, "round {round}: row {r} exploits the column strategy by {gap:e}");
        }

        // independent 2×2 oracle: saddle point or the classic mixed form
        if rows == 2 && cols == 2 {
            let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
            let maximin = (a.min(b)).max(c.min(d));
            let minimax = (a.max(c)).min(b.max(d));
            let expected = if maximin == minimax {
                maximin
            } else {
                (a * d - b * c) / (a + d - b - c)
            };
            assert!(
                (sol.value - expected).abs() <= tol,
                "round {round}: 2x2 value {} vs closed form {expected}",
                sol.value
            );
        }
    }
    println!("criterion 10 PASS 10000 certificates, worst security gap {worst_gap:.3e}");
}
