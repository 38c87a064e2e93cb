//! Reference strategies the optimal policy is measured against.
//!
//! * [`hold_at_policy`]: the single-turn rule "roll until the turn score
//!   reaches k". For a six-sided die with a busting ace the marginal roll
//!   at turn score τ gains (20 − τ)/6 in expectation, so k = 20 is the
//!   break-even choice.
//! * [`min_expected_turns`]: the solo-race strategy minimizing the
//!   expected number of turns to reach the target, ignoring the opponent.
//! * [`threshold_policy`] / [`random_threshold_policy`]: per-score
//!   generalizations of hold-at-k, used as a randomized opponent family.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::game_model::Action;
use crate::pig::{roll_outcome, GameConfig, RollOutcome, State, StateSpace, Variant};
use crate::solve::Policy;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("hold-at threshold {k} outside 1..{target}")]
    ThresholdOutOfRange { k: u32, target: u32 },
    #[error("need one threshold per banked score ({expected}), got {got}")]
    WrongThresholdCount { expected: usize, got: usize },
    #[error("turn-count minimization is defined for the classic race, not {0}")]
    ClassicOnly(Variant),
    #[error(transparent)]
    Config(#[from] crate::pig::ConfigError),
}

/// Roll while the turn score is below `k`, stop once it reaches it.
/// Forced rules still apply at play time: the policy map itself only
/// covers genuine decisions.
pub fn hold_at_policy(config: &GameConfig, k: u32) -> Result<Policy, BaselineError> {
    if k == 0 || k >= config.target {
        return Err(BaselineError::ThresholdOutOfRange { k, target: config.target });
    }
    let space = StateSpace::new(*config)?;
    Ok(Policy::from_rule(&space, |state| {
        let tau = match *state {
            State::Play { tau, .. } => tau,
            _ => unreachable!("rules are queried on decision states"),
        };
        if tau < k {
            Action::Roll
        } else {
            Action::Stop
        }
    }))
}

/// One hold threshold per banked score: roll while τ < thresholds[own].
pub fn threshold_policy(config: &GameConfig, thresholds: &[u32]) -> Result<Policy, BaselineError> {
    if thresholds.len() != config.target as usize {
        return Err(BaselineError::WrongThresholdCount {
            expected: config.target as usize,
            got: thresholds.len(),
        });
    }
    let space = StateSpace::new(*config)?;
    Ok(Policy::from_rule(&space, |state| {
        let (own, _) = state.mover_scores().expect("decision states are play states");
        let tau = match *state {
            State::Play { tau, .. } => tau,
            _ => unreachable!(),
        };
        if tau < thresholds[own as usize] {
            Action::Roll
        } else {
            Action::Stop
        }
    }))
}

/// A random member of the threshold family, deterministic per seed.
pub fn random_threshold_policy(config: &GameConfig, seed: u64) -> Result<Policy, BaselineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let thresholds: Vec<u32> =
        (0..config.target).map(|_| rng.gen_range(1..=config.target)).collect();
    threshold_policy(config, &thresholds)
}

/// Expected-turn counts for the solo race: `t[α]` is the expected number
/// of turns to finish starting a fresh turn banked at α, and `w[α][τ]` the
/// expected number of future turn starts from mid-turn (the running turn
/// already counted).
#[derive(Debug, Clone)]
pub struct TurnCountValue {
    pub t: Vec<f64>,
    pub w: Vec<Vec<f64>>,
}

impl TurnCountValue {
    /// Expected turns to finish from a fresh turn at banked score `alpha`.
    pub fn turns(&self, alpha: u32) -> f64 {
        self.t.get(alpha as usize).copied().unwrap_or(0.0)
    }
}

/// Minimize the expected number of turns to reach the target, opponent
/// ignored. Banked score only grows, so scores are solved highest first;
/// within one score the bust entry couples the row to its own fresh cell,
/// and the coupling is iterated to a 1e-13 residual. The returned policy
/// maps the (own score, τ) rule onto full two-player states.
pub fn min_expected_turns(config: &GameConfig) -> Result<(TurnCountValue, Policy), BaselineError> {
    if config.variant != Variant::Classic {
        return Err(BaselineError::ClassicOnly(config.variant));
    }
    let space = StateSpace::new(*config)?;
    let t = config.target as usize;
    let inv = 1.0 / f64::from(config.die_faces);
    let mut w: Vec<Vec<f64>> = vec![Vec::new(); t];
    let mut roll_region: Vec<Vec<bool>> = vec![Vec::new(); t];
    let mut total_iterations = 0u64;

    for alpha in (0..t).rev() {
        let cap = space.tau_cap(alpha as u32) as usize;
        let mut row = vec![0.0f64; cap + 1];
        // Expected turns ahead after banking `total`; scores above alpha
        // are already solved.
        let t_of = |total: usize, w: &Vec<Vec<f64>>| -> f64 {
            if total >= t {
                0.0
            } else {
                1.0 + w[total][0]
            }
        };
        loop {
            total_iterations += 1;
            let x = row[0];
            for tau in (0..=cap).rev() {
                let total = alpha + tau;
                if total >= t {
                    row[tau] = 0.0;
                    continue;
                }
                let mut sum = 0.0;
                let mut bust_n = 0u32;
                for face in 1..=config.die_faces {
                    match roll_outcome(config, alpha as u32, tau as u32, face) {
                        RollOutcome::Bust => bust_n += 1,
                        RollOutcome::Continue(nt) => sum += row[nt as usize],
                    }
                }
                let roll = (sum + f64::from(bust_n) * (1.0 + x)) * inv;
                row[tau] = if tau == 0 { roll } else { roll.min(t_of(total, &w)) };
            }
            if (row[0] - x).abs() < 1e-13 {
                break;
            }
        }
        let choices = (0..=cap)
            .map(|tau| {
                let total = alpha + tau;
                if total >= t || tau == 0 {
                    return tau == 0;
                }
                let mut sum = 0.0;
                let mut bust_n = 0u32;
                for face in 1..=config.die_faces {
                    match roll_outcome(config, alpha as u32, tau as u32, face) {
                        RollOutcome::Bust => bust_n += 1,
                        RollOutcome::Continue(nt) => sum += row[nt as usize],
                    }
                }
                let roll = (sum + f64::from(bust_n) * (1.0 + row[0])) * inv;
                // Strict improvement required to keep rolling: ties bank.
                roll < t_of(total, &w)
            })
            .collect();
        roll_region[alpha] = choices;
        w[alpha] = row;
    }

    let t_vec: Vec<f64> = (0..t).map(|alpha| 1.0 + w[alpha][0]).collect();
    let policy = Policy {
        tol: 1e-13,
        iterations: total_iterations,
        ..Policy::from_rule(&space, |state| {
            let (own, _) = state.mover_scores().expect("play state");
            let tau = match *state {
                State::Play { tau, .. } => tau,
                _ => unreachable!(),
            };
            if roll_region[own as usize][tau as usize] {
                Action::Roll
            } else {
                Action::Stop
            }
        })
    };
    Ok((TurnCountValue { t: t_vec, w }, policy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pig::Player;

    fn classic(target: u32) -> GameConfig {
        GameConfig { target, ..GameConfig::default() }
    }

    fn p1(alpha: u32, beta: u32, tau: u32) -> State {
        State::Play { player: Player::One, alpha, beta, tau }
    }

    #[test]
    fn hold_at_twenty_boundary() {
        let config = classic(200);
        let space = StateSpace::new(config).unwrap();
        let policy = hold_at_policy(&config, 20).unwrap();
        assert_eq!(policy.action_at(&space, &p1(0, 0, 19)), Some(Action::Roll));
        assert_eq!(policy.action_at(&space, &p1(0, 0, 20)), Some(Action::Stop));
        // Forced states sit outside the stored map but play forced moves.
        assert_eq!(policy.action_at(&space, &p1(195, 0, 5)), None);
        assert_eq!(policy.effective_action(&space, &p1(195, 0, 5)), Some(Action::Stop));
        assert_eq!(policy.effective_action(&space, &p1(0, 0, 0)), Some(Action::Roll));
    }

    #[test]
    fn hold_at_rejects_degenerate_thresholds() {
        let config = classic(200);
        assert!(matches!(
            hold_at_policy(&config, 0),
            Err(BaselineError::ThresholdOutOfRange { k: 0, .. })
        ));
        assert!(hold_at_policy(&config, 200).is_err());
        assert!(hold_at_policy(&config, 199).is_ok());
    }

    #[test]
    fn threshold_family_validates_and_reproduces_hold_at() {
        let config = classic(50);
        assert!(matches!(
            threshold_policy(&config, &[20; 49]),
            Err(BaselineError::WrongThresholdCount { expected: 50, got: 49 })
        ));
        let uniform = threshold_policy(&config, &[20; 50]).unwrap();
        let hold = hold_at_policy(&config, 20).unwrap();
        assert_eq!(uniform.actions, hold.actions);
        let a = random_threshold_policy(&config, 9).unwrap();
        let b = random_threshold_policy(&config, 9).unwrap();
        let c = random_threshold_policy(&config, 10).unwrap();
        assert_eq!(a.actions, b.actions);
        assert_ne!(a.actions, c.actions);
    }

    /// Expected banked gain of one hold-at-k turn, by forward absorption:
    /// push reach probabilities up the τ ladder and collect the stopping
    /// mass.
    fn single_turn_gain_forward(k: usize) -> f64 {
        let mut reach = vec![0.0f64; k + 6];
        reach[0] = 1.0;
        let mut gain = 0.0;
        for tau in 0..k {
            let p = reach[tau];
            if p == 0.0 {
                continue;
            }
            for face in 2..=6usize {
                reach[tau + face] += p / 6.0;
            }
        }
        for (tau, p) in reach.iter().enumerate().skip(k) {
            gain += p * tau as f64;
        }
        gain
    }

    /// The same expectation by backward induction on the turn.
    fn single_turn_gain_backward(k: usize) -> f64 {
        let mut e = vec![0.0f64; k + 12];
        for tau in (0..k).rev() {
            e[tau] = (2..=6).map(|f| e[tau + f].max(0.0)).sum::<f64>() / 6.0;
        }
        for tau in k..k + 12 {
            e[tau] = tau as f64;
        }
        // Recompute below-threshold cells now that stopping values are in.
        for tau in (0..k).rev() {
            e[tau] = (2..=6).map(|f| e[tau + f]).sum::<f64>() / 6.0;
        }
        e[0]
    }

    #[test]
    fn single_turn_gain_oracles_agree() {
        for k in [5, 20, 33] {
            let fwd = single_turn_gain_forward(k);
            let bwd = single_turn_gain_backward(k);
            assert!((fwd - bwd).abs() < 1e-12, "k={k}: {fwd} vs {bwd}");
        }
        // One marginal roll at τ=20 is break-even, so the k=20 turn gain
        // must not be improved by k=21 by more than rounding.
        assert!(single_turn_gain_forward(20) >= single_turn_gain_forward(26));
    }

    #[test]
    fn turn_minimizer_is_classic_only() {
        let exact = GameConfig { variant: Variant::ExactTarget, ..classic(200) };
        assert_eq!(
            min_expected_turns(&exact).unwrap_err(),
            BaselineError::ClassicOnly(Variant::ExactTarget)
        );
    }

    #[test]
    fn turn_counts_are_sane() {
        let config = classic(200);
        let (tc, _) = min_expected_turns(&config).unwrap();
        assert_eq!(tc.turns(200), 0.0);
        assert_eq!(tc.turns(400), 0.0);
        for alpha in 0..200 {
            assert!(tc.t[alpha] >= 1.0, "T({alpha}) below one turn");
            if alpha > 0 {
                assert!(
                    tc.t[alpha] <= tc.t[alpha - 1] + 1e-12,
                    "extra banked points made the race longer at {alpha}"
                );
            }
            for (tau, &wv) in tc.w[alpha].iter().enumerate() {
                assert!(wv >= 0.0);
                assert!(
                    wv <= tc.w[alpha][0] + 1.0 + 1e-12,
                    "W({alpha},{tau}) exceeds a full extra turn"
                );
            }
        }
        // Racing to 200 in steps of at most 6 takes at least 34 turns'
        // worth of rolls but far fewer expected turns than hold-at-1.
        assert!(tc.t[0] > 10.0 && tc.t[0] < 40.0, "T(0) = {}", tc.t[0]);
    }

    /// One might expect "roll while τ is small, then stop" per score, but
    /// the turn minimizer genuinely violates that near the goal: from a
    /// deep turn it keeps gambling for an immediate finish whenever
    /// T(α)/6 beats the sure T(α+τ) of banking just short. At target 200
    /// that flips first at α=144 (roll value 1.1937 vs stop 1.2), so the
    /// Roll region grows islands past the first Stop. This test reports
    /// the exceptions and checks each one is a strict improvement rather
    /// than tie-breaking noise.
    #[test]
    fn turn_minimizer_roll_region_is_not_a_prefix_near_the_goal() {
        let config = classic(200);
        let space = StateSpace::new(config).unwrap();
        let (tc, policy) = min_expected_turns(&config).unwrap();
        let mut exceptional_scores = Vec::new();
        for alpha in 0..200u32 {
            let mut seen_stop = false;
            let mut islands = Vec::new();
            for tau in 1..(200 - alpha) {
                match policy.action_at(&space, &p1(alpha, 0, tau)).unwrap() {
                    Action::Stop => seen_stop = true,
                    Action::Roll if seen_stop => islands.push(tau),
                    Action::Roll => {}
                    Action::Wait => panic!("waiting is never a mover's choice"),
                }
            }
            if islands.is_empty() {
                continue;
            }
            for &tau in &islands {
                let a = alpha as usize;
                let t = tau as usize;
                let stop = 1.0 + tc.w[a + t][0];
                let sum: f64 = (2..=6).map(|f| tc.w[a][t + f]).sum();
                let roll = (sum + 1.0 + tc.w[a][0]) / 6.0;
                assert!(
                    roll < stop - 1e-9,
                    "island at ({alpha},{tau}) is not a strict improvement: {roll} vs {stop}"
                );
            }
            exceptional_scores.push((alpha, islands));
        }
        println!("roll-region islands past the first stop: {exceptional_scores:?}");
        assert!(
            !exceptional_scores.is_empty(),
            "expected the endgame gamble to break the prefix structure"
        );
        assert!(exceptional_scores.iter().all(|(alpha, _)| *alpha >= 100));
        assert!(exceptional_scores.iter().any(|(alpha, _)| *alpha == 144));
    }

    #[test]
    fn turn_minimizer_ignores_the_opponent() {
        let config = classic(120);
        let space = StateSpace::new(config).unwrap();
        let (_, policy) = min_expected_turns(&config).unwrap();
        for beta in [0u32, 55, 119] {
            for tau in 1..40 {
                assert_eq!(
                    policy.action_at(&space, &p1(30, beta, tau)),
                    policy.action_at(&space, &p1(30, 0, tau))
                );
            }
        }
    }

    #[test]
    fn expected_turns_match_a_simulation_of_the_policy() {
        use rand::prelude::*;
        let config = classic(200);
        let space = StateSpace::new(config).unwrap();
        let (tc, policy) = min_expected_turns(&config).unwrap();
        let runs = 1_000_000u64;
        let mut sum = 0.0f64;
        let mut sumsq = 0.0f64;
        let mut rng = ChaCha8Rng::seed_from_u64(271);
        for _ in 0..runs {
            let mut alpha = 0u32;
            let mut turns = 0u64;
            while alpha < 200 {
                turns += 1;
                let mut tau = 0u32;
                loop {
                    let action = policy
                        .effective_action(&space, &p1(alpha, 0, tau))
                        .expect("play state");
                    if action == Action::Stop {
                        alpha += tau;
                        break;
                    }
                    let face = rng.gen_range(1..=config.die_faces);
                    match roll_outcome(&config, alpha, tau, face) {
                        RollOutcome::Bust => break,
                        RollOutcome::Continue(nt) => {
                            tau = nt;
                            if alpha + tau >= 200 {
                                alpha += tau;
                                break;
                            }
                        }
                    }
                }
            }
            let x = turns as f64;
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / runs as f64;
        let var = (sumsq / runs as f64 - mean * mean).max(0.0);
        let se = (var / runs as f64).sqrt();
        let diff = (mean - tc.t[0]).abs();
        assert!(
            diff <= 3.0 * se,
            "simulated {mean} vs computed {} is {diff} (> 3 se = {})",
            tc.t[0],
            3.0 * se
        );
    }
}
