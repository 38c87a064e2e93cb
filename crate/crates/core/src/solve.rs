//! Value computation for the dice race.
//!
//! Two independent routes to the same fixed point:
//!
//! * [`value_iteration`]: synchronous sweeps of the one-ply backup
//!   operator [`apply_U`] from v ≡ 0, stopping on a sup-norm residual.
//! * [`layered_solve`]: exact backward induction over (α,β) layers in
//!   decreasing α+β. Banked scores never decrease, so each layer couples
//!   to itself only through the two fresh states (1,α,β,0) and (2,α,β,0);
//!   the coupled pair is solved in closed form.
//!
//! Agreement between the two is the crate's main correctness check.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::game_model::Action;
use crate::pig::{roll_outcome, GameConfig, PigGame, Player, RollOutcome, State, StateSpace, Variant};

/// Dense state values, indexed by the game's state enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    pub values: Vec<f64>,
}

impl ValueFunction {
    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n] }
    }

    /// Value of a state, or `None` if the state is not enumerated.
    pub fn at(&self, space: &StateSpace, state: &State) -> Option<f64> {
        space.index_of(state).map(|i| self.values[i])
    }
}

/// How a solve ended. `certified` holds exactly when the final sup-norm
/// residual beat the requested tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: u64,
    pub final_residual: f64,
    pub wall_time: Duration,
    pub certified: bool,
    /// The tolerance the solve was asked for; downstream tie-breaking
    /// derives from it.
    pub tol: f64,
}

/// Chosen action per decision state (states where the mover really
/// chooses), player one's block first, in decision-ordinal order.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub config: GameConfig,
    pub actions: Vec<Action>,
    /// Tolerance of the producing solve (0 for rule-based policies); the
    /// extraction tie band was 10 times this.
    pub tol: f64,
    /// Iteration count of the producing solve (0 for rule-based policies).
    pub iterations: u64,
}

impl Policy {
    /// Build a policy by evaluating a rule at every decision state.
    /// The rule must return Roll or Stop.
    pub fn from_rule(space: &StateSpace, rule: impl Fn(&State) -> Action) -> Policy {
        let actions = (0..space.num_decision_states())
            .map(|ord| {
                let state = space.decision_state_at(ord);
                let a = rule(&state);
                assert!(
                    a == Action::Roll || a == Action::Stop,
                    "rule returned {a} at {state}"
                );
                a
            })
            .collect();
        Policy { config: *space.config(), actions, tol: 0.0, iterations: 0 }
    }

    /// The stored choice at a decision state; `None` elsewhere.
    pub fn action_at(&self, space: &StateSpace, state: &State) -> Option<Action> {
        space.decision_ordinal(state).map(|ord| self.actions[ord])
    }

    /// The action actually played at any play state: forced Stop on a
    /// winning total, forced Roll on a fresh turn, the stored choice in
    /// between. `None` for Initial and Final.
    pub fn effective_action(&self, space: &StateSpace, state: &State) -> Option<Action> {
        match *state {
            State::Play { tau, .. } => {
                if space.is_win_state(state) {
                    Some(Action::Stop)
                } else if tau == 0 {
                    Some(Action::Roll)
                } else {
                    self.action_at(space, state)
                }
            }
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("value vector has {got} entries but the game has {expected} states")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("policy covers {got} decision states, the game has {expected}; first missing state {first_missing}")]
    PartialPolicy { expected: usize, got: usize, first_missing: String },
    #[error("layer ({alpha},{beta}) has no bounded fixed point: self-reference is mass-preserving with a nonzero source")]
    DivergentLayer { alpha: u32, beta: u32 },
    #[error("cannot extract a policy from an uncertified solve (residual {residual:e} at tolerance {tol:e})")]
    Uncertified { residual: f64, tol: f64 },
}

/// Sweep scheduling for [`value_iteration_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// Synchronous sweeps reading only the previous iterate. Deterministic
    /// and independent of parallel partitioning.
    Jacobi,
    /// In-place sweeps in a fixed order: layers by decreasing α+β, within
    /// a layer player one then player two, τ descending. Usually converges
    /// in fewer sweeps; single-threaded.
    GaussSeidel,
}

/// Default stopping tolerance: absolute 1e-10 for probability-valued
/// variants, scaled by the target for the margin-valued one.
pub fn default_tolerance(config: &GameConfig) -> f64 {
    match config.variant {
        Variant::MaxDiff => 1e-10 * f64::from(config.target),
        _ => 1e-10,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum PayoffKind {
    /// The variant's own payoffs (win probability or margin).
    GameValue,
    /// 1 on player-one wins, 0 on player-two wins: the probability that
    /// player one wins, whatever the variant's scoring.
    WinIndicator,
}

fn win_value(config: &GameConfig, player: Player, alpha: u32, beta: u32, kind: PayoffKind) -> f64 {
    match kind {
        PayoffKind::WinIndicator => match player {
            Player::One => 1.0,
            Player::Two => 0.0,
        },
        PayoffKind::GameValue => match (config.variant, player) {
            (Variant::MaxDiff, Player::One) => f64::from(config.target) - f64::from(beta),
            (Variant::MaxDiff, Player::Two) => f64::from(alpha) - f64::from(config.target),
            (_, Player::One) => 1.0,
            (_, Player::Two) => 0.0,
        },
    }
}

/// One Jacobi sweep: fills `next` from `prev` and returns the sup-norm
/// change. `next` and `prev` must both have the game's state count.
fn jacobi_sweep(game: &PigGame, prev: &[f64], next: &mut [f64]) -> f64 {
    let space = game.space();
    let config = *game.config();
    let t = config.target as usize;
    let inv = 1.0 / f64::from(config.die_faces);
    let mutant = game.stop_at_zero_allowed();

    // Fresh-turn gather tables: fresh1[α·t + b] = prev value of (1,α,b,0),
    // fresh2[β·t + a] = prev value of (2,a,β,0). Player-two cells read
    // fresh1 rows contiguously and vice versa.
    let mut fresh1 = vec![0.0f64; t * t];
    let mut fresh2 = vec![0.0f64; t * t];
    for own in 0..t {
        let row1 = &mut fresh1[own * t..(own + 1) * t];
        for (b, cell) in row1.iter_mut().enumerate() {
            *cell = prev[space.p1_index(own as u32, b as u32, 0)];
        }
        let row2 = &mut fresh2[own * t..(own + 1) * t];
        for (a, cell) in row2.iter_mut().enumerate() {
            *cell = prev[space.p2_index(a as u32, own as u32, 0)];
        }
    }

    // Split the output into per-mover-score slices so sweeps can run in
    // parallel; every cell depends on prev alone, so the partitioning
    // cannot affect the result.
    let (head, body) = next.split_at_mut(2);
    let (block1, block2) = body.split_at_mut(space.size1());
    let mut slices1 = Vec::with_capacity(t);
    let mut rest = block1;
    for own in 0..t {
        let width = t * (space.tau_cap(own as u32) as usize + 1);
        let (s, r) = rest.split_at_mut(width);
        slices1.push((own as u32, s));
        rest = r;
    }
    let mut slices2 = Vec::with_capacity(t);
    let mut rest = block2;
    for own in 0..t {
        let width = t * (space.tau_cap(own as u32) as usize + 1);
        let (s, r) = rest.split_at_mut(width);
        slices2.push((own as u32, s));
        rest = r;
    }

    let res1 = slices1
        .into_par_iter()
        .map(|(alpha, slice)| {
            let cap = space.tau_cap(alpha) as usize;
            let row = cap + 1;
            let base_global = space.p1_index(alpha, 0, 0);
            let mut res = 0.0f64;
            for beta in 0..t {
                let f2row = &fresh2[beta * t..(beta + 1) * t];
                let bust_v = f2row[alpha as usize];
                let rs_global = base_global + beta * row;
                let rs_local = beta * row;
                let w1v = win_value(&config, Player::One, alpha, beta as u32, PayoffKind::GameValue);
                for tau in 0..=cap {
                    let total = alpha as usize + tau;
                    let val = if total >= t {
                        w1v
                    } else {
                        let mut sum = 0.0;
                        let mut bust_n = 0u32;
                        for face in 1..=config.die_faces {
                            match roll_outcome(&config, alpha, tau as u32, face) {
                                RollOutcome::Bust => bust_n += 1,
                                RollOutcome::Continue(nt) => sum += prev[rs_global + nt as usize],
                            }
                        }
                        let roll = (sum + f64::from(bust_n) * bust_v) * inv;
                        if tau == 0 {
                            if mutant {
                                roll.max(bust_v)
                            } else {
                                roll
                            }
                        } else {
                            f2row[total].max(roll)
                        }
                    };
                    slice[rs_local + tau] = val;
                    res = res.max((val - prev[rs_global + tau]).abs());
                }
            }
            res
        })
        .reduce(|| 0.0, f64::max);

    let res2 = slices2
        .into_par_iter()
        .map(|(beta, slice)| {
            let cap = space.tau_cap(beta) as usize;
            let row = cap + 1;
            let base_global = space.p2_index(0, beta, 0);
            let mut res = 0.0f64;
            for alpha in 0..t {
                let f1row = &fresh1[alpha * t..(alpha + 1) * t];
                let bust_v = f1row[beta as usize];
                let rs_global = base_global + alpha * row;
                let rs_local = alpha * row;
                let w2v = win_value(&config, Player::Two, alpha as u32, beta, PayoffKind::GameValue);
                for tau in 0..=cap {
                    let total = beta as usize + tau;
                    let val = if total >= t {
                        w2v
                    } else {
                        let mut sum = 0.0;
                        let mut bust_n = 0u32;
                        for face in 1..=config.die_faces {
                            match roll_outcome(&config, beta, tau as u32, face) {
                                RollOutcome::Bust => bust_n += 1,
                                RollOutcome::Continue(nt) => sum += prev[rs_global + nt as usize],
                            }
                        }
                        let roll = (sum + f64::from(bust_n) * bust_v) * inv;
                        if tau == 0 {
                            if mutant {
                                roll.min(bust_v)
                            } else {
                                roll
                            }
                        } else {
                            f1row[total].min(roll)
                        }
                    };
                    slice[rs_local + tau] = val;
                    res = res.max((val - prev[rs_global + tau]).abs());
                }
            }
            res
        })
        .reduce(|| 0.0, f64::max);

    let i1 = space.p1_index(0, 0, 0);
    let i2 = space.p2_index(0, 0, 0);
    head[0] = 0.5 * (prev[i1] + prev[i2]);
    head[1] = 0.0;
    let res0 = (head[0] - prev[0]).abs().max(prev[1].abs());
    res0.max(res1).max(res2)
}

/// One in-place sweep in the fixed Gauss-Seidel order.
fn gauss_seidel_sweep(game: &PigGame, v: &mut [f64]) -> f64 {
    let space = game.space();
    let config = *game.config();
    let t = config.target;
    let inv = 1.0 / f64::from(config.die_faces);
    let mutant = game.stop_at_zero_allowed();
    let mut res = 0.0f64;

    for sum in (0..=(2 * t - 2)).rev() {
        let lo = sum.saturating_sub(t - 1);
        let hi = sum.min(t - 1);
        for alpha in lo..=hi {
            let beta = sum - alpha;
            // Player one's row, τ descending: roll reads freshly updated
            // higher-τ cells, stop reads the already-finished higher layer.
            let cap1 = space.tau_cap(alpha);
            let rs1 = space.p1_index(alpha, beta, 0);
            let bust1 = v[space.p2_index(alpha, beta, 0)];
            let w1v = win_value(&config, Player::One, alpha, beta, PayoffKind::GameValue);
            for tau in (0..=cap1).rev() {
                let total = alpha + tau;
                let val = if total >= t {
                    w1v
                } else {
                    let mut sum_v = 0.0;
                    let mut bust_n = 0u32;
                    for face in 1..=config.die_faces {
                        match roll_outcome(&config, alpha, tau, face) {
                            RollOutcome::Bust => bust_n += 1,
                            RollOutcome::Continue(nt) => sum_v += v[rs1 + nt as usize],
                        }
                    }
                    let roll = (sum_v + f64::from(bust_n) * bust1) * inv;
                    if tau == 0 {
                        if mutant {
                            roll.max(bust1)
                        } else {
                            roll
                        }
                    } else {
                        v[space.p2_index(total, beta, 0)].max(roll)
                    }
                };
                let cell = rs1 + tau as usize;
                res = res.max((val - v[cell]).abs());
                v[cell] = val;
            }
            // Player two's row: its bust entry now reads the cell updated
            // just above.
            let cap2 = space.tau_cap(beta);
            let rs2 = space.p2_index(alpha, beta, 0);
            let bust2 = v[space.p1_index(alpha, beta, 0)];
            let w2v = win_value(&config, Player::Two, alpha, beta, PayoffKind::GameValue);
            for tau in (0..=cap2).rev() {
                let total = beta + tau;
                let val = if total >= t {
                    w2v
                } else {
                    let mut sum_v = 0.0;
                    let mut bust_n = 0u32;
                    for face in 1..=config.die_faces {
                        match roll_outcome(&config, beta, tau, face) {
                            RollOutcome::Bust => bust_n += 1,
                            RollOutcome::Continue(nt) => sum_v += v[rs2 + nt as usize],
                        }
                    }
                    let roll = (sum_v + f64::from(bust_n) * bust2) * inv;
                    if tau == 0 {
                        if mutant {
                            roll.min(bust2)
                        } else {
                            roll
                        }
                    } else {
                        v[space.p1_index(alpha, beta + tau, 0)].min(roll)
                    }
                };
                let cell = rs2 + tau as usize;
                res = res.max((val - v[cell]).abs());
                v[cell] = val;
            }
        }
    }

    let nv = 0.5 * (v[space.p1_index(0, 0, 0)] + v[space.p2_index(0, 0, 0)]);
    res = res.max((nv - v[0]).abs()).max(v[1].abs());
    v[0] = nv;
    v[1] = 0.0;
    res
}

fn check_dims(game: &PigGame, v: &ValueFunction) -> Result<(), SolveError> {
    if v.values.len() != game.space().num_states() {
        return Err(SolveError::DimensionMismatch {
            expected: game.space().num_states(),
            got: v.values.len(),
        });
    }
    Ok(())
}

/// One application of the backup operator: each state's new value is the
/// optimal one-step lookahead into `v` (max for player one's choices, min
/// for player two's, the forced continuation elsewhere, payoff constants
/// on winning totals, 0 at Final, and the fair-coin average at Initial).
#[allow(non_snake_case)]
pub fn apply_U(game: &PigGame, v: &ValueFunction) -> Result<ValueFunction, SolveError> {
    check_dims(game, v)?;
    let mut next = vec![0.0; v.values.len()];
    jacobi_sweep(game, &v.values, &mut next);
    Ok(ValueFunction { values: next })
}

/// Sup-norm of `apply_U(v) − v`, packaged as a report so callers can gate
/// policy extraction on externally produced tables.
pub fn fixed_point_report(
    game: &PigGame,
    v: &ValueFunction,
    tol: f64,
) -> Result<SolveReport, SolveError> {
    check_dims(game, v)?;
    if !(tol > 0.0) {
        return Err(SolveError::InvalidTolerance(tol));
    }
    let start = Instant::now();
    let mut next = vec![0.0; v.values.len()];
    let residual = jacobi_sweep(game, &v.values, &mut next);
    Ok(SolveReport {
        iterations: 1,
        final_residual: residual,
        wall_time: start.elapsed(),
        certified: residual < tol,
        tol,
    })
}

/// Iterate the backup operator from v ≡ 0 with Jacobi sweeps until the
/// sup-norm change drops below `tol`. If `max_iters` sweeps do not get
/// there, the best iterate is returned with `certified = false`.
pub fn value_iteration(
    game: &PigGame,
    tol: f64,
    max_iters: u64,
) -> Result<(ValueFunction, SolveReport), SolveError> {
    value_iteration_with(game, tol, max_iters, SweepMode::Jacobi)
}

/// [`value_iteration`] with an explicit sweep mode.
pub fn value_iteration_with(
    game: &PigGame,
    tol: f64,
    max_iters: u64,
    mode: SweepMode,
) -> Result<(ValueFunction, SolveReport), SolveError> {
    if !(tol > 0.0) {
        return Err(SolveError::InvalidTolerance(tol));
    }
    let n = game.space().num_states();
    let start = Instant::now();
    let mut v = vec![0.0f64; n];
    let mut iterations = 0u64;
    let mut residual = f64::INFINITY;
    match mode {
        SweepMode::Jacobi => {
            let mut next = vec![0.0f64; n];
            while iterations < max_iters {
                residual = jacobi_sweep(game, &v, &mut next);
                std::mem::swap(&mut v, &mut next);
                iterations += 1;
                if residual < tol {
                    break;
                }
            }
        }
        SweepMode::GaussSeidel => {
            while iterations < max_iters {
                residual = gauss_seidel_sweep(game, &mut v);
                iterations += 1;
                if residual < tol {
                    break;
                }
            }
        }
    }
    let report = SolveReport {
        iterations,
        final_residual: residual,
        wall_time: start.elapsed(),
        certified: residual < tol,
        tol,
    };
    Ok((ValueFunction { values: v }, report))
}

/// How the layer engine picks actions at decision states.
enum LayerMode<'a> {
    /// max for player one, min for player two (the game's optimum).
    Optimize,
    /// Fixed stationary choices per decision ordinal: player one's
    /// decisions from `p1`, player two's from `p2`.
    Fixed { p1: &'a [Action], p2: &'a [Action] },
}

/// Exact solve by backward induction over (α,β) layers in decreasing α+β.
///
/// Within a layer every value is an affine function of the two fresh-state
/// unknowns, which satisfy a 2×2 linear system solved in closed form. When
/// that system is singular (both fresh states feed each other with full
/// probability, which happens exactly when neither side can ever finish)
/// the bounded solution 0 is taken, matching the limit of value iteration
/// from 0; a singular system with a nonzero source has no bounded solution
/// and is rejected.
pub fn layered_solve(game: &PigGame) -> Result<ValueFunction, SolveError> {
    layered_engine(game, &LayerMode::Optimize, PayoffKind::GameValue)
}

/// Exact win probability of player one when both sides play fixed
/// stationary policies. Payoffs are the win indicator regardless of
/// variant. Used by head-to-head evaluation.
pub(crate) fn layered_chain(
    game: &PigGame,
    policy_p1: &Policy,
    policy_p2: &Policy,
) -> Result<ValueFunction, SolveError> {
    require_total(game, policy_p1)?;
    require_total(game, policy_p2)?;
    layered_engine(
        game,
        &LayerMode::Fixed { p1: &policy_p1.actions, p2: &policy_p2.actions },
        PayoffKind::WinIndicator,
    )
}

/// A policy must cover every decision state of the game it is played on.
pub(crate) fn require_total(game: &PigGame, policy: &Policy) -> Result<(), SolveError> {
    let expected = game.space().num_decision_states();
    if policy.actions.len() != expected {
        let first_missing = game
            .space()
            .decision_state_at(policy.actions.len().min(expected.saturating_sub(1)))
            .to_string();
        return Err(SolveError::PartialPolicy {
            expected,
            got: policy.actions.len(),
            first_missing,
        });
    }
    Ok(())
}

/// Per-layer working buffers, reused across layers.
struct LayerBufs {
    w1: Vec<f64>,
    w2: Vec<f64>,
    a1: Vec<f64>,
    b1: Vec<f64>,
    a2: Vec<f64>,
    b2: Vec<f64>,
    c1: Vec<Action>,
    c2: Vec<Action>,
}

fn layered_engine(
    game: &PigGame,
    mode: &LayerMode,
    kind: PayoffKind,
) -> Result<ValueFunction, SolveError> {
    let space = game.space();
    let t = space.config().target;
    let max_row = (0..t).map(|own| space.tau_cap(own) as usize + 1).max().unwrap();
    let mut v = vec![0.0f64; space.num_states()];
    let mut bufs = LayerBufs {
        w1: vec![0.0; max_row],
        w2: vec![0.0; max_row],
        a1: vec![0.0; max_row],
        b1: vec![0.0; max_row],
        a2: vec![0.0; max_row],
        b2: vec![0.0; max_row],
        c1: vec![Action::Roll; max_row],
        c2: vec![Action::Roll; max_row],
    };
    for sum in (0..=(2 * t - 2)).rev() {
        let lo = sum.saturating_sub(t - 1);
        let hi = sum.min(t - 1);
        for alpha in lo..=hi {
            let beta = sum - alpha;
            solve_layer(game, alpha, beta, mode, kind, &mut v, &mut bufs)?;
        }
    }
    v[0] = 0.5 * (v[space.p1_index(0, 0, 0)] + v[space.p2_index(0, 0, 0)]);
    v[1] = 0.0;
    Ok(ValueFunction { values: v })
}

/// Backward induction over one player's τ rows with the coupled fresh
/// value supplied numerically as `x_other`. Fills `w[0..=cap]`; when
/// `choices` is given, records the greedy action at each decision τ
/// (ties to Stop).
#[allow(clippy::too_many_arguments)]
fn induct_numeric(
    game: &PigGame,
    player: Player,
    alpha: u32,
    beta: u32,
    x_other: f64,
    kind: PayoffKind,
    v: &[f64],
    w: &mut [f64],
    mut choices: Option<&mut [Action]>,
) {
    let space = game.space();
    let config = game.config();
    let t = config.target;
    let inv = 1.0 / f64::from(config.die_faces);
    let own_score = match player {
        Player::One => alpha,
        Player::Two => beta,
    };
    let cap = space.tau_cap(own_score);
    let wv = win_value(config, player, alpha, beta, kind);
    for tau in (0..=cap).rev() {
        let total = own_score + tau;
        let val = if total >= t {
            wv
        } else {
            let mut sum = 0.0;
            let mut bust_n = 0u32;
            for face in 1..=config.die_faces {
                match roll_outcome(config, own_score, tau, face) {
                    RollOutcome::Bust => bust_n += 1,
                    RollOutcome::Continue(nt) => sum += w[nt as usize],
                }
            }
            let roll = (sum + f64::from(bust_n) * x_other) * inv;
            if tau == 0 {
                if game.stop_at_zero_allowed() {
                    let stop = x_other;
                    let pick_roll = better_for(player, roll, stop);
                    if let Some(c) = choices.as_deref_mut() {
                        c[0] = if pick_roll { Action::Roll } else { Action::Stop };
                    }
                    if pick_roll {
                        roll
                    } else {
                        stop
                    }
                } else {
                    roll
                }
            } else {
                let stop = match player {
                    Player::One => v[space.p2_index(total, beta, 0)],
                    Player::Two => v[space.p1_index(alpha, total, 0)],
                };
                let pick_roll = better_for(player, roll, stop);
                if let Some(c) = choices.as_deref_mut() {
                    c[tau as usize] = if pick_roll { Action::Roll } else { Action::Stop };
                }
                if pick_roll {
                    roll
                } else {
                    stop
                }
            }
        };
        w[tau as usize] = val;
    }
}

/// Strictly-better test: player one maximizes, player two minimizes; exact
/// ties go to Stop.
fn better_for(player: Player, roll: f64, stop: f64) -> bool {
    match player {
        Player::One => roll > stop,
        Player::Two => roll < stop,
    }
}

/// Backward induction with fixed choices, carrying each value as an
/// affine function a[τ] + b[τ]·x_other of the coupled fresh value.
#[allow(clippy::too_many_arguments)]
fn induct_affine(
    game: &PigGame,
    player: Player,
    alpha: u32,
    beta: u32,
    choices: &[Action],
    kind: PayoffKind,
    v: &[f64],
    a: &mut [f64],
    b: &mut [f64],
) {
    let space = game.space();
    let config = game.config();
    let t = config.target;
    let inv = 1.0 / f64::from(config.die_faces);
    let own_score = match player {
        Player::One => alpha,
        Player::Two => beta,
    };
    let cap = space.tau_cap(own_score);
    let wv = win_value(config, player, alpha, beta, kind);
    for tau in (0..=cap).rev() {
        let total = own_score + tau;
        if total >= t {
            a[tau as usize] = wv;
            b[tau as usize] = 0.0;
            continue;
        }
        let roll_coeffs = || {
            let mut sa = 0.0;
            let mut sb = 0.0;
            let mut bust_n = 0u32;
            for face in 1..=config.die_faces {
                match roll_outcome(config, own_score, tau, face) {
                    RollOutcome::Bust => bust_n += 1,
                    RollOutcome::Continue(nt) => {
                        sa += a[nt as usize];
                        sb += b[nt as usize];
                    }
                }
            }
            ((sa) * inv, (sb + f64::from(bust_n)) * inv)
        };
        let (av, bv) = if tau == 0 {
            if game.stop_at_zero_allowed() && choices[0] == Action::Stop {
                (0.0, 1.0)
            } else {
                roll_coeffs()
            }
        } else if choices[tau as usize] == Action::Stop {
            let stop = match player {
                Player::One => v[space.p2_index(total, beta, 0)],
                Player::Two => v[space.p1_index(alpha, total, 0)],
            };
            (stop, 0.0)
        } else {
            roll_coeffs()
        };
        a[tau as usize] = av;
        b[tau as usize] = bv;
    }
}

/// Solve the 2×2 coupling x1 = A + B·x2, x2 = C + D·x1 with B, D ∈ [0,1].
/// Singular means B·D = 1: each fresh state returns to the other with
/// full probability, so a bounded solution exists only with zero source,
/// and it is the all-zero one value iteration converges to.
fn couple(alpha: u32, beta: u32, a: f64, b: f64, c: f64, d: f64) -> Result<(f64, f64), SolveError> {
    let det = 1.0 - b * d;
    if det.abs() > 1e-12 {
        let x1 = (a + b * c) / det;
        let x2 = c + d * x1;
        Ok((x1, x2))
    } else {
        let source = a + b * c;
        if source.abs() <= 1e-9 * (1.0 + a.abs() + c.abs()) {
            Ok((0.0, c + d * 0.0))
        } else {
            Err(SolveError::DivergentLayer { alpha, beta })
        }
    }
}

fn fill_choices_from_policy(
    space: &StateSpace,
    player: Player,
    alpha: u32,
    beta: u32,
    actions: &[Action],
    out: &mut [Action],
) {
    let t = space.config().target;
    let own_score = match player {
        Player::One => alpha,
        Player::Two => beta,
    };
    for tau in 1..t.saturating_sub(own_score) {
        let state = State::Play { player, alpha, beta, tau };
        let ord = space.decision_ordinal(&state).expect("decision state");
        out[tau as usize] = actions[ord];
    }
}

fn solve_layer(
    game: &PigGame,
    alpha: u32,
    beta: u32,
    mode: &LayerMode,
    kind: PayoffKind,
    v: &mut [f64],
    bufs: &mut LayerBufs,
) -> Result<(), SolveError> {
    let space = game.space();
    let cap1 = space.tau_cap(alpha) as usize;
    let cap2 = space.tau_cap(beta) as usize;

    let (x1, x2) = match mode {
        LayerMode::Fixed { p1, p2 } => {
            fill_choices_from_policy(space, Player::One, alpha, beta, p1, &mut bufs.c1);
            fill_choices_from_policy(space, Player::Two, alpha, beta, p2, &mut bufs.c2);
            induct_affine(game, Player::One, alpha, beta, &bufs.c1, kind, v, &mut bufs.a1, &mut bufs.b1);
            induct_affine(game, Player::Two, alpha, beta, &bufs.c2, kind, v, &mut bufs.a2, &mut bufs.b2);
            couple(alpha, beta, bufs.a1[0], bufs.b1[0], bufs.a2[0], bufs.b2[0])?
        }
        LayerMode::Optimize => {
            // Phase 1: scalar iteration on the coupled fresh values. The
            // layer map is monotone and nonexpansive, so iterating from 0
            // converges monotonically; it stalls only where the exact
            // solution is 0 anyway.
            let mut x1 = 0.0f64;
            let mut x2 = 0.0f64;
            for _ in 0..200_000 {
                induct_numeric(game, Player::One, alpha, beta, x2, kind, v, &mut bufs.w1, None);
                let nx1 = bufs.w1[0];
                induct_numeric(game, Player::Two, alpha, beta, nx1, kind, v, &mut bufs.w2, None);
                let nx2 = bufs.w2[0];
                let scale = 1.0 + nx1.abs().max(nx2.abs());
                let done = (nx1 - x1).abs() <= 1e-10 * scale && (nx2 - x2).abs() <= 1e-10 * scale;
                x1 = nx1;
                x2 = nx2;
                if done {
                    break;
                }
            }
            // Phase 2: freeze the greedy choices, solve the affine system
            // exactly, and accept once the choices are self-consistent.
            let mut solved = None;
            for _ in 0..32 {
                induct_numeric(game, Player::One, alpha, beta, x2, kind, v, &mut bufs.w1, Some(&mut bufs.c1));
                induct_numeric(game, Player::Two, alpha, beta, x1, kind, v, &mut bufs.w2, Some(&mut bufs.c2));
                induct_affine(game, Player::One, alpha, beta, &bufs.c1, kind, v, &mut bufs.a1, &mut bufs.b1);
                induct_affine(game, Player::Two, alpha, beta, &bufs.c2, kind, v, &mut bufs.a2, &mut bufs.b2);
                let (nx1, nx2) = couple(alpha, beta, bufs.a1[0], bufs.b1[0], bufs.a2[0], bufs.b2[0])?;
                // Greedy choices at the exact solution: unchanged means the
                // affine values are the layer's true fixed point.
                induct_numeric(game, Player::One, alpha, beta, nx2, kind, v, &mut bufs.w1, None);
                induct_numeric(game, Player::Two, alpha, beta, nx1, kind, v, &mut bufs.w2, None);
                let consistent = (bufs.w1[0] - nx1).abs() <= 1e-12 * (1.0 + nx1.abs())
                    && (bufs.w2[0] - nx2).abs() <= 1e-12 * (1.0 + nx2.abs());
                x1 = nx1;
                x2 = nx2;
                if consistent {
                    solved = Some((nx1, nx2));
                    break;
                }
            }
            match solved {
                Some(pair) => pair,
                None => {
                    // Safeguard: settle numerically. Monotone iteration
                    // cannot cycle, so this terminates; it is only rarely
                    // reached.
                    let mut px1;
                    let mut px2;
                    loop {
                        px1 = x1;
                        px2 = x2;
                        induct_numeric(game, Player::One, alpha, beta, x2, kind, v, &mut bufs.w1, None);
                        x1 = bufs.w1[0];
                        induct_numeric(game, Player::Two, alpha, beta, x1, kind, v, &mut bufs.w2, None);
                        x2 = bufs.w2[0];
                        let scale = 1.0 + x1.abs().max(x2.abs());
                        if (x1 - px1).abs() <= 1e-15 * scale && (x2 - px2).abs() <= 1e-15 * scale {
                            break;
                        }
                    }
                    (x1, x2)
                }
            }
        }
    };

    // Write the layer's rows from the final affine coefficients where we
    // have them; otherwise recompute numerically at the settled coupling.
    match mode {
        LayerMode::Fixed { .. } => {
            let base1 = space.p1_index(alpha, beta, 0);
            for tau in 0..=cap1 {
                v[base1 + tau] = bufs.a1[tau] + bufs.b1[tau] * x2;
            }
            let base2 = space.p2_index(alpha, beta, 0);
            for tau in 0..=cap2 {
                v[base2 + tau] = bufs.a2[tau] + bufs.b2[tau] * x1;
            }
        }
        LayerMode::Optimize => {
            induct_numeric(game, Player::One, alpha, beta, x2, kind, v, &mut bufs.w1, None);
            induct_numeric(game, Player::Two, alpha, beta, x1, kind, v, &mut bufs.w2, None);
            let base1 = space.p1_index(alpha, beta, 0);
            v[base1..=base1 + cap1].copy_from_slice(&bufs.w1[..=cap1]);
            let base2 = space.p2_index(alpha, beta, 0);
            v[base2..=base2 + cap2].copy_from_slice(&bufs.w2[..=cap2]);
        }
    }
    Ok(())
}

/// Read the optimal pure stationary policy off a certified fixed point:
/// Stop wherever stopping is within 10·tol of rolling (the tie band errs
/// toward the risk-free action), mirrored for player two.
pub fn extract_policy(
    game: &PigGame,
    v: &ValueFunction,
    report: &SolveReport,
) -> Result<Policy, SolveError> {
    check_dims(game, v)?;
    if !report.certified {
        return Err(SolveError::Uncertified {
            residual: report.final_residual,
            tol: report.tol,
        });
    }
    let space = game.space();
    let config = *game.config();
    let tie_eps = 10.0 * report.tol;
    let inv = 1.0 / f64::from(config.die_faces);
    let values = &v.values;
    let actions: Vec<Action> = (0..space.num_decision_states())
        .into_par_iter()
        .map(|ord| {
            let state = space.decision_state_at(ord);
            let (player, alpha, beta, tau) = match state {
                State::Play { player, alpha, beta, tau } => (player, alpha, beta, tau),
                _ => unreachable!("decision ordinals are play states"),
            };
            let own_score = match player {
                Player::One => alpha,
                Player::Two => beta,
            };
            let total = own_score + tau;
            let (stop, bust_v) = match player {
                Player::One => (
                    values[space.p2_index(total, beta, 0)],
                    values[space.p2_index(alpha, beta, 0)],
                ),
                Player::Two => (
                    values[space.p1_index(alpha, total, 0)],
                    values[space.p1_index(alpha, beta, 0)],
                ),
            };
            let mut sum = 0.0;
            let mut bust_n = 0u32;
            for face in 1..=config.die_faces {
                match roll_outcome(&config, own_score, tau, face) {
                    RollOutcome::Bust => bust_n += 1,
                    RollOutcome::Continue(nt) => {
                        sum += match player {
                            Player::One => values[space.p1_index(alpha, beta, nt)],
                            Player::Two => values[space.p2_index(alpha, beta, nt)],
                        };
                    }
                }
            }
            let roll = (sum + f64::from(bust_n) * bust_v) * inv;
            let stop_wins = match player {
                Player::One => stop >= roll - tie_eps,
                Player::Two => stop <= roll + tie_eps,
            };
            if stop_wins {
                Action::Stop
            } else {
                Action::Roll
            }
        })
        .collect();
    Ok(Policy { config, actions, tol: report.tol, iterations: report.iterations })
}
