//! Rules of the dice race game family.
//!
//! Two players race to a target score. On their turn the mover repeatedly
//! rolls a die: scoring faces add their value to the turn score, the bust
//! face ends the turn losing the turn score, and stopping banks the turn
//! score and passes the die. Variants change only the winning condition:
//!
//! * [`Variant::Classic`]: first player whose banked plus turn score
//!   reaches the target wins (payoff 1 / 0).
//! * [`Variant::ExactTarget`]: the total must hit the target exactly; a
//!   roll that would overshoot ends the turn like a bust.
//! * [`Variant::MaxDiff`]: classic reaching rule, but the winner scores
//!   the margin: `target − loser's banked score`.
//!
//! States are `(mover, α, β, τ)` with `α`, `β` the banked scores of player
//! one and two and `τ` the mover's turn score, plus the `Initial` state
//! (fair coin for who moves first) and the absorbing `Final` state.
//! [`StateSpace`] lays these out densely so that a player-two state and its
//! role-swapped player-one twin sit exactly `size1` indices apart, making
//! mirror-symmetry checks O(1).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game_model::{Action, Game};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Classic,
    #[serde(rename = "exact")]
    ExactTarget,
    MaxDiff,
}

impl Variant {
    /// Canonical lowercase name, stable across releases; used in file
    /// metadata and fingerprints.
    pub fn name(self) -> &'static str {
        match self {
            Variant::Classic => "classic",
            Variant::ExactTarget => "exact",
            Variant::MaxDiff => "maxdiff",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "classic" => Ok(Variant::Classic),
            "exact" => Ok(Variant::ExactTarget),
            "maxdiff" => Ok(Variant::MaxDiff),
            _ => Err(ConfigError::UnknownVariant(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

/// Rules parameters. The defaults are the race to 200 with a six-sided die
/// whose ace busts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    pub variant: Variant,
    pub target: u32,
    pub die_faces: u32,
    /// The single face scoring zero and ending the turn.
    pub bust_face: u32,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self { variant: Variant::Classic, target: 200, die_faces: 6, bust_face: 1 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("unknown variant {0:?}, expected classic, exact, or maxdiff")]
    UnknownVariant(String),
    #[error("die must have at least 2 faces, got {0}")]
    TooFewFaces(u32),
    #[error("bust face {bust_face} outside 1..={die_faces}")]
    BustFaceOutOfRange { bust_face: u32, die_faces: u32 },
    #[error("target {target} too small: must be at least 2·die_faces = {min}")]
    TargetTooSmall { target: u32, min: u32 },
}

impl GameConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.die_faces < 2 {
            return Err(ConfigError::TooFewFaces(self.die_faces));
        }
        if self.bust_face < 1 || self.bust_face > self.die_faces {
            return Err(ConfigError::BustFaceOutOfRange {
                bust_face: self.bust_face,
                die_faces: self.die_faces,
            });
        }
        // Keeps every turn a real gamble: no single roll can span the race.
        if self.target < 2 * self.die_faces {
            return Err(ConfigError::TargetTooSmall {
                target: self.target,
                min: 2 * self.die_faces,
            });
        }
        Ok(())
    }

    /// Largest face value that scores.
    pub fn max_scoring_face(&self) -> u32 {
        if self.bust_face == self.die_faces {
            self.die_faces - 1
        } else {
            self.die_faces
        }
    }

    /// Winning totals: reaching the target, exactly so for `ExactTarget`
    /// (overshooting states do not exist in that variant).
    pub fn is_winning_total(&self, total: u32) -> bool {
        total >= self.target
    }
}

/// What one die face does to the mover's turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RollOutcome {
    /// Turn over with nothing banked: the bust face, or an overshooting
    /// face under `ExactTarget`.
    Bust,
    /// Turn continues (or reaches a winning total) with this turn score.
    Continue(u32),
}

/// Single source of truth for what rolling `face` does at banked score
/// `own` and turn score `tau`. Both the transition generator and the game
/// simulator go through here.
pub fn roll_outcome(config: &GameConfig, own: u32, tau: u32, face: u32) -> RollOutcome {
    if face == config.bust_face {
        return RollOutcome::Bust;
    }
    if config.variant == Variant::ExactTarget && own + tau + face > config.target {
        return RollOutcome::Bust;
    }
    RollOutcome::Continue(tau + face)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum State {
    Initial,
    Final,
    Play { player: Player, alpha: u32, beta: u32, tau: u32 },
}

impl State {
    /// Banked score of the mover, then of the opponent.
    pub fn mover_scores(&self) -> Option<(u32, u32)> {
        match *self {
            State::Play { player: Player::One, alpha, beta, .. } => Some((alpha, beta)),
            State::Play { player: Player::Two, alpha, beta, .. } => Some((beta, alpha)),
            _ => None,
        }
    }
}

impl std::fmt::Display for State {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            State::Initial => f.write_str("Initial"),
            State::Final => f.write_str("Final"),
            State::Play { player, alpha, beta, tau } => {
                let j = if player == Player::One { 1 } else { 2 };
                write!(f, "({j},{alpha},{beta},{tau})")
            }
        }
    }
}

const WAIT_ONLY: &[Action] = &[Action::Wait];
const ROLL_ONLY: &[Action] = &[Action::Roll];
const STOP_ONLY: &[Action] = &[Action::Stop];
// Stop listed first so first-index tie-breaking favors the safe action.
const STOP_OR_ROLL: &[Action] = &[Action::Stop, Action::Roll];

/// Dense enumeration of a variant's states.
///
/// Layout: index 0 is `Initial`, 1 is `Final`. Player-one states follow,
/// grouped by α (the mover's score), then β, then τ, with the τ range per
/// mover score given by [`Self::tau_cap`]. Player-two states repeat the
/// same layout with the roles swapped (grouped by β, then α, then τ), so
/// `index(2,α,β,τ) = index(1,β,α,τ) + size1`: the mirror map is a fixed
/// offset.
#[derive(Debug, Clone)]
pub struct StateSpace {
    config: GameConfig,
    /// tau_cap[own]: largest τ enumerated for a mover banked at `own`.
    tau_cap: Vec<u32>,
    /// offset1[m] = states before mover score `m` within one player block;
    /// offset1[target] = size1.
    offset1: Vec<usize>,
    /// decision_offset[m] = decision states before mover score `m` within
    /// one player block.
    decision_offset: Vec<usize>,
    size1: usize,
    decisions1: usize,
}

impl StateSpace {
    pub fn new(config: GameConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let target = config.target as usize;
        let mut tau_cap = Vec::with_capacity(target);
        let mut offset1 = Vec::with_capacity(target + 1);
        let mut decision_offset = Vec::with_capacity(target + 1);
        let mut size = 0usize;
        let mut decisions = 0usize;
        for own in 0..config.target {
            offset1.push(size);
            decision_offset.push(decisions);
            let cap = match config.variant {
                // A roll from τ = target−1−own can add at most the largest
                // scoring face; beyond that no state is reachable.
                Variant::Classic | Variant::MaxDiff => {
                    config.target - 1 - own + config.max_scoring_face()
                }
                Variant::ExactTarget => config.target - own,
            };
            tau_cap.push(cap);
            size += target * (cap as usize + 1);
            decisions += target * (config.target - 1 - own) as usize;
        }
        offset1.push(size);
        decision_offset.push(decisions);
        Ok(Self { config, tau_cap, offset1, decision_offset, size1: size, decisions1: decisions })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn num_states(&self) -> usize {
        2 + 2 * self.size1
    }

    pub fn initial_index(&self) -> usize {
        0
    }

    pub fn final_index(&self) -> usize {
        1
    }

    /// Number of player-one states (player two has the same count).
    pub fn size1(&self) -> usize {
        self.size1
    }

    /// Largest enumerated τ for a mover banked at `own`.
    pub fn tau_cap(&self, own: u32) -> u32 {
        self.tau_cap[own as usize]
    }

    /// Index of the player-one state (1,α,β,τ). Unchecked arithmetic; the
    /// caller guarantees the coordinates are in range.
    #[inline]
    pub fn p1_index(&self, alpha: u32, beta: u32, tau: u32) -> usize {
        debug_assert!(tau <= self.tau_cap[alpha as usize]);
        2 + self.offset1[alpha as usize]
            + beta as usize * (self.tau_cap[alpha as usize] as usize + 1)
            + tau as usize
    }

    /// Index of the player-two state (2,α,β,τ).
    #[inline]
    pub fn p2_index(&self, alpha: u32, beta: u32, tau: u32) -> usize {
        debug_assert!(tau <= self.tau_cap[beta as usize]);
        2 + self.size1
            + self.offset1[beta as usize]
            + alpha as usize * (self.tau_cap[beta as usize] as usize + 1)
            + tau as usize
    }

    /// Index of the state with the players' roles swapped: play states map
    /// to their twin in the other block, Initial and Final to themselves.
    #[inline]
    pub fn mirror_index(&self, index: usize) -> usize {
        if index < 2 {
            index
        } else if index < 2 + self.size1 {
            index + self.size1
        } else {
            index - self.size1
        }
    }

    pub fn index_of(&self, state: &State) -> Option<usize> {
        match *state {
            State::Initial => Some(0),
            State::Final => Some(1),
            State::Play { player, alpha, beta, tau } => {
                if alpha >= self.config.target || beta >= self.config.target {
                    return None;
                }
                let own = match player {
                    Player::One => alpha,
                    Player::Two => beta,
                };
                if tau > self.tau_cap[own as usize] {
                    return None;
                }
                Some(match player {
                    Player::One => self.p1_index(alpha, beta, tau),
                    Player::Two => self.p2_index(alpha, beta, tau),
                })
            }
        }
    }

    pub fn state_at(&self, index: usize) -> State {
        assert!(index < self.num_states(), "state index {index} out of range");
        if index == 0 {
            return State::Initial;
        }
        if index == 1 {
            return State::Final;
        }
        let mut i = index - 2;
        let player = if i < self.size1 {
            Player::One
        } else {
            i -= self.size1;
            Player::Two
        };
        // offset1 is strictly increasing; find the mover score block.
        let own = self.offset1.partition_point(|&o| o <= i) as u32 - 1;
        let rem = i - self.offset1[own as usize];
        let row = self.tau_cap[own as usize] as usize + 1;
        let other = (rem / row) as u32;
        let tau = (rem % row) as u32;
        match player {
            Player::One => State::Play { player, alpha: own, beta: other, tau },
            Player::Two => State::Play { player, alpha: other, beta: own, tau },
        }
    }

    /// Available actions per Table-1 rules: the mover must roll on a fresh
    /// turn, must stop on a winning total (the only way to overshoot-proof
    /// `ExactTarget` is that its winning total is exact), and chooses
    /// freely in between. The non-mover waits.
    pub fn action_sets(&self, state: &State) -> (&'static [Action], &'static [Action]) {
        match *state {
            State::Initial | State::Final => (WAIT_ONLY, WAIT_ONLY),
            State::Play { player, tau, .. } => {
                let (own, _) = state.mover_scores().expect("play state");
                let mover = if tau == 0 {
                    ROLL_ONLY
                } else if own + tau >= self.config.target {
                    STOP_ONLY
                } else {
                    STOP_OR_ROLL
                };
                match player {
                    Player::One => (mover, WAIT_ONLY),
                    Player::Two => (WAIT_ONLY, mover),
                }
            }
        }
    }

    /// True when the mover holds a winning total.
    pub fn is_win_state(&self, state: &State) -> bool {
        match *state {
            State::Play { tau, .. } => {
                let (own, _) = state.mover_scores().expect("play state");
                self.config.is_winning_total(own + tau)
            }
            _ => false,
        }
    }

    /// Total number of decision states (mover has both Roll and Stop):
    /// `0 < τ < target − own`, for both players.
    pub fn num_decision_states(&self) -> usize {
        2 * self.decisions1
    }

    /// Player one's share of the decision states.
    pub fn num_decision_states_p1(&self) -> usize {
        self.decisions1
    }

    /// Dense ordinal of a decision state (player-one block first), or
    /// `None` for forced and non-play states.
    pub fn decision_ordinal(&self, state: &State) -> Option<usize> {
        let (own, other) = state.mover_scores()?;
        let tau = match *state {
            State::Play { tau, .. } => tau,
            _ => return None,
        };
        if other >= self.config.target || tau == 0 || own + tau >= self.config.target {
            return None;
        }
        let width = (self.config.target - 1 - own) as usize;
        let within = self.decision_offset[own as usize] + other as usize * width + tau as usize - 1;
        match *state {
            State::Play { player: Player::One, .. } => Some(within),
            State::Play { player: Player::Two, .. } => Some(self.decisions1 + within),
            _ => None,
        }
    }

    /// Inverse of [`Self::decision_ordinal`].
    pub fn decision_state_at(&self, ordinal: usize) -> State {
        assert!(ordinal < self.num_decision_states(), "decision ordinal out of range");
        let (player, mut i) = if ordinal < self.decisions1 {
            (Player::One, ordinal)
        } else {
            (Player::Two, ordinal - self.decisions1)
        };
        let own = self.decision_offset.partition_point(|&o| o <= i) as u32 - 1;
        i -= self.decision_offset[own as usize];
        let width = (self.config.target - 1 - own) as usize;
        let other = (i / width) as u32;
        let tau = (i % width) as u32 + 1;
        match player {
            Player::One => State::Play { player, alpha: own, beta: other, tau },
            Player::Two => State::Play { player, alpha: other, beta: own, tau },
        }
    }
}

/// The dice race as a stochastic game over the dense state enumeration.
pub struct PigGame {
    space: StateSpace,
    /// Diagnostic switch: permit Stop on a fresh turn. This breaks
    /// transience (two facing fresh states can pass the die forever), and
    /// exists to demonstrate that the certificate catches it.
    allow_stop_at_zero: bool,
}

impl PigGame {
    pub fn new(config: GameConfig) -> Result<Self, ConfigError> {
        Ok(Self { space: StateSpace::new(config)?, allow_stop_at_zero: false })
    }

    /// Rule mutant allowing Stop at τ = 0. Not a real variant: the
    /// transience certificate rejects it, which is the point.
    #[doc(hidden)]
    pub fn with_stop_at_zero(config: GameConfig) -> Result<Self, ConfigError> {
        Ok(Self { space: StateSpace::new(config)?, allow_stop_at_zero: true })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn config(&self) -> &GameConfig {
        &self.space.config
    }

    pub(crate) fn stop_at_zero_allowed(&self) -> bool {
        self.allow_stop_at_zero
    }

    fn mover_actions(&self, own: u32, tau: u32) -> &'static [Action] {
        if own + tau >= self.config().target {
            STOP_ONLY
        } else if tau == 0 {
            if self.allow_stop_at_zero {
                STOP_OR_ROLL
            } else {
                ROLL_ONLY
            }
        } else {
            STOP_OR_ROLL
        }
    }

    /// Transition distribution as exact counts of 1/die_faces units:
    /// calls `f(numerator, successor)`. The numerators of one distribution
    /// always sum to `die_faces`, which keeps the floating-point masses'
    /// error at a few ulps. The Initial state's fair coin is not a die
    /// roll and has no rational form here; query it via the `Game` trait.
    pub fn for_each_successor_rational(
        &self,
        s: usize,
        a: Action,
        b: Action,
        f: &mut dyn FnMut(u32, usize),
    ) {
        let space = &self.space;
        let config = self.config();
        let state = space.state_at(s);
        match state {
            State::Initial => panic!("Initial state has no rational transition form"),
            State::Final => f(config.die_faces, 1),
            State::Play { player, alpha, beta, tau } => {
                let (own, _) = state.mover_scores().expect("play state");
                let mover_action = match player {
                    Player::One => a,
                    Player::Two => b,
                };
                if space.is_win_state(&state) {
                    debug_assert_eq!(mover_action, Action::Stop);
                    f(config.die_faces, 1);
                    return;
                }
                match mover_action {
                    Action::Stop => {
                        debug_assert!(tau > 0 || self.allow_stop_at_zero);
                        let next = match player {
                            Player::One => space.p2_index(alpha + tau, beta, 0),
                            Player::Two => space.p1_index(alpha, beta + tau, 0),
                        };
                        f(config.die_faces, next);
                    }
                    Action::Roll => {
                        let mut bust = 0u32;
                        for face in 1..=config.die_faces {
                            match roll_outcome(config, own, tau, face) {
                                RollOutcome::Bust => bust += 1,
                                RollOutcome::Continue(new_tau) => {
                                    let next = match player {
                                        Player::One => space.p1_index(alpha, beta, new_tau),
                                        Player::Two => space.p2_index(alpha, beta, new_tau),
                                    };
                                    f(1, next);
                                }
                            }
                        }
                        if bust > 0 {
                            let next = match player {
                                Player::One => space.p2_index(alpha, beta, 0),
                                Player::Two => space.p1_index(alpha, beta, 0),
                            };
                            f(bust, next);
                        }
                    }
                    Action::Wait => unreachable!("mover cannot wait"),
                }
            }
        }
    }
}

impl Game for PigGame {
    fn num_states(&self) -> usize {
        self.space.num_states()
    }

    fn initial_state(&self) -> usize {
        0
    }

    fn final_state(&self) -> usize {
        1
    }

    fn actions(&self, s: usize) -> (&[Action], &[Action]) {
        let state = self.space.state_at(s);
        match state {
            State::Initial | State::Final => (WAIT_ONLY, WAIT_ONLY),
            State::Play { player, tau, .. } => {
                let (own, _) = state.mover_scores().expect("play state");
                let mover = self.mover_actions(own, tau);
                match player {
                    Player::One => (mover, WAIT_ONLY),
                    Player::Two => (WAIT_ONLY, mover),
                }
            }
        }
    }

    fn payoff(&self, s: usize, _a: Action, _b: Action) -> f64 {
        let state = self.space.state_at(s);
        if !self.space.is_win_state(&state) {
            return 0.0;
        }
        let config = self.config();
        match (state, config.variant) {
            (State::Play { player: Player::One, beta, .. }, Variant::MaxDiff) => {
                f64::from(config.target) - f64::from(beta)
            }
            (State::Play { player: Player::Two, alpha, .. }, Variant::MaxDiff) => {
                f64::from(alpha) - f64::from(config.target)
            }
            (State::Play { player: Player::One, .. }, _) => 1.0,
            (State::Play { player: Player::Two, .. }, _) => 0.0,
            _ => unreachable!(),
        }
    }

    fn for_each_successor(&self, s: usize, a: Action, b: Action, f: &mut dyn FnMut(f64, usize)) {
        if s == 0 {
            f(0.5, self.space.p1_index(0, 0, 0));
            f(0.5, self.space.p2_index(0, 0, 0));
            return;
        }
        let denom = f64::from(self.config().die_faces);
        self.for_each_successor_rational(s, a, b, &mut |num, next| {
            f(f64::from(num) / denom, next);
        });
    }
}
