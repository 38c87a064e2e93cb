//! Generic model of a finite two-player zero-sum stochastic game, plus an
//! executable transience certificate.
//!
//! A game here is a finite state set with a designated initial and final
//! state, per-state action lists for both players, a payoff `r(s, a, b)`
//! for the maximizing player, and a transition distribution per
//! `(state, action pair)`. The final state is absorbing with zero payoff;
//! total expected payoff until absorption is the objective.
//!
//! [`certify_transient`] decides, by a least fixpoint, whether play reaches
//! the final state with probability one under *every* strategy pair. Only
//! certified games have a unique bounded fixed point of the Bellman
//! operator, so solvers should gate on the certificate rather than iterate
//! blindly on a game that may never terminate.

use thiserror::Error;

/// A move available at a state. `Wait` is the placeholder move of the
/// non-acting player and of the initial and final states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Roll,
    Stop,
    Wait,
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Action::Roll => "Roll",
            Action::Stop => "Stop",
            Action::Wait => "Wait",
        })
    }
}

/// A finite two-player zero-sum stochastic game over dense state indices.
///
/// Implementations must keep the structural invariants checked by
/// [`validate_structure`]: nonempty action lists, transition lists with
/// positive probabilities summing to one, and an absorbing zero-payoff
/// final state.
pub trait Game: Sync {
    fn num_states(&self) -> usize;
    fn initial_state(&self) -> usize;
    fn final_state(&self) -> usize;

    /// Action lists `(player one, player two)` at `s`; both are nonempty.
    fn actions(&self, s: usize) -> (&[Action], &[Action]);

    /// Payoff to the maximizing player when `(a, b)` is played at `s`.
    fn payoff(&self, s: usize, a: Action, b: Action) -> f64;

    /// Calls `f(probability, successor)` for each entry of the transition
    /// distribution of `(s, a, b)`.
    fn for_each_successor(&self, s: usize, a: Action, b: Action, f: &mut dyn FnMut(f64, usize));
}

/// A game stored as explicit per-state tables. Intended for small models:
/// tests, counterexamples, and cross-checks of generator-backed games.
pub struct ExplicitGame {
    initial: usize,
    terminal: usize,
    actions1: Vec<Vec<Action>>,
    actions2: Vec<Vec<Action>>,
    /// Per state, row-major over (a-index, b-index).
    payoffs: Vec<Vec<f64>>,
    transitions: Vec<Vec<Vec<(f64, usize)>>>,
}

impl ExplicitGame {
    /// Creates a game of `n` states with every rule left unset. States
    /// start with empty action lists; fill them with [`Self::set_rule`].
    pub fn new(n: usize, initial: usize, terminal: usize) -> Self {
        assert!(initial < n && terminal < n, "designated states out of range");
        Self {
            initial,
            terminal,
            actions1: vec![Vec::new(); n],
            actions2: vec![Vec::new(); n],
            payoffs: vec![Vec::new(); n],
            transitions: vec![Vec::new(); n],
        }
    }

    /// Appends the rule for one action pair at `s`. Pairs must be added in
    /// row-major order: for each action of player one in turn, one entry
    /// per action of player two.
    pub fn set_rule(
        &mut self,
        s: usize,
        a: Action,
        b: Action,
        payoff: f64,
        successors: Vec<(f64, usize)>,
    ) {
        if !self.actions1[s].contains(&a) {
            self.actions1[s].push(a);
        }
        if !self.actions2[s].contains(&b) {
            self.actions2[s].push(b);
        }
        self.payoffs[s].push(payoff);
        self.transitions[s].push(successors);
    }

    /// Materializes any [`Game`] into explicit tables.
    pub fn from_game(game: &impl Game) -> Self {
        let n = game.num_states();
        let mut out = Self::new(n, game.initial_state(), game.final_state());
        for s in 0..n {
            let (acts1, acts2) = game.actions(s);
            for &a in acts1 {
                for &b in acts2 {
                    let mut successors = Vec::new();
                    game.for_each_successor(s, a, b, &mut |p, next| successors.push((p, next)));
                    out.set_rule(s, a, b, game.payoff(s, a, b), successors);
                }
            }
        }
        out
    }

    fn pair_index(&self, s: usize, a: Action, b: Action) -> usize {
        let ai = self.actions1[s].iter().position(|&x| x == a).expect("unknown action");
        let bi = self.actions2[s].iter().position(|&x| x == b).expect("unknown action");
        ai * self.actions2[s].len() + bi
    }
}

impl Game for ExplicitGame {
    fn num_states(&self) -> usize {
        self.actions1.len()
    }

    fn initial_state(&self) -> usize {
        self.initial
    }

    fn final_state(&self) -> usize {
        self.terminal
    }

    fn actions(&self, s: usize) -> (&[Action], &[Action]) {
        (&self.actions1[s], &self.actions2[s])
    }

    fn payoff(&self, s: usize, a: Action, b: Action) -> f64 {
        self.payoffs[s][self.pair_index(s, a, b)]
    }

    fn for_each_successor(&self, s: usize, a: Action, b: Action, f: &mut dyn FnMut(f64, usize)) {
        for &(p, next) in &self.transitions[s][self.pair_index(s, a, b)] {
            f(p, next);
        }
    }
}

/// Transition masses must sum to one within this slack; dice probabilities
/// are exact multiples of 1/6, so it only absorbs accumulation error.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Checks the structural invariants every [`Game`] must satisfy. Returns
/// one human-readable violation per failure; an empty list means the game
/// is well-formed. Violations are data, not errors: diagnostic tooling
/// reports them all rather than stopping at the first.
pub fn validate_structure(game: &impl Game) -> Vec<String> {
    let n = game.num_states();
    let terminal = game.final_state();
    let mut violations = Vec::new();
    if game.initial_state() >= n {
        violations.push(format!("initial state {} out of range", game.initial_state()));
    }
    if terminal >= n {
        violations.push(format!("final state {terminal} out of range"));
        return violations;
    }

    for s in 0..n {
        let (acts1, acts2) = game.actions(s);
        if acts1.is_empty() || acts2.is_empty() {
            violations.push(format!("state {s}: empty action list"));
            continue;
        }
        for &a in acts1 {
            for &b in acts2 {
                let r = game.payoff(s, a, b);
                if !r.is_finite() {
                    violations.push(format!("state {s} ({a},{b}): non-finite payoff {r}"));
                }
                if s == terminal && r != 0.0 {
                    violations.push(format!(
                        "final state {s} ({a},{b}): payoff {r}, must be 0"
                    ));
                }
                let mut mass = 0.0;
                let mut entries = 0usize;
                let mut bad: Option<String> = None;
                game.for_each_successor(s, a, b, &mut |p, next| {
                    entries += 1;
                    mass += p;
                    if bad.is_none() {
                        if !(p > 0.0 && p <= 1.0) {
                            bad = Some(format!(
                                "state {s} ({a},{b}): probability {p} outside (0,1]"
                            ));
                        } else if next >= n {
                            bad = Some(format!(
                                "state {s} ({a},{b}): successor {next} out of range"
                            ));
                        } else if s == terminal && next != terminal {
                            bad = Some(format!(
                                "final state {s} ({a},{b}): transition to {next}, must self-loop"
                            ));
                        }
                    }
                });
                if let Some(msg) = bad {
                    violations.push(msg);
                }
                if entries == 0 {
                    violations.push(format!("state {s} ({a},{b}): no transitions"));
                } else if (mass - 1.0).abs() > MASS_TOLERANCE {
                    violations.push(format!(
                        "state {s} ({a},{b}): transition mass {mass}, must be 1"
                    ));
                }
            }
        }
    }
    violations
}

/// Rank of states the certificate could not certify.
pub const UNCERTIFIED: u32 = u32::MAX;

/// Result of [`certify_transient`].
///
/// `rank[s]` is the fixpoint round at which `s` was certified: 0 for the
/// final state, and for every other certified state, every available action
/// pair has a positive-probability successor of strictly smaller rank.
/// That gives an explicit witness of geometric absorption: under any
/// strategy pair, from any certified state, the final state is reached
/// within `max_rank` steps with probability at least `p_min^max_rank`.
#[derive(Debug, Clone)]
pub struct TransienceReport {
    pub certified: bool,
    pub rank: Vec<u32>,
    pub max_rank: u32,
    /// States never certified, ascending; empty exactly when `certified`.
    pub offending_states: Vec<usize>,
}

#[derive(Debug, Error)]
#[error("game structure invalid ({n} violations; first: {first})", n = violations.len(), first = violations.first().map(String::as_str).unwrap_or(""))]
pub struct InvalidGame {
    pub violations: Vec<String>,
}

/// Decides whether the game terminates with probability one under every
/// strategy pair, by least fixpoint: the final state is certified at rank
/// 0, and a state is certified at rank `k` as soon as every available
/// action pair has a positive-probability successor certified at some rank
/// below `k`. The game is transient if and only if the fixpoint covers the
/// whole state space; otherwise the uncertified states are reported, and
/// from each of them some strategy pair keeps play away from the final
/// state forever.
pub fn certify_transient(game: &impl Game) -> Result<TransienceReport, InvalidGame> {
    let violations = validate_structure(game);
    if !violations.is_empty() {
        return Err(InvalidGame { violations });
    }

    let n = game.num_states();
    let terminal = game.final_state();
    let mut rank = vec![UNCERTIFIED; n];
    rank[terminal] = 0;
    let mut pending: Vec<usize> = (0..n).filter(|&s| s != terminal).collect();
    let mut fresh: Vec<usize> = Vec::new();
    let mut round: u32 = 0;

    loop {
        round += 1;
        fresh.clear();
        pending.retain(|&s| {
            let (acts1, acts2) = game.actions(s);
            let mut all_pairs_ok = true;
            'pairs: for &a in acts1 {
                for &b in acts2 {
                    let mut reachable = false;
                    game.for_each_successor(s, a, b, &mut |_p, next| {
                        // Probabilities are validated positive, so any
                        // listed successor witnesses positive probability.
                        reachable |= rank[next] < round;
                    });
                    if !reachable {
                        all_pairs_ok = false;
                        break 'pairs;
                    }
                }
            }
            if all_pairs_ok {
                fresh.push(s);
            }
            !all_pairs_ok
        });
        if fresh.is_empty() {
            break;
        }
        // Assign after the scan so the round sees only earlier ranks.
        for &s in &fresh {
            rank[s] = round;
        }
    }

    let max_rank = rank.iter().copied().filter(|&r| r != UNCERTIFIED).max().unwrap_or(0);
    Ok(TransienceReport {
        certified: pending.is_empty(),
        rank,
        max_rank,
        offending_states: pending,
    })
}
