//! Walks the three rule variants side by side at a small target: win
//! probabilities for the classic race, the exact-target deadlock that
//! breaks transience, and expected margins in the maximal-difference
//! game.
//!
//!     cargo run --release --example variants_tour [TARGET]

use dicerace::pig::{GameConfig, PigGame, Player, State, Variant};
use dicerace::solve::layered_solve;

fn main() {
    let target: u32 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("target"))
        .unwrap_or(60);

    println!("=== classic: first to {target} wins ===");
    let classic = GameConfig { target, ..GameConfig::default() };
    let game = PigGame::new(classic).expect("valid configuration");
    let v = layered_solve(&game).expect("solvable");
    let space = game.space();
    let holder = v.values[space.p1_index(0, 0, 0)];
    println!("  value before the seat coin  {:.9}", v.values[0]);
    println!("  value holding the die       {holder:.9}");
    println!("  first-mover edge            {:.4} percentage points", (holder - 0.5) * 100.0);

    println!("=== exact target: overshooting busts ===");
    let exact = GameConfig { variant: Variant::ExactTarget, target, ..GameConfig::default() };
    let game = PigGame::new(exact).expect("valid configuration");
    let v = layered_solve(&game).expect("solvable");
    let space = game.space();
    println!("  value holding the die       {:.9}", v.values[space.p1_index(0, 0, 0)]);
    let gap = target - 1;
    println!("  the deadlock: both players banked at {gap}, needing exactly 1, minimum face 2");
    for (state, win_p) in [
        (State::Play { player: Player::One, alpha: gap, beta: gap, tau: 0 }, "mover"),
        (State::Play { player: Player::Two, alpha: gap, beta: gap, tau: 0 }, "waiter"),
    ] {
        let value = v.at(space, &state).unwrap();
        println!("    {state} as {win_p}: win probability {value:.1}");
    }
    println!("    neither side can ever finish; the pair cycles forever and both values are 0");
    let mobile = State::Play { player: Player::One, alpha: 0, beta: gap, tau: 0 };
    println!(
        "    {mobile}: win probability {:.9} (the mobile side retries until it lands exactly)",
        v.at(space, &mobile).unwrap()
    );

    println!("=== maximal difference: score margin is the prize ===");
    let maxdiff = GameConfig { variant: Variant::MaxDiff, target, ..GameConfig::default() };
    let game = PigGame::new(maxdiff).expect("valid configuration");
    let v = layered_solve(&game).expect("solvable");
    let space = game.space();
    let margin = v.values[space.p1_index(0, 0, 0)];
    println!("  value before the seat coin  {:+.6} (antisymmetry makes it 0)", v.values[0]);
    println!("  expected margin with die    {margin:+.4} points");
    println!(
        "  expected margin waiting     {:+.4} points",
        v.values[space.p2_index(0, 0, 0)]
    );
}
