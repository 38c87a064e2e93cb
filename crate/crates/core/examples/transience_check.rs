//! Runs the transience certifier across the rule variants and the
//! stop-at-zero mutant. The classic and maximal-difference races certify;
//! the exact-target race does not, because two players stuck at
//! target−1 with the gap busted away pass the die forever; the mutant is
//! rejected because both players can decline to play at all.
//!
//!     cargo run --release --example transience_check [TARGET]
//!
//! The default target keeps the run under a few seconds; pass 200 to
//! reproduce the full-size certificates.

use dicerace::game_model::certify_transient;
use dicerace::pig::{GameConfig, PigGame, Variant};

fn main() {
    let target: u32 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("target"))
        .unwrap_or(50);

    for variant in [Variant::Classic, Variant::ExactTarget, Variant::MaxDiff] {
        let config = GameConfig { variant, target, ..GameConfig::default() };
        let game = PigGame::new(config).expect("valid configuration");
        let report = certify_transient(&game).expect("structurally valid");
        print!(
            "{variant:<8} target {target}: {} states, ",
            game.space().num_states()
        );
        if report.certified {
            println!("certified transient, longest certification chain {}", report.max_rank);
        } else {
            println!("NOT transient, {} states uncertified:", report.offending_states.len());
            for &idx in report.offending_states.iter().take(4) {
                println!("    {}", game.space().state_at(idx));
            }
            if report.offending_states.len() > 4 {
                println!("    ... and {} more", report.offending_states.len() - 4);
            }
            println!(
                "    every listed state is the exact-gap deadlock or feeds it: the mover needs \
                 precisely the busted distance and can never bank again"
            );
        }
    }

    let mutant = PigGame::with_stop_at_zero(GameConfig {
        target,
        ..GameConfig::default()
    })
    .expect("valid configuration");
    let report = certify_transient(&mutant).expect("structurally valid");
    println!(
        "mutant (stop allowed at τ=0): certified={} with {} uncertified states; both players \
         declining to roll stalls the race forever",
        report.certified,
        report.offending_states.len()
    );
}
