//! Renders the optimal policy as figure-style panels: one image per fixed
//! opponent score, gray where the mover should roll, black where they
//! should stop, white outside the reachable grid.
//!
//!     cargo run --release --example policy_maps [TARGET] [OUT_DIR]
//!
//! Defaults: the race to 200, panels at opponent scores 0, 150, 180, 185
//! (the classic panel set), written as PGM and CSV into ./policy_maps.

use std::path::PathBuf;

use dicerace::artifacts::{export_policy_map, policy_map, Cell, ExportFormat};
use dicerace::pig::{GameConfig, PigGame, Player};
use dicerace::solve::{default_tolerance, extract_policy, fixed_point_report, layered_solve};

fn main() {
    let mut args = std::env::args().skip(1);
    let target: u32 = args.next().map(|s| s.parse().expect("target")).unwrap_or(200);
    let out_dir = PathBuf::from(args.next().unwrap_or_else(|| "policy_maps".to_string()));

    let config = GameConfig { target, ..GameConfig::default() };
    let game = PigGame::new(config).expect("valid configuration");
    let tol = default_tolerance(&config);

    // the layered pass solves exactly; one backup sweep certifies it
    let v = layered_solve(&game).expect("solvable");
    let report = fixed_point_report(&game, &v, tol).expect("certifiable");
    assert!(report.certified, "residual {:.3e}", report.final_residual);
    let policy = extract_policy(&game, &v, &report).expect("certified report");

    std::fs::create_dir_all(&out_dir).expect("output directory");
    let panels: Vec<u32> =
        [0u32, 150, 180, 185].iter().copied().filter(|&b| b < target).collect();
    println!("race to {target}: panels at opponent scores {panels:?}");
    for beta in panels {
        let grid = policy_map(&policy, Player::One, beta).expect("score in range");
        let mut rolls = 0u32;
        let mut stops = 0u32;
        for row in 0..grid.rows {
            for col in 0..grid.cols {
                match grid.cell(row, col) {
                    Cell::Roll => rolls += 1,
                    Cell::Stop => stops += 1,
                    _ => {}
                }
            }
        }
        for (format, ext) in [(ExportFormat::Pgm, "pgm"), (ExportFormat::Csv, "csv")] {
            let path = out_dir.join(format!("map_p1_b{beta}.{ext}"));
            std::fs::write(&path, export_policy_map(&grid, format)).expect("writable");
            println!("  wrote {}", path.display());
        }
        println!(
            "  opponent at {beta:>3}: {rolls} roll cells, {stops} stop cells among the choices"
        );
    }
    println!(
        "note: past opponent score 186 the stop region vanishes; render a panel at 187 to see \
         an all-gray choice region"
    );
}
