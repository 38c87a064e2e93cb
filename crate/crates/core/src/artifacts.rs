//! Stable on-disk formats for policies, value tables, and figure-style
//! policy maps.
//!
//! Every file carries a fingerprint of the rules configuration and the
//! solver tolerance, and loaders reject data whose embedded fingerprint
//! does not match its own metadata, so tables from different
//! configurations cannot be mixed silently. All exports are byte-exact
//! across runs for identical inputs.
//!
//! Policy maps follow the figure convention: columns are the mover's
//! banked score ascending, rows are the turn score τ descending, one
//! panel per fixed opponent score. Forced actions render in the same two
//! colors as chosen ones (gray rolls, black stops) and are distinguished
//! only in the text formats.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::game_model::Action;
use crate::pig::{GameConfig, Player, State, StateSpace};
use crate::solve::{Policy, ValueFunction};

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("opponent score {fixed} out of range for target {target}")]
    OpponentScoreOutOfRange { fixed: u32, target: u32 },
    #[error("unknown export format {0:?}, expected csv, pgm, or json")]
    UnknownFormat(String),
    #[error("malformed artifact: {0}")]
    Malformed(String),
    #[error("fingerprint mismatch: file says {found}, metadata hashes to {expected}")]
    FingerprintMismatch { expected: String, found: String },
    #[error("policy encodes action {0:?}, expected R or S")]
    BadActionCode(char),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Pgm,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = ArtifactError;

    fn from_str(s: &str) -> Result<Self, ArtifactError> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "pgm" => Ok(ExportFormat::Pgm),
            "json" => Ok(ExportFormat::Json),
            _ => Err(ArtifactError::UnknownFormat(s.to_string())),
        }
    }
}

/// Hash of the rules configuration and the solver tolerance. Everything a
/// table's correctness depends on goes in here; iteration counts and sweep
/// order do not affect the fixed point and stay out.
pub fn fingerprint(config: &GameConfig, tol: f64) -> String {
    let canon = format!(
        "dicerace.v1;variant={};target={};die_faces={};bust_face={};tol={:.16e}",
        config.variant.name(),
        config.target,
        config.die_faces,
        config.bust_face,
        tol
    );
    let mut hasher = Sha256::new();
    hasher.update(canon.as_bytes());
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        write!(hex, "{byte:02x}").unwrap();
    }
    hex
}

/// One cell of a policy map panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Roll,
    Stop,
    ForcedRoll,
    ForcedStop,
    NotAState,
}

impl Cell {
    /// Text code used in CSV and JSON exports.
    pub fn code(self) -> &'static str {
        match self {
            Cell::Roll => "R",
            Cell::Stop => "S",
            Cell::ForcedRoll => "FR",
            Cell::ForcedStop => "FS",
            Cell::NotAState => ".",
        }
    }

    /// Pixel value in PGM exports: rolls gray, stops black, non-states
    /// white.
    pub fn gray(self) -> u8 {
        match self {
            Cell::Roll | Cell::ForcedRoll => 128,
            Cell::Stop | Cell::ForcedStop => 0,
            Cell::NotAState => 255,
        }
    }
}

/// One figure panel: the mover's action over (banked score, turn score)
/// with the opponent's banked score held fixed.
#[derive(Debug, Clone)]
pub struct PolicyMapGrid {
    pub config: GameConfig,
    pub player: Player,
    pub fixed_opponent_score: u32,
    pub tol: f64,
    pub fingerprint: String,
    /// Row count; row 0 is the highest turn score, the last row is τ=0.
    pub rows: usize,
    /// Column count; column c is banked score c.
    pub cols: usize,
    cells: Vec<Cell>,
}

impl PolicyMapGrid {
    /// Cell at grid coordinates (row 0 = top = highest τ).
    pub fn cell(&self, row: usize, col: usize) -> Cell {
        self.cells[row * self.cols + col]
    }

    /// Cell by state coordinates.
    pub fn cell_at(&self, own: u32, tau: u32) -> Cell {
        let row = self.rows - 1 - tau as usize;
        self.cell(row, own as usize)
    }
}

/// Render one panel of `policy` for the given mover, opponent score fixed.
pub fn policy_map(
    policy: &Policy,
    player: Player,
    fixed_opponent_score: u32,
) -> Result<PolicyMapGrid, ArtifactError> {
    let config = policy.config;
    if fixed_opponent_score >= config.target {
        return Err(ArtifactError::OpponentScoreOutOfRange {
            fixed: fixed_opponent_score,
            target: config.target,
        });
    }
    let space = StateSpace::new(config)
        .map_err(|e| ArtifactError::Malformed(format!("policy carries a bad config: {e}")))?;
    let rows = space.tau_cap(0) as usize + 1;
    let cols = config.target as usize;
    let mut cells = Vec::with_capacity(rows * cols);
    for row in 0..rows {
        let tau = (rows - 1 - row) as u32;
        for own in 0..config.target {
            if tau > space.tau_cap(own) {
                cells.push(Cell::NotAState);
                continue;
            }
            let state = match player {
                Player::One => State::Play {
                    player: Player::One,
                    alpha: own,
                    beta: fixed_opponent_score,
                    tau,
                },
                Player::Two => State::Play {
                    player: Player::Two,
                    alpha: fixed_opponent_score,
                    beta: own,
                    tau,
                },
            };
            let cell = if space.is_win_state(&state) {
                Cell::ForcedStop
            } else if tau == 0 {
                Cell::ForcedRoll
            } else {
                match policy.action_at(&space, &state) {
                    Some(Action::Roll) => Cell::Roll,
                    Some(Action::Stop) => Cell::Stop,
                    _ => {
                        return Err(ArtifactError::Malformed(format!(
                            "no action recorded for decision state {state}"
                        )))
                    }
                }
            };
            cells.push(cell);
        }
    }
    Ok(PolicyMapGrid {
        config,
        player,
        fixed_opponent_score,
        tol: policy.tol,
        fingerprint: fingerprint(&config, policy.tol),
        rows,
        cols,
        cells,
    })
}

#[derive(Serialize)]
struct GridFile<'a> {
    format: &'static str,
    version: u32,
    fingerprint: &'a str,
    config: &'a GameConfig,
    player: u8,
    fixed_opponent_score: u32,
    tol: f64,
    rows: usize,
    cols: usize,
    row_order: &'static str,
    col_order: &'static str,
    legend: &'static str,
    grid: Vec<Vec<&'static str>>,
}

/// Serialize a panel. CSV: header row of banked scores, one row per τ.
/// PGM: binary P5, one pixel per cell, metadata in the comment line.
/// JSON: the grid plus full metadata.
pub fn export_policy_map(grid: &PolicyMapGrid, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Csv => {
            let mut out = String::new();
            out.push_str("tau");
            for col in 0..grid.cols {
                write!(out, ",{col}").unwrap();
            }
            out.push('\n');
            for row in 0..grid.rows {
                write!(out, "{}", grid.rows - 1 - row).unwrap();
                for col in 0..grid.cols {
                    out.push(',');
                    out.push_str(grid.cell(row, col).code());
                }
                out.push('\n');
            }
            out.into_bytes()
        }
        ExportFormat::Pgm => {
            let mut out = Vec::with_capacity(grid.rows * grid.cols + 128);
            let header = format!(
                "P5\n# dicerace policy map fingerprint={} player={} opponent={} tol={:.16e}\n{} {}\n255\n",
                grid.fingerprint,
                match grid.player {
                    Player::One => 1,
                    Player::Two => 2,
                },
                grid.fixed_opponent_score,
                grid.tol,
                grid.cols,
                grid.rows
            );
            out.extend_from_slice(header.as_bytes());
            out.extend((0..grid.rows * grid.cols).map(|i| grid.cells[i].gray()));
            out
        }
        ExportFormat::Json => {
            let file = GridFile {
                format: "dicerace-policy-map",
                version: 1,
                fingerprint: &grid.fingerprint,
                config: &grid.config,
                player: match grid.player {
                    Player::One => 1,
                    Player::Two => 2,
                },
                fixed_opponent_score: grid.fixed_opponent_score,
                tol: grid.tol,
                rows: grid.rows,
                cols: grid.cols,
                row_order: "tau descending",
                col_order: "own score ascending",
                legend: "R roll, S stop, FR forced roll, FS forced stop, . not a state",
                grid: (0..grid.rows)
                    .map(|r| (0..grid.cols).map(|c| grid.cell(r, c).code()).collect())
                    .collect(),
            };
            let mut bytes = serde_json::to_vec_pretty(&file).expect("static structure");
            bytes.push(b'\n');
            bytes
        }
    }
}

#[derive(Deserialize)]
struct ValueTableFile {
    format: String,
    version: u32,
    fingerprint: String,
    config: GameConfig,
    tol: f64,
    count: usize,
    values: Vec<f64>,
}

/// Serialize a value table as JSON with 17 significant digits per entry,
/// enough to reproduce each double exactly on load.
pub fn export_value_table(v: &ValueFunction, config: &GameConfig, tol: f64) -> Vec<u8> {
    let mut out = String::with_capacity(v.values.len() * 28 + 256);
    out.push_str("{\n  \"format\": \"dicerace-values\",\n  \"version\": 1,\n");
    write!(out, "  \"fingerprint\": \"{}\",\n", fingerprint(config, tol)).unwrap();
    write!(out, "  \"config\": {},\n", serde_json::to_string(config).expect("plain struct"))
        .unwrap();
    write!(out, "  \"tol\": {tol:.16e},\n").unwrap();
    write!(out, "  \"count\": {},\n", v.values.len()).unwrap();
    out.push_str("  \"values\": [\n");
    for (i, value) in v.values.iter().enumerate() {
        let sep = if i + 1 == v.values.len() { "" } else { "," };
        writeln!(out, "    {value:.16e}{sep}").unwrap();
    }
    out.push_str("  ]\n}\n");
    out.into_bytes()
}

/// Parse a value table, rejecting files whose fingerprint does not match
/// their own metadata.
pub fn load_value_table(bytes: &[u8]) -> Result<(ValueFunction, GameConfig, f64), ArtifactError> {
    let file: ValueTableFile = serde_json::from_slice(bytes)?;
    if file.format != "dicerace-values" || file.version != 1 {
        return Err(ArtifactError::Malformed(format!(
            "not a value table: format {:?} version {}",
            file.format, file.version
        )));
    }
    let expected = fingerprint(&file.config, file.tol);
    if file.fingerprint != expected {
        return Err(ArtifactError::FingerprintMismatch { expected, found: file.fingerprint });
    }
    if file.values.len() != file.count {
        return Err(ArtifactError::Malformed(format!(
            "count field says {}, file holds {} values",
            file.count,
            file.values.len()
        )));
    }
    Ok((ValueFunction { values: file.values }, file.config, file.tol))
}

#[derive(Deserialize)]
struct PolicyFile {
    format: String,
    version: u32,
    fingerprint: String,
    config: GameConfig,
    tol: f64,
    iterations: u64,
    actions: String,
}

/// Serialize a policy: metadata plus one letter per decision state in
/// ordinal order.
pub fn export_policy(policy: &Policy) -> Vec<u8> {
    let mut letters = String::with_capacity(policy.actions.len());
    for action in &policy.actions {
        letters.push(match action {
            Action::Roll => 'R',
            Action::Stop => 'S',
            Action::Wait => unreachable!("policies never store waits"),
        });
    }
    let mut out = String::with_capacity(letters.len() + 512);
    out.push_str("{\n  \"format\": \"dicerace-policy\",\n  \"version\": 1,\n");
    write!(out, "  \"fingerprint\": \"{}\",\n", fingerprint(&policy.config, policy.tol)).unwrap();
    write!(
        out,
        "  \"config\": {},\n",
        serde_json::to_string(&policy.config).expect("plain struct")
    )
    .unwrap();
    write!(out, "  \"tol\": {:.16e},\n", policy.tol).unwrap();
    write!(out, "  \"iterations\": {},\n", policy.iterations).unwrap();
    write!(out, "  \"actions\": \"{letters}\"\n").unwrap();
    out.push_str("}\n");
    out.into_bytes()
}

/// Parse a policy file, rejecting fingerprint mismatches and unknown
/// action codes.
pub fn load_policy(bytes: &[u8]) -> Result<Policy, ArtifactError> {
    let file: PolicyFile = serde_json::from_slice(bytes)?;
    if file.format != "dicerace-policy" || file.version != 1 {
        return Err(ArtifactError::Malformed(format!(
            "not a policy file: format {:?} version {}",
            file.format, file.version
        )));
    }
    let expected = fingerprint(&file.config, file.tol);
    if file.fingerprint != expected {
        return Err(ArtifactError::FingerprintMismatch { expected, found: file.fingerprint });
    }
    let mut actions = Vec::with_capacity(file.actions.len());
    for ch in file.actions.chars() {
        actions.push(match ch {
            'R' => Action::Roll,
            'S' => Action::Stop,
            other => return Err(ArtifactError::BadActionCode(other)),
        });
    }
    Ok(Policy { config: file.config, actions, tol: file.tol, iterations: file.iterations })
}
