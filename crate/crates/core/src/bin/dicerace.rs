//! Command-line front end: solve, export, simulate, evaluate, validate.
//!
//! Exit codes: 0 success, 1 general failure, 2 bad flags (including an
//! unknown variant), 3 unreadable or mismatched input files, 4 game not
//! certified transient (or solve not converged). Errors print one
//! machine-parsable line: `error: <kind>: <detail>`.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use dicerace::artifacts::{
    export_policy, export_policy_map, export_value_table, fingerprint, load_policy, policy_map,
    ArtifactError, ExportFormat,
};
use dicerace::baselines::{hold_at_policy, min_expected_turns, BaselineError};
use dicerace::game_model::certify_transient;
use dicerace::matchup::{
    exact_matchup, simulate_matchup_seated, EvalMethod, MatchupError, SeatRule, RNG_ID,
};
use dicerace::pig::{ConfigError, GameConfig, PigGame, Player, Variant};
use dicerace::solve::{
    default_tolerance, extract_policy, value_iteration_with, Policy, SolveError, SweepMode,
};

#[derive(Parser)]
#[command(
    name = "dicerace",
    version,
    about = "Solver and analysis toolkit for turn-based dice race games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Policy cache directory (default: $DICERACE_CACHE_DIR, then the
    /// system temp directory)
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a configuration and write the optimal policy
    Solve(SolveCmd),
    /// Render policy map panels at fixed opponent scores
    Export(ExportCmd),
    /// Evaluate two policies exactly by chain analysis
    Evaluate(DuelCmd),
    /// Play two policies against each other over seeded games
    Simulate(SimulateCmd),
    /// Check structure and certify transience
    Validate(ValidateCmd),
}

fn parse_variant(s: &str) -> Result<Variant, ConfigError> {
    s.parse()
}

fn parse_format(s: &str) -> Result<ExportFormat, ArtifactError> {
    s.parse()
}

#[derive(Args)]
struct RulesArgs {
    /// classic, exact, or maxdiff
    #[arg(long, default_value = "classic", value_parser = parse_variant)]
    variant: Variant,
    #[arg(long, default_value_t = 200)]
    target: u32,
    #[arg(long, default_value_t = 6)]
    die_faces: u32,
    #[arg(long, default_value_t = 1)]
    bust_face: u32,
}

impl RulesArgs {
    fn config(&self) -> GameConfig {
        GameConfig {
            variant: self.variant,
            target: self.target,
            die_faces: self.die_faces,
            bust_face: self.bust_face,
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Convergence tolerance (default: variant-scaled 1e-10)
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    max_iters: u64,
    /// Sweep order: jacobi or seidel
    #[arg(long, default_value = "jacobi")]
    sweep: String,
    /// Proceed even when the game is not certified transient
    #[arg(long)]
    allow_uncertified: bool,
}

#[derive(Args)]
struct SolveCmd {
    #[command(flatten)]
    rules: RulesArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Policy output path (the cache receives a copy either way)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the full value table here (JSON)
    #[arg(long)]
    values: Option<PathBuf>,
}

#[derive(Args)]
struct ExportCmd {
    #[command(flatten)]
    rules: RulesArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Policy file to render; defaults to the cached/solved optimal policy
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Opponent banked scores, one panel each
    #[arg(long, value_delimiter = ',', default_value = "0")]
    beta: Vec<u32>,
    /// Mover the panels describe: 1 or 2
    #[arg(long, default_value_t = 1)]
    player: u8,
    #[arg(long, default_value = "pgm", value_parser = parse_format)]
    format: ExportFormat,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct DuelCmd {
    #[command(flatten)]
    rules: RulesArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// First policy: optimal, minturns, or holdat:K
    #[arg(long)]
    a: String,
    /// Second policy: optimal, minturns, or holdat:K
    #[arg(long)]
    b: String,
}

#[derive(Args)]
struct SimulateCmd {
    #[command(flatten)]
    duel: DuelCmd,
    #[arg(long, default_value_t = 1_000_000)]
    games: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Seat assignment per game: fair or alternate
    #[arg(long, default_value = "fair")]
    seats: String,
}

#[derive(Args)]
struct ValidateCmd {
    #[command(flatten)]
    rules: RulesArgs,
}

enum CliError {
    Usage(String),
    Input(String),
    Uncertified(String),
    General(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Input(_) => "input",
            CliError::Uncertified(_) => "uncertified",
            CliError::General(_) => "failure",
        }
    }

    fn detail(&self) -> &str {
        match self {
            CliError::Usage(s) | CliError::Input(s) | CliError::Uncertified(s)
            | CliError::General(s) => s,
        }
    }

    fn code(&self) -> i32 {
        match self {
            CliError::General(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Uncertified(_) => 4,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<BaselineError> for CliError {
    fn from(e: BaselineError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ArtifactError> for CliError {
    fn from(e: ArtifactError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Uncertified { .. } => CliError::Uncertified(e.to_string()),
            other => CliError::General(other.to_string()),
        }
    }
}

impl From<MatchupError> for CliError {
    fn from(e: MatchupError) -> Self {
        match e {
            MatchupError::ConfigMismatch { .. } => CliError::Input(e.to_string()),
            MatchupError::Solve(inner) => inner.into(),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: usage: --threads rejected: {e}");
            std::process::exit(2);
        }
    }
    let cache_dir = cli
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os("DICERACE_CACHE_DIR").map(PathBuf::from))
        .unwrap_or_else(|| std::env::temp_dir().join("dicerace-cache"));
    match run(cli.command, &cache_dir) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}: {}", e.kind(), e.detail());
            std::process::exit(e.code());
        }
    }
}

fn run(command: Command, cache_dir: &Path) -> Result<(), CliError> {
    match command {
        Command::Solve(cmd) => cmd_solve(cmd, cache_dir),
        Command::Export(cmd) => cmd_export(cmd, cache_dir),
        Command::Evaluate(cmd) => cmd_evaluate(cmd, cache_dir),
        Command::Simulate(cmd) => cmd_simulate(cmd, cache_dir),
        Command::Validate(cmd) => cmd_validate(cmd),
    }
}

fn parse_sweep(s: &str) -> Result<SweepMode, CliError> {
    match s {
        "jacobi" => Ok(SweepMode::Jacobi),
        "seidel" => Ok(SweepMode::GaussSeidel),
        other => Err(CliError::Usage(format!("unknown sweep order {other:?}"))),
    }
}

fn parse_seats(s: &str) -> Result<SeatRule, CliError> {
    match s {
        "fair" => Ok(SeatRule::FairCoin),
        "alternate" => Ok(SeatRule::Alternate),
        other => Err(CliError::Usage(format!("unknown seat rule {other:?}"))),
    }
}

fn cache_path(cache_dir: &Path, fp: &str) -> PathBuf {
    cache_dir.join(format!("{fp}.policy.json"))
}

/// Solve the optimal policy, or reuse the cached table keyed by the
/// config+tolerance fingerprint. The transience gate runs on every fresh
/// solve; `allow_uncertified` downgrades a failed certificate to a warning.
fn optimal_policy(
    config: GameConfig,
    solver: &SolverArgs,
    cache_dir: &Path,
) -> Result<Policy, CliError> {
    let tol = solver.tol.unwrap_or_else(|| default_tolerance(&config));
    let fp = fingerprint(&config, tol);
    let cached = cache_path(cache_dir, &fp);
    if cached.is_file() {
        let policy = load_policy(&std::fs::read(&cached)?)?;
        if policy.config != config {
            return Err(CliError::Input(format!(
                "cache entry {} holds a different configuration; delete it to re-solve",
                cached.display()
            )));
        }
        eprintln!("using cached policy {}", cached.display());
        return Ok(policy);
    }
    let (policy, _, _) = solve_fresh(config, solver)?;
    std::fs::create_dir_all(cache_dir)?;
    std::fs::write(&cached, export_policy(&policy))?;
    Ok(policy)
}

fn solve_fresh(
    config: GameConfig,
    solver: &SolverArgs,
) -> Result<(Policy, dicerace::solve::ValueFunction, dicerace::solve::SolveReport), CliError> {
    let tol = solver.tol.unwrap_or_else(|| default_tolerance(&config));
    let sweep = parse_sweep(&solver.sweep)?;
    let game = PigGame::new(config)?;
    let gate = Instant::now();
    let transience = certify_transient(&game)
        .map_err(|e| CliError::General(format!("structural validation failed: {e}")))?;
    if !transience.certified {
        let msg = format!(
            "{} of {} states are not certified transient under variant {}",
            transience.offending_states.len(),
            game.space().num_states(),
            config.variant
        );
        if solver.allow_uncertified {
            eprintln!("warning: {msg}; continuing as requested");
        } else {
            return Err(CliError::Uncertified(format!("{msg} (use --allow-uncertified)")));
        }
    }
    eprintln!("transience check took {:.1}s", gate.elapsed().as_secs_f64());
    let (v, report) = value_iteration_with(&game, tol, solver.max_iters, sweep)?;
    if !report.certified {
        return Err(CliError::Uncertified(format!(
            "solve stopped at residual {:.3e} after {} sweeps without reaching tol {:.3e}",
            report.final_residual, report.iterations, tol
        )));
    }
    println!(
        "solved variant={} target={} tol={:.3e} sweeps={} residual={:.3e} wall_s={:.1}",
        config.variant,
        config.target,
        tol,
        report.iterations,
        report.final_residual,
        report.wall_time.as_secs_f64()
    );
    let policy = extract_policy(&game, &v, &report)?;
    Ok((policy, v, report))
}

fn cmd_solve(cmd: SolveCmd, cache_dir: &Path) -> Result<(), CliError> {
    let config = cmd.rules.config();
    config.validate()?;
    let tol = cmd.solver.tol.unwrap_or_else(|| default_tolerance(&config));
    let (policy, v, _) = solve_fresh(config, &cmd.solver)?;
    let fp = fingerprint(&config, tol);
    let bytes = export_policy(&policy);
    std::fs::create_dir_all(cache_dir)?;
    let cached = cache_path(cache_dir, &fp);
    std::fs::write(&cached, &bytes)?;
    println!("policy cached at {} fingerprint={}", cached.display(), fp);
    if let Some(out) = cmd.out {
        std::fs::write(&out, &bytes)?;
        println!("policy written to {}", out.display());
    }
    if let Some(path) = cmd.values {
        std::fs::write(&path, export_value_table(&v, &config, tol))?;
        println!("value table written to {}", path.display());
    }
    Ok(())
}

fn cmd_export(cmd: ExportCmd, cache_dir: &Path) -> Result<(), CliError> {
    let config = cmd.rules.config();
    config.validate()?;
    let player = match cmd.player {
        1 => Player::One,
        2 => Player::Two,
        other => return Err(CliError::Usage(format!("player must be 1 or 2, got {other}"))),
    };
    let policy = match &cmd.policy {
        Some(path) => {
            let policy = load_policy(&std::fs::read(path)?)?;
            if policy.config != config {
                return Err(CliError::Input(format!(
                    "policy file {} was solved for {:?}, flags describe {:?}",
                    path.display(),
                    policy.config,
                    config
                )));
            }
            policy
        }
        None => optimal_policy(config, &cmd.solver, cache_dir)?,
    };
    let extension = match cmd.format {
        ExportFormat::Csv => "csv",
        ExportFormat::Pgm => "pgm",
        ExportFormat::Json => "json",
    };
    std::fs::create_dir_all(&cmd.out)?;
    for &beta in &cmd.beta {
        let grid = policy_map(&policy, player, beta)?;
        let path = cmd.out.join(format!("map_p{}_b{beta}.{extension}", cmd.player));
        std::fs::write(&path, export_policy_map(&grid, cmd.format))?;
        println!("panel written to {}", path.display());
    }
    Ok(())
}

enum BaselineSpec {
    Optimal,
    MinTurns,
    HoldAt(u32),
}

impl FromStr for BaselineSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        if s == "optimal" {
            return Ok(BaselineSpec::Optimal);
        }
        if s == "minturns" {
            return Ok(BaselineSpec::MinTurns);
        }
        if let Some(k) = s.strip_prefix("holdat:") {
            let k = k
                .parse::<u32>()
                .map_err(|_| CliError::Usage(format!("bad hold threshold in {s:?}")))?;
            return Ok(BaselineSpec::HoldAt(k));
        }
        Err(CliError::Usage(format!(
            "unknown policy spec {s:?}, expected optimal, minturns, or holdat:K"
        )))
    }
}

fn resolve_policy(
    spec: &str,
    config: GameConfig,
    solver: &SolverArgs,
    cache_dir: &Path,
) -> Result<Policy, CliError> {
    match spec.parse::<BaselineSpec>()? {
        BaselineSpec::Optimal => optimal_policy(config, solver, cache_dir),
        BaselineSpec::MinTurns => Ok(min_expected_turns(&config)?.1),
        BaselineSpec::HoldAt(k) => Ok(hold_at_policy(&config, k)?),
    }
}

fn cmd_evaluate(cmd: DuelCmd, cache_dir: &Path) -> Result<(), CliError> {
    let config = cmd.rules.config();
    config.validate()?;
    let game = PigGame::new(config)?;
    let a = resolve_policy(&cmd.a, config, &cmd.solver, cache_dir)?;
    let b = resolve_policy(&cmd.b, config, &cmd.solver, cache_dir)?;
    let r = exact_matchup(&game, &a, &b)?;
    println!(
        "exact a={} b={} p_first={:.12} p_second={:.12} p_fair={:.12}",
        cmd.a, cmd.b, r.p_win_first_seat, r.p_win_second_seat, r.p_win_fair_start
    );
    Ok(())
}

fn cmd_simulate(cmd: SimulateCmd, cache_dir: &Path) -> Result<(), CliError> {
    let config = cmd.duel.rules.config();
    config.validate()?;
    let seats = parse_seats(&cmd.seats)?;
    if cmd.games == 0 {
        return Err(CliError::Usage("need at least one game".to_string()));
    }
    let game = PigGame::new(config)?;
    let a = resolve_policy(&cmd.duel.a, config, &cmd.duel.solver, cache_dir)?;
    let b = resolve_policy(&cmd.duel.b, config, &cmd.duel.solver, cache_dir)?;
    let r = simulate_matchup_seated(&game, &a, &b, cmd.games, cmd.seed, seats)?;
    let (se, truncated) = match r.method {
        EvalMethod::Simulated { standard_error, truncated, .. } => (standard_error, truncated),
        EvalMethod::Exact => unreachable!(),
    };
    println!(
        "simulated a={} b={} games={} seed={} rng={} p_first={:.6} p_second={:.6} p_fair={:.6} se={:.3e} truncated={}",
        cmd.duel.a,
        cmd.duel.b,
        cmd.games,
        cmd.seed,
        RNG_ID,
        r.p_win_first_seat,
        r.p_win_second_seat,
        r.p_win_fair_start,
        se,
        truncated
    );
    Ok(())
}

fn cmd_validate(cmd: ValidateCmd) -> Result<(), CliError> {
    let config = cmd.rules.config();
    config.validate()?;
    let game = PigGame::new(config)?;
    let report = certify_transient(&game)
        .map_err(|e| CliError::General(format!("structural validation failed: {e}")))?;
    println!(
        "validate variant={} target={} states={} certified={} max_rank={} offending={}",
        config.variant,
        config.target,
        game.space().num_states(),
        report.certified,
        report.max_rank,
        report.offending_states.len()
    );
    if report.certified {
        Ok(())
    } else {
        for &idx in report.offending_states.iter().take(5) {
            println!("  not transient: {}", game.space().state_at(idx));
        }
        Err(CliError::Uncertified(format!(
            "{} states could not be certified",
            report.offending_states.len()
        )))
    }
}
