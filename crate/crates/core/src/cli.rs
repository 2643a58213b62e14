//! Command-line front end. The `chefs-hat` binary is a thin wrapper around [`run`].
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data or replay error, 4 agent fault.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::actions::ActionTable;
use crate::agents::{mix_seed, Agent, FirstLegalAgent, RandomAgent};
use crate::cards::DeckConfig;
use crate::engine::observation_len;
use crate::error::MatchError;
use crate::harness::{self, Exp3Condition, MatchStats, MatchSummary};
use crate::log::{self, EventSink, JsonlWriter, LogFile, LogHeader, NullSink};
use crate::netbridge::{BridgeOptions, BridgeServer};
use crate::qlearn::{Checkpoint, DqnAgent, QConfig};
use crate::rewards::RewardSpec;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_AGENT: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Agent(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Agent(_) => EXIT_AGENT,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<MatchError> for CliError {
    fn from(e: MatchError) -> Self {
        match e {
            MatchError::Agent(fault) => CliError::Agent(fault.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<log::LogError> for CliError {
    fn from(e: log::LogError) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Everything a run depends on. Loaded from TOML with `--config`, overridden by flags,
/// and written back to `config.toml` in the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct RunConfig {
    pub deck: DeckConfig,
    pub q: QConfig,
    pub reward: String,
    /// One token per seat: `random`, `first-legal`, `dqn` or `dqn:<checkpoint>`.
    pub agents: Vec<String>,
    pub seed: u64,
    pub games: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            deck: DeckConfig::default(),
            q: QConfig::default(),
            reward: "rules".into(),
            agents: vec!["random".into(); 4],
            seed: 2020,
            games: harness::DEFAULT_GAMES,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn reward_spec(&self) -> Result<RewardSpec, CliError> {
        RewardSpec::from_name(&self.reward).ok_or_else(|| CliError::Usage(format!("unknown reward {:?}", self.reward)))
    }

    fn validate(&self) -> Result<(), CliError> {
        self.deck.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        self.q.validate().map_err(CliError::Usage)?;
        self.reward_spec()?;
        if self.agents.len() != self.deck.players {
            return Err(CliError::Usage(format!(
                "{} agents given for {} players",
                self.agents.len(),
                self.deck.players
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "chefs-hat", version, about = "Chef's Hat card game simulator and learning harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Play games with a fixed roster and log them.
    Simulate(SimulateArgs),
    /// Random agents under each rule variant.
    Exp1(Exp1Args),
    /// A fresh learner against three random agents, rewarded for valid moves.
    Exp2(LearnArgs),
    /// Learners rewarded for winning.
    Exp3(Exp3Args),
    /// Train a learner against a roster of opponents.
    Train(TrainArgs),
    /// Play a frozen checkpoint greedily against opponents.
    Eval(EvalArgs),
    /// Verify a log by re-simulating it.
    Replay(ReplayArgs),
    /// Host a match with remote seats.
    Serve(ServeArgs),
    /// Recompute per-game CSV and summary JSON from a run directory.
    Stats(StatsArgs),
}

#[derive(Debug, Args, Clone)]
pub struct CommonArgs {
    /// TOML run configuration; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub games: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "CHEFS_HAT_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated roster, e.g. `r,r,r,r` or `dqn:model.chqn,r,r,r`.
    #[arg(long, value_delimiter = ',')]
    pub agents: Option<Vec<String>>,
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub reward: Option<String>,
    #[arg(long, env = "CHEFS_HAT_WORKERS", default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    All,
    NoJoker,
    NoExchange,
    NoSpecial,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::All => "all",
            Variant::NoJoker => "no-joker",
            Variant::NoExchange => "no-exchange",
            Variant::NoSpecial => "no-special",
        }
    }
}

#[derive(Debug, Args)]
pub struct Exp1Args {
    #[command(flatten)]
    pub common: CommonArgs,
    /// The Dishwasher hands over its highest face values instead of its best cards.
    #[arg(long)]
    pub literal_exchange: bool,
    #[arg(long, env = "CHEFS_HAT_WORKERS", default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Also write the JSON-lines event log (large).
    #[arg(long)]
    pub log: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConditionArg {
    VsRandom,
    AllLearners,
}

#[derive(Debug, Args)]
pub struct Exp3Args {
    #[command(flatten)]
    pub learn: LearnArgs,
    #[arg(long, value_enum, default_value = "vs-random")]
    pub condition: ConditionArg,
    /// Warm start for seat 0, normally the experiment-2 checkpoint.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub learn: LearnArgs,
    #[arg(long, default_value = "dqn")]
    pub agent: String,
    #[arg(long, value_delimiter = ',', default_value = "r,r,r")]
    pub opponents: Vec<String>,
    #[arg(long)]
    pub reward: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "r,r,r")]
    pub opponents: Vec<String>,
    #[arg(long)]
    pub reward: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub log: PathBuf,
    /// Print a per-turn narration instead of the summary.
    #[arg(long)]
    pub transcript: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 7878)]
    pub port: u16,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub remote_seats: Vec<usize>,
    #[arg(long)]
    pub reward: Option<String>,
    /// Seconds to wait for each response before playing Pass.
    #[arg(long, default_value_t = 10)]
    pub timeout_secs: u64,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// A run directory containing `log.jsonl`.
    #[arg(long = "in")]
    pub input: PathBuf,
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Exp1(args) => exp1(args),
        Command::Exp2(args) => exp2(args),
        Command::Exp3(args) => exp3(args),
        Command::Train(args) => train(args),
        Command::Eval(args) => eval(args),
        Command::Replay(args) => replay(args),
        Command::Serve(args) => serve(args),
        Command::Stats(args) => stats(args),
    }
}

fn base_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(games) = common.games {
        config.games = games;
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn out_dir(common: &CommonArgs, default: &str) -> Result<PathBuf, CliError> {
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(default));
    fs::create_dir_all(&dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn echo_config(dir: &Path, config: &RunConfig) -> Result<(), CliError> {
    let text = toml::to_string_pretty(config).map_err(|e| CliError::Data(e.to_string()))?;
    fs::write(dir.join("config.toml"), text)?;
    Ok(())
}

fn write_outputs(dir: &Path, stats: &MatchStats) -> Result<(), CliError> {
    stats.write_csv(BufWriter::new(fs::File::create(dir.join("games.csv"))?))?;
    let summary = serde_json::to_string_pretty(&MatchSummary::from_stats(stats)).expect("summary serializes");
    fs::write(dir.join("summary.json"), summary + "\n")?;
    Ok(())
}

fn print_stats(stats: &MatchStats) {
    let all = 0..stats.games();
    println!("games: {}", stats.games());
    for seat in 0..stats.players {
        println!(
            "seat {seat}: victories {:>4}  wrong actions/game {:>9.1}  mean reward {:>7.3}",
            stats.victories[seat],
            stats.mean_wrong_actions(seat, all.clone()),
            stats.mean_reward(seat, all.clone())
        );
    }
    println!("start/win shift: {:.1}%", stats.start_shift_win_rate() * 100.0);
    println!("rounds/game: {:.1}", stats.avg_rounds());
    if let Some(reason) = &stats.aborted {
        println!("aborted: {reason}");
    }
}

/// Builds one agent from a roster token.
pub fn make_agent(token: &str, seat: usize, config: &RunConfig, learning: bool) -> Result<Box<dyn Agent>, CliError> {
    let seed = mix_seed(config.seed, 1000 + seat as u64);
    match token {
        "r" | "random" => Ok(Box::new(RandomAgent::new(seed))),
        "f" | "first-legal" => Ok(Box::new(FirstLegalAgent)),
        "dqn" => Ok(Box::new(DqnAgent::new(config.q.clone(), &config.deck, seed))),
        _ => match token.strip_prefix("dqn:") {
            Some(path) => {
                let agent = load_learner(Path::new(path), config, seed)?;
                Ok(if learning { Box::new(agent) } else { Box::new(agent.evaluation_mode()) })
            }
            None => Err(CliError::Usage(format!("unknown agent {token:?}"))),
        },
    }
}

fn load_learner(path: &Path, config: &RunConfig, seed: u64) -> Result<DqnAgent, CliError> {
    let checkpoint = Checkpoint::load(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    checkpoint
        .check_shape(observation_len(&config.deck), ActionTable::new(&config.deck).len())
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(DqnAgent::from_checkpoint(config.q.clone(), checkpoint, seed))
}

fn open_log(dir: &Path, config: &RunConfig, reward: &RewardSpec) -> Result<Box<dyn EventSink>, CliError> {
    let header = LogHeader::new(&config.deck, reward, config.seed, config.games);
    Ok(Box::new(JsonlWriter::create(&dir.join("log.jsonl"), &header)?))
}

fn play_roster(
    agents: &mut [Box<dyn Agent>],
    config: &RunConfig,
    reward: &RewardSpec,
    sink: &mut dyn EventSink,
) -> Result<MatchStats, CliError> {
    let mut seats: Vec<&mut dyn Agent> = agents.iter_mut().map(|a| a.as_mut() as &mut dyn Agent).collect();
    let stats = harness::run_match(&mut seats, &config.deck, reward, config.seed, config.games, sink)?;
    Ok(stats)
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let mut config = base_config(&args.common)?;
    if let Some(variant) = args.variant {
        let literal = config.deck.exchange_literal;
        config.deck = DeckConfig::variant(variant.name()).expect("known variant");
        config.deck.exchange_literal = literal;
    }
    if let Some(agents) = args.agents {
        config.agents = agents;
    }
    if let Some(reward) = args.reward {
        config.reward = reward;
    }
    config.validate()?;
    let reward = config.reward_spec()?;
    let dir = out_dir(&args.common, "simulate")?;
    echo_config(&dir, &config)?;
    let mut sink = open_log(&dir, &config, &reward)?;
    let all_random = config.agents.iter().all(|a| a == "r" || a == "random");
    let stats = if all_random {
        harness::run_random_match(&config.deck, &reward, config.seed, config.games, args.workers, sink.as_mut())?
    } else {
        let mut agents = roster(&config, true)?;
        play_roster(&mut agents, &config, &reward, sink.as_mut())?
    };
    drop(sink);
    write_outputs(&dir, &stats)?;
    print_stats(&stats);
    abort_status(&stats)
}

fn roster(config: &RunConfig, learning: bool) -> Result<Vec<Box<dyn Agent>>, CliError> {
    config.agents.iter().enumerate().map(|(seat, token)| make_agent(token, seat, config, learning)).collect()
}

fn abort_status(stats: &MatchStats) -> Result<(), CliError> {
    match &stats.aborted {
        Some(reason) => Err(CliError::Agent(reason.clone())),
        None => Ok(()),
    }
}

fn exp1(args: Exp1Args) -> Result<(), CliError> {
    let config = base_config(&args.common)?;
    let dir = out_dir(&args.common, "exp1")?;
    echo_config(&dir, &config)?;
    let result = harness::experiment1(config.games, config.seed, args.literal_exchange, args.workers)?;
    let mut writer = csv::Writer::from_path(dir.join("exp1.csv")).map_err(|e| CliError::Data(e.to_string()))?;
    writer
        .write_record(["variant", "games", "startShiftWinRate", "avgRounds"])
        .map_err(|e| CliError::Data(e.to_string()))?;
    for row in &result.rows {
        writer
            .write_record([
                row.variant.clone(),
                row.games.to_string(),
                row.start_shift_win_rate.to_string(),
                row.avg_rounds.to_string(),
            ])
            .map_err(|e| CliError::Data(e.to_string()))?;
    }
    writer.flush()?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&result).expect("serializes") + "\n")?;
    print!("{}", result.table());
    Ok(())
}

fn learning_sink(args: &LearnArgs, dir: &Path, config: &RunConfig, reward: &RewardSpec) -> Result<Box<dyn EventSink>, CliError> {
    if args.log {
        open_log(dir, config, reward)
    } else {
        Ok(Box::new(NullSink))
    }
}

fn save_learners(dir: &Path, learners: &[DqnAgent]) -> Result<(), CliError> {
    for (seat, learner) in learners.iter().enumerate() {
        let name = if learners.len() == 1 { "learner.chqn".to_string() } else { format!("learner{seat}.chqn") };
        learner.checkpoint().save(&dir.join(&name))?;
        println!("checkpoint: {}", dir.join(name).display());
    }
    Ok(())
}

fn exp2(args: LearnArgs) -> Result<(), CliError> {
    let mut config = base_config(&args.common)?;
    config.reward = "rules".into();
    config.agents = vec!["dqn".into(), "random".into(), "random".into(), "random".into()];
    config.validate()?;
    let dir = out_dir(&args.common, "exp2")?;
    echo_config(&dir, &config)?;
    let mut sink = learning_sink(&args, &dir, &config, &RewardSpec::RulesLearning)?;
    let run = harness::experiment2(config.games, config.seed, &config.q, sink.as_mut())?;
    drop(sink);
    write_outputs(&dir, &run.stats)?;
    save_learners(&dir, &run.learners)?;
    print_stats(&run.stats);
    abort_status(&run.stats)
}

fn exp3(args: Exp3Args) -> Result<(), CliError> {
    let mut config = base_config(&args.learn.common)?;
    config.reward = "win".into();
    let condition = match args.condition {
        ConditionArg::VsRandom => Exp3Condition::VsRandom,
        ConditionArg::AllLearners => Exp3Condition::AllLearners,
    };
    config.agents = match condition {
        Exp3Condition::VsRandom => vec!["dqn".into(), "random".into(), "random".into(), "random".into()],
        Exp3Condition::AllLearners => vec!["dqn".into(); 4],
    };
    if let Some(path) = &args.checkpoint {
        config.agents[0] = format!("dqn:{}", path.display());
    }
    config.validate()?;
    let warm = match &args.checkpoint {
        Some(path) => Some(load_learner(path, &config, mix_seed(config.seed, 7))?),
        None => {
            if condition == Exp3Condition::VsRandom {
                eprintln!("note: no --checkpoint given, seat 0 starts untrained");
            }
            None
        }
    };
    let dir = out_dir(&args.learn.common, "exp3")?;
    echo_config(&dir, &config)?;
    let mut sink = learning_sink(&args.learn, &dir, &config, &RewardSpec::WinGame)?;
    let run = harness::experiment3(condition, config.games, config.seed, &config.q, warm, sink.as_mut())?;
    drop(sink);
    write_outputs(&dir, &run.stats)?;
    save_learners(&dir, &run.learners)?;
    print_stats(&run.stats);
    abort_status(&run.stats)
}

fn train(args: TrainArgs) -> Result<(), CliError> {
    let mut config = base_config(&args.learn.common)?;
    if let Some(reward) = args.reward {
        config.reward = reward;
    }
    if !(args.agent == "dqn" || args.agent.starts_with("dqn:")) {
        return Err(CliError::Usage(format!("--agent must be dqn or dqn:<checkpoint>, got {:?}", args.agent)));
    }
    config.agents = std::iter::once(args.agent.clone()).chain(args.opponents.iter().cloned()).collect();
    config.validate()?;
    let reward = config.reward_spec()?;
    let dir = out_dir(&args.learn.common, "train")?;
    echo_config(&dir, &config)?;
    let mut learner = match args.agent.strip_prefix("dqn:") {
        Some(path) => load_learner(Path::new(path), &config, mix_seed(config.seed, 7))?,
        None => DqnAgent::new(config.q.clone(), &config.deck, mix_seed(config.seed, 7)),
    };
    let mut opponents: Vec<Box<dyn Agent>> = config.agents[1..]
        .iter()
        .enumerate()
        .map(|(i, token)| make_agent(token, i + 1, &config, true))
        .collect::<Result<_, _>>()?;
    let mut sink = learning_sink(&args.learn, &dir, &config, &reward)?;
    let stats = {
        let mut seats: Vec<&mut dyn Agent> = vec![&mut learner];
        seats.extend(opponents.iter_mut().map(|a| a.as_mut() as &mut dyn Agent));
        harness::run_match(&mut seats, &config.deck, &reward, config.seed, config.games, sink.as_mut())?
    };
    drop(sink);
    write_outputs(&dir, &stats)?;
    save_learners(&dir, std::slice::from_ref(&learner))?;
    print_stats(&stats);
    abort_status(&stats)
}

fn eval(args: EvalArgs) -> Result<(), CliError> {
    let mut config = base_config(&args.common)?;
    if let Some(reward) = args.reward {
        config.reward = reward;
    }
    config.agents = std::iter::once(format!("dqn:{}", args.checkpoint.display()))
        .chain(args.opponents.iter().cloned())
        .collect();
    config.validate()?;
    let reward = config.reward_spec()?;
    let dir = out_dir(&args.common, "eval")?;
    echo_config(&dir, &config)?;
    let mut agents = roster(&config, false)?;
    let mut sink = open_log(&dir, &config, &reward)?;
    let stats = play_roster(&mut agents, &config, &reward, sink.as_mut())?;
    drop(sink);
    write_outputs(&dir, &stats)?;
    print_stats(&stats);
    abort_status(&stats)
}

fn replay(args: ReplayArgs) -> Result<(), CliError> {
    let log_file = LogFile::read(&args.log)?;
    let report = log::replay(&log_file)?;
    if args.transcript {
        print!("{}", log::transcript(&log_file));
    } else {
        println!("replayed {} game(s) from {}: every record matches", report.games.len(), args.log.display());
        for game in &report.games {
            println!("game {}: winner P{}, scores {:?}", game.index, game.winner, game.scores);
        }
    }
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), CliError> {
    let mut config = base_config(&args.common)?;
    if let Some(reward) = args.reward {
        config.reward = reward;
    }
    if let Some(&bad) = args.remote_seats.iter().find(|&&s| s >= config.deck.players) {
        return Err(CliError::Usage(format!("remote seat {bad} out of range")));
    }
    for &seat in &args.remote_seats {
        config.agents[seat] = "remote".into();
    }
    let reward = config.reward_spec()?;
    let dir = out_dir(&args.common, "serve")?;
    echo_config(&dir, &config)?;
    let options = BridgeOptions { response_timeout: Duration::from_secs(args.timeout_secs), ..BridgeOptions::default() };
    let server = BridgeServer::bind(("0.0.0.0", args.port), options)?;
    eprintln!("waiting for {} remote player(s) on {}", args.remote_seats.len(), server.local_addr()?);
    let table_len = ActionTable::new(&config.deck).len();
    let mut remotes = server
        .accept_seats(&args.remote_seats, table_len, observation_len(&config.deck), config.seed)
        .map_err(|e| CliError::Agent(format!("handshake: {e}")))?;
    let mut locals: Vec<Option<Box<dyn Agent>>> = (0..config.deck.players)
        .map(|seat| {
            if args.remote_seats.contains(&seat) {
                Ok(None)
            } else {
                make_agent(&config.agents[seat], seat, &config, true).map(Some)
            }
        })
        .collect::<Result<_, _>>()?;
    let mut sink = open_log(&dir, &config, &reward)?;
    let stats = {
        let mut remote_iter = remotes.iter_mut();
        let mut seats: Vec<&mut dyn Agent> = Vec::new();
        for local in locals.iter_mut() {
            match local {
                Some(agent) => seats.push(agent.as_mut()),
                None => seats.push(remote_iter.next().expect("one remote per seat")),
            }
        }
        harness::run_match(&mut seats, &config.deck, &reward, config.seed, config.games, sink.as_mut())?
    };
    drop(sink);
    for remote in &remotes {
        for incident in remote.incidents() {
            eprintln!("seat {}: {:?} {}", incident.seat, incident.kind, incident.detail);
        }
    }
    write_outputs(&dir, &stats)?;
    print_stats(&stats);
    abort_status(&stats)
}

fn stats(args: StatsArgs) -> Result<(), CliError> {
    let path = args.input.join("log.jsonl");
    let log_file = LogFile::read(&path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let report = log::replay(&log_file)?;
    let mut stats = MatchStats::new(log_file.header.config.players);
    for game in &report.games {
        stats.add_game(game);
    }
    write_outputs(&args.input, &stats)?;
    println!("{}", serde_json::to_string_pretty(&MatchSummary::from_stats(&stats)).expect("serializes"));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_with_two() {
        assert_eq!(run(["chefs-hat", "simulate", "--variant", "mystery"]), EXIT_USAGE);
        assert_eq!(run(["chefs-hat", "frobnicate"]), EXIT_USAGE);
    }

    #[test]
    fn run_config_rejects_unknown_keys() {
        assert!(toml::from_str::<RunConfig>("seed = 3\ncolour = 'red'\n").is_err());
        let config: RunConfig = toml::from_str("seed = 3\n[deck]\nuseJoker = false\n").unwrap();
        assert_eq!(config.seed, 3);
        assert!(!config.deck.use_joker);
        let echoed = toml::to_string_pretty(&config).unwrap();
        assert_eq!(toml::from_str::<RunConfig>(&echoed).unwrap(), config);
    }

    #[test]
    fn agent_tokens() {
        let config = RunConfig::default();
        assert_eq!(make_agent("r", 0, &config, true).unwrap().name(), "random");
        assert_eq!(make_agent("first-legal", 1, &config, true).unwrap().name(), "first-legal");
        assert!(matches!(make_agent("human", 0, &config, true), Err(CliError::Usage(_))));
        assert!(matches!(make_agent("dqn:/nonexistent.chqn", 0, &config, true), Err(CliError::Data(_))));
    }
}
