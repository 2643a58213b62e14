//! JSON-lines event logs: writing, deterministic replay and dataset export.
//!
//! A log file starts with one header line followed by one [`EventRecord`] per
//! line. Header fields, in order:
//!
//! | field | meaning |
//! |---|---|
//! | `kind` | always `"header"` |
//! | `formatVersion` | currently `1` |
//! | `config` | the full deck/rules configuration |
//! | `reward` | reward scheme name (`rules`, `win`, `win-literal`) |
//! | `seed` | match seed |
//! | `games` | number of games requested |
//!
//! Every record carries `game`, `shift`, `round` and `turnPlayer` (null
//! outside a turn) followed by `kind` and the kind-specific fields:
//!
//! | kind | fields |
//! |---|---|
//! | `gameStart` | `seed`, `configHash` |
//! | `shiftStart` | `roles`, `handSizes` |
//! | `specialAction` | `player`, `action`, `accepted` |
//! | `exchange` | `transfers` (`from`, `to`, `cards`), forced and returned alternately |
//! | `proposal` | `actionId`, `valid`, `reward` |
//! | `play` | `actionId`, `cards`, `boardAfter`, `finished` |
//! | `pizzaEnd` | `nextLeader` |
//! | `shiftEnd` | `finishOrder`, `scores` |
//! | `gameEnd` | `winner`, `finishOrder`, `scores` |
//! | `aborted` | `reason` |
//!
//! Replay re-simulates each game from its recorded seed, feeding the recorded
//! decisions back as scripted agents, and compares every regenerated record
//! with the recorded one.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{Agent, ScriptedAgent};
use crate::cards::{Card, DeckConfig, Role};
use crate::engine::{GameState, SpecialAction, Transfer};
use crate::rewards::RewardSpec;
use crate::session::{self, GameSummary, TurnObserver};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LogHeader {
    pub kind: String,
    pub format_version: u32,
    pub config: DeckConfig,
    pub reward: String,
    pub seed: u64,
    pub games: u32,
}

impl LogHeader {
    pub fn new(config: &DeckConfig, reward: &RewardSpec, seed: u64, games: u32) -> Self {
        LogHeader {
            kind: "header".into(),
            format_version: FORMAT_VERSION,
            config: config.clone(),
            reward: reward.name().into(),
            seed,
            games,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EventRecord {
    pub game: u32,
    pub shift: u32,
    pub round: u32,
    pub turn_player: Option<usize>,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Event {
    GameStart { seed: u64, config_hash: String },
    ShiftStart { roles: Vec<Role>, hand_sizes: Vec<usize> },
    SpecialAction { player: usize, action: SpecialAction, accepted: bool },
    Exchange { transfers: Vec<Transfer> },
    Proposal { action_id: usize, valid: bool, reward: f64 },
    Play { action_id: usize, cards: Vec<Card>, board_after: Vec<u8>, finished: Option<usize> },
    PizzaEnd { next_leader: usize },
    ShiftEnd { finish_order: Vec<usize>, scores: Vec<u32> },
    GameEnd { winner: usize, finish_order: Vec<usize>, scores: Vec<u32> },
    Aborted { reason: String },
}

/// Destination for event records.
pub trait EventSink {
    fn record(&mut self, record: &EventRecord) -> io::Result<()>;

    /// Called once a game's last record has been emitted.
    fn end_game(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Discards everything.
pub struct NullSink;

impl EventSink for NullSink {
    fn record(&mut self, _record: &EventRecord) -> io::Result<()> {
        Ok(())
    }
}

impl EventSink for Vec<EventRecord> {
    fn record(&mut self, record: &EventRecord) -> io::Result<()> {
        self.push(record.clone());
        Ok(())
    }
}

pub fn to_line(record: &EventRecord) -> String {
    serde_json::to_string(record).expect("records serialize")
}

/// Writes the header and then one JSON object per line, flushing at game end.
pub struct JsonlWriter<W: Write> {
    out: W,
}

impl JsonlWriter<BufWriter<File>> {
    pub fn create(path: &Path, header: &LogHeader) -> io::Result<Self> {
        let file = File::create(path)?;
        JsonlWriter::new(BufWriter::new(file), header)
    }
}

impl<W: Write> JsonlWriter<W> {
    pub fn new(mut out: W, header: &LogHeader) -> io::Result<Self> {
        serde_json::to_writer(&mut out, header)?;
        out.write_all(b"\n")?;
        Ok(JsonlWriter { out })
    }

    pub fn into_inner(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> EventSink for JsonlWriter<W> {
    fn record(&mut self, record: &EventRecord) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")
    }

    fn end_game(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("log I/O: {0}")]
    Io(#[from] io::Error),
    #[error("malformed log at line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("log format version {0} is not supported")]
    Version(u32),
    #[error("line {line}: config hash {found} does not match header config ({expected})")]
    ConfigMismatch { line: usize, expected: String, found: String },
    #[error("reward scheme {0:?} cannot be replayed")]
    Reward(String),
    #[error("replay diverged at line {line}: recorded {recorded}, replayed {replayed}")]
    Divergence { line: usize, recorded: String, replayed: String },
}

/// A parsed log with the 1-based file line of every record.
#[derive(Debug, Clone)]
pub struct LogFile {
    pub header: LogHeader,
    pub records: Vec<(usize, EventRecord)>,
}

impl LogFile {
    pub fn read(path: &Path) -> Result<LogFile, LogError> {
        LogFile::parse(BufReader::new(File::open(path)?))
    }

    pub fn parse<R: BufRead>(reader: R) -> Result<LogFile, LogError> {
        let mut lines = reader.lines().enumerate();
        let header_line = match lines.next() {
            Some((_, line)) => line?,
            None => return Err(LogError::Malformed { line: 1, message: "empty log".into() }),
        };
        let header: LogHeader = serde_json::from_str(&header_line)
            .map_err(|e| LogError::Malformed { line: 1, message: e.to_string() })?;
        if header.kind != "header" {
            return Err(LogError::Malformed { line: 1, message: "first line is not a header".into() });
        }
        if header.format_version != FORMAT_VERSION {
            return Err(LogError::Version(header.format_version));
        }
        let mut records = Vec::new();
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: EventRecord = serde_json::from_str(&line)
                .map_err(|e| LogError::Malformed { line: i + 1, message: e.to_string() })?;
            records.push((i + 1, record));
        }
        Ok(LogFile { header, records })
    }

    /// Records grouped by game, in file order.
    pub fn games(&self) -> Vec<&[(usize, EventRecord)]> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.records.len() {
            if i == self.records.len() || self.records[i].1.game != self.records[start].1.game {
                if start < i {
                    out.push(&self.records[start..i]);
                }
                start = i;
            }
        }
        out
    }
}

/// Result of a successful replay.
#[derive(Debug, Clone)]
pub struct ReplayReport {
    pub games: Vec<GameSummary>,
    pub final_state: Option<GameState>,
}

/// Builds one scripted agent per seat from a game's recorded decisions.
fn scripted_agents(records: &[(usize, EventRecord)], players: usize) -> Vec<ScriptedAgent> {
    let mut agents = vec![ScriptedAgent::default(); players];
    for (_, record) in records {
        match &record.event {
            Event::Proposal { action_id, .. } => {
                if let Some(seat) = record.turn_player.filter(|&s| s < players) {
                    agents[seat].proposals.push_back(*action_id);
                }
            }
            Event::SpecialAction { player, accepted, .. } if *player < players => {
                agents[*player].specials.push_back(*accepted);
            }
            Event::Exchange { transfers } => {
                for returned in transfers.iter().skip(1).step_by(2) {
                    if returned.from < players {
                        agents[returned.from].returns.push_back(returned.cards.clone());
                    }
                }
            }
            _ => {}
        }
    }
    agents
}

fn replay_game(
    log: &LogFile,
    records: &[(usize, EventRecord)],
    reward: &RewardSpec,
    observer: &mut dyn TurnObserver,
) -> Result<(GameSummary, GameState), LogError> {
    let (first_line, first) = &records[0];
    let Event::GameStart { seed, config_hash } = &first.event else {
        return Err(LogError::Malformed { line: *first_line, message: "game does not open with gameStart".into() });
    };
    let expected_hash = log.header.config.config_hash();
    if *config_hash != expected_hash {
        return Err(LogError::ConfigMismatch { line: *first_line, expected: expected_hash, found: config_hash.clone() });
    }
    let mut scripted = scripted_agents(records, log.header.config.players);
    let mut agents: Vec<&mut dyn Agent> = scripted.iter_mut().map(|a| a as &mut dyn Agent).collect();
    let mut regenerated: Vec<EventRecord> = Vec::with_capacity(records.len());
    let result = session::play_game_observed(
        &log.header.config,
        reward,
        *seed,
        first.game,
        &mut agents,
        &mut regenerated,
        observer,
    );
    for (i, (line, recorded)) in records.iter().enumerate() {
        match regenerated.get(i) {
            Some(replayed) if replayed == recorded => {}
            Some(replayed) => {
                return Err(LogError::Divergence { line: *line, recorded: to_line(recorded), replayed: to_line(replayed) })
            }
            None => {
                let replayed = match &result {
                    Err(e) => format!("simulation stopped: {e}"),
                    Ok(_) => "end of game".to_string(),
                };
                return Err(LogError::Divergence { line: *line, recorded: to_line(recorded), replayed });
            }
        }
    }
    if let Some(extra) = regenerated.get(records.len()) {
        let line = records.last().map_or(1, |(l, _)| l + 1);
        return Err(LogError::Divergence { line, recorded: "end of game".into(), replayed: to_line(extra) });
    }
    result.map_err(|e| LogError::Divergence {
        line: records.last().map_or(1, |(l, _)| *l),
        recorded: "completed game".into(),
        replayed: e.to_string(),
    })
}

fn replay_with(log: &LogFile, observer: &mut dyn TurnObserver) -> Result<ReplayReport, LogError> {
    let reward =
        RewardSpec::from_name(&log.header.reward).ok_or_else(|| LogError::Reward(log.header.reward.clone()))?;
    let mut report = ReplayReport { games: Vec::new(), final_state: None };
    for records in log.games() {
        let (summary, state) = replay_game(log, records, &reward, observer)?;
        report.games.push(summary);
        report.final_state = Some(state);
    }
    Ok(report)
}

/// Re-simulates every game in the log and checks each record.
pub fn replay(log: &LogFile) -> Result<ReplayReport, LogError> {
    replay_with(log, &mut ())
}

pub fn replay_file(path: &Path) -> Result<ReplayReport, LogError> {
    replay(&LogFile::read(path)?)
}

/// Which proposals become dataset rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFilter {
    AcceptedPlays,
    AllProposals,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub game: u32,
    pub seat: usize,
    pub observation: Vec<f64>,
    pub action_id: usize,
    pub valid: bool,
    pub reward: f64,
}

struct DatasetCollector {
    filter: DatasetFilter,
    game: u32,
    rows: Vec<DatasetRow>,
}

impl TurnObserver for DatasetCollector {
    fn on_game_start(&mut self, game: u32) {
        self.game = game;
    }

    fn on_proposal(&mut self, seat: usize, observation: &[f64], action: usize, valid: bool, reward: f64, _state: &GameState) {
        if valid || self.filter == DatasetFilter::AllProposals {
            self.rows.push(DatasetRow {
                game: self.game,
                seat,
                observation: observation.to_vec(),
                action_id: action,
                valid,
                reward,
            });
        }
    }
}

/// Observation/action/reward rows reconstructed by replaying the log.
pub fn export_dataset(log: &LogFile, filter: DatasetFilter) -> Result<Vec<DatasetRow>, LogError> {
    let mut collector = DatasetCollector { filter, game: 0, rows: Vec::new() };
    replay_with(log, &mut collector)?;
    Ok(collector.rows)
}

/// CSV with a one-line header: `formatVersion,game,seat,actionId,valid,reward,obs0..obsN`.
pub fn write_dataset_csv<W: Write>(out: W, rows: &[DatasetRow]) -> Result<(), LogError> {
    let mut writer = csv::Writer::from_writer(out);
    let width = rows.first().map_or(0, |r| r.observation.len());
    let mut header: Vec<String> =
        ["formatVersion", "game", "seat", "actionId", "valid", "reward"].iter().map(|s| s.to_string()).collect();
    header.extend((0..width).map(|i| format!("obs{i}")));
    writer.write_record(&header).map_err(csv_io)?;
    for row in rows {
        let mut fields = vec![
            FORMAT_VERSION.to_string(),
            row.game.to_string(),
            row.seat.to_string(),
            row.action_id.to_string(),
            row.valid.to_string(),
            row.reward.to_string(),
        ];
        fields.extend(row.observation.iter().map(|x| x.to_string()));
        writer.write_record(&fields).map_err(csv_io)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> LogError {
    LogError::Io(io::Error::other(e))
}

/// Plain-text narration of a log, one line per event.
pub fn transcript(log: &LogFile) -> String {
    use std::fmt::Write as _;
    let table = crate::actions::ActionTable::new(&log.header.config);
    let cards = |cs: &[Card]| cs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
    let mut out = String::new();
    for (_, r) in &log.records {
        let who = r.turn_player.map_or(String::new(), |p| format!("P{p} "));
        let prefix = format!("[g{} s{} r{}] ", r.game, r.shift, r.round);
        let text = match &r.event {
            Event::GameStart { seed, .. } => format!("game {} begins (seed {seed})", r.game),
            Event::ShiftStart { roles, hand_sizes } => {
                let roles: Vec<String> = roles.iter().map(|role| format!("{role:?}")).collect();
                format!("shift {} dealt, hand sizes {hand_sizes:?}, roles [{}]", r.shift, roles.join(", "))
            }
            Event::SpecialAction { player, action, accepted } => {
                let verb = if *accepted { "declares" } else { "declines" };
                format!("P{player} {verb} {action:?}")
            }
            Event::Exchange { transfers } => transfers
                .iter()
                .map(|t| format!("P{} gives P{} [{}]", t.from, t.to, cards(&t.cards)))
                .collect::<Vec<_>>()
                .join("; "),
            Event::Proposal { action_id, valid, reward } => {
                let verdict = if *valid { "accepted" } else { "rejected" };
                let action = table.decode(*action_id).map_or("?".to_string(), |a| a.to_string());
                format!("{who}proposes {action} (#{action_id}): {verdict}, reward {reward:.3}")
            }
            Event::Play { cards: played, finished, .. } => {
                let action = if played.is_empty() { "passes".to_string() } else { format!("plays [{}]", cards(played)) };
                match finished {
                    Some(pos) => format!("{who}{action} and finishes in position {}", pos + 1),
                    None => format!("{who}{action}"),
                }
            }
            Event::PizzaEnd { next_leader } => format!("pizza done, P{next_leader} leads the next one"),
            Event::ShiftEnd { finish_order, scores } => format!("shift over, order {finish_order:?}, scores {scores:?}"),
            Event::GameEnd { winner, scores, .. } => format!("game over, P{winner} wins with scores {scores:?}"),
            Event::Aborted { reason } => format!("game aborted: {reason}"),
        };
        let _ = writeln!(out, "{prefix}{text}");
    }
    out
}
