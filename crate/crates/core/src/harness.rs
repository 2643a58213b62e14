//! Match runner, per-game statistics and the three experiments.

use std::io::{self, Write};
use std::ops::Range;

use serde::Serialize;

use crate::agents::{mix_seed, Agent, RandomAgent};
use crate::cards::DeckConfig;
use crate::error::MatchError;
use crate::log::{EventRecord, EventSink};
use crate::qlearn::{DqnAgent, QConfig};
use crate::rewards::RewardSpec;
use crate::session::{self, GameSummary};

pub const DEFAULT_GAMES: u32 = 250;

/// Aggregated results of a sequence of games with fixed seats.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchStats {
    pub players: usize,
    pub victories: Vec<u32>,
    /// `[seat][game]`
    pub wrong_actions_per_game: Vec<Vec<u32>>,
    /// `[seat][game]`, mean reward per proposal
    pub mean_reward_per_game: Vec<Vec<f64>>,
    pub rounds_per_game: Vec<u32>,
    pub shifts_per_game: Vec<u32>,
    pub winners: Vec<usize>,
    pub start_shift_wins: u32,
    pub shifts_total: u32,
    /// Set when an agent fault stopped the match early.
    pub aborted: Option<String>,
}

impl MatchStats {
    pub fn new(players: usize) -> Self {
        MatchStats {
            players,
            victories: vec![0; players],
            wrong_actions_per_game: vec![Vec::new(); players],
            mean_reward_per_game: vec![Vec::new(); players],
            rounds_per_game: Vec::new(),
            shifts_per_game: Vec::new(),
            winners: Vec::new(),
            start_shift_wins: 0,
            shifts_total: 0,
            aborted: None,
        }
    }

    pub fn games(&self) -> usize {
        self.winners.len()
    }

    pub fn add_game(&mut self, game: &GameSummary) {
        self.victories[game.winner] += 1;
        self.winners.push(game.winner);
        for seat in 0..self.players {
            self.wrong_actions_per_game[seat].push(game.wrong_actions[seat]);
            self.mean_reward_per_game[seat].push(game.mean_reward(seat));
        }
        self.rounds_per_game.push(game.rounds);
        self.shifts_per_game.push(game.shifts);
        self.shifts_total += game.shifts;
        self.start_shift_wins +=
            game.shift_starters.iter().zip(&game.shift_winners).filter(|(s, w)| s == w).count() as u32;
    }

    pub fn merge(&mut self, other: &MatchStats) {
        for seat in 0..self.players {
            self.victories[seat] += other.victories[seat];
            self.wrong_actions_per_game[seat].extend(&other.wrong_actions_per_game[seat]);
            self.mean_reward_per_game[seat].extend(&other.mean_reward_per_game[seat]);
        }
        self.rounds_per_game.extend(&other.rounds_per_game);
        self.shifts_per_game.extend(&other.shifts_per_game);
        self.winners.extend(&other.winners);
        self.start_shift_wins += other.start_shift_wins;
        self.shifts_total += other.shifts_total;
        if self.aborted.is_none() {
            self.aborted.clone_from(&other.aborted);
        }
    }

    /// Fraction of shifts won by the player who led their first pizza.
    pub fn start_shift_win_rate(&self) -> f64 {
        if self.shifts_total == 0 {
            0.0
        } else {
            self.start_shift_wins as f64 / self.shifts_total as f64
        }
    }

    pub fn avg_rounds(&self) -> f64 {
        mean(self.rounds_per_game.iter().map(|&r| r as f64))
    }

    /// The last `n` games (all of them if fewer were played).
    pub fn last(&self, n: usize) -> Range<usize> {
        self.games().saturating_sub(n)..self.games()
    }

    pub fn victories_in(&self, seat: usize, games: Range<usize>) -> usize {
        self.winners[games].iter().filter(|&&w| w == seat).count()
    }

    pub fn mean_wrong_actions(&self, seat: usize, games: Range<usize>) -> f64 {
        mean(self.wrong_actions_per_game[seat][games].iter().map(|&w| w as f64))
    }

    pub fn mean_reward(&self, seat: usize, games: Range<usize>) -> f64 {
        mean(self.mean_reward_per_game[seat][games].iter().copied())
    }

    /// One row per game: index, winner, rounds, per-seat wrong actions, per-seat mean reward.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec!["game".to_string(), "winner".into(), "rounds".into()];
        header.extend((0..self.players).map(|s| format!("wrongActions{s}")));
        header.extend((0..self.players).map(|s| format!("meanReward{s}")));
        writer.write_record(&header)?;
        for g in 0..self.games() {
            let mut row = vec![g.to_string(), self.winners[g].to_string(), self.rounds_per_game[g].to_string()];
            row.extend((0..self.players).map(|s| self.wrong_actions_per_game[s][g].to_string()));
            row.extend((0..self.players).map(|s| self.mean_reward_per_game[s][g].to_string()));
            writer.write_record(&row)?;
        }
        writer.flush()
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Seed of game `index` within a match.
pub fn game_seed(match_seed: u64, index: u32) -> u64 {
    mix_seed(match_seed, index as u64)
}

/// Plays `games` games in sequence; learning agents keep training across them.
///
/// An agent fault ends the match early and is reported through [`MatchStats::aborted`].
pub fn run_match(
    agents: &mut [&mut dyn Agent],
    config: &DeckConfig,
    reward: &RewardSpec,
    seed: u64,
    games: u32,
    sink: &mut dyn EventSink,
) -> Result<MatchStats, MatchError> {
    let mut stats = MatchStats::new(config.players);
    for index in 0..games {
        match session::play_game(config, reward, game_seed(seed, index), index, agents, sink) {
            Ok(summary) => stats.add_game(&summary),
            Err(MatchError::Agent(fault)) => {
                stats.aborted = Some(fault.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(stats)
}

pub fn random_roster(seed: u64, players: usize) -> Vec<RandomAgent> {
    (0..players).map(|seat| RandomAgent::new(mix_seed(seed, 1000 + seat as u64))).collect()
}

/// Random-agent games split over `workers` threads; results and records come back in game order.
///
/// Random agents reseed per game, so the outcome does not depend on `workers`.
pub fn run_random_match(
    config: &DeckConfig,
    reward: &RewardSpec,
    seed: u64,
    games: u32,
    workers: usize,
    sink: &mut dyn EventSink,
) -> Result<MatchStats, MatchError> {
    let workers = workers.clamp(1, games.max(1) as usize);
    let chunk = (games as usize).div_ceil(workers).max(1);
    let ranges: Vec<Range<u32>> = (0..games)
        .step_by(chunk)
        .map(|start| start..(start + chunk as u32).min(games))
        .collect();
    let run_range = |range: Range<u32>| -> Result<(MatchStats, Vec<EventRecord>), MatchError> {
        let mut roster = random_roster(seed, config.players);
        let mut agents: Vec<&mut dyn Agent> = roster.iter_mut().map(|a| a as &mut dyn Agent).collect();
        let mut stats = MatchStats::new(config.players);
        let mut records = Vec::new();
        for index in range {
            let summary =
                session::play_game(config, reward, game_seed(seed, index), index, &mut agents, &mut records)?;
            stats.add_game(&summary);
        }
        Ok((stats, records))
    };
    let parts: Vec<Result<(MatchStats, Vec<EventRecord>), MatchError>> = if ranges.len() <= 1 {
        ranges.into_iter().map(run_range).collect()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = ranges.into_iter().map(|r| scope.spawn(move || run_range(r))).collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        })
    };
    let mut stats = MatchStats::new(config.players);
    for part in parts {
        let (part_stats, records) = part?;
        for record in &records {
            sink.record(record)?;
            if matches!(record.event, crate::log::Event::GameEnd { .. }) {
                sink.end_game()?;
            }
        }
        stats.merge(&part_stats);
    }
    Ok(stats)
}

/// Rule variants compared in the mechanics ablation.
pub const VARIANTS: [&str; 4] = ["all", "no-joker", "no-exchange", "no-special"];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VariantResult {
    pub variant: String,
    pub games: usize,
    pub start_shift_win_rate: f64,
    pub avg_rounds: f64,
    pub victories: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Experiment1 {
    pub seed: u64,
    pub exchange_literal: bool,
    pub rows: Vec<VariantResult>,
}

impl Experiment1 {
    pub fn row(&self, variant: &str) -> &VariantResult {
        self.rows.iter().find(|r| r.variant == variant).expect("known variant")
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:<12} {:>18} {:>8}\n", "mechanic", "start/win shift", "rounds");
        for row in &self.rows {
            out.push_str(&format!(
                "{:<12} {:>17.1}% {:>8.1}\n",
                row.variant,
                row.start_shift_win_rate * 100.0,
                row.avg_rounds
            ));
        }
        out
    }
}

/// Random agents under each rule variant.
pub fn experiment1(games: u32, seed: u64, exchange_literal: bool, workers: usize) -> Result<Experiment1, MatchError> {
    let mut rows = Vec::new();
    for variant in VARIANTS {
        let mut config = DeckConfig::variant(variant).expect("known variant");
        config.exchange_literal = exchange_literal;
        let stats = run_random_match(&config, &RewardSpec::RulesLearning, seed, games, workers, &mut crate::log::NullSink)?;
        rows.push(VariantResult {
            variant: variant.to_string(),
            games: stats.games(),
            start_shift_win_rate: stats.start_shift_win_rate(),
            avg_rounds: stats.avg_rounds(),
            victories: stats.victories.clone(),
        });
    }
    Ok(Experiment1 { seed, exchange_literal, rows })
}

/// Output of a learning experiment: stats plus the trained learners.
pub struct LearningRun {
    pub stats: MatchStats,
    pub learners: Vec<DqnAgent>,
}

/// One fresh deep-Q learner in seat 0 against three random agents, rewarded for valid moves.
pub fn experiment2(games: u32, seed: u64, qconfig: &QConfig, sink: &mut dyn EventSink) -> Result<LearningRun, MatchError> {
    let config = DeckConfig::default();
    let mut learner = DqnAgent::new(qconfig.clone(), &config, mix_seed(seed, 7));
    let mut randoms = random_roster(seed, config.players);
    let stats = {
        let mut agents: Vec<&mut dyn Agent> = vec![&mut learner];
        agents.extend(randoms.iter_mut().skip(1).map(|a| a as &mut dyn Agent));
        run_match(&mut agents, &config, &RewardSpec::RulesLearning, seed, games, sink)?
    };
    Ok(LearningRun { stats, learners: vec![learner] })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exp3Condition {
    /// Seat 0 starts from a trained learner; the other seats are random.
    VsRandom,
    /// Four learners.
    AllLearners,
}

/// Learners trained to win. `warm_start` seeds seat 0 in the vs-random condition.
pub fn experiment3(
    condition: Exp3Condition,
    games: u32,
    seed: u64,
    qconfig: &QConfig,
    warm_start: Option<DqnAgent>,
    sink: &mut dyn EventSink,
) -> Result<LearningRun, MatchError> {
    let config = DeckConfig::default();
    let reward = RewardSpec::WinGame;
    match condition {
        Exp3Condition::VsRandom => {
            let mut learner = match warm_start {
                Some(agent) => agent,
                None => DqnAgent::new(qconfig.clone(), &config, mix_seed(seed, 7)),
            };
            let mut randoms = random_roster(seed, config.players);
            let stats = {
                let mut agents: Vec<&mut dyn Agent> = vec![&mut learner];
                agents.extend(randoms.iter_mut().skip(1).map(|a| a as &mut dyn Agent));
                run_match(&mut agents, &config, &reward, seed, games, sink)?
            };
            Ok(LearningRun { stats, learners: vec![learner] })
        }
        Exp3Condition::AllLearners => {
            let mut learners: Vec<DqnAgent> = (0..config.players)
                .map(|seat| DqnAgent::new(qconfig.clone(), &config, mix_seed(seed, 7 + seat as u64)))
                .collect();
            if let Some(agent) = warm_start {
                learners[0] = agent;
            }
            let stats = {
                let mut agents: Vec<&mut dyn Agent> = learners.iter_mut().map(|a| a as &mut dyn Agent).collect();
                run_match(&mut agents, &config, &reward, seed, games, sink)?
            };
            Ok(LearningRun { stats, learners })
        }
    }
}

/// Summary document written next to the per-game CSV.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchSummary {
    pub format_version: u32,
    pub games: usize,
    pub victories: Vec<u32>,
    pub start_shift_win_rate: f64,
    pub avg_rounds: f64,
    pub mean_wrong_actions: Vec<f64>,
    pub mean_reward: Vec<f64>,
    pub aborted: Option<String>,
}

impl MatchSummary {
    pub fn from_stats(stats: &MatchStats) -> Self {
        let all = 0..stats.games();
        MatchSummary {
            format_version: crate::log::FORMAT_VERSION,
            games: stats.games(),
            victories: stats.victories.clone(),
            start_shift_win_rate: stats.start_shift_win_rate(),
            avg_rounds: stats.avg_rounds(),
            mean_wrong_actions: (0..stats.players).map(|s| stats.mean_wrong_actions(s, all.clone())).collect(),
            mean_reward: (0..stats.players).map(|s| stats.mean_reward(s, all.clone())).collect(),
            aborted: stats.aborted.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::NullSink;

    #[test]
    fn zero_games_give_empty_stats() {
        let mut roster = random_roster(1, 4);
        let mut agents: Vec<&mut dyn Agent> = roster.iter_mut().map(|a| a as &mut dyn Agent).collect();
        let mut records: Vec<EventRecord> = Vec::new();
        let stats = run_match(&mut agents, &DeckConfig::default(), &RewardSpec::RulesLearning, 1, 0, &mut records).unwrap();
        assert_eq!(stats.games(), 0);
        assert!(records.is_empty());
        assert_eq!(stats.start_shift_win_rate(), 0.0);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let config = DeckConfig::default();
        let mut a: Vec<EventRecord> = Vec::new();
        let mut b: Vec<EventRecord> = Vec::new();
        let one = run_random_match(&config, &RewardSpec::RulesLearning, 9, 6, 1, &mut a).unwrap();
        let three = run_random_match(&config, &RewardSpec::RulesLearning, 9, 6, 3, &mut b).unwrap();
        assert_eq!(one, three);
        assert_eq!(a, b);
    }

    #[test]
    fn victories_sum_to_games() {
        let stats = run_random_match(&DeckConfig::default(), &RewardSpec::RulesLearning, 2, 12, 1, &mut NullSink).unwrap();
        assert_eq!(stats.victories.iter().sum::<u32>(), 12);
        let rate = stats.start_shift_win_rate();
        assert!((0.0..=1.0).contains(&rate));
        let mut csv = Vec::new();
        stats.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 13);
    }
}
