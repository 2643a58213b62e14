//! Drives complete games: shift setup, the per-turn proposal loop and logging.

use crate::agents::{Agent, Experience, RejectedSet, TurnContext};
use crate::cards::DeckConfig;
use crate::engine::{GameEvent, GameState, Phase, StepOutcome};
use crate::error::{AgentFault, MatchError};
use crate::log::{Event, EventRecord, EventSink};
use crate::rewards::RewardSpec;

/// Per-game tallies.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSummary {
    pub index: u32,
    pub seed: u64,
    pub winner: usize,
    pub scores: Vec<u32>,
    pub rounds: u32,
    pub shifts: u32,
    /// Leader of each shift's first pizza.
    pub shift_starters: Vec<usize>,
    /// First finisher of each shift.
    pub shift_winners: Vec<usize>,
    pub proposals: Vec<u32>,
    pub wrong_actions: Vec<u32>,
    pub reward_sums: Vec<f64>,
    pub accepted_plays: u64,
}

impl GameSummary {
    /// Mean reward per proposal for one seat.
    pub fn mean_reward(&self, seat: usize) -> f64 {
        if self.proposals[seat] == 0 {
            0.0
        } else {
            self.reward_sums[seat] / self.proposals[seat] as f64
        }
    }
}

/// Hooks for watching a game as it is played.
pub trait TurnObserver {
    fn on_game_start(&mut self, _game: u32) {}

    /// After every proposal; `observation` is what the proposer saw.
    fn on_proposal(
        &mut self,
        _seat: usize,
        _observation: &[f64],
        _action: usize,
        _valid: bool,
        _reward: f64,
        _state: &GameState,
    ) {
    }

    /// After every accepted step.
    fn on_step(&mut self, _state: &GameState, _outcome: &StepOutcome) {}

    /// Once the shift's play phase begins.
    fn on_shift_play(&mut self, _state: &GameState) {}
}

impl TurnObserver for () {}

struct Recorder<'a> {
    sink: &'a mut dyn EventSink,
    game: u32,
}

impl Recorder<'_> {
    fn emit(&mut self, state: &GameState, turn_player: Option<usize>, event: Event) -> Result<(), MatchError> {
        let record = EventRecord {
            game: self.game,
            shift: state.shift_index(),
            round: state.round_index(),
            turn_player,
            event,
        };
        self.sink.record(&record)?;
        Ok(())
    }
}

pub fn play_game(
    config: &DeckConfig,
    reward: &RewardSpec,
    seed: u64,
    index: u32,
    agents: &mut [&mut dyn Agent],
    sink: &mut dyn EventSink,
) -> Result<GameSummary, MatchError> {
    play_game_observed(config, reward, seed, index, agents, sink, &mut ()).map(|(summary, _)| summary)
}

/// Plays one game to completion and returns its tallies and final state.
///
/// On an agent fault an `aborted` record is written before the error is returned.
pub fn play_game_observed(
    config: &DeckConfig,
    reward: &RewardSpec,
    seed: u64,
    index: u32,
    agents: &mut [&mut dyn Agent],
    sink: &mut dyn EventSink,
    observer: &mut dyn TurnObserver,
) -> Result<(GameSummary, GameState), MatchError> {
    let mut game = GameState::new(config.clone(), seed)?.with_reward(reward.clone());
    assert_eq!(agents.len(), game.players(), "one agent per seat");
    let mut recorder = Recorder { sink, game: index };
    let result = run(&mut game, seed, index, agents, &mut recorder, observer);
    if let Err(MatchError::Agent(fault)) = &result {
        let reason = fault.to_string();
        recorder.emit(&game, None, Event::Aborted { reason })?;
        recorder.sink.end_game()?;
    }
    result.map(|summary| (summary, game))
}

fn run(
    game: &mut GameState,
    seed: u64,
    index: u32,
    agents: &mut [&mut dyn Agent],
    recorder: &mut Recorder<'_>,
    observer: &mut dyn TurnObserver,
) -> Result<GameSummary, MatchError> {
    let players = game.players();
    let table_len = game.table().len();
    let mut summary = GameSummary {
        index,
        seed,
        winner: 0,
        scores: vec![0; players],
        rounds: 0,
        shifts: 0,
        shift_starters: Vec::new(),
        shift_winners: Vec::new(),
        proposals: vec![0; players],
        wrong_actions: vec![0; players],
        reward_sums: vec![0.0; players],
        accepted_plays: 0,
    };
    for agent in agents.iter_mut() {
        agent.begin_game(seed);
    }
    observer.on_game_start(index);
    recorder.emit(game, None, Event::GameStart { seed, config_hash: game.config().config_hash() })?;
    let mut rejected = RejectedSet::new(table_len);

    while game.phase() != Phase::GameEnd {
        setup_shift(game, agents, recorder)?;
        observer.on_shift_play(game);
        summary.shift_starters.push(game.shift_starter());

        while game.phase() == Phase::Playing {
            let seat = game.turn();
            let observation = game.observation(seat);
            let mask = game.legal_mask();
            rejected.clear();
            loop {
                let ctx = TurnContext { seat, observation: &observation, mask: &mask, rejected: &rejected };
                let action = agents[seat].act(&ctx)?;
                if action >= table_len {
                    return Err(AgentFault::OutOfRange { seat, action }.into());
                }
                if rejected.contains(action) {
                    return Err(AgentFault::RepeatedRejected { seat, action }.into());
                }
                let outcome = game.step(action)?;
                summary.proposals[seat] += 1;
                summary.reward_sums[seat] += outcome.reward;
                recorder.emit(
                    game,
                    Some(seat),
                    Event::Proposal { action_id: action, valid: outcome.accepted, reward: outcome.reward },
                )?;
                observer.on_proposal(seat, &observation, action, outcome.accepted, outcome.reward, game);
                let next_state = if outcome.accepted { game.observation(seat) } else { observation.clone() };
                let terminal = outcome.accepted && (outcome.finished_position().is_some() || outcome.shift_ended());
                agents[seat].observe(&Experience {
                    state: observation.clone(),
                    action,
                    reward: outcome.reward,
                    next_state,
                    terminal,
                });
                if outcome.accepted {
                    summary.accepted_plays += 1;
                    observer.on_step(game, &outcome);
                    record_outcome(game, &outcome, recorder)?;
                    break;
                }
                summary.wrong_actions[seat] += 1;
                rejected.insert(action);
                if rejected.len() >= table_len {
                    return Err(AgentFault::TooManyProposals { seat, limit: table_len }.into());
                }
            }
        }
        summary.shifts += 1;
        if let Some(&first) = game.finish_order().first().or(game.previous_finish_order().and_then(|o| o.first())) {
            summary.shift_winners.push(first);
        }
    }

    summary.winner = game.winner().expect("finished game has a winner");
    summary.scores = game.scores().to_vec();
    summary.rounds = game.round_index();
    for (position, &seat) in game.finish_order().iter().enumerate() {
        agents[seat].end_game(position, seat == summary.winner);
    }
    recorder.sink.end_game()?;
    Ok(summary)
}

fn setup_shift(
    game: &mut GameState,
    agents: &mut [&mut dyn Agent],
    recorder: &mut Recorder<'_>,
) -> Result<(), MatchError> {
    game.deal()?;
    if game.previous_finish_order().is_some() {
        game.assign_roles()?;
    }
    let hand_sizes = game.hands().iter().map(|h| h.len()).collect();
    recorder.emit(game, None, Event::ShiftStart { roles: game.roles().to_vec(), hand_sizes })?;

    if let Some((player, kind)) = game.check_special_action() {
        let accepted = agents[player].accept_special_action(player, kind);
        if accepted {
            game.apply_special_action(player, kind)?;
        }
        recorder.emit(game, None, Event::SpecialAction { player, action: kind, accepted })?;
    }

    let mut fault = None;
    let transfers = game.perform_exchange(|seat, hand, count| {
        match agents[seat].choose_return_cards(seat, hand, count) {
            Ok(cards) => cards,
            Err(e) => {
                fault.get_or_insert(e);
                Vec::new()
            }
        }
    });
    if let Some(fault) = fault {
        return Err(fault.into());
    }
    let transfers = transfers?;
    if !transfers.is_empty() {
        recorder.emit(game, None, Event::Exchange { transfers })?;
    }
    game.start_shift_play()?;
    Ok(())
}

fn record_outcome(game: &GameState, outcome: &StepOutcome, recorder: &mut Recorder<'_>) -> Result<(), MatchError> {
    let seat = outcome.player;
    let mut cards = Vec::new();
    for event in &outcome.events {
        if let GameEvent::CardsPlayed { cards: played, .. } = event {
            cards = played.clone();
        }
    }
    let board_after = match game.board() {
        Some(play) => vec![play.top.value; play.top.quantity as usize],
        None => Vec::new(),
    };
    recorder.emit(
        game,
        Some(seat),
        Event::Play { action_id: outcome.action, cards, board_after, finished: outcome.finished_position() },
    )?;
    for event in &outcome.events {
        match event {
            GameEvent::BoardCleaned { next_leader } => {
                recorder.emit(game, None, Event::PizzaEnd { next_leader: *next_leader })?
            }
            GameEvent::ShiftEnded { finish_order, scores } => recorder.emit(
                game,
                None,
                Event::ShiftEnd { finish_order: finish_order.clone(), scores: scores.clone() },
            )?,
            GameEvent::GameEnded { winner, scores } => recorder.emit(
                game,
                None,
                Event::GameEnd {
                    winner: *winner,
                    finish_order: game.finish_order().to_vec(),
                    scores: scores.clone(),
                },
            )?,
            _ => {}
        }
    }
    Ok(())
}
