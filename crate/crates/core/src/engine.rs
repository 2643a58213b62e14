//! Authoritative rules state machine for one game.
//!
//! A game is a sequence of shifts. Each shift goes through
//! `Dealing -> Exchange -> Playing -> ShiftEnd`, after which scoring either
//! ends the game or loops back to `Dealing`:
//!
//! ```text
//! deal()  assign_roles()  check_special_action()  perform_exchange()  start_shift_play()  step()*
//! ```
//!
//! Cards are tracked as per-value counts; every card is always in exactly one
//! of: a hand, the board, the discard pile, or the set-aside remainder.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::actions::{ActionDescriptor, ActionMask, ActionTable, BoardTop};
use crate::cards::{Card, DeckConfig, Hand, Role, JOKER};
use crate::error::GameError;
use crate::rewards::{RewardContext, RewardInput, RewardSpec};

/// Observation entries are face values divided by this.
pub const OBSERVATION_SCALE: f64 = 13.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Dealing,
    Exchange,
    Playing,
    ShiftEnd,
    GameEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SpecialAction {
    FoodFight,
    DinnerIsServed,
}

/// The play currently lying on the board.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoardPlay {
    pub cards: Vec<Card>,
    pub top: BoardTop,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    pub from: usize,
    pub to: usize,
    pub cards: Vec<Card>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GameEvent {
    CardsPlayed { player: usize, cards: Vec<Card>, top: BoardTop },
    Passed { player: usize },
    PlayerFinished { player: usize, position: usize },
    BoardCleaned { next_leader: usize },
    ShiftEnded { finish_order: Vec<usize>, scores: Vec<u32> },
    GameEnded { winner: usize, scores: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub player: usize,
    pub action: usize,
    pub accepted: bool,
    pub reward: f64,
    pub events: Vec<GameEvent>,
    pub next_turn: usize,
}

impl StepOutcome {
    pub fn finished_position(&self) -> Option<usize> {
        self.events.iter().find_map(|e| match *e {
            GameEvent::PlayerFinished { player, position } if player == self.player => Some(position),
            _ => None,
        })
    }

    pub fn shift_ended(&self) -> bool {
        self.events.iter().any(|e| matches!(e, GameEvent::ShiftEnded { .. }))
    }

    pub fn game_ended(&self) -> bool {
        self.events.iter().any(|e| matches!(e, GameEvent::GameEnded { .. }))
    }
}

/// Points awarded for each finishing position.
pub fn shift_points(position: usize, players: usize) -> u32 {
    if position + 1 >= players {
        0
    } else {
        [5, 3, 1].get(position).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct GameState {
    config: DeckConfig,
    table: ActionTable,
    reward: RewardSpec,
    seed: u64,
    rng: ChaCha8Rng,
    phase: Phase,
    hands: Vec<Hand>,
    initial_cards: Vec<usize>,
    board: Option<BoardPlay>,
    discard: Hand,
    set_aside: Hand,
    pizza_passed: Vec<bool>,
    last_discarder: Option<usize>,
    turn: usize,
    leader: usize,
    shift_starter: usize,
    shift_index: u32,
    round_index: u32,
    acted_this_round: Vec<bool>,
    finish_order: Vec<usize>,
    previous_finish_order: Option<Vec<usize>>,
    roles: Vec<Role>,
    special: Option<(usize, SpecialAction)>,
    exchange_cancelled: bool,
    scores: Vec<u32>,
    winner: Option<usize>,
    wrong_actions: Vec<u32>,
    accepted_moves: u64,
}

impl GameState {
    pub fn new(config: DeckConfig, seed: u64) -> Result<Self, GameError> {
        config.validate()?;
        let players = config.players;
        Ok(GameState {
            table: ActionTable::new(&config),
            reward: RewardSpec::default(),
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            phase: Phase::Dealing,
            hands: vec![Hand::new(); players],
            initial_cards: vec![0; players],
            board: None,
            discard: Hand::new(),
            set_aside: Hand::new(),
            pizza_passed: vec![false; players],
            last_discarder: None,
            turn: 0,
            leader: 0,
            shift_starter: 0,
            shift_index: 1,
            round_index: 0,
            acted_this_round: vec![false; players],
            finish_order: Vec::with_capacity(players),
            previous_finish_order: None,
            roles: vec![Role::None; players],
            special: None,
            exchange_cancelled: false,
            scores: vec![0; players],
            winner: None,
            wrong_actions: vec![0; players],
            accepted_moves: 0,
            config,
        })
    }

    pub fn with_reward(mut self, reward: RewardSpec) -> Self {
        self.reward = reward;
        self
    }

    pub fn set_reward(&mut self, reward: RewardSpec) {
        self.reward = reward;
    }

    pub fn config(&self) -> &DeckConfig {
        &self.config
    }
    pub fn table(&self) -> &ActionTable {
        &self.table
    }
    pub fn reward_spec(&self) -> &RewardSpec {
        &self.reward
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn phase(&self) -> Phase {
        self.phase
    }
    pub fn players(&self) -> usize {
        self.config.players
    }
    pub fn hand(&self, player: usize) -> &Hand {
        &self.hands[player]
    }
    pub fn hands(&self) -> &[Hand] {
        &self.hands
    }
    pub fn initial_cards(&self, player: usize) -> usize {
        self.initial_cards[player]
    }
    pub fn board(&self) -> Option<&BoardPlay> {
        self.board.as_ref()
    }
    pub fn board_top(&self) -> Option<BoardTop> {
        self.board.as_ref().map(|b| b.top)
    }
    pub fn discard_pile(&self) -> &Hand {
        &self.discard
    }
    pub fn set_aside(&self) -> &Hand {
        &self.set_aside
    }
    pub fn pizza_passed(&self) -> &[bool] {
        &self.pizza_passed
    }
    pub fn last_discarder(&self) -> Option<usize> {
        self.last_discarder
    }
    pub fn turn(&self) -> usize {
        self.turn
    }
    pub fn leader(&self) -> usize {
        self.leader
    }
    /// Leader of the first pizza of the current shift.
    pub fn shift_starter(&self) -> usize {
        self.shift_starter
    }
    pub fn shift_index(&self) -> u32 {
        self.shift_index
    }
    /// Completed turn cycles since the start of the game.
    pub fn round_index(&self) -> u32 {
        self.round_index
    }
    pub fn finish_order(&self) -> &[usize] {
        &self.finish_order
    }
    pub fn previous_finish_order(&self) -> Option<&[usize]> {
        self.previous_finish_order.as_deref()
    }
    pub fn roles(&self) -> &[Role] {
        &self.roles
    }
    pub fn special_action(&self) -> Option<(usize, SpecialAction)> {
        self.special
    }
    pub fn exchange_cancelled(&self) -> bool {
        self.exchange_cancelled
    }
    pub fn scores(&self) -> &[u32] {
        &self.scores
    }
    pub fn winner(&self) -> Option<usize> {
        self.winner
    }
    pub fn wrong_actions(&self) -> &[u32] {
        &self.wrong_actions
    }
    pub fn accepted_moves(&self) -> u64 {
        self.accepted_moves
    }
    pub fn is_finished(&self, player: usize) -> bool {
        self.finish_order.contains(&player)
    }

    fn expect_phase(&self, expected: Phase) -> Result<(), GameError> {
        if self.phase == expected {
            Ok(())
        } else {
            Err(GameError::Phase { expected, actual: self.phase })
        }
    }

    /// Shuffles the full deck and deals an equal share to every player.
    pub fn deal(&mut self) -> Result<(), GameError> {
        self.expect_phase(Phase::Dealing)?;
        let mut deck = self.config.build_deck();
        deck.shuffle(&mut self.rng);
        let per_player = self.config.hand_size();
        let players = self.players();
        for (p, chunk) in deck.chunks(per_player).take(players).enumerate() {
            self.hands[p] = Hand::from_cards(chunk);
            self.initial_cards[p] = chunk.len();
        }
        self.set_aside = Hand::from_cards(&deck[per_player * players..]);
        self.discard = Hand::new();
        self.board = None;
        self.pizza_passed.fill(false);
        self.last_discarder = None;
        self.finish_order.clear();
        self.roles.fill(Role::None);
        self.special = None;
        self.exchange_cancelled = false;
        self.phase = Phase::Exchange;
        Ok(())
    }

    /// Roles from the previous shift's finishing order.
    pub fn assign_roles(&mut self) -> Result<(), GameError> {
        self.expect_phase(Phase::Exchange)?;
        let order = self.previous_finish_order.as_ref().ok_or(GameError::NoFinishOrder)?;
        let players = self.config.players;
        for (position, &player) in order.iter().enumerate() {
            self.roles[player] = Role::from_position(position, players);
        }
        Ok(())
    }

    fn player_with_role(&self, role: Role) -> Option<usize> {
        self.roles.iter().position(|&r| r == role)
    }

    /// Who, if anyone, may invoke a special action this shift.
    pub fn check_special_action(&self) -> Option<(usize, SpecialAction)> {
        if self.phase != Phase::Exchange || !self.config.use_special_actions || self.config.jokers() < 2 {
            return None;
        }
        let holder = self.hands.iter().position(|h| h.jokers() >= 2)?;
        match self.roles[holder] {
            Role::None => None,
            Role::Dishwasher => Some((holder, SpecialAction::FoodFight)),
            _ => Some((holder, SpecialAction::DinnerIsServed)),
        }
    }

    /// Applies an accepted special action offer.
    pub fn apply_special_action(&mut self, player: usize, kind: SpecialAction) -> Result<(), GameError> {
        self.expect_phase(Phase::Exchange)?;
        match kind {
            SpecialAction::FoodFight => {
                for role in &mut self.roles {
                    *role = role.inverted();
                }
            }
            SpecialAction::DinnerIsServed => self.exchange_cancelled = true,
        }
        self.special = Some((player, kind));
        Ok(())
    }

    pub fn exchange_applies(&self) -> bool {
        self.config.use_card_exchange
            && !self.exchange_cancelled
            && self.roles.iter().any(|&r| r != Role::None)
    }

    /// Cards forced out of a losing hand.
    fn forced_cards(hand: &Hand, count: usize, highest: bool) -> Vec<Card> {
        let mut pool: Vec<Card> = hand.cards().into_iter().filter(|c| !c.is_joker()).collect();
        if pool.len() < count {
            pool.extend(std::iter::repeat_n(Card::joker(), hand.jokers() as usize));
        }
        if highest {
            // plain copies before the golden one
            pool.sort_by_key(|c| (std::cmp::Reverse(c.value), c.golden));
        }
        pool.truncate(count);
        pool
    }

    /// Forced transfers followed by the receivers' returned cards.
    ///
    /// `choose_return(player, hand, count)` picks the cards a winner hands back.
    pub fn perform_exchange<F>(&mut self, mut choose_return: F) -> Result<Vec<Transfer>, GameError>
    where
        F: FnMut(usize, &Hand, usize) -> Vec<Card>,
    {
        self.expect_phase(Phase::Exchange)?;
        if !self.exchange_applies() {
            return Ok(Vec::new());
        }
        let pairs = [
            (Role::Dishwasher, Role::Chef, 2, self.config.exchange_literal),
            (Role::Waiter, Role::SousChef, 1, false),
        ];
        let mut transfers = Vec::new();
        for (giver_role, taker_role, count, highest) in pairs {
            let (Some(giver), Some(taker)) = (self.player_with_role(giver_role), self.player_with_role(taker_role))
            else {
                continue;
            };
            for (player, needed) in [(giver, count), (taker, count)] {
                let held = self.hands[player].len();
                if held < needed {
                    return Err(GameError::HandTooSmall { player, held, needed });
                }
            }
            let forced = Self::forced_cards(&self.hands[giver], count, highest);
            for card in &forced {
                self.hands[giver].remove(*card);
                self.hands[taker].add(*card);
            }
            transfers.push(Transfer { from: giver, to: taker, cards: forced });

            let returned = choose_return(taker, &self.hands[taker], count);
            if returned.len() != count {
                return Err(GameError::ReturnCount { player: taker, got: returned.len(), expected: count });
            }
            let mut trial = self.hands[taker];
            for card in &returned {
                if !trial.remove(*card) {
                    return Err(GameError::ReturnNotHeld { player: taker, card: *card });
                }
            }
            self.hands[taker] = trial;
            for card in &returned {
                self.hands[giver].add(*card);
            }
            transfers.push(Transfer { from: taker, to: giver, cards: returned });
        }
        Ok(transfers)
    }

    /// Golden-11 holder leads the first pizza; player 0 when it was set aside.
    pub fn start_shift_play(&mut self) -> Result<(), GameError> {
        self.expect_phase(Phase::Exchange)?;
        self.leader = self.hands.iter().position(|h| h.has_golden()).unwrap_or(0);
        self.shift_starter = self.leader;
        self.turn = self.leader;
        self.board = None;
        self.pizza_passed.fill(false);
        self.last_discarder = None;
        self.acted_this_round.fill(false);
        self.phase = Phase::Playing;
        Ok(())
    }

    fn is_active(&self, player: usize) -> bool {
        !self.hands[player].is_empty() && !self.is_finished(player)
    }

    /// Legality mask for the player holding the turn.
    pub fn legal_mask(&self) -> ActionMask {
        let is_leader = self.turn == self.leader;
        self.table.legal_mask(&self.hands[self.turn], self.board_top(), is_leader)
    }

    fn reward_for(&self, player: usize, valid: bool, passed: bool, finishing_position: Option<usize>) -> f64 {
        let input = RewardInput {
            valid,
            passed,
            context: RewardContext {
                cards_left: self.hands[player].len(),
                initial_cards: self.initial_cards[player].max(1),
                finishing_position,
            },
        };
        self.reward.reward(&input)
    }

    /// Validates and, when legal, executes `action` for the player holding the turn.
    pub fn step(&mut self, action: usize) -> Result<StepOutcome, GameError> {
        self.expect_phase(Phase::Playing)?;
        let descriptor = self.table.decode(action).ok_or(GameError::ActionOutOfRange(action))?;
        let player = self.turn;
        if !self.legal_mask().is_legal(action) {
            self.wrong_actions[player] += 1;
            let reward = self.reward_for(player, false, false, None);
            return Ok(StepOutcome { player, action, accepted: false, reward, events: Vec::new(), next_turn: player });
        }

        let mut events = Vec::new();
        self.accepted_moves += 1;
        match descriptor {
            ActionDescriptor::Pass => {
                self.pizza_passed[player] = true;
                events.push(GameEvent::Passed { player });
            }
            ActionDescriptor::Discard { value, quantity, jokers } => {
                let mut cards = self.hands[player].take(value, quantity);
                cards.extend(self.hands[player].take(JOKER, jokers));
                self.place_on_board(player, cards, descriptor, &mut events);
            }
            ActionDescriptor::JokerAlone => {
                let cards = self.hands[player].take(JOKER, 1);
                self.place_on_board(player, cards, descriptor, &mut events);
            }
        }
        self.acted_this_round[player] = true;

        let mut finished = None;
        if self.hands[player].is_empty() && !self.is_finished(player) {
            self.finish_order.push(player);
            let position = self.finish_order.len() - 1;
            finished = Some(position);
            events.push(GameEvent::PlayerFinished { player, position });
        }
        let reward = self.reward_for(player, true, descriptor == ActionDescriptor::Pass, finished);

        let active: Vec<usize> = (0..self.players()).filter(|&p| self.is_active(p)).collect();
        if active.len() <= 1 {
            self.end_shift(&active, &mut events)?;
        } else if self.pizza_over() {
            self.clean_board(&mut events);
        } else {
            self.turn = self.next_in_rotation(player);
            self.close_round_if_complete();
        }
        Ok(StepOutcome { player, action, accepted: true, reward, events, next_turn: self.turn })
    }

    fn place_on_board(&mut self, player: usize, cards: Vec<Card>, descriptor: ActionDescriptor, events: &mut Vec<GameEvent>) {
        let top = descriptor.board_top().expect("discard has a board top");
        if let Some(previous) = self.board.take() {
            for card in previous.cards {
                self.discard.add(card);
            }
        }
        events.push(GameEvent::CardsPlayed { player, cards: cards.clone(), top });
        self.board = Some(BoardPlay { cards, top });
        self.last_discarder = Some(player);
    }

    /// Every active player other than the last discarder has passed.
    fn pizza_over(&self) -> bool {
        (0..self.players())
            .filter(|&p| self.is_active(p) && Some(p) != self.last_discarder)
            .all(|p| self.pizza_passed[p])
    }

    fn next_clockwise(&self, from: usize, eligible: impl Fn(usize) -> bool) -> usize {
        let n = self.players();
        (1..=n).map(|k| (from + k) % n).find(|&p| eligible(p)).unwrap_or(from)
    }

    fn next_in_rotation(&self, from: usize) -> usize {
        self.next_clockwise(from, |p| self.is_active(p) && !self.pizza_passed[p])
    }

    fn close_round_if_complete(&mut self) {
        let complete = (0..self.players())
            .filter(|&p| self.is_active(p) && !self.pizza_passed[p])
            .all(|p| self.acted_this_round[p]);
        if complete {
            self.round_index += 1;
            self.acted_this_round.fill(false);
        }
    }

    fn clean_board(&mut self, events: &mut Vec<GameEvent>) {
        if let Some(previous) = self.board.take() {
            for card in previous.cards {
                self.discard.add(card);
            }
        }
        let discarder = self.last_discarder.take().unwrap_or(self.turn);
        let next = if self.is_active(discarder) {
            discarder
        } else {
            self.next_clockwise(discarder, |p| self.is_active(p))
        };
        self.pizza_passed.fill(false);
        self.leader = next;
        self.turn = next;
        events.push(GameEvent::BoardCleaned { next_leader: next });
        self.close_round_if_complete();
    }

    fn end_shift(&mut self, active: &[usize], events: &mut Vec<GameEvent>) -> Result<(), GameError> {
        for &p in active {
            self.finish_order.push(p);
            events.push(GameEvent::PlayerFinished { player: p, position: self.finish_order.len() - 1 });
        }
        if let Some(previous) = self.board.take() {
            for card in previous.cards {
                self.discard.add(card);
            }
        }
        if self.acted_this_round.iter().any(|&a| a) {
            self.round_index += 1;
            self.acted_this_round.fill(false);
        }
        self.last_discarder = None;
        self.phase = Phase::ShiftEnd;
        events.extend(self.score_shift()?);
        Ok(())
    }

    /// Awards points by finishing position and decides whether the game is over.
    pub fn score_shift(&mut self) -> Result<Vec<GameEvent>, GameError> {
        self.expect_phase(Phase::ShiftEnd)?;
        let players = self.players();
        for (position, &player) in self.finish_order.iter().enumerate() {
            self.scores[player] += shift_points(position, players);
        }
        let mut events =
            vec![GameEvent::ShiftEnded { finish_order: self.finish_order.clone(), scores: self.scores.clone() }];
        let best = self.scores.iter().copied().max().unwrap_or(0);
        if best >= self.config.target_score {
            let winner = self
                .finish_order
                .iter()
                .copied()
                .find(|&p| self.scores[p] == best)
                .expect("finish order covers every player");
            self.winner = Some(winner);
            self.phase = Phase::GameEnd;
            events.push(GameEvent::GameEnded { winner, scores: self.scores.clone() });
        } else {
            self.previous_finish_order = Some(std::mem::take(&mut self.finish_order));
            self.shift_index += 1;
            self.phase = Phase::Dealing;
        }
        Ok(events)
    }

    /// Normalized hand-then-board vector for `player`.
    pub fn observation(&self, player: usize) -> Vec<f64> {
        observation_vector(&self.hands[player], self.board_top(), self.config.hand_size(), self.config.board_slots)
    }

    pub fn observation_len(&self) -> usize {
        observation_len(&self.config)
    }

    /// Total of every pile; equals the deck composition at all times after dealing.
    pub fn card_census(&self) -> Hand {
        let mut all = self.discard;
        all.merge(&self.set_aside);
        for hand in &self.hands {
            all.merge(hand);
        }
        if let Some(board) = &self.board {
            all.merge(&Hand::from_cards(&board.cards));
        }
        all
    }

    pub fn cards_conserved(&self) -> bool {
        let census = self.card_census();
        let deck = Hand::from_cards(&self.config.build_deck());
        let golden_places = self.hands.iter().filter(|h| h.has_golden()).count()
            + self.discard.has_golden() as usize
            + self.set_aside.has_golden() as usize
            + self.board.as_ref().map_or(0, |b| b.cards.iter().filter(|c| c.golden).count());
        census == deck && golden_places == 1
    }

    #[cfg(test)]
    pub(crate) fn set_hands_for_test(&mut self, hands: Vec<Hand>) {
        self.initial_cards = hands.iter().map(|h| h.len()).collect();
        self.hands = hands;
    }

    #[cfg(test)]
    pub(crate) fn set_previous_finish_order_for_test(&mut self, order: Vec<usize>) {
        self.previous_finish_order = Some(order);
    }

    #[cfg(test)]
    pub(crate) fn set_scores_for_test(&mut self, scores: Vec<u32>, finish_order: Vec<usize>) {
        self.scores = scores;
        self.finish_order = finish_order;
        self.phase = Phase::ShiftEnd;
    }
}

pub fn observation_len(config: &DeckConfig) -> usize {
    config.hand_size() + config.board_slots as usize
}

/// Hand values descending then the board top, each divided by 13, zero-padded.
pub fn observation_vector(hand: &Hand, board: Option<BoardTop>, hand_slots: usize, board_slots: u8) -> Vec<f64> {
    let mut obs = vec![0.0; hand_slots + board_slots as usize];
    for (slot, v) in obs.iter_mut().zip(hand.values_descending()) {
        *slot = v as f64 / OBSERVATION_SCALE;
    }
    if let Some(top) = board {
        let board_part = &mut obs[hand_slots..];
        for slot in board_part.iter_mut().take(top.quantity as usize) {
            *slot = top.value as f64 / OBSERVATION_SCALE;
        }
    }
    obs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_game(seed: u64) -> GameState {
        GameState::new(DeckConfig::default(), seed).unwrap()
    }

    fn playing_game(seed: u64) -> GameState {
        let mut g = default_game(seed);
        g.deal().unwrap();
        g.start_shift_play().unwrap();
        g
    }

    #[test]
    fn same_seed_same_deal() {
        let mut a = default_game(9);
        let mut b = default_game(9);
        a.deal().unwrap();
        b.deal().unwrap();
        assert_eq!(a.hands(), b.hands());
        let mut c = default_game(10);
        c.deal().unwrap();
        assert_ne!(a.hands(), c.hands());
    }

    #[test]
    fn default_deal_is_17_each() {
        let mut g = default_game(1);
        g.deal().unwrap();
        assert!(g.hands().iter().all(|h| h.len() == 17));
        assert!(g.set_aside().is_empty());
        assert!(g.cards_conserved());
    }

    #[test]
    fn no_joker_deal_sets_two_aside() {
        let mut g = GameState::new(DeckConfig::variant("no-joker").unwrap(), 1).unwrap();
        g.deal().unwrap();
        assert!(g.hands().iter().all(|h| h.len() == 16));
        assert_eq!(g.set_aside().len(), 2);
        assert!(g.cards_conserved());
    }

    #[test]
    fn invalid_config_is_a_configuration_error() {
        let config = DeckConfig { board_slots: 0, ..DeckConfig::default() };
        assert!(matches!(GameState::new(config, 0), Err(GameError::Config(_))));
    }

    #[test]
    fn roles_follow_previous_finish_order() {
        let mut g = default_game(3);
        g.deal().unwrap();
        assert_eq!(g.assign_roles(), Err(GameError::NoFinishOrder));
        assert!(g.roles().iter().all(|&r| r == Role::None));
        assert!(!g.exchange_applies());
        g.set_previous_finish_order_for_test(vec![2, 0, 3, 1]);
        g.assign_roles().unwrap();
        assert_eq!(g.roles(), &[Role::SousChef, Role::Dishwasher, Role::Chef, Role::Waiter]);
        let first = g.roles().to_vec();
        g.assign_roles().unwrap();
        assert_eq!(g.roles(), &first[..]);
    }

    fn exchange_game(hands: Vec<Hand>, literal: bool) -> GameState {
        let config = DeckConfig { exchange_literal: literal, ..DeckConfig::default() };
        let mut g = GameState::new(config, 0).unwrap();
        g.deal().unwrap();
        g.set_hands_for_test(hands);
        g.set_previous_finish_order_for_test(vec![0, 1, 2, 3]);
        g.assign_roles().unwrap();
        g
    }

    fn highest_two(_: usize, hand: &Hand, count: usize) -> Vec<Card> {
        let mut cards = hand.cards();
        cards.reverse();
        cards.into_iter().filter(|c| !c.is_joker()).take(count).collect()
    }

    #[test]
    fn dishwasher_surrenders_two_lowest_faces() {
        let hands = vec![
            Hand::from_values(&[9, 10, 11, 11]),
            Hand::from_values(&[5, 6, 8]),
            Hand::from_values(&[2, 7, 8]),
            Hand::from_values(&[1, 3, 3, 7, 12]),
        ];
        let mut g = exchange_game(hands, false);
        let transfers = g.perform_exchange(highest_two).unwrap();
        assert_eq!(transfers[0], Transfer { from: 3, to: 0, cards: vec![Card::new(1), Card::new(3)] });
        assert_eq!(transfers[1], Transfer { from: 0, to: 3, cards: vec![Card::new(11), Card::new(11)] });
        assert_eq!(transfers[2], Transfer { from: 2, to: 1, cards: vec![Card::new(2)] });
        assert_eq!(transfers[3], Transfer { from: 1, to: 2, cards: vec![Card::new(8)] });
        assert_eq!(g.hand(3), &Hand::from_values(&[3, 7, 11, 11, 12]));
        assert_eq!(g.hand(0), &Hand::from_values(&[1, 3, 9, 10]));
    }

    #[test]
    fn literal_exchange_sends_highest_faces() {
        let hands = vec![
            Hand::from_values(&[9, 10]),
            Hand::from_values(&[5, 6]),
            Hand::from_values(&[2, 7]),
            Hand::from_values(&[1, 3, 3, 7, 12]),
        ];
        let mut g = exchange_game(hands, true);
        let transfers = g.perform_exchange(highest_two).unwrap();
        assert_eq!(transfers[0].cards, vec![Card::new(7), Card::new(3)]);
        // waiter clause unchanged
        assert_eq!(transfers[2].cards, vec![Card::new(2)]);
    }

    #[test]
    fn exchange_conserves_cards() {
        let mut g = default_game(11);
        g.deal().unwrap();
        g.set_previous_finish_order_for_test(vec![1, 3, 0, 2]);
        g.assign_roles().unwrap();
        g.perform_exchange(highest_two).unwrap();
        assert!(g.cards_conserved());
        assert!(g.hands().iter().all(|h| h.len() == 17));
    }

    #[test]
    fn bad_return_choice_is_rejected() {
        let hands = vec![
            Hand::from_values(&[9, 10]),
            Hand::from_values(&[5, 6]),
            Hand::from_values(&[2, 7]),
            Hand::from_values(&[1, 3]),
        ];
        let mut g = exchange_game(hands, false);
        let err = g.perform_exchange(|_, _, _| vec![Card::new(4), Card::new(4)]).unwrap_err();
        assert_eq!(err, GameError::ReturnNotHeld { player: 0, card: Card::new(4) });
    }

    #[test]
    fn dinner_is_served_cancels_exchange() {
        let hands = vec![
            Hand::from_values(&[9, 12, 12]),
            Hand::from_values(&[5, 6]),
            Hand::from_values(&[2, 7]),
            Hand::from_values(&[1, 3]),
        ];
        let mut g = exchange_game(hands.clone(), false);
        let offer = g.check_special_action();
        assert_eq!(offer, Some((0, SpecialAction::DinnerIsServed)));
        g.apply_special_action(0, SpecialAction::DinnerIsServed).unwrap();
        assert!(g.perform_exchange(highest_two).unwrap().is_empty());
        assert_eq!(g.hands(), &hands[..]);
    }

    #[test]
    fn food_fight_inverts_roles_before_exchange() {
        let hands = vec![
            Hand::from_values(&[9, 10]),
            Hand::from_values(&[5, 6]),
            Hand::from_values(&[2, 7]),
            Hand::from_values(&[1, 3, 12, 12]),
        ];
        let mut g = exchange_game(hands, false);
        assert_eq!(g.check_special_action(), Some((3, SpecialAction::FoodFight)));
        g.apply_special_action(3, SpecialAction::FoodFight).unwrap();
        assert_eq!(g.roles(), &[Role::Dishwasher, Role::Waiter, Role::SousChef, Role::Chef]);
        let transfers = g.perform_exchange(highest_two).unwrap();
        // former chef now gives its two strongest to the former dishwasher
        assert_eq!(transfers[0], Transfer { from: 0, to: 3, cards: vec![Card::new(9), Card::new(10)] });
    }

    #[test]
    fn split_jokers_give_no_offer() {
        let hands = vec![
            Hand::from_values(&[9, 12]),
            Hand::from_values(&[5, 12]),
            Hand::from_values(&[2, 7]),
            Hand::from_values(&[1, 3]),
        ];
        let g = exchange_game(hands, false);
        assert_eq!(g.check_special_action(), None);
    }

    #[test]
    fn golden_holder_leads() {
        for seed in 0..20 {
            let g = playing_game(seed);
            let holder = g.hands().iter().position(|h| h.has_golden()).unwrap();
            assert_eq!(g.leader(), holder);
            assert_eq!(g.turn(), holder);
            assert_eq!(playing_game(seed).leader(), g.leader());
        }
    }

    #[test]
    fn golden_set_aside_falls_back_to_player_zero() {
        let config = DeckConfig::variant("no-joker").unwrap();
        let seed = (0..500)
            .find(|&s| {
                let mut g = GameState::new(config.clone(), s).unwrap();
                g.deal().unwrap();
                g.set_aside().has_golden()
            })
            .expect("some seed sets the golden 11 aside");
        let mut g = GameState::new(config, seed).unwrap();
        g.deal().unwrap();
        g.start_shift_play().unwrap();
        assert_eq!(g.leader(), 0);
    }

    #[test]
    fn legal_pass_earns_one_and_illegal_discard_minus_one() {
        let mut g = playing_game(4);
        let leader = g.turn();
        let mask = g.legal_mask();
        let play = mask.legal_ids().next().unwrap();
        g.step(play).unwrap();
        let pass = g.table().pass_id();
        let out = g.step(pass).unwrap();
        assert!(out.accepted);
        assert_eq!(out.reward, 1.0);
        assert_ne!(out.player, leader);

        let before_hands = g.hands().to_vec();
        let before_board = g.board().cloned();
        let turn = g.turn();
        let illegal = (0..199).find(|&id| !g.legal_mask().is_legal(id)).unwrap();
        let out = g.step(illegal).unwrap();
        assert!(!out.accepted);
        assert_eq!(out.reward, -1.0);
        assert_eq!(g.hands(), &before_hands[..]);
        assert_eq!(g.board().cloned(), before_board);
        assert_eq!(g.turn(), turn);
        assert_eq!(g.wrong_actions()[turn], 1);
    }

    #[test]
    fn step_contract_errors() {
        let mut g = default_game(0);
        assert!(matches!(g.step(0), Err(GameError::Phase { .. })));
        let mut g = playing_game(0);
        assert_eq!(g.step(200), Err(GameError::ActionOutOfRange(200)));
    }

    #[test]
    fn scoring_awards_five_three_one_zero() {
        let mut g = default_game(0);
        g.set_scores_for_test(vec![0, 0, 0, 0], vec![1, 0, 2, 3]);
        let events = g.score_shift().unwrap();
        assert_eq!(g.scores(), &[3, 5, 1, 0]);
        assert_eq!(g.phase(), Phase::Dealing);
        assert_eq!(events.len(), 1);
    }

    #[test]
    fn reaching_target_ends_game() {
        let mut g = default_game(0);
        g.set_scores_for_test(vec![12, 10, 3, 0], vec![0, 1, 2, 3]);
        let events = g.score_shift().unwrap();
        assert_eq!(g.phase(), Phase::GameEnd);
        assert_eq!(g.winner(), Some(0));
        assert!(matches!(events.last(), Some(GameEvent::GameEnded { winner: 0, .. })));
    }

    #[test]
    fn tie_at_target_goes_to_better_finisher() {
        let mut g = default_game(0);
        g.set_scores_for_test(vec![12, 14, 0, 0], vec![0, 1, 2, 3]);
        g.score_shift().unwrap();
        assert_eq!(g.scores()[..2], [17, 17]);
        assert_eq!(g.winner(), Some(0));
    }

    #[test]
    fn observation_layout() {
        let g = playing_game(2);
        let obs = g.observation(0);
        assert_eq!(obs.len(), 28);
        assert!(obs[17..].iter().all(|&x| x == 0.0));
        assert!(obs[..17].windows(2).all(|w| w[0] >= w[1]));
        let with_eleven = (0..4).find(|&p| g.hand(p).count(11) > 0).unwrap();
        let obs = g.observation(with_eleven);
        assert!(obs.iter().any(|&x| (x - 11.0 / 13.0).abs() < 1e-12));
        assert!((11.0f64 / 13.0 - 0.8462).abs() < 1e-4);

        let empty = observation_vector(&Hand::new(), None, 17, 11);
        assert!(empty.iter().all(|&x| x == 0.0));

        let board = observation_vector(&Hand::new(), Some(BoardTop { value: 4, quantity: 3 }), 17, 11);
        assert_eq!(&board[17..21], &[4.0 / 13.0, 4.0 / 13.0, 4.0 / 13.0, 0.0]);
    }

    #[test]
    fn player_finishing_gets_next_position() {
        // one card each, leader is whoever holds the golden 11
        let mut g = default_game(0);
        g.deal().unwrap();
        let hands = vec![
            Hand::from_cards(&[Card::golden_eleven()]),
            Hand::from_values(&[5, 5]),
            Hand::from_values(&[9]),
            Hand::from_values(&[3]),
        ];
        g.set_hands_for_test(hands);
        g.start_shift_play().unwrap();
        assert_eq!(g.turn(), 0);
        let id = g.table().encode(ActionDescriptor::Discard { value: 11, quantity: 1, jokers: 0 }).unwrap();
        let out = g.step(id).unwrap();
        assert!(out.events.contains(&GameEvent::PlayerFinished { player: 0, position: 0 }));
        assert_eq!(g.finish_order(), &[0]);
        // leader finished, pizza goes on with player 1
        assert_eq!(g.turn(), 1);
    }
}
