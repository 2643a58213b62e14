//! The agent contract and the random baseline.
//!
//! Every seat is driven by an [`Agent`]. On its turn an agent proposes action
//! ids one at a time; the engine validates each proposal, rejected ids are fed
//! back through [`TurnContext::rejected`] and must not be proposed again in
//! the same turn. Since the legality mask is never empty, a well-behaved agent
//! is accepted within `table.len()` proposals.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::actions::ActionMask;
use crate::cards::{Card, Hand};
use crate::engine::SpecialAction;
use crate::error::AgentFault;

/// Ids already rejected during the current turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedSet {
    flags: Vec<bool>,
    order: Vec<usize>,
}

impl RejectedSet {
    pub fn new(action_count: usize) -> Self {
        RejectedSet { flags: vec![false; action_count], order: Vec::new() }
    }

    pub fn contains(&self, id: usize) -> bool {
        self.flags.get(id).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, id: usize) {
        if !self.flags[id] {
            self.flags[id] = true;
            self.order.push(id);
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.flags.len()
    }

    /// Rejected ids in the order they were proposed.
    pub fn ids(&self) -> &[usize] {
        &self.order
    }

    pub fn clear(&mut self) {
        self.flags.fill(false);
        self.order.clear();
    }
}

/// What an agent sees when asked for a proposal.
pub struct TurnContext<'a> {
    pub seat: usize,
    pub observation: &'a [f64],
    /// The legality mask. Learning and random agents ignore it; remote agents receive it.
    pub mask: &'a ActionMask,
    pub rejected: &'a RejectedSet,
}

impl TurnContext<'_> {
    pub fn action_count(&self) -> usize {
        self.rejected.capacity()
    }
}

/// One proposal's transition, as seen by the proposing agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

pub trait Agent: Send {
    fn name(&self) -> &str;

    /// Called before each game with that game's seed.
    fn begin_game(&mut self, _game_seed: u64) {}

    fn act(&mut self, ctx: &TurnContext<'_>) -> Result<usize, AgentFault>;

    /// Reward feedback for every proposal this agent made.
    fn observe(&mut self, _experience: &Experience) {}

    /// Cards handed back after receiving forced cards in the exchange.
    fn choose_return_cards(&mut self, _seat: usize, hand: &Hand, count: usize) -> Result<Vec<Card>, AgentFault> {
        Ok(default_return_cards(hand, count))
    }

    fn accept_special_action(&mut self, _seat: usize, _kind: SpecialAction) -> bool {
        true
    }

    fn end_game(&mut self, _final_position: usize, _won: bool) {}
}

impl<A: Agent + ?Sized> Agent for Box<A> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn begin_game(&mut self, game_seed: u64) {
        (**self).begin_game(game_seed)
    }
    fn act(&mut self, ctx: &TurnContext<'_>) -> Result<usize, AgentFault> {
        (**self).act(ctx)
    }
    fn observe(&mut self, experience: &Experience) {
        (**self).observe(experience)
    }
    fn choose_return_cards(&mut self, seat: usize, hand: &Hand, count: usize) -> Result<Vec<Card>, AgentFault> {
        (**self).choose_return_cards(seat, hand, count)
    }
    fn accept_special_action(&mut self, seat: usize, kind: SpecialAction) -> bool {
        (**self).accept_special_action(seat, kind)
    }
    fn end_game(&mut self, final_position: usize, won: bool) {
        (**self).end_game(final_position, won)
    }
}

/// The highest face values, keeping jokers unless nothing else is left.
pub fn default_return_cards(hand: &Hand, count: usize) -> Vec<Card> {
    let mut cards = hand.cards();
    cards.sort_by_key(|c| (c.is_joker(), std::cmp::Reverse(c.value), c.golden));
    cards.truncate(count);
    cards
}

/// SplitMix64 finaliser, used to derive independent seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform over every id not yet rejected this turn.
pub fn sample_unrejected<R: Rng>(rng: &mut R, rejected: &RejectedSet) -> usize {
    let available = rejected.capacity() - rejected.len();
    assert!(available > 0, "every action was rejected");
    let mut k = rng.gen_range(0..available);
    for id in 0..rejected.capacity() {
        if !rejected.contains(id) {
            if k == 0 {
                return id;
            }
            k -= 1;
        }
    }
    unreachable!("k < available")
}

/// Proposes uniformly random ids without looking at the rules.
#[derive(Debug, Clone)]
pub struct RandomAgent {
    name: String,
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        RandomAgent { name: "random".to_string(), seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> &str {
        &self.name
    }

    /// Each game draws from its own stream so games can be replayed or run in parallel.
    fn begin_game(&mut self, game_seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(mix_seed(self.seed, game_seed));
    }

    fn act(&mut self, ctx: &TurnContext<'_>) -> Result<usize, AgentFault> {
        Ok(sample_unrejected(&mut self.rng, ctx.rejected))
    }
}

/// Replays a fixed script of decisions; used for log replay and tests.
#[derive(Debug, Clone, Default)]
pub struct ScriptedAgent {
    pub proposals: VecDeque<usize>,
    pub returns: VecDeque<Vec<Card>>,
    pub specials: VecDeque<bool>,
}

impl ScriptedAgent {
    pub fn new(proposals: impl IntoIterator<Item = usize>) -> Self {
        ScriptedAgent { proposals: proposals.into_iter().collect(), ..Default::default() }
    }
}

impl Agent for ScriptedAgent {
    fn name(&self) -> &str {
        "scripted"
    }

    fn act(&mut self, ctx: &TurnContext<'_>) -> Result<usize, AgentFault> {
        self.proposals
            .pop_front()
            .ok_or_else(|| AgentFault::Other { seat: ctx.seat, message: "script exhausted".into() })
    }

    fn choose_return_cards(&mut self, _seat: usize, hand: &Hand, count: usize) -> Result<Vec<Card>, AgentFault> {
        Ok(self.returns.pop_front().unwrap_or_else(|| default_return_cards(hand, count)))
    }

    fn accept_special_action(&mut self, _seat: usize, _kind: SpecialAction) -> bool {
        self.specials.pop_front().unwrap_or(true)
    }
}

/// Always plays the first legal id in table order; handy for deterministic tests.
#[derive(Debug, Clone, Default)]
pub struct FirstLegalAgent;

impl Agent for FirstLegalAgent {
    fn name(&self) -> &str {
        "first-legal"
    }

    fn act(&mut self, ctx: &TurnContext<'_>) -> Result<usize, AgentFault> {
        ctx.mask
            .legal_ids()
            .find(|&id| !ctx.rejected.contains(id))
            .ok_or(AgentFault::Other { seat: ctx.seat, message: "no legal action left".into() })
    }
}
