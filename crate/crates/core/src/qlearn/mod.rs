//! Deep Q-learning agent: experience replay, a target network and ε-greedy exploration.

pub mod checkpoint;
pub mod network;

use std::collections::VecDeque;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::actions::ActionTable;
use crate::agents::{sample_unrejected, Agent, Experience, RejectedSet, TurnContext};
use crate::cards::DeckConfig;
use crate::error::AgentFault;
use crate::engine::observation_len;

pub use checkpoint::{Checkpoint, CheckpointError};
pub use network::{Activation, AdamState, Dense, Gradients, QNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    #[default]
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct QConfig {
    pub hidden: Vec<usize>,
    pub batch_size: usize,
    pub memory_size: usize,
    pub discount: f64,
    pub exploration_start: f64,
    pub exploration_decay: f64,
    pub exploration_min: f64,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    /// Games between target-network copies.
    pub target_sync_every: u32,
    /// Stored transitions between gradient steps.
    pub train_every: u32,
}

impl Default for QConfig {
    fn default() -> Self {
        QConfig {
            hidden: vec![128, 256],
            batch_size: 32,
            memory_size: 2000,
            discount: 0.95,
            exploration_start: 1.0,
            exploration_decay: 0.995,
            exploration_min: 0.1,
            learning_rate: 0.001,
            optimizer: Optimizer::Sgd,
            target_sync_every: 1,
            train_every: 1,
        }
    }
}

impl QConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(format!("discount must lie in (0, 1), got {}", self.discount));
        }
        if !(self.exploration_decay > 0.0 && self.exploration_decay <= 1.0) {
            return Err(format!("exploration decay must lie in (0, 1], got {}", self.exploration_decay));
        }
        if self.batch_size == 0 || self.memory_size < self.batch_size {
            return Err("memory must hold at least one batch".into());
        }
        if self.target_sync_every == 0 || self.train_every == 0 {
            return Err("cadences must be positive".into());
        }
        Ok(())
    }
}

/// `max(floor, ε·decay)`
pub fn decay_epsilon(epsilon: f64, decay: f64, floor: f64) -> f64 {
    (epsilon * decay).max(floor)
}

/// ε-greedy over the ids not rejected this turn; ties go to the lowest id.
pub fn select_action<R: Rng>(q_values: &[f64], epsilon: f64, rejected: &RejectedSet, rng: &mut R) -> usize {
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        return sample_unrejected(rng, rejected);
    }
    greedy_action(q_values, rejected)
}

pub fn greedy_action(q_values: &[f64], rejected: &RejectedSet) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (id, &q) in q_values.iter().enumerate() {
        if rejected.contains(id) {
            continue;
        }
        if best.is_none_or(|(_, b)| q > b) {
            best = Some((id, q));
        }
    }
    best.expect("at least one id is not rejected").0
}

/// `r` for terminal transitions, otherwise `r + γ·max q_target(next)`.
pub fn td_target(reward: f64, terminal: bool, discount: f64, next_q: &[f64]) -> f64 {
    if terminal {
        reward
    } else {
        reward + discount * next_q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn stack(rows: impl Iterator<Item = Vec<f64>>, width: usize) -> Array2<f64> {
    let data: Vec<f64> = rows.flatten().collect();
    let n = data.len() / width;
    Array2::from_shape_vec((n, width), data).expect("rows share a width")
}

/// Targets for a batch, computed with the target network.
pub fn batch_targets(target: &QNetwork, batch: &[&Experience], discount: f64) -> Vec<f64> {
    let next = stack(batch.iter().map(|e| e.next_state.clone()), target.input_len());
    let next_q = target.forward_batch(&next.view());
    batch
        .iter()
        .enumerate()
        .map(|(i, e)| td_target(e.reward, e.terminal, discount, next_q.row(i).as_slice().expect("contiguous")))
        .collect()
}

/// One gradient step of the online network on `batch`. Returns the loss before the update.
pub fn train_step(
    online: &mut QNetwork,
    target: &QNetwork,
    batch: &[&Experience],
    discount: f64,
    learning_rate: f64,
    adam: Option<&mut AdamState>,
) -> f64 {
    let targets = batch_targets(target, batch, discount);
    let states = stack(batch.iter().map(|e| e.state.clone()), online.input_len());
    let actions: Vec<usize> = batch.iter().map(|e| e.action).collect();
    let (loss, grads) = online.loss_and_gradients(&states.view(), &actions, &targets);
    match adam {
        Some(adam) => adam.apply(online, &grads, learning_rate),
        None => online.apply_sgd(&grads, learning_rate),
    }
    loss
}

/// Fixed-capacity FIFO of transitions.
#[derive(Debug, Clone)]
pub struct ReplayMemory {
    items: VecDeque<Experience>,
    capacity: usize,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        ReplayMemory { items: VecDeque::with_capacity(capacity), capacity }
    }

    pub fn push(&mut self, e: Experience) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(e);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, i: usize) -> &Experience {
        &self.items[i]
    }

    /// Uniform sample with replacement.
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<&Experience> {
        (0..n).map(|_| &self.items[rng.gen_range(0..self.items.len())]).collect()
    }
}

/// Counters exposed for monitoring and tests.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LearnerStats {
    pub train_steps: u64,
    pub target_syncs: u64,
    pub games: u64,
    pub last_loss: f64,
    pub max_abs_q: f64,
    pub non_finite_outputs: u64,
}

pub struct DqnAgent {
    name: String,
    config: QConfig,
    online: QNetwork,
    target: QNetwork,
    adam: Option<AdamState>,
    memory: ReplayMemory,
    epsilon: f64,
    rng: ChaCha8Rng,
    turn_q: Option<Vec<f64>>,
    stored: u64,
    learning: bool,
    stats: LearnerStats,
}

impl DqnAgent {
    pub fn new(config: QConfig, deck: &DeckConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let outputs = ActionTable::new(deck).len();
        let online = QNetwork::mlp(observation_len(deck), &config.hidden, outputs, &mut rng);
        Self::with_network(config, online, rng)
    }

    fn with_network(config: QConfig, online: QNetwork, rng: ChaCha8Rng) -> Self {
        let adam = (config.optimizer == Optimizer::Adam).then(|| AdamState::new(online.parameter_count()));
        DqnAgent {
            name: "dqn".to_string(),
            target: online.clone(),
            online,
            adam,
            memory: ReplayMemory::new(config.memory_size),
            epsilon: config.exploration_start,
            rng,
            turn_q: None,
            stored: 0,
            learning: true,
            stats: LearnerStats::default(),
            config,
        }
    }

    /// Restores weights and ε from a checkpoint; the replay memory starts empty.
    pub fn from_checkpoint(config: QConfig, checkpoint: Checkpoint, seed: u64) -> Self {
        let mut agent = Self::with_network(config, checkpoint.network, ChaCha8Rng::seed_from_u64(seed));
        agent.epsilon = checkpoint.epsilon;
        agent.stats.games = checkpoint.games;
        agent
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint { epsilon: self.epsilon, games: self.stats.games, network: self.online.clone() }
    }

    /// Frozen greedy play: ε = 0 and no updates.
    pub fn evaluation_mode(mut self) -> Self {
        self.learning = false;
        self.epsilon = 0.0;
        self.name = "dqn-eval".to_string();
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn set_epsilon(&mut self, epsilon: f64) {
        self.epsilon = epsilon;
    }

    pub fn online(&self) -> &QNetwork {
        &self.online
    }

    pub fn target(&self) -> &QNetwork {
        &self.target
    }

    pub fn memory(&self) -> &ReplayMemory {
        &self.memory
    }

    pub fn stats(&self) -> &LearnerStats {
        &self.stats
    }

    pub fn config(&self) -> &QConfig {
        &self.config
    }

    pub fn sync_target(&mut self) {
        self.target.clone_from(&self.online);
        self.stats.target_syncs += 1;
    }

    fn train(&mut self) {
        let batch = self.memory.sample(self.config.batch_size, &mut self.rng);
        let loss =
            train_step(&mut self.online, &self.target, &batch, self.config.discount, self.config.learning_rate, self.adam.as_mut());
        self.stats.last_loss = loss;
        self.stats.train_steps += 1;
    }
}

impl Agent for DqnAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn act(&mut self, ctx: &TurnContext<'_>) -> Result<usize, AgentFault> {
        // Q-values are computed once per turn; retries pick the next-best id.
        if ctx.rejected.is_empty() || self.turn_q.is_none() {
            let q = self.online.forward(ctx.observation);
            for &v in &q {
                if v.is_finite() {
                    self.stats.max_abs_q = self.stats.max_abs_q.max(v.abs());
                } else {
                    self.stats.non_finite_outputs += 1;
                }
            }
            self.turn_q = Some(q);
        }
        let q = self.turn_q.as_deref().expect("computed above");
        Ok(select_action(q, self.epsilon, ctx.rejected, &mut self.rng))
    }

    fn observe(&mut self, experience: &Experience) {
        if !self.learning {
            return;
        }
        self.memory.push(experience.clone());
        self.stored += 1;
        if self.memory.len() >= self.config.batch_size && self.stored.is_multiple_of(self.config.train_every as u64) {
            self.train();
        }
    }

    fn end_game(&mut self, _final_position: usize, _won: bool) {
        self.turn_q = None;
        if !self.learning {
            return;
        }
        self.stats.games += 1;
        self.epsilon = decay_epsilon(self.epsilon, self.config.exploration_decay, self.config.exploration_min);
        if self.stats.games.is_multiple_of(self.config.target_sync_every as u64) {
            self.sync_target();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_net(seed: u64) -> QNetwork {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        QNetwork::mlp(3, &[4, 5], 6, &mut rng)
    }

    fn experience(state: Vec<f64>, action: usize, reward: f64, terminal: bool) -> Experience {
        Experience { state: state.clone(), action, reward, next_state: state, terminal }
    }

    #[test]
    fn epsilon_schedule() {
        assert_eq!(decay_epsilon(1.0, 0.995, 0.1), 0.995);
        let mut e = 1.0;
        for _ in 0..250 {
            e = decay_epsilon(e, 0.995, 0.0);
        }
        assert!((e - 0.995f64.powi(250)).abs() < 1e-12);
        assert!((e - 0.2856).abs() < 1e-4, "{e}");
        assert_eq!(decay_epsilon(0.1, 0.995, 0.1), 0.1);
    }

    #[test]
    fn greedy_choice_skips_rejected_and_breaks_ties_low() {
        let mut q = vec![0.0; 10];
        q[7] = 0.9;
        q[3] = 0.5;
        let mut rejected = RejectedSet::new(10);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(select_action(&q, 0.0, &rejected, &mut rng), 7);
        rejected.insert(7);
        assert_eq!(select_action(&q, 0.0, &rejected, &mut rng), 3);
        assert_eq!(greedy_action(&[0.2, 0.4, 0.4], &RejectedSet::new(3)), 1);
    }

    #[test]
    fn greedy_choice_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let q: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let scale = rng.gen_range(0.01..100.0);
            let scaled: Vec<f64> = q.iter().map(|v| v * scale).collect();
            let mut rejected = RejectedSet::new(20);
            rejected.insert(rng.gen_range(0..20));
            assert_eq!(greedy_action(&q, &rejected), greedy_action(&scaled, &rejected));
        }
    }

    #[test]
    fn full_exploration_is_uniform_over_unrejected() {
        // chi-square with 189 degrees of freedom; 0.001 critical value is about 256.9
        let mut rejected = RejectedSet::new(200);
        for id in (0..200).step_by(19) {
            rejected.insert(id);
        }
        let k = 200 - rejected.len();
        let q = vec![0.0; 200];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mut counts = vec![0u32; 200];
        for _ in 0..n {
            counts[select_action(&q, 1.0, &rejected, &mut rng)] += 1;
        }
        assert!(rejected.ids().iter().all(|&id| counts[id] == 0));
        let expected = n as f64 / k as f64;
        let chi2: f64 = (0..200)
            .filter(|&id| !rejected.contains(id))
            .map(|id| (counts[id] as f64 - expected).powi(2) / expected)
            .sum();
        assert_eq!(k - 1, 188);
        assert!(chi2 < 255.0, "chi2 = {chi2}");
    }

    #[test]
    fn targets() {
        assert_eq!(td_target(-1.0, true, 0.95, &[0.9, 0.3]), -1.0);
        assert!((td_target(0.5, false, 0.95, &[0.1, 0.2, -0.4]) - 0.69).abs() < 1e-12);
    }

    #[test]
    fn memory_is_fifo_and_bounded() {
        let mut memory = ReplayMemory::new(3);
        for i in 0..5 {
            memory.push(experience(vec![i as f64], i, 0.0, false));
            assert!(memory.len() <= 3);
        }
        let kept: Vec<usize> = (0..3).map(|i| memory.get(i).action).collect();
        assert_eq!(kept, vec![2, 3, 4]);
    }

    #[test]
    fn small_step_reduces_frozen_batch_loss() {
        let mut online = tiny_net(1);
        let target = online.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let batch: Vec<Experience> = (0..32)
            .map(|i| {
                let s: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..1.0)).collect();
                experience(s, i % 6, if i % 2 == 0 { 1.0 } else { -1.0 }, true)
            })
            .collect();
        let refs: Vec<&Experience> = batch.iter().collect();
        let before = train_step(&mut online, &target, &refs, 0.95, 1e-4, None);
        let after = train_step(&mut online.clone(), &target, &refs, 0.95, 0.0, None);
        assert!(after < before, "{after} !< {before}");
    }

    #[test]
    fn target_copy_is_exact_and_diverges_after_training() {
        let deck = DeckConfig::default();
        let config = QConfig { hidden: vec![8], batch_size: 2, memory_size: 10, ..QConfig::default() };
        let mut agent = DqnAgent::new(config, &deck, 3);
        assert_eq!(agent.online(), agent.target());
        let obs = vec![0.5; observation_len(&deck)];
        agent.observe(&experience(obs.clone(), 4, 1.0, false));
        agent.observe(&experience(obs.clone(), 9, -1.0, true));
        assert_eq!(agent.stats().train_steps, 1);
        assert_ne!(agent.online(), agent.target());
        agent.end_game(0, true);
        assert_eq!(agent.online().flat_parameters(), agent.target().flat_parameters());
        assert_eq!(agent.stats().target_syncs, 1);
        assert_eq!(agent.epsilon(), 0.995);
    }

    #[test]
    fn config_validation() {
        assert!(QConfig::default().validate().is_ok());
        assert!(QConfig { discount: 1.0, ..QConfig::default() }.validate().is_err());
        assert!(QConfig { exploration_decay: 0.0, ..QConfig::default() }.validate().is_err());
        assert!(QConfig { memory_size: 8, ..QConfig::default() }.validate().is_err());
    }
}
