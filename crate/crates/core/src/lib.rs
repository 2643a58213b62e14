//! Chef's Hat: a deterministic four-player card game engine with a
//! reinforcement-learning harness.
//!
//! The crate is organised bottom-up:
//!
//! * [`cards`] and [`engine`] hold the rules state machine.
//! * [`actions`] enumerates the 200-move action table and builds legality masks.
//! * [`rewards`] defines the per-proposal reward schemes.
//! * [`agents`] and [`session`] define the agent contract and drive whole games.
//! * [`qlearn`] is a from-scratch deep Q-learning agent.
//! * [`harness`] runs matches and the three experiments.
//! * [`log`] writes, replays and exports JSON-lines event logs.
//! * [`netbridge`] lets an external process occupy a seat over TCP.

pub mod actions;
pub mod agents;
pub mod cards;
pub mod cli;
pub mod engine;
pub mod error;
pub mod harness;
pub mod log;
pub mod netbridge;
pub mod qlearn;
pub mod rewards;
pub mod session;

pub use actions::{ActionDescriptor, ActionMask, ActionTable, BoardTop};
pub use agents::{Agent, RandomAgent, TurnContext};
pub use cards::{Card, DeckConfig, Hand, Role};
pub use engine::{GameEvent, GameState, Phase, SpecialAction, StepOutcome};
pub use error::{AgentFault, ConfigError, GameError, MatchError};
pub use rewards::{RewardContext, RewardSpec};
