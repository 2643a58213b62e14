use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("player count {0} outside 2..=8")]
    Players(usize),
    #[error("max face value {0} outside 1..=11")]
    MaxValue(u8),
    #[error("at most two jokers are supported, got {0}")]
    JokerCount(u8),
    #[error("copy count given for face value {0} outside the deck")]
    CopiesKey(u8),
    #[error("deck has no ingredient cards")]
    EmptyDeck,
    #[error("deck has no value-11 card to mark as golden")]
    NoGoldenEleven,
    #[error("board needs at least one slot")]
    BoardSlots,
    #[error("{0} players leave empty hands")]
    TooManyPlayers(usize),
}

/// Engine state and contract errors.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("operation requires phase {expected:?}, game is in {actual:?}")]
    Phase { expected: crate::engine::Phase, actual: crate::engine::Phase },
    #[error("action id {0} outside the action table")]
    ActionOutOfRange(usize),
    #[error("no previous finishing order to assign roles from")]
    NoFinishOrder,
    #[error("player {player} holds {held} cards, exchange needs {needed}")]
    HandTooSmall { player: usize, held: usize, needed: usize },
    #[error("player {player} cannot return {card} it does not hold")]
    ReturnNotHeld { player: usize, card: crate::cards::Card },
    #[error("player {player} returned {got} cards, expected {expected}")]
    ReturnCount { player: usize, got: usize, expected: usize },
}

/// Agent misbehaviour surfaced by the proposal loop.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum AgentFault {
    #[error("seat {seat} re-proposed rejected action {action}")]
    RepeatedRejected { seat: usize, action: usize },
    #[error("seat {seat} proposed action {action} outside the table")]
    OutOfRange { seat: usize, action: usize },
    #[error("seat {seat} exceeded {limit} proposals in one turn")]
    TooManyProposals { seat: usize, limit: usize },
    #[error("seat {seat}: {message}")]
    Other { seat: usize, message: String },
}

#[derive(Debug, Error)]
pub enum MatchError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("agent fault: {0}")]
    Agent(#[from] AgentFault),
    #[error("log write failed: {0}")]
    Io(#[from] std::io::Error),
}
