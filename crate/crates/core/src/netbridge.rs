//! Seats played by other processes over TCP.
//!
//! Each message is one UTF-8 JSON object terminated by `\n`, tagged by `type`.
//! Requests from the server carry a `seq` that the client echoes in its response.
//!
//! | type | direction | fields |
//! |------|-----------|--------|
//! | `hello` | client → server | `formatVersion`, `name` |
//! | `seatAssign` | server → client | `seat`, `formatVersion`, `actionCount`, `observationLen` |
//! | `gameStart` | server → client | `game`, `seed` |
//! | `actRequest` | server → client | `seq`, `obs`, `mask` (0/1 per id), `rejected` (ids) |
//! | `actResponse` | client → server | `seq`, `actionId` |
//! | `rewardNotice` | server → client | `action`, `reward`, `nextObs`, `terminal` |
//! | `returnCardsRequest` | server → client | `seq`, `hand` (cards), `count` |
//! | `returnCardsResponse` | client → server | `seq`, `cards` |
//! | `specialOfferRequest` | server → client | `seq`, `action` |
//! | `specialOfferResponse` | client → server | `seq`, `accept` |
//! | `gameEnd` | server → client | `position`, `won` |
//! | `error` | either | `message` |
//!
//! A response that does not arrive within the timeout counts as Pass. After
//! three timeouts in a row, or on a malformed line or a dropped connection,
//! the seat is handed to a local random agent for the rest of the match.

use std::io::{self, ErrorKind, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::actions::ActionMask;
use crate::agents::{default_return_cards, Agent, Experience, RandomAgent, RejectedSet, TurnContext};
use crate::cards::{Card, Hand};
use crate::engine::SpecialAction;
use crate::error::AgentFault;

pub const PROTOCOL_VERSION: u32 = 1;
pub const DEFAULT_RESPONSE_TIMEOUT: Duration = Duration::from_secs(10);
pub const DEFAULT_HANDSHAKE_TIMEOUT: Duration = Duration::from_secs(30);
pub const MAX_CONSECUTIVE_TIMEOUTS: u32 = 3;
const MAX_LINE: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Message {
    Hello { format_version: u32, name: String },
    SeatAssign { seat: usize, format_version: u32, action_count: usize, observation_len: usize },
    GameStart { game: u32, seed: u64 },
    ActRequest { seq: u64, obs: Vec<f64>, mask: Vec<u8>, rejected: Vec<usize> },
    ActResponse { seq: u64, action_id: usize },
    RewardNotice { action: usize, reward: f64, next_obs: Vec<f64>, terminal: bool },
    ReturnCardsRequest { seq: u64, hand: Vec<Card>, count: usize },
    ReturnCardsResponse { seq: u64, cards: Vec<Card> },
    SpecialOfferRequest { seq: u64, action: SpecialAction },
    SpecialOfferResponse { seq: u64, accept: bool },
    GameEnd { position: usize, won: bool },
    Error { message: String },
}

impl Message {
    fn seq(&self) -> Option<u64> {
        match self {
            Message::ActRequest { seq, .. }
            | Message::ActResponse { seq, .. }
            | Message::ReturnCardsRequest { seq, .. }
            | Message::ReturnCardsResponse { seq, .. }
            | Message::SpecialOfferRequest { seq, .. }
            | Message::SpecialOfferResponse { seq, .. } => Some(*seq),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BridgeError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("timed out")]
    Timeout,
    #[error("connection closed")]
    Closed,
    #[error("protocol error: {0}")]
    Protocol(String),
}

/// Newline framing over a stream; only complete lines are ever returned.
pub struct LineConn {
    stream: TcpStream,
    pending: Vec<u8>,
}

impl LineConn {
    pub fn new(stream: TcpStream) -> Self {
        LineConn { stream, pending: Vec::new() }
    }

    pub fn send(&mut self, message: &Message) -> Result<(), BridgeError> {
        let mut line = serde_json::to_vec(message).expect("messages serialize");
        line.push(b'\n');
        self.stream.write_all(&line)?;
        self.stream.flush()?;
        Ok(())
    }

    /// Next complete line, waiting at most `timeout` (forever if `None`).
    pub fn recv_line(&mut self, timeout: Option<Duration>) -> Result<String, BridgeError> {
        let deadline = timeout.map(|t| Instant::now() + t);
        loop {
            if let Some(end) = self.pending.iter().position(|&b| b == b'\n') {
                let line: Vec<u8> = self.pending.drain(..=end).collect();
                return String::from_utf8(line[..end].to_vec()).map_err(|e| BridgeError::Malformed(e.to_string()));
            }
            if self.pending.len() > MAX_LINE {
                return Err(BridgeError::Malformed("line too long".into()));
            }
            let wait = match deadline {
                Some(d) => {
                    let left = d.saturating_duration_since(Instant::now());
                    if left.is_zero() {
                        return Err(BridgeError::Timeout);
                    }
                    Some(left)
                }
                None => None,
            };
            self.stream.set_read_timeout(wait)?;
            let mut buf = [0u8; 8192];
            match self.stream.read(&mut buf) {
                Ok(0) => return Err(BridgeError::Closed),
                Ok(n) => self.pending.extend_from_slice(&buf[..n]),
                Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                    return Err(BridgeError::Timeout)
                }
                Err(e) if e.kind() == ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
    }

    pub fn recv(&mut self, timeout: Option<Duration>) -> Result<Message, BridgeError> {
        let line = self.recv_line(timeout)?;
        serde_json::from_str(&line).map_err(|e| BridgeError::Malformed(e.to_string()))
    }

    pub fn shutdown(&self) {
        let _ = self.stream.shutdown(std::net::Shutdown::Both);
    }
}

/// Something that happened to a remote seat during the match.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Incident {
    pub seat: usize,
    pub kind: IncidentKind,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum IncidentKind {
    /// A proposal request went unanswered and was played as Pass.
    TimeoutPass,
    /// The seat is now played by a local random agent.
    Replaced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BridgeOptions {
    pub response_timeout: Duration,
    pub handshake_timeout: Duration,
    pub max_consecutive_timeouts: u32,
}

impl Default for BridgeOptions {
    fn default() -> Self {
        BridgeOptions {
            response_timeout: DEFAULT_RESPONSE_TIMEOUT,
            handshake_timeout: DEFAULT_HANDSHAKE_TIMEOUT,
            max_consecutive_timeouts: MAX_CONSECUTIVE_TIMEOUTS,
        }
    }
}

/// Server-side stand-in for a seat whose decisions come over the wire.
pub struct RemoteAgent {
    seat: usize,
    name: String,
    conn: Option<LineConn>,
    options: BridgeOptions,
    seq: u64,
    game: u32,
    consecutive_timeouts: u32,
    fallback: RandomAgent,
    incidents: Vec<Incident>,
}

impl RemoteAgent {
    pub fn new(seat: usize, name: String, conn: LineConn, options: BridgeOptions, fallback_seed: u64) -> Self {
        RemoteAgent {
            seat,
            name,
            conn: Some(conn),
            options,
            seq: 0,
            game: 0,
            consecutive_timeouts: 0,
            fallback: RandomAgent::new(fallback_seed),
            incidents: Vec::new(),
        }
    }

    pub fn seat(&self) -> usize {
        self.seat
    }

    pub fn is_connected(&self) -> bool {
        self.conn.is_some()
    }

    pub fn incidents(&self) -> &[Incident] {
        &self.incidents
    }

    fn replace(&mut self, reason: String) {
        if let Some(conn) = self.conn.take() {
            conn.shutdown();
        }
        self.incidents.push(Incident { seat: self.seat, kind: IncidentKind::Replaced, detail: reason });
    }

    fn notify(&mut self, message: &Message) {
        if let Some(conn) = self.conn.as_mut() {
            if let Err(e) = conn.send(message) {
                self.replace(format!("send failed: {e}"));
            }
        }
    }

    /// Sends a request and waits for the response carrying the same sequence number.
    /// `Ok(None)` means the response timed out; the seat stays connected.
    fn request(&mut self, build: impl FnOnce(u64) -> Message) -> Option<Message> {
        self.seq += 1;
        let seq = self.seq;
        let request = build(seq);
        let conn = self.conn.as_mut()?;
        if let Err(e) = conn.send(&request) {
            self.replace(format!("send failed: {e}"));
            return None;
        }
        let deadline = Instant::now() + self.options.response_timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            let conn = self.conn.as_mut()?;
            match conn.recv(Some(left)) {
                // late answers to earlier requests are dropped
                Ok(msg) if msg.seq().is_some_and(|s| s < seq) => continue,
                Ok(msg) if msg.seq() == Some(seq) => {
                    self.consecutive_timeouts = 0;
                    return Some(msg);
                }
                Ok(Message::Error { message }) => {
                    self.replace(format!("client error: {message}"));
                    return None;
                }
                Ok(other) => {
                    let detail = format!("unexpected message {other:?}");
                    self.reject_and_replace(detail);
                    return None;
                }
                Err(BridgeError::Timeout) => {
                    self.consecutive_timeouts += 1;
                    if self.consecutive_timeouts >= self.options.max_consecutive_timeouts {
                        self.replace(format!("{} consecutive timeouts", self.consecutive_timeouts));
                    }
                    return None;
                }
                Err(BridgeError::Malformed(detail)) => {
                    self.reject_and_replace(format!("malformed message: {detail}"));
                    return None;
                }
                Err(e) => {
                    self.replace(e.to_string());
                    return None;
                }
            }
        }
    }

    fn reject_and_replace(&mut self, detail: String) {
        if let Some(conn) = self.conn.as_mut() {
            let _ = conn.send(&Message::Error { message: detail.clone() });
        }
        self.replace(detail);
    }
}

impl Agent for RemoteAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn begin_game(&mut self, game_seed: u64) {
        self.fallback.begin_game(game_seed);
        let game = self.game;
        self.game += 1;
        self.notify(&Message::GameStart { game, seed: game_seed });
    }

    fn act(&mut self, ctx: &TurnContext<'_>) -> Result<usize, AgentFault> {
        if self.conn.is_none() {
            return self.fallback.act(ctx);
        }
        let reply = self.request(|seq| Message::ActRequest {
            seq,
            obs: ctx.observation.to_vec(),
            mask: ctx.mask.to_bits(),
            rejected: ctx.rejected.ids().to_vec(),
        });
        match reply {
            Some(Message::ActResponse { action_id, .. }) => Ok(action_id),
            Some(other) => {
                self.reject_and_replace(format!("expected actResponse, got {other:?}"));
                self.fallback.act(ctx)
            }
            None if self.conn.is_none() => self.fallback.act(ctx),
            None => {
                let pass = ctx.action_count() - 1;
                self.incidents.push(Incident {
                    seat: self.seat,
                    kind: IncidentKind::TimeoutPass,
                    detail: format!("request {} unanswered", self.seq),
                });
                if ctx.rejected.contains(pass) {
                    self.fallback.act(ctx)
                } else {
                    Ok(pass)
                }
            }
        }
    }

    fn observe(&mut self, experience: &Experience) {
        self.notify(&Message::RewardNotice {
            action: experience.action,
            reward: experience.reward,
            next_obs: experience.next_state.clone(),
            terminal: experience.terminal,
        });
    }

    fn choose_return_cards(&mut self, _seat: usize, hand: &Hand, count: usize) -> Result<Vec<Card>, AgentFault> {
        let reply = self.request(|seq| Message::ReturnCardsRequest { seq, hand: hand.cards(), count });
        match reply {
            Some(Message::ReturnCardsResponse { cards, .. }) => Ok(cards),
            _ => Ok(default_return_cards(hand, count)),
        }
    }

    fn accept_special_action(&mut self, _seat: usize, kind: SpecialAction) -> bool {
        match self.request(|seq| Message::SpecialOfferRequest { seq, action: kind }) {
            Some(Message::SpecialOfferResponse { accept, .. }) => accept,
            _ => true,
        }
    }

    fn end_game(&mut self, final_position: usize, won: bool) {
        self.notify(&Message::GameEnd { position: final_position, won });
    }
}

/// Accepts remote players for a fixed set of seats.
pub struct BridgeServer {
    listener: TcpListener,
    options: BridgeOptions,
}

impl BridgeServer {
    pub fn bind(addr: impl ToSocketAddrs, options: BridgeOptions) -> io::Result<Self> {
        Ok(BridgeServer { listener: TcpListener::bind(addr)?, options })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Waits for one client per seat, in connection order. Fails if the handshake window closes first.
    pub fn accept_seats(
        &self,
        seats: &[usize],
        action_count: usize,
        observation_len: usize,
        fallback_seed: u64,
    ) -> Result<Vec<RemoteAgent>, BridgeError> {
        let deadline = Instant::now() + self.options.handshake_timeout;
        self.listener.set_nonblocking(true)?;
        let mut agents = Vec::with_capacity(seats.len());
        while agents.len() < seats.len() {
            if Instant::now() >= deadline {
                return Err(BridgeError::Timeout);
            }
            let stream = match self.listener.accept() {
                Ok((stream, _)) => stream,
                Err(e) if e.kind() == ErrorKind::WouldBlock => {
                    std::thread::sleep(Duration::from_millis(10));
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            stream.set_nonblocking(false)?;
            stream.set_nodelay(true)?;
            let mut conn = LineConn::new(stream);
            let left = deadline.saturating_duration_since(Instant::now()).max(Duration::from_millis(1));
            let name = match conn.recv(Some(left)) {
                Ok(Message::Hello { format_version, name }) if format_version == PROTOCOL_VERSION => name,
                Ok(Message::Hello { format_version, .. }) => {
                    let message = format!("unsupported formatVersion {format_version}, server speaks {PROTOCOL_VERSION}");
                    let _ = conn.send(&Message::Error { message });
                    continue;
                }
                Ok(_) | Err(BridgeError::Malformed(_)) => {
                    let _ = conn.send(&Message::Error { message: "expected hello".into() });
                    continue;
                }
                Err(_) => continue,
            };
            let seat = seats[agents.len()];
            conn.send(&Message::SeatAssign { seat, format_version: PROTOCOL_VERSION, action_count, observation_len })?;
            let seed = crate::agents::mix_seed(fallback_seed, seat as u64);
            agents.push(RemoteAgent::new(seat, format!("remote:{name}"), conn, self.options, seed));
        }
        self.listener.set_nonblocking(false)?;
        Ok(agents)
    }
}

/// Summary of a client session.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClientReport {
    pub seat: usize,
    pub games: u32,
    pub requests: u64,
}

/// Connects a local [`Agent`] to a server and plays until the server hangs up.
pub struct RemoteClient<A: Agent> {
    agent: A,
    conn: LineConn,
    seat: usize,
    action_count: usize,
}

impl<A: Agent> RemoteClient<A> {
    pub fn connect(addr: impl ToSocketAddrs, agent: A) -> Result<Self, BridgeError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let mut conn = LineConn::new(stream);
        conn.send(&Message::Hello { format_version: PROTOCOL_VERSION, name: agent.name().to_string() })?;
        match conn.recv(None)? {
            Message::SeatAssign { seat, action_count, .. } => Ok(RemoteClient { agent, conn, seat, action_count }),
            Message::Error { message } => Err(BridgeError::Protocol(message)),
            other => Err(BridgeError::Protocol(format!("expected seatAssign, got {other:?}"))),
        }
    }

    pub fn seat(&self) -> usize {
        self.seat
    }

    /// Serves requests until the connection closes; returns the wrapped agent.
    pub fn run(mut self) -> Result<(A, ClientReport), BridgeError> {
        let mut report = ClientReport { seat: self.seat, ..ClientReport::default() };
        let mut last_obs: Vec<f64> = Vec::new();
        loop {
            let message = match self.conn.recv(None) {
                Ok(m) => m,
                Err(BridgeError::Closed) => return Ok((self.agent, report)),
                Err(e) => return Err(e),
            };
            let reply = match message {
                Message::GameStart { seed, .. } => {
                    self.agent.begin_game(seed);
                    None
                }
                Message::ActRequest { seq, obs, mask, rejected } => {
                    report.requests += 1;
                    let mut legal = ActionMask::empty(self.action_count);
                    for (id, &bit) in mask.iter().enumerate() {
                        if bit != 0 {
                            legal.set(id);
                        }
                    }
                    let mut rejected_set = RejectedSet::new(self.action_count);
                    for id in rejected {
                        rejected_set.insert(id);
                    }
                    let ctx = TurnContext { seat: self.seat, observation: &obs, mask: &legal, rejected: &rejected_set };
                    let action_id = match self.agent.act(&ctx) {
                        Ok(id) => id,
                        Err(fault) => {
                            let _ = self.conn.send(&Message::Error { message: fault.to_string() });
                            return Err(BridgeError::Protocol(fault.to_string()));
                        }
                    };
                    last_obs = obs;
                    Some(Message::ActResponse { seq, action_id })
                }
                Message::RewardNotice { action, reward, next_obs, terminal } => {
                    self.agent.observe(&Experience {
                        state: std::mem::take(&mut last_obs),
                        action,
                        reward,
                        next_state: next_obs,
                        terminal,
                    });
                    None
                }
                Message::ReturnCardsRequest { seq, hand, count } => {
                    let cards = self
                        .agent
                        .choose_return_cards(self.seat, &Hand::from_cards(&hand), count)
                        .map_err(|f| BridgeError::Protocol(f.to_string()))?;
                    Some(Message::ReturnCardsResponse { seq, cards })
                }
                Message::SpecialOfferRequest { seq, action } => {
                    let accept = self.agent.accept_special_action(self.seat, action);
                    Some(Message::SpecialOfferResponse { seq, accept })
                }
                Message::GameEnd { position, won } => {
                    self.agent.end_game(position, won);
                    report.games += 1;
                    None
                }
                Message::Error { message } => return Err(BridgeError::Protocol(message)),
                other => return Err(BridgeError::Protocol(format!("unexpected message {other:?}"))),
            };
            if let Some(reply) = reply {
                self.conn.send(&reply)?;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn messages_use_camel_case_tags() {
        let line = serde_json::to_string(&Message::ActResponse { seq: 4, action_id: 199 }).unwrap();
        assert_eq!(line, r#"{"type":"actResponse","seq":4,"actionId":199}"#);
        let back: Message = serde_json::from_str(r#"{"type":"hello","formatVersion":1,"name":"x"}"#).unwrap();
        assert_eq!(back, Message::Hello { format_version: 1, name: "x".into() });
    }

    #[test]
    fn partial_lines_are_held_back() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let writer = std::thread::spawn(move || {
            let mut s = TcpStream::connect(addr).unwrap();
            s.write_all(br#"{"type":"gameEnd","posi"#).unwrap();
            std::thread::sleep(Duration::from_millis(150));
            s.write_all(b"tion\":2,\"won\":false}\n").unwrap();
        });
        let (stream, _) = listener.accept().unwrap();
        let mut conn = LineConn::new(stream);
        assert!(matches!(conn.recv(Some(Duration::from_millis(50))), Err(BridgeError::Timeout)));
        let msg = conn.recv(Some(Duration::from_secs(5))).unwrap();
        assert_eq!(msg, Message::GameEnd { position: 2, won: false });
        writer.join().unwrap();
    }
}
