//! Cards, deck composition and rule toggles.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ConfigError;

/// Face value used for a joker played alone.
pub const JOKER: u8 = 12;

/// Number of distinct value slots in a [`Hand`]: index 0 unused, 1..=11 ingredients, 12 joker.
pub const VALUE_SLOTS: usize = 13;

/// A single card. Lower face values are rarer (stronger).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Card {
    pub value: u8,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub golden: bool,
}

impl Card {
    pub const fn new(value: u8) -> Self {
        Card { value, golden: false }
    }

    pub const fn golden_eleven() -> Self {
        Card { value: 11, golden: true }
    }

    pub const fn joker() -> Self {
        Card::new(JOKER)
    }

    pub fn is_joker(&self) -> bool {
        self.value == JOKER
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.value, self.golden) {
            (JOKER, _) => write!(f, "J"),
            (v, true) => write!(f, "{v}*"),
            (v, false) => write!(f, "{v}"),
        }
    }
}

/// Deck composition and rule toggles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct DeckConfig {
    pub players: usize,
    pub max_value: u8,
    /// Copy count per face value. Empty means "v copies of value v".
    pub copies_of: BTreeMap<u8, u8>,
    pub joker_count: u8,
    pub use_joker: bool,
    pub use_card_exchange: bool,
    pub use_special_actions: bool,
    /// Dishwasher surrenders its highest face values instead of its strongest cards.
    pub exchange_literal: bool,
    pub target_score: u32,
    pub board_slots: u8,
}

impl Default for DeckConfig {
    fn default() -> Self {
        DeckConfig {
            players: 4,
            max_value: 11,
            copies_of: BTreeMap::new(),
            joker_count: 2,
            use_joker: true,
            use_card_exchange: true,
            use_special_actions: true,
            exchange_literal: false,
            target_score: 15,
            board_slots: 11,
        }
    }
}

impl DeckConfig {
    pub fn copies(&self, value: u8) -> u8 {
        if self.copies_of.is_empty() {
            value
        } else {
            self.copies_of.get(&value).copied().unwrap_or(0)
        }
    }

    /// Jokers actually in play.
    pub fn jokers(&self) -> u8 {
        if self.use_joker {
            self.joker_count
        } else {
            0
        }
    }

    pub fn ingredient_count(&self) -> usize {
        (1..=self.max_value).map(|v| self.copies(v) as usize).sum()
    }

    pub fn deck_size(&self) -> usize {
        self.ingredient_count() + self.jokers() as usize
    }

    /// Cards dealt to each player.
    pub fn hand_size(&self) -> usize {
        self.deck_size() / self.players
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(2..=8).contains(&self.players) {
            return Err(ConfigError::Players(self.players));
        }
        if self.max_value == 0 || self.max_value > 11 {
            return Err(ConfigError::MaxValue(self.max_value));
        }
        if self.joker_count > 2 {
            return Err(ConfigError::JokerCount(self.joker_count));
        }
        if !self.copies_of.is_empty() {
            if let Some(&v) = self.copies_of.keys().find(|&&v| v == 0 || v > self.max_value) {
                return Err(ConfigError::CopiesKey(v));
            }
        }
        if self.ingredient_count() == 0 {
            return Err(ConfigError::EmptyDeck);
        }
        if self.max_value == 11 && self.copies(11) == 0 {
            return Err(ConfigError::NoGoldenEleven);
        }
        if self.board_slots == 0 {
            return Err(ConfigError::BoardSlots);
        }
        if self.hand_size() == 0 {
            return Err(ConfigError::TooManyPlayers(self.players));
        }
        Ok(())
    }

    /// The shuffled-before deck: ingredients ascending, the first 11 golden, then jokers.
    pub fn build_deck(&self) -> Vec<Card> {
        let mut deck = Vec::with_capacity(self.deck_size());
        for v in 1..=self.max_value {
            for i in 0..self.copies(v) {
                deck.push(Card { value: v, golden: v == 11 && i == 0 });
            }
        }
        deck.extend((0..self.jokers()).map(|_| Card::joker()));
        deck
    }

    /// Short stable fingerprint of the rule set, used to pin logs to a config.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn variant(name: &str) -> Option<DeckConfig> {
        let mut config = DeckConfig::default();
        match name {
            "all" => {}
            "no-joker" => config.use_joker = false,
            "no-exchange" => config.use_card_exchange = false,
            "no-special" => config.use_special_actions = false,
            _ => return None,
        }
        Some(config)
    }
}

/// A hand (or any pile) as per-value counts plus the golden-11 marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Hand {
    counts: [u8; VALUE_SLOTS],
    golden: bool,
}

impl Hand {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_cards<'a>(cards: impl IntoIterator<Item = &'a Card>) -> Self {
        let mut hand = Hand::new();
        for card in cards {
            hand.add(*card);
        }
        hand
    }

    /// Builds a hand from plain values; 12 is a joker. No golden card.
    pub fn from_values(values: &[u8]) -> Self {
        let mut hand = Hand::new();
        for &v in values {
            hand.add(Card::new(v));
        }
        hand
    }

    pub fn count(&self, value: u8) -> u8 {
        self.counts[value as usize]
    }

    pub fn jokers(&self) -> u8 {
        self.counts[JOKER as usize]
    }

    pub fn has_golden(&self) -> bool {
        self.golden
    }

    pub fn len(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    pub fn add(&mut self, card: Card) {
        self.counts[card.value as usize] += 1;
        if card.golden {
            self.golden = true;
        }
    }

    pub fn add_n(&mut self, value: u8, n: u8) {
        self.counts[value as usize] += n;
    }

    pub fn merge(&mut self, other: &Hand) {
        for (a, b) in self.counts.iter_mut().zip(other.counts.iter()) {
            *a += *b;
        }
        self.golden |= other.golden;
    }

    pub fn contains(&self, card: Card) -> bool {
        if card.golden {
            self.golden
        } else if card.value == 11 && self.golden {
            self.count(11) >= 2
        } else {
            self.count(card.value) >= 1
        }
    }

    /// Removes one specific card. A plain 11 never removes the golden one.
    pub fn remove(&mut self, card: Card) -> bool {
        if !self.contains(card) {
            return false;
        }
        self.counts[card.value as usize] -= 1;
        if card.golden {
            self.golden = false;
        }
        true
    }

    /// Removes `n` cards of `value`; plain copies go first and the golden 11 last.
    pub fn take(&mut self, value: u8, n: u8) -> Vec<Card> {
        assert!(self.count(value) >= n, "taking {n} of {value} from {self}");
        let mut taken = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let golden = value == 11 && self.golden && self.count(11) == 1;
            self.counts[value as usize] -= 1;
            if golden {
                self.golden = false;
            }
            taken.push(Card { value, golden });
        }
        taken
    }

    /// Cards in ascending face order (strongest first), golden 11 after plain 11s.
    pub fn cards(&self) -> Vec<Card> {
        let mut out = Vec::with_capacity(self.len());
        for v in 1..VALUE_SLOTS as u8 {
            let n = self.count(v);
            for i in 0..n {
                out.push(Card { value: v, golden: v == 11 && self.golden && i + 1 == n });
            }
        }
        out
    }

    /// Face values sorted descending, jokers counted as 12.
    pub fn values_descending(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len());
        for v in (1..VALUE_SLOTS as u8).rev() {
            out.extend(std::iter::repeat_n(v, self.count(v) as usize));
        }
        out
    }

    pub fn counts(&self) -> &[u8; VALUE_SLOTS] {
        &self.counts
    }
}

impl fmt::Display for Hand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cards: Vec<String> = self.cards().iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", cards.join(" "))
    }
}

/// Role labels handed out from the previous shift's finishing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Role {
    Chef,
    SousChef,
    Waiter,
    Dishwasher,
    #[default]
    None,
}

impl Role {
    pub fn from_position(position: usize, players: usize) -> Role {
        if position == 0 {
            Role::Chef
        } else if position + 1 == players {
            Role::Dishwasher
        } else if position == 1 {
            Role::SousChef
        } else if position == 2 {
            Role::Waiter
        } else {
            Role::None
        }
    }

    /// Food Fight swaps the hierarchy.
    pub fn inverted(self) -> Role {
        match self {
            Role::Chef => Role::Dishwasher,
            Role::SousChef => Role::Waiter,
            Role::Waiter => Role::SousChef,
            Role::Dishwasher => Role::Chef,
            Role::None => Role::None,
        }
    }
}
