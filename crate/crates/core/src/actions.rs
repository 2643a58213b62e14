//! The discrete action table and per-turn legality masks.
//!
//! Ids are laid out value-major: for each face value `v` and quantity `q`
//! there is one slot per joker count `j` (0 up to the configured jokers),
//! followed by one "joker alone" id and finally "pass". With the default
//! deck this gives `3 * 66 + 2 = 200` ids, and
//! `id(v, q, j) = 3 * v * (v - 1) / 2 + 3 * (q - 1) + j`.

use serde::{Deserialize, Serialize};

use crate::cards::{DeckConfig, Hand, JOKER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionDescriptor {
    Discard { value: u8, quantity: u8, jokers: u8 },
    JokerAlone,
    Pass,
}

impl ActionDescriptor {
    pub fn cards_played(&self) -> usize {
        match *self {
            ActionDescriptor::Discard { quantity, jokers, .. } => (quantity + jokers) as usize,
            ActionDescriptor::JokerAlone => 1,
            ActionDescriptor::Pass => 0,
        }
    }

    /// Board top after this play: (assumed value, card count).
    pub fn board_top(&self) -> Option<BoardTop> {
        match *self {
            ActionDescriptor::Discard { value, quantity, jokers } => {
                Some(BoardTop { value, quantity: quantity + jokers })
            }
            ActionDescriptor::JokerAlone => Some(BoardTop { value: JOKER, quantity: 1 }),
            ActionDescriptor::Pass => None,
        }
    }
}

impl std::fmt::Display for ActionDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            ActionDescriptor::Discard { value, quantity, jokers: 0 } => write!(f, "{quantity}x{value}"),
            ActionDescriptor::Discard { value, quantity, jokers } => {
                write!(f, "{quantity}x{value}+{jokers}J")
            }
            ActionDescriptor::JokerAlone => write!(f, "joker"),
            ActionDescriptor::Pass => write!(f, "pass"),
        }
    }
}

/// Value and size of the play currently on top of the board.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardTop {
    pub value: u8,
    pub quantity: u8,
}

/// Legality bits over the action table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionMask {
    bits: Vec<bool>,
}

impl ActionMask {
    pub fn empty(len: usize) -> Self {
        ActionMask { bits: vec![false; len] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_legal(&self, id: usize) -> bool {
        self.bits.get(id).copied().unwrap_or(false)
    }

    pub fn set(&mut self, id: usize) {
        self.bits[id] = true;
    }

    pub fn legal_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| b as u8).collect()
    }
}

/// Canonical enumeration of every move for one deck configuration.
#[derive(Debug, Clone)]
pub struct ActionTable {
    entries: Vec<ActionDescriptor>,
    /// First id of each face value's block, indexed by value.
    value_offset: Vec<usize>,
    joker_slots: usize,
    joker_alone: Option<usize>,
    pass: usize,
    board_slots: u8,
}

impl ActionTable {
    pub fn new(config: &DeckConfig) -> Self {
        let jokers = config.jokers();
        let joker_slots = jokers as usize + 1;
        let mut entries = Vec::new();
        let mut value_offset = vec![0; config.max_value as usize + 2];
        for value in 1..=config.max_value {
            value_offset[value as usize] = entries.len();
            for quantity in 1..=config.copies(value) {
                for j in 0..=jokers {
                    entries.push(ActionDescriptor::Discard { value, quantity, jokers: j });
                }
            }
        }
        value_offset[config.max_value as usize + 1] = entries.len();
        let joker_alone = if jokers > 0 {
            entries.push(ActionDescriptor::JokerAlone);
            Some(entries.len() - 1)
        } else {
            None
        };
        entries.push(ActionDescriptor::Pass);
        let pass = entries.len() - 1;
        ActionTable { entries, value_offset, joker_slots, joker_alone, pass, board_slots: config.board_slots }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn pass_id(&self) -> usize {
        self.pass
    }

    pub fn joker_alone_id(&self) -> Option<usize> {
        self.joker_alone
    }

    pub fn entries(&self) -> &[ActionDescriptor] {
        &self.entries
    }

    pub fn decode(&self, id: usize) -> Option<ActionDescriptor> {
        self.entries.get(id).copied()
    }

    pub fn encode(&self, descriptor: ActionDescriptor) -> Option<usize> {
        match descriptor {
            ActionDescriptor::Pass => Some(self.pass),
            ActionDescriptor::JokerAlone => self.joker_alone,
            ActionDescriptor::Discard { value, quantity, jokers } => {
                let v = value as usize;
                if value == 0 || v + 1 >= self.value_offset.len() || quantity == 0 {
                    return None;
                }
                if jokers as usize >= self.joker_slots {
                    return None;
                }
                let id = self.value_offset[v] + (quantity as usize - 1) * self.joker_slots + jokers as usize;
                (id < self.value_offset[v + 1]).then_some(id)
            }
        }
    }

    /// Legality of every id for a hand facing `board`.
    ///
    /// Pass is illegal only for the leader of a fresh pizza.
    pub fn legal_mask(&self, hand: &Hand, board: Option<BoardTop>, is_leader: bool) -> ActionMask {
        let mut mask = ActionMask::empty(self.len());
        let held_jokers = hand.jokers() as usize;
        let max_value = self.value_offset.len() - 2;
        let value_cap = match board {
            None => max_value,
            Some(top) => (top.value as usize).saturating_sub(1).min(max_value),
        };
        let min_total = board.map_or(1, |top| top.quantity as usize);
        for v in 1..=value_cap {
            let held = hand.count(v as u8) as usize;
            if held == 0 {
                continue;
            }
            let base = self.value_offset[v];
            let copies = (self.value_offset[v + 1] - base) / self.joker_slots;
            for q in 1..=held.min(copies) {
                for j in 0..self.joker_slots.min(held_jokers + 1) {
                    let total = q + j;
                    if total >= min_total && total <= self.board_slots as usize {
                        mask.set(base + (q - 1) * self.joker_slots + j);
                    }
                }
            }
        }
        if let Some(id) = self.joker_alone {
            if held_jokers > 0 && board.is_none() {
                mask.set(id);
            }
        }
        if !(is_leader && board.is_none()) {
            mask.set(self.pass);
        }
        mask
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent rule predicate, checked descriptor by descriptor.
    fn brute_legal(
        d: ActionDescriptor,
        hand: &Hand,
        board: Option<BoardTop>,
        is_leader: bool,
        slots: u8,
    ) -> bool {
        match d {
            ActionDescriptor::Pass => !(is_leader && board.is_none()),
            ActionDescriptor::JokerAlone => hand.jokers() >= 1 && board.is_none(),
            ActionDescriptor::Discard { value, quantity, jokers } => {
                let fits = hand.count(value) >= quantity
                    && hand.jokers() >= jokers
                    && quantity + jokers <= slots;
                let beats = match board {
                    None => true,
                    Some(top) => value < top.value && quantity + jokers >= top.quantity,
                };
                fits && beats
            }
        }
    }

    #[test]
    fn default_table_has_200_actions() {
        let table = ActionTable::new(&DeckConfig::default());
        assert_eq!(table.len(), 200);
        assert_eq!(table.decode(0), Some(ActionDescriptor::Discard { value: 1, quantity: 1, jokers: 0 }));
        assert_eq!(table.decode(197), Some(ActionDescriptor::Discard { value: 11, quantity: 11, jokers: 2 }));
        assert_eq!(table.decode(198), Some(ActionDescriptor::JokerAlone));
        assert_eq!(table.decode(199), Some(ActionDescriptor::Pass));
        assert_eq!(table.decode(200), None);
    }

    #[test]
    fn closed_form_ids_match_enumeration() {
        let table = ActionTable::new(&DeckConfig::default());
        for (id, d) in table.entries().iter().enumerate() {
            if let ActionDescriptor::Discard { value, quantity, jokers } = *d {
                let (v, q, j) = (value as usize, quantity as usize, jokers as usize);
                assert_eq!(id, 3 * v * (v - 1) / 2 + 3 * (q - 1) + j);
            }
        }
    }

    #[test]
    fn no_joker_table_has_67_actions() {
        let table = ActionTable::new(&DeckConfig::variant("no-joker").unwrap());
        assert_eq!(table.len(), 67);
        assert_eq!(table.joker_alone_id(), None);
        assert!(table.entries().iter().all(|d| !matches!(d, ActionDescriptor::Discard { jokers, .. } if *jokers > 0)));
    }

    #[test]
    fn small_deck_table_size_matches_enumeration() {
        let config = DeckConfig { max_value: 3, ..DeckConfig::default() };
        let table = ActionTable::new(&config);
        let mut brute = 0;
        for v in 1..=3u8 {
            for _q in 1..=v {
                for _j in 0..=2 {
                    brute += 1;
                }
            }
        }
        assert_eq!(table.len(), brute + 2);
        assert_eq!(table.len(), 20);
    }

    #[test]
    fn encode_decode_bijection() {
        for config in [DeckConfig::default(), DeckConfig::variant("no-joker").unwrap()] {
            let table = ActionTable::new(&config);
            for id in 0..table.len() {
                assert_eq!(table.encode(table.decode(id).unwrap()), Some(id));
            }
        }
        let table = ActionTable::new(&DeckConfig::default());
        assert_eq!(table.encode(ActionDescriptor::Discard { value: 3, quantity: 4, jokers: 0 }), None);
        assert_eq!(table.encode(ActionDescriptor::Discard { value: 12, quantity: 1, jokers: 0 }), None);
    }

    #[test]
    fn mask_example_four_four_joker_on_two_fives() {
        let table = ActionTable::new(&DeckConfig::default());
        let hand = Hand::from_values(&[4, 4, 12]);
        let mask = table.legal_mask(&hand, Some(BoardTop { value: 5, quantity: 2 }), false);
        let legal: Vec<_> = mask.legal_ids().map(|id| table.decode(id).unwrap()).collect();
        assert_eq!(
            legal,
            vec![
                ActionDescriptor::Discard { value: 4, quantity: 1, jokers: 1 },
                ActionDescriptor::Discard { value: 4, quantity: 2, jokers: 0 },
                ActionDescriptor::Discard { value: 4, quantity: 2, jokers: 1 },
                ActionDescriptor::Pass,
            ]
        );
        assert_eq!(mask.count(), 4);
    }

    #[test]
    fn a_single_one_on_board_allows_only_pass() {
        let table = ActionTable::new(&DeckConfig::default());
        let hand = Hand::from_values(&[1, 1, 2, 3, 12, 12]);
        let mask = table.legal_mask(&hand, Some(BoardTop { value: 1, quantity: 1 }), false);
        assert_eq!(mask.legal_ids().collect::<Vec<_>>(), vec![table.pass_id()]);
    }

    #[test]
    fn leader_on_empty_board_must_discard() {
        let config = DeckConfig::default();
        let table = ActionTable::new(&config);
        let mut deck = config.build_deck();
        deck.truncate(17);
        let hand = Hand::from_cards(&deck);
        let mask = table.legal_mask(&hand, None, true);
        assert!(!mask.is_legal(table.pass_id()));
        assert!(mask.count() >= 1);
        let only_jokers = Hand::from_values(&[12]);
        let mask = table.legal_mask(&only_jokers, None, true);
        assert_eq!(mask.legal_ids().collect::<Vec<_>>(), vec![198]);
    }

    fn arb_state() -> impl Strategy<Value = (Hand, Option<BoardTop>, bool)> {
        let hand = proptest::collection::vec(1u8..=12, 0..18).prop_map(|vals| {
            // clip to the default deck composition
            let mut h = Hand::new();
            for v in vals {
                let cap = if v == 12 { 2 } else { v };
                if h.count(v) < cap {
                    h.add_n(v, 1);
                }
            }
            h
        });
        let board = prop_oneof![
            Just(None),
            (1u8..=12, 1u8..=11).prop_map(|(value, quantity)| Some(BoardTop { value, quantity })),
        ];
        (hand, board, any::<bool>())
    }

    proptest! {
        #[test]
        fn mask_matches_brute_force((hand, board, leader) in arb_state()) {
            let table = ActionTable::new(&DeckConfig::default());
            let mask = table.legal_mask(&hand, board, leader);
            for (id, d) in table.entries().iter().enumerate() {
                prop_assert_eq!(mask.is_legal(id), brute_legal(*d, &hand, board, leader, 11), "id {}", id);
            }
        }

        #[test]
        fn removing_a_card_never_adds_a_discard((hand, board, leader) in arb_state(), pick in 1u8..=12) {
            prop_assume!(hand.count(pick) > 0);
            let table = ActionTable::new(&DeckConfig::default());
            let before = table.legal_mask(&hand, board, leader);
            let mut smaller = hand;
            smaller.take(pick, 1);
            let after = table.legal_mask(&smaller, board, leader);
            for id in after.legal_ids() {
                prop_assert!(before.is_legal(id));
            }
        }

        #[test]
        fn non_leader_may_always_pass((hand, board, _leader) in arb_state()) {
            let table = ActionTable::new(&DeckConfig::default());
            prop_assert!(table.legal_mask(&hand, board, false).is_legal(table.pass_id()));
        }
    }
}
