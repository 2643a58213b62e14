//! Reward schemes applied to every proposal.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Hand progress of the acting player, measured after the action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardContext {
    pub cards_left: usize,
    pub initial_cards: usize,
    /// Set when the action emptied the hand; 0 is the first to finish.
    pub finishing_position: Option<usize>,
}

/// Everything a reward function may look at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardInput {
    pub valid: bool,
    pub passed: bool,
    pub context: RewardContext,
}

pub type CustomReward = Arc<dyn Fn(&RewardInput) -> f64 + Send + Sync>;

#[derive(Clone, Default)]
pub enum RewardSpec {
    /// +1 for a valid action, -1 for an invalid one.
    #[default]
    RulesLearning,
    /// Hand-progress plus finishing bonus.
    WinGame,
    /// Hand-progress term evaluated without the percentage reading.
    WinLiteral,
    Custom(CustomReward),
}

impl fmt::Debug for RewardSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl RewardSpec {
    pub fn from_name(name: &str) -> Option<RewardSpec> {
        match name {
            "rules" => Some(RewardSpec::RulesLearning),
            "win" => Some(RewardSpec::WinGame),
            "win-literal" => Some(RewardSpec::WinLiteral),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RewardSpec::RulesLearning => "rules",
            RewardSpec::WinGame => "win",
            RewardSpec::WinLiteral => "win-literal",
            RewardSpec::Custom(_) => "custom",
        }
    }

    pub fn reward(&self, input: &RewardInput) -> f64 {
        match self {
            RewardSpec::RulesLearning => rules_reward(input.valid),
            RewardSpec::WinGame => win_reward(input.valid, &input.context),
            RewardSpec::WinLiteral => win_reward_literal(input.valid, &input.context),
            RewardSpec::Custom(f) => f(input),
        }
    }
}

pub fn rules_reward(valid: bool) -> f64 {
    if valid {
        1.0
    } else {
        -1.0
    }
}

/// Finishing bonus, additive on top of the progress term.
pub fn finish_bonus(position: usize) -> f64 {
    (1.0 - position as f64 * 0.3) * 0.3
}

pub fn progress_term(cards_left: usize, initial_cards: usize) -> f64 {
    assert!(initial_cards > 0, "reward context needs a non-empty initial hand");
    (1.0 - cards_left as f64 / initial_cards as f64) * 0.7
}

pub fn win_reward(valid: bool, ctx: &RewardContext) -> f64 {
    if !valid {
        return -1.0;
    }
    let bonus = ctx.finishing_position.map_or(0.0, finish_bonus);
    (progress_term(ctx.cards_left, ctx.initial_cards) + bonus).min(1.0)
}

/// `((1 - cardsLeft) * 100 / initialCards * 0.01) * 0.7` taken at face value.
pub fn win_reward_literal(valid: bool, ctx: &RewardContext) -> f64 {
    if !valid {
        return -1.0;
    }
    assert!(ctx.initial_cards > 0, "reward context needs a non-empty initial hand");
    let progress = (1.0 - ctx.cards_left as f64) * 100.0 / ctx.initial_cards as f64 * 0.01 * 0.7;
    let bonus = ctx.finishing_position.map_or(0.0, finish_bonus);
    (progress + bonus).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(cards_left: usize, finishing_position: Option<usize>) -> RewardContext {
        RewardContext { cards_left, initial_cards: 17, finishing_position }
    }

    #[test]
    fn rules_reward_is_plus_minus_one() {
        assert_eq!(rules_reward(true), 1.0);
        assert_eq!(rules_reward(false), -1.0);
        let pass = RewardInput { valid: true, passed: true, context: ctx(17, None) };
        assert_eq!(RewardSpec::RulesLearning.reward(&pass), 1.0);
    }

    #[test]
    fn win_reward_terms() {
        assert!((progress_term(0, 17) - 0.7).abs() < 1e-15);
        assert!((finish_bonus(0) - 0.3).abs() < 1e-15);
        assert!((finish_bonus(3) - 0.03).abs() < 1e-15);
        assert_eq!(win_reward(true, &ctx(17, None)), 0.0);
        assert!((win_reward(true, &ctx(0, Some(0))) - 1.0).abs() < 1e-15);
        assert_eq!(win_reward(false, &ctx(3, None)), -1.0);
    }

    #[test]
    fn literal_reading_is_negative_on_a_full_hand() {
        let r = win_reward_literal(true, &ctx(17, None));
        assert!((r - (-16.0 / 17.0 * 0.7)).abs() < 1e-12);
        assert!((r + 0.66).abs() < 0.01);
    }

    #[test]
    fn names_round_trip() {
        for name in ["rules", "win", "win-literal"] {
            assert_eq!(RewardSpec::from_name(name).unwrap().name(), name);
        }
        assert!(RewardSpec::from_name("affect").is_none());
    }

    proptest! {
        #[test]
        fn win_reward_monotone_and_bounded(left in 0usize..=17, pos in 0usize..4) {
            let r = win_reward(true, &ctx(left, None));
            prop_assert!((-1.0..=1.0).contains(&r));
            if left < 17 {
                prop_assert!(win_reward(true, &ctx(left + 1, None)) <= r);
            }
            let f = win_reward(true, &ctx(0, Some(pos)));
            prop_assert!(f <= 1.0);
            if pos < 3 {
                prop_assert!(win_reward(true, &ctx(0, Some(pos + 1))) <= f);
            }
        }
    }
}
