//! Learners rewarded only for winning: one against random agents, then four against each other.
//! Pass a checkpoint from `learn_rules` to warm-start seat 0.
//!
//! `cargo run --release --example learn_to_win -- [games] [checkpoint]`

use chefs_hat::harness::{experiment3, Exp3Condition};
use chefs_hat::log::NullSink;
use chefs_hat::qlearn::checkpoint::Checkpoint;
use chefs_hat::qlearn::{DqnAgent, QConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let games = args.first().and_then(|s| s.parse().ok()).unwrap_or(50);
    let q = QConfig::default();
    let warm = || {
        args.get(1).map(|path| DqnAgent::from_checkpoint(q.clone(), Checkpoint::load(path.as_ref()).unwrap(), 7))
    };

    for (label, condition) in [("vs random", Exp3Condition::VsRandom), ("all learners", Exp3Condition::AllLearners)] {
        let run = experiment3(condition, games, 2020, &q, warm(), &mut NullSink).unwrap();
        let last = run.stats.last(games as usize / 2);
        println!(
            "{label}: victories {:?}, seat 0 won {} of the last {} games",
            run.stats.victories,
            run.stats.victories_in(0, last.clone()),
            last.len()
        );
    }
}
