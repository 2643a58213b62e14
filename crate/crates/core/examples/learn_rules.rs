//! A deep-Q learner against three random agents, rewarded for every valid move.
//! Prints the learning curve in blocks of 25 games and saves a checkpoint.
//!
//! `cargo run --release --example learn_rules -- [games] [checkpoint]`

use chefs_hat::harness::experiment2;
use chefs_hat::log::NullSink;
use chefs_hat::qlearn::QConfig;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let games = args.first().and_then(|s| s.parse().ok()).unwrap_or(100);
    let path = args.get(1).map_or("learner.chqn", String::as_str);

    let run = experiment2(games, 2020, &QConfig::default(), &mut NullSink).unwrap();
    let stats = &run.stats;
    println!("games      learner wrong/game  random wrong/game  learner reward");
    for start in (0..stats.games()).step_by(25) {
        let block = start..(start + 25).min(stats.games());
        let randoms = (1..4).map(|s| stats.mean_wrong_actions(s, block.clone())).sum::<f64>() / 3.0;
        println!(
            "{:>4}-{:<4}  {:>18.1}  {:>17.1}  {:>14.3}",
            block.start,
            block.end - 1,
            stats.mean_wrong_actions(0, block.clone()),
            randoms,
            stats.mean_reward(0, block.clone())
        );
    }
    let learner = &run.learners[0];
    println!("victories {:?}, epsilon {:.3}, {} training steps", stats.victories, learner.epsilon(), learner.stats().train_steps);
    learner.checkpoint().save(path.as_ref()).unwrap();
    println!("saved {path}");
}
