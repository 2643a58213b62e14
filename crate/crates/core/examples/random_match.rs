//! Four random agents play a match; prints per-seat tallies and writes the per-game CSV to stdout.
//!
//! `cargo run --release --example random_match -- [games] [seed]`

use chefs_hat::cards::DeckConfig;
use chefs_hat::harness::run_random_match;
use chefs_hat::log::NullSink;
use chefs_hat::rewards::RewardSpec;

fn main() {
    let mut args = std::env::args().skip(1).filter_map(|a| a.parse::<u64>().ok());
    let games = args.next().unwrap_or(20) as u32;
    let seed = args.next().unwrap_or(2020);
    let stats = run_random_match(&DeckConfig::default(), &RewardSpec::RulesLearning, seed, games, 1, &mut NullSink)
        .expect("random agents never fault");

    let all = 0..stats.games();
    for seat in 0..stats.players {
        println!(
            "P{seat}: {} wins, {:.0} wrong proposals/game",
            stats.victories[seat],
            stats.mean_wrong_actions(seat, all.clone())
        );
    }
    println!("shift starter wins {:.1}% of shifts, {:.1} rounds/game\n", stats.start_shift_win_rate() * 100.0, stats.avg_rounds());
    stats.write_csv(std::io::stdout().lock()).unwrap();
}
