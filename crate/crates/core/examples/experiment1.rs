//! Random agents under each rule variant: how often the shift starter wins and how long games last.
//!
//! `cargo run --release --example experiment1 -- [games] [seed] [--literal]`

use chefs_hat::harness::experiment1;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let literal = args.iter().any(|a| a == "--literal");
    let mut numbers = args.iter().filter_map(|a| a.parse::<u64>().ok());
    let games = numbers.next().unwrap_or(250) as u32;
    let seed = numbers.next().unwrap_or(2020);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let result = experiment1(games, seed, literal, workers).expect("random agents never fault");
    println!("{games} games per variant, seed {seed}, exchange {}", if literal { "literal" } else { "lowest cards" });
    print!("{}", result.table());
}
