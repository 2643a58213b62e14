//! Records a short match as JSON lines, replays it, then shows what a tampered line looks like to the checker.
//!
//! `cargo run --example replay_log -- [--transcript]`

use chefs_hat::agents::Agent;
use chefs_hat::cards::DeckConfig;
use chefs_hat::harness::{random_roster, run_match};
use chefs_hat::log::{replay, transcript, JsonlWriter, LogFile, LogHeader};
use chefs_hat::rewards::RewardSpec;

fn main() {
    let config = DeckConfig::default();
    let reward = RewardSpec::RulesLearning;
    let header = LogHeader::new(&config, &reward, 9, 2);
    let mut writer = JsonlWriter::new(Vec::new(), &header).unwrap();
    let mut roster = random_roster(9, 4);
    let mut seats: Vec<&mut dyn Agent> = roster.iter_mut().map(|a| a as &mut dyn Agent).collect();
    run_match(&mut seats, &config, &reward, 9, 2, &mut writer).unwrap();
    let bytes = writer.into_inner().unwrap();

    let log = LogFile::parse(bytes.as_slice()).unwrap();
    if std::env::args().any(|a| a == "--transcript") {
        print!("{}", transcript(&log));
        return;
    }
    println!("{} lines recorded", log.records.len() + 1);
    for game in replay(&log).unwrap().games {
        println!("game {} replays cleanly: winner P{}, scores {:?}", game.index, game.winner, game.scores);
    }

    let text = String::from_utf8(bytes).unwrap().replacen("\"valid\":false", "\"valid\":true", 1);
    match replay(&LogFile::parse(text.as_bytes()).unwrap()) {
        Ok(_) => println!("tampering went unnoticed"),
        Err(e) => println!("after flipping one proposal: {e}"),
    }
}
