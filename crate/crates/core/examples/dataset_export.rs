//! Turns a recorded match into (observation, action, reward) rows for offline learning.
//!
//! `cargo run --example dataset_export -- [out.csv]`

use std::fs::File;

use chefs_hat::agents::Agent;
use chefs_hat::cards::DeckConfig;
use chefs_hat::harness::{random_roster, run_match};
use chefs_hat::log::{export_dataset, write_dataset_csv, DatasetFilter, JsonlWriter, LogFile, LogHeader};
use chefs_hat::rewards::RewardSpec;

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "dataset.csv".into());
    let config = DeckConfig::default();
    let reward = RewardSpec::WinGame;
    let header = LogHeader::new(&config, &reward, 4, 3);
    let mut writer = JsonlWriter::new(Vec::new(), &header).unwrap();
    let mut roster = random_roster(4, 4);
    let mut seats: Vec<&mut dyn Agent> = roster.iter_mut().map(|a| a as &mut dyn Agent).collect();
    run_match(&mut seats, &config, &reward, 4, 3, &mut writer).unwrap();
    let log = LogFile::parse(writer.into_inner().unwrap().as_slice()).unwrap();

    let accepted = export_dataset(&log, DatasetFilter::AcceptedPlays).unwrap();
    let all = export_dataset(&log, DatasetFilter::AllProposals).unwrap();
    println!("{} proposals, {} accepted", all.len(), accepted.len());
    write_dataset_csv(File::create(&out).unwrap(), &accepted).unwrap();
    println!("wrote {out} ({} observation columns)", accepted[0].observation.len());
}
