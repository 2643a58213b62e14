//! Seat 0 is played over TCP by a client in another thread; the other seats are local random agents.
//!
//! `cargo run --release --example remote_seat -- [games]`

use std::thread;

use chefs_hat::actions::ActionTable;
use chefs_hat::agents::{Agent, FirstLegalAgent};
use chefs_hat::cards::DeckConfig;
use chefs_hat::engine::observation_len;
use chefs_hat::harness::{random_roster, run_match};
use chefs_hat::log::NullSink;
use chefs_hat::netbridge::{BridgeOptions, BridgeServer, RemoteClient};
use chefs_hat::rewards::RewardSpec;

fn main() {
    let games = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let config = DeckConfig::default();
    let server = BridgeServer::bind("127.0.0.1:0", BridgeOptions::default()).unwrap();
    let addr = server.local_addr().unwrap();
    println!("listening on {addr}");

    let client = thread::spawn(move || RemoteClient::connect(addr, FirstLegalAgent).unwrap().run().unwrap());
    let mut remote = server
        .accept_seats(&[0], ActionTable::new(&config).len(), observation_len(&config), 1)
        .unwrap()
        .pop()
        .unwrap();
    let mut randoms = random_roster(3, 4);
    let stats = {
        let mut seats: Vec<&mut dyn Agent> = vec![&mut remote];
        seats.extend(randoms.iter_mut().skip(1).map(|a| a as &mut dyn Agent));
        run_match(&mut seats, &config, &RewardSpec::RulesLearning, 3, games, &mut NullSink).unwrap()
    };
    drop(remote);
    let (_, report) = client.join().unwrap();
    println!("client answered {} requests over {} games", report.requests, report.games);
    println!("victories {:?}", stats.victories);
}
