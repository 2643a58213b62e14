//! The discrete move table, and which moves are legal for one dealt hand.
//!
//! `cargo run --example action_table -- [seed]`

use chefs_hat::actions::ActionTable;
use chefs_hat::cards::DeckConfig;
use chefs_hat::engine::GameState;

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2020);
    for variant in ["all", "no-joker"] {
        let table = ActionTable::new(&DeckConfig::variant(variant).unwrap());
        println!("{variant}: {} moves, pass is id {}", table.len(), table.pass_id());
    }

    let mut game = GameState::new(DeckConfig::default(), seed).unwrap();
    game.deal().unwrap();
    game.perform_exchange(|_, _, _| Vec::new()).unwrap();
    game.start_shift_play().unwrap();
    let leader = game.turn();
    println!("\nP{leader} leads holding {}", game.hand(leader));
    let mask = game.legal_mask();
    println!("{} legal opening moves:", mask.count());
    for id in mask.legal_ids() {
        println!("  {id:>3}  {}", game.table().decode(id).unwrap());
    }
}
