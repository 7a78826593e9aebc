//! Plays the scripted explainer against a random explainee and prints the traces.
//!
//!     cargo run -p exdialog --example simulate -- 20

use exdialog::agents::{load_knowledge_base, simulate_dialogue, ExplaineePolicy};
use exdialog::codec::{format_tags, validate_trace};

const KB: &str = include_str!("../data/kb.json");
const POLICY: &str = include_str!("../data/policy.json");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let episodes: u64 = std::env::args().nth(1).map_or(Ok(10), |n| n.parse())?;
    let kb = load_knowledge_base(KB)?;
    let mut policy: ExplaineePolicy = serde_json::from_str(POLICY)?;
    for i in 0..episodes {
        policy.seed = i;
        let trace = simulate_dialogue(&kb, &policy, 20)?;
        let complete = validate_trace(&trace).complete;
        println!("{:>3} {:<5} {}", i, complete, format_tags(&trace));
    }
    Ok(())
}
