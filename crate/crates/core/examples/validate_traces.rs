//! Validates tag traces given on the command line, or a few built-in ones.
//!
//!     cargo run -p exdialog --example validate_traces -- "[BQ][E][AF]" "[BE][AF][RQ][BA][EA]"

use exdialog::codec::{validate_tags, ValidationRecord};

fn main() {
    let mut traces: Vec<String> = std::env::args().skip(1).collect();
    if traces.is_empty() {
        traces = [
            "[BQ][E][AF]",
            "[BE][AF][RQ][BA][EA]",
            "[BQ@cities][E][BA:E][AA][EA]",
            "[BQ][XX]",
        ]
        .map(String::from)
        .to_vec();
    }
    for t in &traces {
        let report = validate_tags(t);
        println!(
            "{}",
            serde_json::to_string(&ValidationRecord::new(t.as_str(), &report)).unwrap()
        );
    }
}
