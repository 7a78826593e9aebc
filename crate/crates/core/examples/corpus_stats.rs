//! Computes corpus statistics over the bundled coded transcripts and traces.

use exdialog::analytics::CorpusStats;
use exdialog::codec::{parse_coded_corpus, trace_lines, BoundaryMode};

const TRANSCRIPTS: &str = include_str!("../data/analytics_fixture.txt");
const TRACES: &str = include_str!("../data/game_corpus.tags");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = parse_coded_corpus(TRANSCRIPTS, BoundaryMode::Strict)?;
    let traces: Vec<&str> = trace_lines(TRACES).map(|(_, t)| t).collect();
    let stats = CorpusStats::compute(&corpus, &traces)?;
    print!("{}", stats.to_csv());
    eprintln!(
        "{} dialogues, {} traces, validity rate {:.4}",
        corpus.len(),
        traces.len(),
        stats.validity_rate.unwrap_or(f64::NAN)
    );
    Ok(())
}
