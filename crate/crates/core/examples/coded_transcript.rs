//! Parses a coded transcript and maps it onto protocol moves.

use exdialog::codec::{codes_to_moves, format_tags, parse_coded_transcript, validate_trace, BoundaryMode};

const TRANSCRIPT: &str = "\
@type: 1
1.1|
2.1|how did the deal happen?
3.1|negotiations took a year
4.1|that is not what I heard
4.4|it is what happened
4.3|fair enough
3.2|thanks
1.2|
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dialogue = parse_coded_transcript(TRANSCRIPT, BoundaryMode::Strict)?;
    for seg in &dialogue.segments {
        println!("{:>4}  {}", seg.code.id(), seg.text);
    }
    let moves = codes_to_moves(&dialogue)?;
    let report = validate_trace(&moves);
    println!(
        "{}  valid={} complete={}",
        format_tags(&moves),
        report.valid,
        report.complete
    );
    Ok(())
}
