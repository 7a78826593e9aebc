//! Offline commands behind the CLI, returning their output as text.

use std::path::{Path, PathBuf};

use anyhow::Context;
use exdialog::agents::{load_knowledge_base, simulate_dialogue, ExplaineePolicy};
use exdialog::analytics::CorpusStats;
use exdialog::codec::{format_tags, parse_coded_corpus, trace_lines, validate_trace_file, BoundaryMode};
use serde::Serialize;

use crate::log::read_log;

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// One JSON record per trace line across all files.
pub fn validate_files(paths: &[PathBuf]) -> anyhow::Result<String> {
    let mut out = String::new();
    for path in paths {
        for record in validate_trace_file(&read(path)?) {
            out += &serde_json::to_string(&record)?;
            out.push('\n');
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsFormat {
    Csv,
    Json,
}

/// Files ending in `.tags` hold tag traces; anything else is a coded transcript.
pub fn is_trace_file(path: &Path) -> bool {
    path.extension().is_some_and(|x| x == "tags")
}

pub fn stats(
    coded: &[PathBuf],
    trace_files: &[PathBuf],
    mode: BoundaryMode,
    format: StatsFormat,
) -> anyhow::Result<String> {
    let mut corpus = Vec::new();
    for path in coded {
        let dialogues =
            parse_coded_corpus(&read(path)?, mode).with_context(|| format!("parsing {}", path.display()))?;
        corpus.extend(dialogues);
    }
    let mut traces = Vec::new();
    for path in trace_files {
        traces.extend(trace_lines(&read(path)?).map(|(_, t)| t.to_string()));
    }
    let stats = CorpusStats::compute(&corpus, &traces)?;
    Ok(match format {
        StatsFormat::Csv => stats.to_csv(),
        StatsFormat::Json => serde_json::to_string_pretty(&stats.to_json())? + "\n",
    })
}

/// Runs `episodes` simulated dialogues; episode `i` uses seed `seed + i`.
/// Returns one tag trace per line.
pub fn simulate(
    episodes: usize,
    seed: u64,
    kb_path: &Path,
    policy_path: &Path,
    max_moves: usize,
) -> anyhow::Result<String> {
    let kb = load_knowledge_base(&read(kb_path)?)?;
    let mut policy: ExplaineePolicy =
        serde_json::from_str(&read(policy_path)?).with_context(|| format!("parsing {}", policy_path.display()))?;
    policy.validate()?;
    let mut out = String::new();
    for i in 0..episodes {
        policy.seed = seed.wrapping_add(i as u64);
        let trace = simulate_dialogue(&kb, &policy, max_moves)?;
        out += &format_tags(&trace);
        out.push('\n');
    }
    Ok(out)
}

#[derive(Serialize)]
struct ReplaySummary<'a> {
    session_id: &'a str,
    moves: usize,
    terminal_eligible: bool,
    trace: String,
    state: &'a exdialog::SessionState,
}

/// Replays a session log and describes the state it reaches.
pub fn replay(path: &Path) -> anyhow::Result<String> {
    let r = read_log(path).with_context(|| format!("replaying {}", path.display()))?;
    let len = std::fs::metadata(path)?.len();
    if r.valid_len < len {
        tracing::warn!(ignored_bytes = len - r.valid_len, "log ends in a torn write");
    }
    let summary = ReplaySummary {
        session_id: &r.header.session_id,
        moves: r.state.history().len(),
        terminal_eligible: r.state.is_terminal_eligible(),
        trace: format_tags(r.state.history()),
        state: &r.state,
    };
    Ok(serde_json::to_string_pretty(&summary)? + "\n")
}
