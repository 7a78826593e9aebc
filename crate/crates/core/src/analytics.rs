//! Corpus statistics: code frequency per dialogue, how dialogues end, and
//! which dialogue games occur how often.
//!
//! Averages are per dialogue, not per transcript. Rates over empty input are
//! `None`, never zero.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::codec::{format_tags, parse_tags, resolve_moves, validate_tags, Code, CodedDialogue, DialogueType};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("dialogue {index} has no non-boundary code")]
    EmptyDialogue { index: usize },
}

/// Termination bucket: explanation, explainee affirmation, explainer
/// affirmation, or anything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Ending {
    Code(Code),
    Other,
}

impl Ending {
    pub fn of(code: Code) -> Ending {
        match code {
            Code::Explanation | Code::ExplaineeAffirmation | Code::ExplainerAffirmation => Ending::Code(code),
            _ => Ending::Other,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Ending::Code(c) => c.id(),
            Ending::Other => "other",
        }
    }
}

/// Dialogues without an `@type` header are grouped under `None`.
pub type TypeKey = Option<DialogueType>;

pub type CodeAverages = BTreeMap<TypeKey, BTreeMap<Code, f64>>;
pub type TerminationDistribution = BTreeMap<TypeKey, BTreeMap<Ending, f64>>;

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct GameHistogram {
    pub counts: BTreeMap<String, usize>,
    pub valid: usize,
    pub total: usize,
}

impl GameHistogram {
    pub fn validity_rate(&self) -> Option<f64> {
        (self.total > 0).then(|| self.valid as f64 / self.total as f64)
    }

    pub fn invalid(&self) -> usize {
        self.total - self.valid
    }
}

/// Mean occurrences of every code per dialogue, for each dialogue type present.
pub fn code_frequency(corpus: &[CodedDialogue]) -> Result<CodeAverages, AnalyticsError> {
    if corpus.is_empty() {
        return Err(AnalyticsError::EmptyCorpus);
    }
    let mut totals: BTreeMap<TypeKey, (usize, BTreeMap<Code, usize>)> = BTreeMap::new();
    for d in corpus {
        let (n, counts) = totals.entry(d.dialogue_type).or_default();
        *n += 1;
        for code in d.codes() {
            *counts.entry(code).or_default() += 1;
        }
    }
    Ok(totals
        .into_iter()
        .map(|(ty, (n, counts))| {
            let avgs = Code::ALL
                .into_iter()
                .map(|c| (c, counts.get(&c).copied().unwrap_or(0) as f64 / n as f64))
                .collect();
            (ty, avgs)
        })
        .collect())
}

/// Share of dialogues ending in each bucket, per dialogue type. Only buckets
/// that occur are present.
pub fn termination_distribution(corpus: &[CodedDialogue]) -> Result<TerminationDistribution, AnalyticsError> {
    let mut tallies: BTreeMap<TypeKey, (usize, BTreeMap<Ending, usize>)> = BTreeMap::new();
    for (i, d) in corpus.iter().enumerate() {
        let last = d
            .codes()
            .filter(|c| !c.is_boundary())
            .last()
            .ok_or(AnalyticsError::EmptyDialogue { index: i + 1 })?;
        let (n, counts) = tallies.entry(d.dialogue_type).or_default();
        *n += 1;
        *counts.entry(Ending::of(last)).or_default() += 1;
    }
    Ok(tallies
        .into_iter()
        .map(|(ty, (n, counts))| {
            let dist = counts.into_iter().map(|(e, c)| (e, c as f64 / n as f64)).collect();
            (ty, dist)
        })
        .collect())
}

/// Counts traces by canonical tag string and measures how many are complete
/// valid games. Unparseable traces are counted under their trimmed text.
pub fn game_histogram<S: AsRef<str>>(traces: &[S]) -> GameHistogram {
    let mut h = GameHistogram::default();
    for t in traces {
        let text = t.as_ref().trim();
        let key = match parse_tags(text) {
            Ok(tags) => format_tags(&resolve_moves(&tags)),
            Err(_) => text.to_string(),
        };
        *h.counts.entry(key).or_default() += 1;
        let report = validate_tags(text);
        h.total += 1;
        if report.valid && report.complete {
            h.valid += 1;
        }
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub per_type_code_avg: CodeAverages,
    pub termination_dist: TerminationDistribution,
    pub game_histogram: BTreeMap<String, usize>,
    pub validity_rate: Option<f64>,
}

impl CorpusStats {
    /// Coded dialogues feed the first two tables, tag traces the last two.
    /// Either input may be empty.
    pub fn compute<S: AsRef<str>>(corpus: &[CodedDialogue], traces: &[S]) -> Result<Self, AnalyticsError> {
        let (per_type_code_avg, termination_dist) = if corpus.is_empty() {
            (BTreeMap::new(), BTreeMap::new())
        } else {
            (code_frequency(corpus)?, termination_distribution(corpus)?)
        };
        let h = game_histogram(traces);
        Ok(CorpusStats {
            per_type_code_avg,
            termination_dist,
            validity_rate: h.validity_rate(),
            game_histogram: h.counts,
        })
    }

    /// Long-format CSV with the fixed header `table,dialogue_type,key,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("table,dialogue_type,key,value\n");
        for (ty, avgs) in &self.per_type_code_avg {
            for (code, v) in avgs {
                let _ = writeln!(out, "code_avg,{},{},{}", type_label(*ty), code.id(), v);
            }
        }
        for (ty, dist) in &self.termination_dist {
            for (ending, v) in dist {
                let _ = writeln!(out, "termination,{},{},{}", type_label(*ty), ending.label(), v);
            }
        }
        for (game, n) in &self.game_histogram {
            let _ = writeln!(out, "game,,{},{}", csv_field(game), n);
        }
        if let Some(rate) = self.validity_rate {
            let _ = writeln!(out, "validity_rate,,,{rate}");
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let code_avg: serde_json::Map<_, _> = self
            .per_type_code_avg
            .iter()
            .map(|(ty, avgs)| {
                let row: serde_json::Map<_, _> = avgs.iter().map(|(c, v)| (c.id().to_string(), (*v).into())).collect();
                (type_label(*ty), row.into())
            })
            .collect();
        let termination: serde_json::Map<_, _> = self
            .termination_dist
            .iter()
            .map(|(ty, dist)| {
                let row: serde_json::Map<_, _> =
                    dist.iter().map(|(e, v)| (e.label().to_string(), (*v).into())).collect();
                (type_label(*ty), row.into())
            })
            .collect();
        serde_json::json!({
            "per_type_code_avg": code_avg,
            "termination_dist": termination,
            "game_histogram": self.game_histogram,
            "validity_rate": self.validity_rate,
        })
    }
}

fn type_label(ty: TypeKey) -> String {
    ty.map_or_else(|| "unspecified".to_string(), |t| t.number().to_string())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
