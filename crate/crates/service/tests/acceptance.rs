//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use exdialog::agents::{load_knowledge_base, simulate_dialogue, ExplaineePolicy};
use exdialog::analytics::{code_frequency, game_histogram, termination_distribution};
use exdialog::codec::{
    default_topic, format_tags, kind_of_tag, parse_coded_corpus, resolve_moves, trace_lines, validate_tags,
    validate_trace, BoundaryMode, Code, CodedDialogue, DialogueType, FailureReason, Segment, Tag,
};
use exdialog::{Actor, Move, MoveKind, SessionState, Topic};
use exdialog_service::log::read_log;
use exdialog_service::{replay_log, EventType, Mode, SessionManager};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS: &str = include_str!("../../core/data/game_corpus.tags");
const FIXTURE: &str = include_str!("../../core/data/analytics_fixture.txt");
const KB: &str = include_str!("../../core/data/kb.json");

struct Criterion {
    name: &'static str,
    budget: Option<Duration>,
    check: fn() -> Result<String, String>,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn reference_dialogue() -> Result<String, String> {
    let trace = "[BE][RQ][FE][BA][AA][EA]";
    let r = validate_tags(trace);
    ensure(r.valid && r.complete, || format!("{r:?}"))?;
    let speakers: Vec<Option<Actor>> = resolve_moves(&exdialog::codec::parse_tags(trace).unwrap())
        .iter()
        .map(Move::speaker)
        .collect();
    let expected = [
        Some(Actor::E),
        Some(Actor::Q),
        Some(Actor::E),
        Some(Actor::Q),
        Some(Actor::E),
        None,
    ];
    ensure(speakers == expected, || format!("speakers {speakers:?}"))?;
    Ok("valid, complete, speakers E Q E Q E -".into())
}

fn minimal_game() -> Result<String, String> {
    let r = validate_tags("[BQ][E][AF]");
    ensure(r.valid && r.complete, || format!("{r:?}"))?;
    Ok("valid, complete".into())
}

fn premature_argument() -> Result<String, String> {
    let r = validate_tags("[BE][AF][RQ][BA][EA]");
    let reason = r.reason.as_ref().map(FailureReason::code);
    ensure(
        !r.valid && r.failure_index == Some(4) && reason.as_deref() == Some("IllegalMove(begin_argument)"),
        || format!("{r:?}"),
    )?;
    Ok("rejected at move 4 with IllegalMove(begin_argument)".into())
}

fn corpus_validity_rate() -> Result<String, String> {
    let traces: Vec<&str> = trace_lines(CORPUS).map(|(_, t)| t).collect();
    let h = game_histogram(&traces);
    ensure(h.total == 101 && h.valid == 96, || format!("{}/{}", h.valid, h.total))?;
    ensure(h.validity_rate() == Some(96.0 / 101.0), || {
        format!("{:?}", h.validity_rate())
    })?;
    Ok(format!("{}/{} valid", h.valid, h.total))
}

fn engine_verdict(seq: &[&str]) -> Result<bool, usize> {
    let tags: Vec<Tag> = seq.iter().map(|t| Tag::bare(kind_of_tag(t).unwrap())).collect();
    let r = validate_trace(&resolve_moves(&tags));
    match r.failure_index {
        Some(i) => Err(i),
        None => Ok(r.complete),
    }
}

fn oracle_equivalence() -> Result<String, String> {
    let mut n = 0usize;
    let mut mismatch = None;
    oracle::for_each_sequence(6, |seq| {
        n += 1;
        if mismatch.is_none() {
            let (want, got) = (oracle::run(seq), engine_verdict(seq));
            if want != got {
                mismatch = Some(format!("{seq:?}: oracle {want:?}, engine {got:?}"));
            }
        }
    });
    if let Some(m) = mismatch {
        return Err(m);
    }
    let expected = (12usize.pow(7) - 1) / 11;
    ensure(n == expected, || format!("enumerated {n}, expected {expected}"))?;
    Ok(format!("{n} sequences agree"))
}

fn random_policy(rng: &mut ChaCha8Rng, seed: u64) -> ExplaineePolicy {
    let kinds = [
        MoveKind::BeginQuestion,
        MoveKind::Affirm,
        MoveKind::ReturnQuestion,
        MoveKind::Clarify,
        MoveKind::BeginArgument,
        MoveKind::AffirmArgument,
        MoveKind::CounterArgument,
        MoveKind::EndArgument,
        MoveKind::EndExplanation,
    ];
    let weights: Vec<(MoveKind, f64)> = kinds.into_iter().map(|k| (k, rng.gen_range(0.0..3.0))).collect();
    ExplaineePolicy::new(weights, rng.gen_range(0.0..1.0), seed).unwrap()
}

fn simulation_soundness() -> Result<String, String> {
    let kb = load_knowledge_base(KB).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut moves = 0usize;
    for episode in 0..10_000u64 {
        let policy = random_policy(&mut rng, episode);
        let budget = rng.gen_range(3..=40);
        let trace = simulate_dialogue(&kb, &policy, budget).map_err(|e| format!("episode {episode}: {e}"))?;
        let r = validate_trace(&trace);
        ensure(r.complete, || {
            format!("episode {episode}: {} {r:?}", format_tags(&trace))
        })?;
        moves += trace.len();
    }
    Ok(format!("10000 episodes complete, {moves} moves"))
}

/// A legal move from `s`, or occasionally an arbitrary one that may be illegal.
fn next_move(s: &SessionState, rng: &mut ChaCha8Rng) -> Option<Move> {
    if rng.gen_bool(0.15) {
        let actor = *Actor::BOTH.choose(rng).unwrap();
        let kind = *MoveKind::ALL.choose(rng).unwrap();
        let topic = Topic::new(["p", "q", "elsewhere"].choose(rng).unwrap().to_string()).unwrap();
        return Some(Move::new(actor, kind, topic));
    }
    let legal: Vec<_> = s.legal_moves().into_iter().collect();
    let &(actor, kind) = legal.choose(rng)?;
    let topic = s.open_topic().cloned().unwrap_or_else(|| default_topic(s));
    Some(Move::new(actor, kind, topic).with_content(format!("utterance {}", s.history().len())))
}

fn summary(s: &SessionState) -> String {
    serde_json::to_string(s).unwrap()
}

fn crash_recovery() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut kills = 0usize;
    let mut rejected = 0usize;
    for session in 0..100 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let timeout = Duration::from_secs(3600);
        let mut mgr = SessionManager::new(dir.path(), timeout).map_err(|e| e.to_string())?;
        let created = mgr.create_session(Mode::Woz, None).map_err(|e| e.to_string())?;
        let id = created.session_id.clone();
        let log = dir.path().join(format!("{id}.jsonl"));
        let len = rng.gen_range(1..=30);
        for _ in 0..len {
            let before = mgr.session_view(&id).unwrap().state;
            let Some(m) = next_move(&before, &mut rng) else { break };
            let event = mgr
                .post_move(&id, &created.credentials[&m.actor], m)
                .map_err(|e| format!("session {session}: {e}"))?;
            if event.kind != EventType::MoveAccepted {
                rejected += 1;
                ensure(summary(&replay_log(&log).unwrap()) == summary(&before), || {
                    format!("session {session}: rejected move reached the log")
                })?;
                continue;
            }
            let live = mgr.session_view(&id).unwrap();
            let pre_kill = summary(&live.state);

            let replayed = replay_log(&log).map_err(|e| format!("session {session}: {e}"))?;
            ensure(summary(&replayed) == pre_kill, || {
                format!("session {session}: replay differs")
            })?;

            // Kill: drop the manager, sometimes leaving a torn half-written line.
            drop(mgr);
            if rng.gen_bool(0.3) {
                use std::io::Write;
                let mut f = std::fs::OpenOptions::new().append(true).open(&log).unwrap();
                f.write_all(br#"{"seq":999,"move":{"actor":"Q","ki"#).unwrap();
            }
            let (recovered, report) = SessionManager::recover(dir.path(), timeout).map_err(|e| e.to_string())?;
            ensure(report.skipped.is_empty(), || {
                format!("session {session}: {:?}", report.skipped)
            })?;
            let after = recovered.session_view(&id).unwrap();
            ensure(summary(&after.state) == pre_kill, || {
                format!("session {session}: recovered state differs")
            })?;
            ensure(after.seq == live.seq, || {
                format!("session {session}: seq {} != {}", after.seq, live.seq)
            })?;
            mgr = recovered;
            kills += 1;
        }
        let header = read_log(&log).map_err(|e| e.to_string())?.header;
        ensure(header.credentials == created.credentials, || "credentials lost".into())?;
    }
    Ok(format!(
        "{kills} kills across 100 sessions, {rejected} rejections kept out of the logs"
    ))
}

/// Per dialogue type, the non-zero entries as `(label, value)`.
type Tally = BTreeMap<Option<DialogueType>, Vec<(&'static str, f64)>>;

fn hand_tally() -> (Tally, Tally) {
    let freq = BTreeMap::from([
        (
            Some(DialogueType::ExplainerAgent),
            vec![
                ("1.1", 1.0),
                ("1.2", 1.0),
                ("2.2", 0.5),
                ("2.3", 0.5),
                ("3.1", 1.0),
                ("3.2", 1.0),
                ("3.3", 0.5),
            ],
        ),
        (
            Some(DialogueType::StaticExplainee),
            vec![
                ("1.1", 1.0),
                ("1.2", 1.0),
                ("2.1", 0.5),
                ("2.3", 0.5),
                ("3.1", 1.0),
                ("3.2", 0.5),
                ("3.4", 1.0),
                ("4.1", 0.5),
                ("4.3", 0.5),
                ("4.4", 0.5),
                ("5.1", 0.5),
                ("5.2", 0.5),
            ],
        ),
        (
            Some(DialogueType::QnA),
            vec![
                ("1.1", 1.0),
                ("1.2", 1.0),
                ("2.2", 1.0),
                ("2.3", 1.0),
                ("3.1", 2.0),
                ("3.5", 1.0),
            ],
        ),
    ]);
    let endings = BTreeMap::from([
        (Some(DialogueType::ExplainerAgent), vec![("3.2", 0.5), ("3.3", 0.5)]),
        (Some(DialogueType::StaticExplainee), vec![("3.2", 0.5), ("other", 0.5)]),
        (Some(DialogueType::QnA), vec![("3.1", 1.0)]),
    ]);
    (freq, endings)
}

fn random_corpus(rng: &mut ChaCha8Rng) -> Vec<CodedDialogue> {
    (0..rng.gen_range(1..=12))
        .map(|_| {
            let dialogue_type = if rng.gen_bool(0.2) {
                None
            } else {
                DialogueType::ALL.choose(rng).copied()
            };
            let mut segments: Vec<Segment> = (0..rng.gen_range(1..=8))
                .map(|_| Segment {
                    code: *Code::ALL[2..].choose(rng).unwrap(),
                    text: String::new(),
                })
                .collect();
            if rng.gen_bool(0.5) {
                segments.insert(
                    0,
                    Segment {
                        code: Code::QeStart,
                        text: String::new(),
                    },
                );
                segments.push(Segment {
                    code: Code::QeEnd,
                    text: String::new(),
                });
            }
            CodedDialogue {
                dialogue_type,
                segments,
            }
        })
        .collect()
}

fn analytics_oracle() -> Result<String, String> {
    let corpus = parse_coded_corpus(FIXTURE, BoundaryMode::Strict).map_err(|e| e.to_string())?;
    ensure(corpus.len() == 5, || format!("{} dialogues", corpus.len()))?;
    let (freq, endings) = hand_tally();

    let avg = code_frequency(&corpus).map_err(|e| e.to_string())?;
    ensure(avg.keys().eq(freq.keys()), || format!("types {:?}", avg.keys()))?;
    for (ty, nonzero) in &freq {
        for code in Code::ALL {
            let want = nonzero.iter().find(|(c, _)| *c == code.id()).map_or(0.0, |(_, v)| *v);
            let got = avg[ty][&code];
            ensure(got == want, || format!("{ty:?} {}: {got} != {want}", code.id()))?;
        }
    }
    let dist = termination_distribution(&corpus).map_err(|e| e.to_string())?;
    for (ty, want) in &endings {
        let got: Vec<(&str, f64)> = dist[ty].iter().map(|(e, v)| (e.label(), *v)).collect();
        ensure(&got == want, || format!("{ty:?}: {got:?}"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..1000 {
        let c = random_corpus(&mut rng);
        let mut shuffled = c.clone();
        shuffled.shuffle(&mut rng);
        let doubled: Vec<CodedDialogue> = c.iter().chain(c.iter()).cloned().collect();
        let base = (code_frequency(&c), termination_distribution(&c));
        ensure(
            (code_frequency(&shuffled), termination_distribution(&shuffled)) == base,
            || format!("corpus {i}: permutation changed the result"),
        )?;
        ensure(
            (code_frequency(&doubled), termination_distribution(&doubled)) == base,
            || format!("corpus {i}: duplication changed the result"),
        )?;
    }
    Ok("hand tally matches; 1000 random corpora invariant".into())
}

fn main() {
    let criteria = [
        Criterion {
            name: "reference dialogue with embedded argument",
            budget: Some(Duration::from_secs(1)),
            check: reference_dialogue,
        },
        Criterion {
            name: "minimal question game",
            budget: None,
            check: minimal_game,
        },
        Criterion {
            name: "premature argument rejected",
            budget: None,
            check: premature_argument,
        },
        Criterion {
            name: "bundled corpus validity rate 96/101",
            budget: None,
            check: corpus_validity_rate,
        },
        Criterion {
            name: "exhaustive oracle equivalence, length <= 6",
            budget: Some(Duration::from_secs(120)),
            check: oracle_equivalence,
        },
        Criterion {
            name: "simulation soundness, 10000 episodes",
            budget: Some(Duration::from_secs(60)),
            check: simulation_soundness,
        },
        Criterion {
            name: "crash recovery, 100 sessions",
            budget: None,
            check: crash_recovery,
        },
        Criterion {
            name: "analytics oracle",
            budget: None,
            check: analytics_oracle,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS  {:<45} {:>9.3?}  {detail}", c.name, elapsed),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:<45} {:>9.3?}  {why}", c.name, elapsed);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
