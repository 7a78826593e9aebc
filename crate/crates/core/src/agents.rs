//! Machine players.
//!
//! [`ScriptedExplainer`] mechanizes the wizard: it answers from a knowledge
//! base of predictions using the template *prediction, then evidence*.
//! [`RandomExplainee`] samples protocol-legal explainee moves from a weighted
//! policy. [`simulate_dialogue`] runs the two against each other.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::default_topic;
use crate::protocol::{Actor, FrameState, FrameType, Move, MoveKind, QuestionSubtype, SessionState, Topic};

/// Content of the explainer's reply when it has nothing on the topic.
pub const UNABLE_TO_ANSWER: &str = "I'm unable to answer that";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error("it is not the explainer's turn")]
    NotExplainerTurn,
    #[error("the knowledge base has nothing left to explain")]
    NothingToExplain,
    #[error("the explainee has no legal move")]
    NoLegalMove,
    #[error("move budget {0} is below the minimum of 3")]
    BudgetTooSmall(usize),
    #[error("knowledge base record {index}: {reason}")]
    InvalidRecord { index: usize, reason: String },
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
}

/// One prediction the explainer can talk about.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplanandumRecord {
    pub topic: Topic,
    pub prediction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaze_evidence: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub causal_history: Option<String>,
}

impl ExplanandumRecord {
    pub fn new(topic: Topic, prediction: impl Into<String>) -> Self {
        ExplanandumRecord {
            topic,
            prediction: prediction.into(),
            gaze_evidence: None,
            causal_history: None,
        }
    }

    pub fn with_gaze(mut self, evidence: impl Into<String>) -> Self {
        self.gaze_evidence = Some(evidence.into());
        self
    }

    pub fn with_causal_history(mut self, history: impl Into<String>) -> Self {
        self.causal_history = Some(history.into());
        self
    }

    /// Prediction followed by the gaze clause, then the causal-history clause.
    pub fn explanation(&self) -> String {
        let mut parts = vec![self.prediction.trim_end_matches('.').to_string()];
        for clause in [&self.gaze_evidence, &self.causal_history].into_iter().flatten() {
            let clause = clause.trim().trim_end_matches('.');
            if !clause.is_empty() {
                parts.push(clause.to_string());
            }
        }
        parts.join("; ")
    }
}

/// Parses a JSON list of records and checks every prediction is non-empty.
pub fn load_knowledge_base(json: &str) -> Result<Vec<ExplanandumRecord>, AgentError> {
    let kb: Vec<ExplanandumRecord> = serde_json::from_str(json).map_err(|e| AgentError::InvalidRecord {
        index: 0,
        reason: e.to_string(),
    })?;
    for (i, r) in kb.iter().enumerate() {
        if r.prediction.trim().is_empty() {
            return Err(AgentError::InvalidRecord {
                index: i,
                reason: "prediction is empty".into(),
            });
        }
    }
    Ok(kb)
}

/// True when the open dialogue is waiting on the explainer: a question is
/// pending, or the explainee has an argument on the table.
pub fn explainer_to_move(s: &SessionState) -> bool {
    match s.top() {
        Some(f) if f.state == FrameState::QPosed => true,
        Some(f) if f.state == FrameState::APosed => f.argument_proposer == Some(Actor::Q),
        _ => false,
    }
}

fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Whether `topic`'s tokens occur contiguously among `content`'s tokens.
pub fn mentions_topic(content: &str, topic: &Topic) -> bool {
    let needle = tokens(topic.as_str());
    if needle.is_empty() {
        return false;
    }
    let hay = tokens(content);
    hay.windows(needle.len()).any(|w| w == needle.as_slice())
}

/// Template-driven explainer.
#[derive(Debug, Clone, Copy)]
pub struct ScriptedExplainer {
    /// Ask a clarification question when a topic is unknown but resembles a
    /// known one.
    pub allow_clarify: bool,
}

impl Default for ScriptedExplainer {
    fn default() -> Self {
        ScriptedExplainer { allow_clarify: true }
    }
}

impl ScriptedExplainer {
    pub fn step(&self, s: &SessionState, kb: &[ExplanandumRecord]) -> Result<Move, AgentError> {
        let Some(frame) = s.top() else {
            if !s.is_legal(Actor::E, MoveKind::BeginExplanation) {
                return Err(AgentError::NotExplainerTurn);
            }
            let r = kb
                .iter()
                .find(|r| s.last_closed_topic() != Some(&r.topic))
                .ok_or(AgentError::NothingToExplain)?;
            return Ok(Move::new(Actor::E, MoveKind::BeginExplanation, r.topic.clone()).with_content(r.explanation()));
        };
        let topic = frame.topic.clone();
        let record = kb.iter().find(|r| r.topic == topic);
        let reply = |kind| Move::new(Actor::E, kind, topic.clone());

        let m = match (frame.frame_type, frame.state) {
            (FrameType::Explanation, FrameState::QPosed) => {
                let kind = if s.is_legal(Actor::E, MoveKind::Explain) {
                    MoveKind::Explain
                } else {
                    MoveKind::FurtherExplain
                };
                match record {
                    Some(r) => reply(kind).with_content(r.explanation()),
                    None => match near_miss(&topic, kb) {
                        Some(near) if self.allow_clarify => {
                            reply(MoveKind::ReturnQuestion).with_content(format!("Do you mean {near}?"))
                        }
                        _ => reply(kind).with_content(UNABLE_TO_ANSWER),
                    },
                }
            }
            (FrameType::Explanation, FrameState::QAffirmed) => reply(MoveKind::Affirm),
            (FrameType::Explanation, FrameState::Explained | FrameState::BothAffirmed) => {
                reply(MoveKind::EndExplanation)
            }
            (FrameType::Argumentation, FrameState::APosed) if frame.argument_proposer == Some(Actor::Q) => {
                let argument = s
                    .history()
                    .iter()
                    .rev()
                    .find(|m| {
                        m.actor == Actor::Q && matches!(m.kind, MoveKind::BeginArgument | MoveKind::CounterArgument)
                    })
                    .and_then(|m| m.content.as_deref())
                    .unwrap_or("");
                match kb.iter().find(|r| mentions_topic(argument, &r.topic)) {
                    Some(r) => reply(MoveKind::AffirmArgument).with_content(r.explanation()),
                    None => reply(MoveKind::CounterArgument)
                        .with_content(record.map_or_else(|| UNABLE_TO_ANSWER.to_string(), |r| r.prediction.clone())),
                }
            }
            (FrameType::Argumentation, FrameState::APosed | FrameState::AAffirmed) => reply(MoveKind::EndArgument),
            _ => return Err(AgentError::NotExplainerTurn),
        };
        if s.is_legal(m.actor, m.kind) {
            Ok(m)
        } else {
            Err(AgentError::NotExplainerTurn)
        }
    }
}

fn near_miss<'a>(topic: &Topic, kb: &'a [ExplanandumRecord]) -> Option<&'a Topic> {
    let t = topic.as_str().to_lowercase();
    kb.iter().map(|r| &r.topic).find(|k| {
        let k = k.as_str().to_lowercase();
        k != topic.as_str() && (k == t || k.starts_with(&t) || t.starts_with(&k))
    })
}

/// Deterministic explainer reply for `s`.
pub fn scripted_explainer_step(s: &SessionState, kb: &[ExplanandumRecord]) -> Result<Move, AgentError> {
    ScriptedExplainer::default().step(s, kb)
}

/// Weights over explainee move kinds plus the chance of stopping whenever
/// the dialogue may end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplaineePolicy {
    pub weights: BTreeMap<MoveKind, f64>,
    pub stop_bias: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ExplaineePolicy {
    pub fn new(
        weights: impl IntoIterator<Item = (MoveKind, f64)>,
        stop_bias: f64,
        seed: u64,
    ) -> Result<Self, AgentError> {
        let p = ExplaineePolicy {
            weights: weights.into_iter().collect(),
            stop_bias,
            seed,
        };
        p.validate()?;
        Ok(p)
    }

    /// Every explainee kind weighted 1.
    pub fn uniform(stop_bias: f64, seed: u64) -> Self {
        ExplaineePolicy {
            weights: MoveKind::ALL.into_iter().map(|k| (k, 1.0)).collect(),
            stop_bias,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        if !(0.0..=1.0).contains(&self.stop_bias) {
            return Err(AgentError::InvalidPolicy("stop_bias must be within [0, 1]".into()));
        }
        if self.weights.values().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(AgentError::InvalidPolicy(
                "weights must be finite and non-negative".into(),
            ));
        }
        if !self.weights.values().any(|w| *w > 0.0) {
            return Err(AgentError::InvalidPolicy("at least one weight must be positive".into()));
        }
        Ok(())
    }

    pub fn weight(&self, kind: MoveKind) -> f64 {
        self.weights.get(&kind).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExplaineeAction {
    Move(Move),
    Stop,
}

/// Stochastic explainee driven by an [`ExplaineePolicy`].
#[derive(Debug, Clone)]
pub struct RandomExplainee {
    policy: ExplaineePolicy,
    rng: ChaCha8Rng,
    topics: Vec<Topic>,
    unknown_topics: usize,
}

impl RandomExplainee {
    /// `topics` are the subjects the explainee asks and argues about; when
    /// empty, new dialogues take the default topics `p`, `q`, ...
    pub fn new(policy: ExplaineePolicy, topics: Vec<Topic>) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(policy.seed);
        RandomExplainee {
            policy,
            rng,
            topics,
            unknown_topics: 0,
        }
    }

    /// Samples the next explainee action. `admissible` narrows the candidate
    /// moves (the simulator uses it to stay within its move budget). Stopping
    /// is possible only once the dialogue has started and may legally end.
    pub fn step(
        &mut self,
        s: &SessionState,
        admissible: &dyn Fn(&Move) -> bool,
    ) -> Result<ExplaineeAction, AgentError> {
        let can_stop = s.is_terminal_eligible() && !s.history().is_empty();
        if can_stop && self.rng.gen::<f64>() < self.policy.stop_bias {
            return Ok(ExplaineeAction::Stop);
        }
        let candidates: Vec<Move> = s
            .legal_moves()
            .into_iter()
            .filter(|&(a, _)| a == Actor::Q)
            .map(|(_, k)| self.compose(s, k))
            .filter(|m| admissible(m))
            .collect();
        if candidates.is_empty() {
            return if can_stop {
                Ok(ExplaineeAction::Stop)
            } else {
                Err(AgentError::NoLegalMove)
            };
        }
        let weights: Vec<f64> = candidates.iter().map(|m| self.policy.weight(m.kind)).collect();
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 {
            let mut x = self.rng.gen::<f64>() * total;
            let mut idx = weights.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                if *w > 0.0 && x < *w {
                    idx = i;
                    break;
                }
                x -= w;
            }
            // float leftovers must not land on a zero-weight tail entry
            while weights[idx] == 0.0 {
                idx -= 1;
            }
            idx
        } else if can_stop {
            return Ok(ExplaineeAction::Stop);
        } else {
            self.rng.gen_range(0..candidates.len())
        };
        Ok(ExplaineeAction::Move(
            candidates.into_iter().nth(pick).expect("index in range"),
        ))
    }

    fn compose(&mut self, s: &SessionState, kind: MoveKind) -> Move {
        let topic = match s.open_topic() {
            Some(t) => t.clone(),
            None => self.fresh_topic(s),
        };
        let m = Move::new(Actor::Q, kind, topic.clone());
        match kind {
            MoveKind::BeginQuestion | MoveKind::ReturnQuestion => {
                let subtype =
                    [QuestionSubtype::Why, QuestionSubtype::How, QuestionSubtype::What][self.rng.gen_range(0..3)];
                let word = match subtype {
                    QuestionSubtype::Why => "Why",
                    QuestionSubtype::How => "How",
                    QuestionSubtype::What => "What about",
                };
                m.with_subtype(subtype).with_content(format!("{word} {topic}?"))
            }
            MoveKind::Clarify => m.with_content(format!("I mean {topic}.")),
            MoveKind::Affirm | MoveKind::AffirmArgument => m.with_content("OK."),
            MoveKind::BeginArgument | MoveKind::CounterArgument => {
                let claim = self
                    .any_topic()
                    .map_or_else(|| "something else".to_string(), |t| t.to_string());
                m.with_content(format!("No, I think it is {claim}."))
            }
            _ => m,
        }
    }

    fn any_topic(&mut self) -> Option<Topic> {
        if self.topics.is_empty() || self.rng.gen_bool(0.25) {
            return None;
        }
        Some(self.topics[self.rng.gen_range(0..self.topics.len())].clone())
    }

    fn fresh_topic(&mut self, s: &SessionState) -> Topic {
        if self.topics.is_empty() {
            return default_topic(s);
        }
        let choices: Vec<&Topic> = self
            .topics
            .iter()
            .filter(|t| s.last_closed_topic() != Some(*t))
            .collect();
        // one slot for a topic the explainer knows nothing about
        let slot = self.rng.gen_range(0..=choices.len());
        match choices.get(slot) {
            Some(t) => (*t).clone(),
            None => {
                self.unknown_topics += 1;
                Topic::new(format!("unknown-{}", self.unknown_topics)).expect("non-empty")
            }
        }
    }
}

/// One explainee step with a generator seeded from the policy seed and the
/// history length, so equal `(s, policy)` give equal results.
pub fn random_explainee_step(s: &SessionState, policy: &ExplaineePolicy) -> Result<ExplaineeAction, AgentError> {
    let mut p = policy.clone();
    p.seed = policy.seed ^ (s.history().len() as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    RandomExplainee::new(p, Vec::new()).step(s, &|_| true)
}

/// Fewest moves (by either party, about the open topic) that make `s`
/// terminal-eligible. Returns `usize::MAX` beyond a small search horizon.
pub fn moves_to_termination(s: &SessionState) -> usize {
    const HORIZON: usize = 4;
    let mut queue = VecDeque::from([(s.clone(), 0usize)]);
    while let Some((cur, depth)) = queue.pop_front() {
        if cur.is_terminal_eligible() {
            return depth;
        }
        if depth == HORIZON {
            continue;
        }
        let topic = default_topic(&cur);
        for (actor, kind) in cur.legal_moves() {
            let mut next = cur.clone();
            if next.apply(&Move::new(actor, kind, topic.clone())).is_ok() {
                queue.push_back((next, depth + 1));
            }
        }
    }
    usize::MAX
}

/// Plays the random explainee against the scripted explainer until the
/// explainee stops or `max_moves` moves have been made. The returned trace
/// always ends terminal-eligible: every move keeps a termination point within
/// the remaining budget.
pub fn simulate_dialogue(
    kb: &[ExplanandumRecord],
    policy: &ExplaineePolicy,
    max_moves: usize,
) -> Result<Vec<Move>, AgentError> {
    if max_moves < 3 {
        return Err(AgentError::BudgetTooSmall(max_moves));
    }
    policy.validate()?;
    let topics = kb.iter().map(|r| r.topic.clone()).collect();
    let mut explainee = RandomExplainee::new(policy.clone(), topics);
    let mut s = SessionState::default();

    while s.history().len() < max_moves {
        let remaining = max_moves - s.history().len();
        let fits = |m: &Move, s: &SessionState| {
            let mut next = s.clone();
            next.apply(m).is_ok() && moves_to_termination(&next) < remaining
        };
        let m = if explainer_to_move(&s) {
            let m = ScriptedExplainer::default().step(&s, kb)?;
            if fits(&m, &s) {
                m
            } else {
                ScriptedExplainer { allow_clarify: false }.step(&s, kb)?
            }
        } else {
            match explainee.step(&s, &|m| fits(m, &s))? {
                ExplaineeAction::Stop => break,
                ExplaineeAction::Move(m) => m,
            }
        };
        s.apply(&m).expect("agents only emit legal moves");
    }
    debug_assert!(s.is_terminal_eligible());
    Ok(s.history().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{format_tags, validate_trace};
    use crate::protocol::{apply_move, initial_session};

    fn topic(t: &str) -> Topic {
        Topic::new(t).unwrap()
    }

    fn kb() -> Vec<ExplanandumRecord> {
        vec![
            ExplanandumRecord::new(
                topic("pittsburgh"),
                "Opponent will try to extend the path from Pittsburgh to Houston",
            )
            .with_gaze("the opponent has been repeatedly gazing at that path")
            .with_causal_history("the opponent has already built some paths along that route"),
            ExplanandumRecord::new(
                topic("el-paso"),
                "Opponent will build from Little Rock to Dallas to El Paso",
            ),
        ]
    }

    fn after(moves: &[(Actor, MoveKind)], t: &Topic) -> SessionState {
        moves.iter().fold(initial_session(), |s, &(a, k)| {
            apply_move(&s, &Move::new(a, k, t.clone())).unwrap()
        })
    }

    #[test]
    fn explains_with_prediction_then_evidence() {
        let s = after(&[(Actor::Q, MoveKind::BeginQuestion)], &topic("pittsburgh"));
        let m = scripted_explainer_step(&s, &kb()).unwrap();
        assert_eq!(m.kind, MoveKind::Explain);
        let c = m.content.unwrap();
        assert!(c.starts_with("Opponent will try"));
        let gaze = c.find("repeatedly gazing at that path").unwrap();
        let causal = c.find("already built").unwrap();
        assert!(gaze < causal);
    }

    #[test]
    fn unknown_topic_gets_failure_response() {
        let s = after(&[(Actor::Q, MoveKind::BeginQuestion)], &topic("denver"));
        let m = scripted_explainer_step(&s, &kb()).unwrap();
        assert_eq!(m.kind, MoveKind::Explain);
        assert_eq!(m.content.as_deref(), Some(UNABLE_TO_ANSWER));
        let next = apply_move(&s, &m).unwrap();
        assert!(next.is_terminal_eligible());
    }

    #[test]
    fn near_miss_asks_back() {
        let s = after(&[(Actor::Q, MoveKind::BeginQuestion)], &topic("Pittsburgh"));
        let m = scripted_explainer_step(&s, &kb()).unwrap();
        assert_eq!(m.kind, MoveKind::ReturnQuestion);
        let m = ScriptedExplainer { allow_clarify: false }.step(&s, &kb()).unwrap();
        assert_eq!(m.content.as_deref(), Some(UNABLE_TO_ANSWER));
    }

    #[test]
    fn affirms_matching_argument_and_counters_otherwise() {
        let t = topic("pittsburgh");
        let s = after(
            &[(Actor::Q, MoveKind::BeginQuestion), (Actor::E, MoveKind::Explain)],
            &t,
        );
        let with = |text: &str| {
            let m = Move::new(Actor::Q, MoveKind::BeginArgument, t.clone()).with_content(text);
            apply_move(&s, &m).unwrap()
        };
        let m = scripted_explainer_step(&with("No. He is going to El Paso."), &kb()).unwrap();
        assert_eq!(m.kind, MoveKind::AffirmArgument);
        let m = scripted_explainer_step(&with("No. He is going to Denver."), &kb()).unwrap();
        assert_eq!(m.kind, MoveKind::CounterArgument);
        assert!(m.content.unwrap().contains("Pittsburgh to Houston"));
    }

    #[test]
    fn refuses_out_of_turn() {
        let t = topic("p");
        let s = after(
            &[
                (Actor::Q, MoveKind::BeginQuestion),
                (Actor::E, MoveKind::ReturnQuestion),
            ],
            &t,
        );
        assert_eq!(scripted_explainer_step(&s, &kb()), Err(AgentError::NotExplainerTurn));
    }

    #[test]
    fn degenerate_policy_affirms() {
        let t = topic("p");
        let s = after(
            &[(Actor::Q, MoveKind::BeginQuestion), (Actor::E, MoveKind::Explain)],
            &t,
        );
        let policy = ExplaineePolicy::new([(MoveKind::Affirm, 1.0)], 0.0, 7).unwrap();
        match random_explainee_step(&s, &policy).unwrap() {
            ExplaineeAction::Move(m) => assert_eq!((m.actor, m.kind), (Actor::Q, MoveKind::Affirm)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn explainee_step_is_deterministic() {
        let t = topic("p");
        let s = after(
            &[(Actor::Q, MoveKind::BeginQuestion), (Actor::E, MoveKind::Explain)],
            &t,
        );
        let policy = ExplaineePolicy::uniform(0.3, 99);
        assert_eq!(random_explainee_step(&s, &policy), random_explainee_step(&s, &policy));
    }

    #[test]
    fn policy_validation() {
        assert!(ExplaineePolicy::new([(MoveKind::Affirm, 0.0)], 0.5, 0).is_err());
        assert!(ExplaineePolicy::new([(MoveKind::Affirm, -1.0)], 0.5, 0).is_err());
        assert!(ExplaineePolicy::new([(MoveKind::Affirm, 1.0)], 1.5, 0).is_err());
    }

    #[test]
    fn affirm_heavy_policy_yields_short_game() {
        let policy = ExplaineePolicy::new([(MoveKind::BeginQuestion, 1.0), (MoveKind::Affirm, 1.0)], 0.0, 3).unwrap();
        let kb = vec![ExplanandumRecord::new(topic("p"), "it goes west")];
        let trace = simulate_dialogue(&kb, &policy, 10).unwrap();
        let shape = format_tags(&trace);
        assert!(shape.starts_with("[BQ"), "{shape}");
        assert!(shape.ends_with("[E][AF]"), "{shape}");
    }

    #[test]
    fn budget_minimum() {
        assert_eq!(
            simulate_dialogue(&kb(), &ExplaineePolicy::uniform(0.1, 0), 2),
            Err(AgentError::BudgetTooSmall(2))
        );
    }

    #[test]
    fn simulation_is_reproducible_and_complete() {
        for seed in 0..200 {
            let policy = ExplaineePolicy::uniform(0.2, seed);
            let a = simulate_dialogue(&kb(), &policy, 3 + (seed as usize % 12)).unwrap();
            let b = simulate_dialogue(&kb(), &policy, 3 + (seed as usize % 12)).unwrap();
            assert_eq!(a, b);
            let r = validate_trace(&a);
            assert!(r.valid && r.complete, "seed {seed}: {}", format_tags(&a));
        }
    }

    #[test]
    fn kb_loading() {
        let kb = load_knowledge_base(r#"[{"topic":"p","prediction":"x","gaze_evidence":"g"}]"#).unwrap();
        assert_eq!(kb[0].explanation(), "x; g");
        assert!(load_knowledge_base(r#"[{"topic":"p","prediction":" "}]"#).is_err());
        assert!(load_knowledge_base(r#"[{"topic":"","prediction":"x"}]"#).is_err());
    }
}
