//! Trace formats and validation.

mod tags;
mod transcript;
mod validate;

pub use tags::{
    auto_topic, default_actor, default_topic, format_tags, kind_of_tag, parse_tags, resolve_moves, tag_of, Tag,
    TagError, TagSequence,
};
pub use transcript::{
    codes_to_moves, parse_coded_corpus, parse_coded_transcript, BoundaryMode, Code, CodedDialogue, DialogueType,
    Segment, TranscriptError, UnmappableSequence,
};
pub use validate::{
    trace_lines, validate_tags, validate_trace, validate_trace_file, FailureReason, ValidationRecord, ValidationReport,
};
