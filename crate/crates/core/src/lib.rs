//! Shared data model and the generic two-way pushdown parsing engine.
//!
//! Content injection exploits share one root cause: untrusted bytes that
//! make a downstream parser switch context. This crate houses the pieces
//! every language module builds on: byte spans and tainted content, the
//! parsing-state catalog, parse traces with transition events, verdicts,
//! and the engine that drives a deterministic automaton over raw bytes
//! with a stack and a two-way read head.

mod engine;
mod span;
mod state;
mod trace;

pub use engine::{
    run_automaton, AutomatonSpec, BraceKind, EngineConfig, EngineError, HeadAction, StackAction,
    StackSym, Step,
};
pub use span::{coalesce, ByteSpan, ContentKind, SpanError, TaintedContent};
pub use state::{Catalog, ContextState, Language, Role, StateId};
pub use trace::{Decision, ParseTrace, TransitionEvent, Verdict};
