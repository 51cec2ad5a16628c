//! Parse traces, transition events and verdicts.

use crate::engine::EngineError;
use crate::state::StateId;

/// A context switch: the byte at `index` moved the automaton between two
/// catalog states. Self-loops are not events.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitionEvent {
    /// Byte offset whose consumption caused the transition.
    pub index: usize,
    pub from: StateId,
    pub to: StateId,
    /// Set when `to` has the error role; parse errors count as detections.
    pub is_error: bool,
}

/// Result of one automaton run: the final per-byte state labels (after all
/// revisits settle), the ordered transition events, and the total step count
/// including revisits.
#[derive(Debug, Clone, Default)]
pub struct ParseTrace {
    labels: Vec<StateId>,
    events: Vec<TransitionEvent>,
    steps: u64,
}

impl ParseTrace {
    pub(crate) fn new(labels: Vec<StateId>, events: Vec<TransitionEvent>, steps: u64) -> ParseTrace {
        debug_assert!(events.windows(2).all(|w| w[0].index <= w[1].index));
        ParseTrace { labels, events, steps }
    }

    /// Final state label of the byte at `index`.
    pub fn state_at(&self, index: usize) -> Result<StateId, EngineError> {
        self.labels
            .get(index)
            .copied()
            .ok_or(EngineError::OutOfRange { index, len: self.labels.len() })
    }

    pub fn labels(&self) -> &[StateId] {
        &self.labels
    }

    pub fn events(&self) -> &[TransitionEvent] {
        &self.events
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Number of bytes this trace covers.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Detection decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Benign,
    Malicious,
}

/// Benign/malicious decision with the triggering event as evidence.
/// Evidence is present iff the decision is malicious, and its index falls
/// inside a taint span of the analyzed content.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub decision: Decision,
    pub evidence: Option<TransitionEvent>,
    pub bytes_parsed: usize,
}

impl Verdict {
    pub fn benign(bytes_parsed: usize) -> Verdict {
        Verdict { decision: Decision::Benign, evidence: None, bytes_parsed }
    }

    pub fn malicious(evidence: TransitionEvent, bytes_parsed: usize) -> Verdict {
        Verdict { decision: Decision::Malicious, evidence: Some(evidence), bytes_parsed }
    }

    pub fn is_malicious(&self) -> bool {
        self.decision == Decision::Malicious
    }
}
