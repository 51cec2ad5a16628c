//! The generic two-way pushdown automaton engine.
//!
//! Every language module instantiates this engine with an [`AutomatonSpec`]:
//! a deterministic transition function over (current state, scratch
//! registers, stack top, input byte). The engine owns the mutable run state
//! (head position, stack, labels); specs are immutable and shared.
//!
//! The finite control of a spec is the catalog state plus a bounded scratch
//! struct (token-matcher progress, escape flags and the like). Labels and
//! events are defined on the catalog states only, so a scratch change alone
//! is a self-loop and never an event.
//!
//! Head movement is two-way: a step may consume the byte (`Advance`),
//! re-consume it in the new state (`Revisit`), or move the head back a
//! bounded distance and re-lex (`SeekBack`), in which case earlier labels are
//! rewritten; the trace reflects the final pass. Runaway revisiting is cut
//! off two ways: a per-position revisit limit forces the spec's error state
//! and resynchronizes, and a global step budget (default 8x the bytes
//! parsed) aborts the run loudly instead of diverging.

use thiserror::Error;

use crate::state::{Catalog, Language, Role, StateId};
use crate::trace::{ParseTrace, TransitionEvent};

/// Nesting symbols shared by the language specs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackSym {
    /// Marks the entry into an embedded language; the end-tag bridge unwinds
    /// to the matching frame.
    LangFrame(Language),
    Paren,
    Bracket,
    Brace(BraceKind),
    TemplateExpr,
    CssBlock,
    CssParen,
    ShQuote { double: bool, resume: StateId },
    ShSub { backtick: bool, resume: StateId },
    ShParam { resume: StateId },
    ShGroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BraceKind {
    Block,
    Object,
}

/// Stack effect of one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackAction {
    None,
    Push(StackSym),
    Pop,
    /// Pops up to and including the innermost language frame.
    PopLanguageFrame,
}

/// Head effect of one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadAction {
    /// Consume the byte; it is labeled with the post-step state.
    Advance,
    /// Re-consume the same byte in the new state.
    Revisit,
    /// Move the head back the given number of bytes and re-lex from there.
    SeekBack(usize),
}

/// One transition: target state, new scratch, stack and head effects.
#[derive(Debug, Clone)]
pub struct Step<S> {
    pub next: StateId,
    pub scratch: S,
    pub stack: StackAction,
    pub head: HeadAction,
    /// Suppresses the event for state changes a language defines as
    /// continuations rather than context switches (a shell separator flowing
    /// into the argument word it delimits). The label still changes.
    pub silent: bool,
}

impl<S> Step<S> {
    pub fn advance(next: StateId, scratch: S) -> Step<S> {
        Step { next, scratch, stack: StackAction::None, head: HeadAction::Advance, silent: false }
    }

    pub fn revisit(next: StateId, scratch: S) -> Step<S> {
        Step { next, scratch, stack: StackAction::None, head: HeadAction::Revisit, silent: false }
    }

    pub fn with_stack(mut self, action: StackAction) -> Step<S> {
        self.stack = action;
        self
    }

    pub fn silent(mut self) -> Step<S> {
        self.silent = true;
        self
    }
}

/// A deterministic language automaton the engine can run.
pub trait AutomatonSpec {
    /// Bounded per-run registers of the finite control.
    type Scratch: Default + Clone;

    fn entry(&self) -> StateId;

    /// The next step as a pure function of the current configuration and the
    /// input byte.
    fn step(
        &self,
        state: StateId,
        scratch: &Self::Scratch,
        stack_top: Option<&StackSym>,
        byte: u8,
    ) -> Step<Self::Scratch>;

    /// Error sink for the language the given state belongs to; entered when
    /// the engine forces recovery.
    fn error_state(&self, state: StateId) -> StateId;

    /// One chance to flag an inconsistent configuration when the run reached
    /// the true end of the content (open nesting, unterminated quoting).
    /// Returning a state different from `state` records an event at the last
    /// byte. Runs stopped before the end of content are never finalized.
    fn finalize(
        &self,
        state: StateId,
        scratch: &Self::Scratch,
        stack: &[StackSym],
    ) -> Option<StateId> {
        let _ = (state, scratch, stack);
        None
    }
}

/// Engine tunables. The defaults are the documented contract: budget factor
/// 8, stack cap 4096.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Global step budget as a multiple of the bytes to parse.
    pub step_budget_factor: u32,
    /// Consecutive non-advancing steps at one position before the engine
    /// forces the spec's error state.
    pub revisit_limit: u32,
    /// Maximum nesting depth; deeper pushes force the error state.
    pub stack_cap: usize,
}

impl Default for EngineConfig {
    fn default() -> EngineConfig {
        EngineConfig { step_budget_factor: 8, revisit_limit: 4, stack_cap: 4096 }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    /// The run exceeded its step budget; signals a parser loop. Carries the
    /// partial trace so deployments can decide what to do with it.
    #[error("step budget exceeded at byte {index} after {steps} steps")]
    StepBudgetExceeded { index: usize, state: StateId, steps: u64, partial: Box<ParseTrace> },
    /// The spec referenced a state that is not in the catalog.
    #[error("automaton spec references unregistered state id {0}")]
    MalformedSpec(usize),
    #[error("index {index} out of range (trace covers {len} bytes)")]
    OutOfRange { index: usize, len: usize },
}

fn set_label(labels: &mut Vec<StateId>, pos: usize, state: StateId) {
    if pos < labels.len() {
        labels[pos] = state;
    } else {
        debug_assert_eq!(pos, labels.len());
        labels.push(state);
    }
}

/// Runs `spec` over `content` from offset 0 up to (exclusive) `stop_at`,
/// or the whole content when absent. `stop_at` beyond the content length is
/// clamped.
pub fn run_automaton<S: AutomatonSpec>(
    content: &[u8],
    spec: &S,
    stop_at: Option<usize>,
    cfg: &EngineConfig,
) -> Result<ParseTrace, EngineError> {
    let catalog = Catalog::shared();
    let stop = stop_at.unwrap_or(content.len()).min(content.len());
    let budget = cfg.step_budget_factor as u64 * stop as u64;

    let mut state = spec.entry();
    if catalog.get(state).is_none() {
        return Err(EngineError::MalformedSpec(state.index()));
    }
    let mut scratch = S::Scratch::default();
    let mut stack: Vec<StackSym> = Vec::new();
    let mut labels: Vec<StateId> = Vec::with_capacity(stop);
    let mut events: Vec<TransitionEvent> = Vec::new();
    let mut steps: u64 = 0;
    let mut pos = 0usize;
    let mut stalled = 0u32;

    let push_event = |events: &mut Vec<TransitionEvent>, index: usize, from: StateId, to: StateId| {
        let is_error = catalog.get(to).map(|s| s.role == Role::Error).unwrap_or(false);
        let ev = TransitionEvent { index, from, to, is_error };
        // seek-backs and deferred decisions keep indices non-decreasing by
        // construction; insertion keeps the invariant if a spec misbehaves
        match events.last() {
            Some(last) if last.index > index => {
                let at = events.partition_point(|e| e.index <= index);
                events.insert(at, ev);
            }
            _ => events.push(ev),
        }
    };

    while pos < stop {
        steps += 1;
        if steps > budget {
            return Err(EngineError::StepBudgetExceeded {
                index: pos,
                state,
                steps,
                partial: Box::new(ParseTrace::new(labels, events, steps)),
            });
        }

        // Forced error recovery: the spec is stuck revisiting this position.
        // A spec whose error state cannot absorb the byte (same state) burns
        // steps here until the budget aborts the run.
        if stalled > cfg.revisit_limit {
            let err = spec.error_state(state);
            if catalog.get(err).is_none() {
                return Err(EngineError::MalformedSpec(err.index()));
            }
            if err == state {
                continue;
            }
            push_event(&mut events, pos, state, err);
            state = err;
            scratch = S::Scratch::default();
            set_label(&mut labels, pos, state);
            pos += 1;
            stalled = 0;
            continue;
        }

        let byte = content[pos];
        let step = spec.step(state, &scratch, stack.last(), byte);
        if catalog.get(step.next).is_none() {
            return Err(EngineError::MalformedSpec(step.next.index()));
        }

        // Stack effects; cap violations and impossible pops divert into the
        // error state rather than corrupting the run.
        let stack_ok = match step.stack {
            StackAction::None => true,
            StackAction::Push(sym) => {
                if stack.len() >= cfg.stack_cap {
                    false
                } else {
                    stack.push(sym);
                    true
                }
            }
            StackAction::Pop => stack.pop().is_some(),
            StackAction::PopLanguageFrame => loop {
                match stack.pop() {
                    Some(StackSym::LangFrame(_)) => break true,
                    Some(_) => continue,
                    None => break false,
                }
            },
        };
        if !stack_ok {
            let err = spec.error_state(state);
            if catalog.get(err).is_none() {
                return Err(EngineError::MalformedSpec(err.index()));
            }
            if err != state {
                push_event(&mut events, pos, state, err);
                state = err;
                scratch = S::Scratch::default();
            }
            set_label(&mut labels, pos, state);
            pos += 1;
            stalled = 0;
            continue;
        }

        let target = match step.head {
            HeadAction::SeekBack(k) => pos.saturating_sub(k),
            _ => pos,
        };
        if step.next != state && !step.silent {
            push_event(&mut events, target, state, step.next);
        }
        state = step.next;
        scratch = step.scratch;
        match step.head {
            HeadAction::Advance => {
                set_label(&mut labels, pos, state);
                pos += 1;
                stalled = 0;
            }
            HeadAction::Revisit => {
                stalled += 1;
            }
            HeadAction::SeekBack(_) => {
                pos = target;
                stalled += 1;
            }
        }
    }

    if stop == content.len() {
        if let Some(to) = spec.finalize(state, &scratch, &stack) {
            if catalog.get(to).is_none() {
                return Err(EngineError::MalformedSpec(to.index()));
            }
            if to != state && stop > 0 {
                push_event(&mut events, stop - 1, state, to);
            }
        }
    }

    Ok(ParseTrace::new(labels, events, steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Language;

    /// Minimal spec over two shell states: words self-loop, whitespace
    /// separates. Used to exercise the engine contract in isolation.
    struct ToySpec {
        word: StateId,
        sep: StateId,
        err: StateId,
    }

    impl ToySpec {
        fn new() -> ToySpec {
            let cat = Catalog::shared();
            ToySpec {
                word: cat.require(Language::Shell, "SH_Start"),
                sep: cat.require(Language::Shell, "Word_Separator"),
                err: cat.require(Language::Shell, "Syntax_Error"),
            }
        }
    }

    impl AutomatonSpec for ToySpec {
        type Scratch = ();

        fn entry(&self) -> StateId {
            self.word
        }

        fn step(&self, state: StateId, _: &(), _: Option<&StackSym>, byte: u8) -> Step<()> {
            let next = if byte == b' ' { self.sep } else { self.word };
            let _ = state;
            Step::advance(next, ())
        }

        fn error_state(&self, _: StateId) -> StateId {
            self.err
        }
    }

    /// Spec that revisits forever: exercises forced recovery and the budget.
    struct LoopSpec {
        state: StateId,
        err: StateId,
        recover: bool,
    }

    impl AutomatonSpec for LoopSpec {
        type Scratch = ();

        fn entry(&self) -> StateId {
            self.state
        }

        fn step(&self, state: StateId, _: &(), _: Option<&StackSym>, _: u8) -> Step<()> {
            if self.recover {
                // always pulls toward its home state, then spins
                Step::revisit(self.state, ())
            } else {
                Step::revisit(state, ())
            }
        }

        fn error_state(&self, state: StateId) -> StateId {
            if self.recover {
                self.err
            } else {
                state // refuses to recover; only the budget stops it
            }
        }
    }

    #[test]
    fn empty_input_gives_empty_trace() {
        let trace = run_automaton(b"", &ToySpec::new(), None, &EngineConfig::default()).unwrap();
        assert_eq!(trace.len(), 0);
        assert_eq!(trace.events().len(), 0);
        assert_eq!(trace.steps(), 0);
    }

    #[test]
    fn self_loops_are_not_events() {
        let spec = ToySpec::new();
        let trace = run_automaton(b"abc", &spec, None, &EngineConfig::default()).unwrap();
        assert_eq!(trace.len(), 3);
        assert!(trace.events().is_empty());
        assert_eq!(trace.steps(), 3);
    }

    #[test]
    fn transitions_become_indexed_events() {
        let spec = ToySpec::new();
        let trace = run_automaton(b"ab cd", &spec, None, &EngineConfig::default()).unwrap();
        let ev: Vec<(usize, StateId, StateId)> =
            trace.events().iter().map(|e| (e.index, e.from, e.to)).collect();
        assert_eq!(ev, vec![(2, spec.word, spec.sep), (3, spec.sep, spec.word)]);
        assert_eq!(trace.state_at(2).unwrap(), spec.sep);
    }

    #[test]
    fn stop_at_limits_the_run() {
        let spec = ToySpec::new();
        let trace = run_automaton(b"ab cd", &spec, Some(2), &EngineConfig::default()).unwrap();
        assert_eq!(trace.len(), 2);
        assert!(trace.events().is_empty());
        // beyond the content length it clamps
        let trace = run_automaton(b"ab", &spec, Some(10), &EngineConfig::default()).unwrap();
        assert_eq!(trace.len(), 2);
    }

    #[test]
    fn state_at_out_of_range() {
        let spec = ToySpec::new();
        let trace = run_automaton(b"ab", &spec, None, &EngineConfig::default()).unwrap();
        assert!(matches!(trace.state_at(2), Err(EngineError::OutOfRange { index: 2, len: 2 })));
    }

    #[test]
    fn revisit_loop_is_forced_into_error_state() {
        let cat = Catalog::shared();
        let spec = LoopSpec {
            state: cat.require(Language::Shell, "SH_Start"),
            err: cat.require(Language::Shell, "Syntax_Error"),
            recover: true,
        };
        let trace = run_automaton(b"xy", &spec, None, &EngineConfig::default()).unwrap();
        assert_eq!(trace.len(), 2);
        assert!(trace.labels().iter().all(|&l| l == spec.err));
        let errs: Vec<usize> =
            trace.events().iter().filter(|e| e.is_error).map(|e| e.index).collect();
        assert_eq!(errs, vec![0, 1]);
    }

    #[test]
    fn unrecovered_loop_exhausts_the_budget() {
        let cat = Catalog::shared();
        let spec = LoopSpec {
            state: cat.require(Language::Shell, "SH_Start"),
            err: cat.require(Language::Shell, "Syntax_Error"),
            recover: false,
        };
        let err = run_automaton(b"xy", &spec, None, &EngineConfig::default()).unwrap_err();
        match err {
            EngineError::StepBudgetExceeded { index, steps, .. } => {
                assert_eq!(index, 0);
                assert_eq!(steps, 17); // 8 * 2 bytes + the step that tripped
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn unregistered_state_is_malformed_spec() {
        struct BadSpec;
        impl AutomatonSpec for BadSpec {
            type Scratch = ();
            fn entry(&self) -> StateId {
                StateId::from_index(60_000)
            }
            fn step(&self, _: StateId, _: &(), _: Option<&StackSym>, _: u8) -> Step<()> {
                unreachable!()
            }
            fn error_state(&self, s: StateId) -> StateId {
                s
            }
        }
        assert!(matches!(
            run_automaton(b"x", &BadSpec, None, &EngineConfig::default()),
            Err(EngineError::MalformedSpec(60_000))
        ));
    }

    #[test]
    fn stack_cap_forces_error_state() {
        struct PushSpec {
            word: StateId,
            err: StateId,
        }
        impl AutomatonSpec for PushSpec {
            type Scratch = ();
            fn entry(&self) -> StateId {
                self.word
            }
            fn step(&self, _: StateId, _: &(), _: Option<&StackSym>, _: u8) -> Step<()> {
                Step::advance(self.word, ()).with_stack(StackAction::Push(StackSym::Paren))
            }
            fn error_state(&self, _: StateId) -> StateId {
                self.err
            }
        }
        let cat = Catalog::shared();
        let spec = PushSpec {
            word: cat.require(Language::Shell, "SH_Start"),
            err: cat.require(Language::Shell, "Syntax_Error"),
        };
        let cfg = EngineConfig { stack_cap: 8, ..EngineConfig::default() };
        let trace = run_automaton(&[b'('; 16], &spec, None, &cfg).unwrap();
        let first_err = trace.events().iter().find(|e| e.is_error).expect("cap error");
        assert_eq!(first_err.index, 8);
    }
}
