//! Automaton specification for shell commands.
//!
//! Distinguishes command words, operand/argument words, quoting,
//! substitutions, groups, redirections and control operators, following the
//! POSIX sh token rules plus the Bash quoting and substitution forms.
//! Quotes, backticks, parentheses and braces are tracked on the stack; a
//! command that ends with open nesting finalizes into `Syntax_Error`.
//!
//! Event granularity is what makes single-token taint benign: bytes within
//! one word or quoted string never produce events, and flowing from a
//! separator into the argument word it delimits is a silent continuation.
//! Leaving a word (whitespace, control operators, redirections, quotes,
//! substitutions) and entering a fresh command word are context switches.

use ctxaudit_core::{
    AutomatonSpec, Catalog, Language, StackAction, StackSym, StateId, Step,
};
use std::sync::OnceLock;

/// Resolved catalog ids for the shell states.
#[derive(Debug)]
pub struct ShellSpec {
    start: StateId,
    operand: StateId,
    separator: StateId,
    single_quoted: StateId,
    double_quoted: StateId,
    param_ref: StateId,
    dollar_sub: StateId,
    backtick_sub: StateId,
    group: StateId,
    redirection: StateId,
    control_op: StateId,
    comment: StateId,
    error: StateId,
}

/// The shared shell automaton; entry state is `SH_Start`.
pub fn shell_spec() -> &'static ShellSpec {
    static SPEC: OnceLock<ShellSpec> = OnceLock::new();
    SPEC.get_or_init(|| {
        let cat = Catalog::shared();
        let sh = |name| cat.require(Language::Shell, name);
        ShellSpec {
            start: sh("SH_Start"),
            operand: sh("Operand"),
            separator: sh("Word_Separator"),
            single_quoted: sh("Single_Quoted"),
            double_quoted: sh("Double_Quoted"),
            param_ref: sh("Parameter_Reference"),
            dollar_sub: sh("Dollar_Substitution"),
            backtick_sub: sh("Backtick_Substitution"),
            group: sh("Group"),
            redirection: sh("Redirection"),
            control_op: sh("Control_Operator"),
            comment: sh("Comment"),
            error: sh("Syntax_Error"),
        }
    })
}

/// Per-run registers: escape pending, word progress, parameter context.
#[derive(Debug, Clone, Default)]
pub struct ShScratch {
    escape: bool,
    /// SH_Start has consumed a word byte (a later `#` is then literal).
    word_started: bool,
    /// Group state was entered through its opening delimiter.
    group_open: bool,
    /// Where a `$reference` returns when the name ends.
    param_return: Option<StateId>,
    /// Next byte is the first after `$`.
    param_first: bool,
}

fn is_blank(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\r')
}

fn is_control(b: u8) -> bool {
    matches!(b, b';' | b'|' | b'&' | b'\n')
}

fn is_redirect(b: u8) -> bool {
    matches!(b, b'<' | b'>')
}

fn is_var_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

impl ShellSpec {
    fn quote_open(&self, byte: u8, resume: StateId) -> Step<ShScratch> {
        let (state, double) = if byte == b'"' {
            (self.double_quoted, true)
        } else {
            (self.single_quoted, false)
        };
        Step::advance(state, ShScratch::default())
            .with_stack(StackAction::Push(StackSym::ShQuote { double, resume }))
    }

    fn param_open(&self, resume: StateId) -> Step<ShScratch> {
        let scratch = ShScratch {
            param_return: Some(resume),
            param_first: true,
            ..ShScratch::default()
        };
        Step::advance(self.param_ref, scratch)
    }

    fn backtick(&self, stack_top: Option<&StackSym>, resume: StateId) -> Step<ShScratch> {
        match stack_top {
            Some(StackSym::ShSub { backtick: true, resume }) => {
                Step::advance(*resume, ShScratch { word_started: true, ..Default::default() })
                    .with_stack(StackAction::Pop)
            }
            _ => Step::advance(self.backtick_sub, ShScratch::default())
                .with_stack(StackAction::Push(StackSym::ShSub { backtick: true, resume })),
        }
    }

    fn close_paren(&self, stack_top: Option<&StackSym>) -> Step<ShScratch> {
        match stack_top {
            Some(StackSym::ShSub { backtick: false, resume }) => {
                Step::advance(*resume, ShScratch { word_started: true, ..Default::default() })
                    .with_stack(StackAction::Pop)
            }
            Some(StackSym::ShGroup) => {
                Step::advance(self.group, ShScratch::default()).with_stack(StackAction::Pop)
            }
            _ => Step::advance(self.error, ShScratch::default()),
        }
    }

    /// Transitions shared by the word states (`SH_Start`, `Operand`).
    fn word_state(
        &self,
        state: StateId,
        scratch: &ShScratch,
        stack_top: Option<&StackSym>,
        byte: u8,
    ) -> Step<ShScratch> {
        let started = ShScratch { word_started: true, ..Default::default() };
        if scratch.escape {
            return Step::advance(state, started);
        }
        match byte {
            b'\\' => Step::advance(state, ShScratch { escape: true, word_started: true, ..Default::default() }),
            b if is_blank(b) => {
                if state == self.start && !scratch.word_started {
                    Step::advance(state, ShScratch::default())
                } else {
                    Step::advance(self.separator, ShScratch::default())
                }
            }
            b if is_control(b) => Step::advance(self.control_op, ShScratch::default()),
            b if is_redirect(b) => Step::advance(self.redirection, ShScratch::default()),
            b'\'' | b'"' => self.quote_open(byte, state),
            b'`' => self.backtick(stack_top, state),
            b'$' => self.param_open(state),
            b'(' => Step::advance(self.group, ShScratch { group_open: true, ..Default::default() })
                .with_stack(StackAction::Push(StackSym::ShGroup)),
            b')' => self.close_paren(stack_top),
            b'#' if state == self.start && !scratch.word_started => {
                Step::advance(self.comment, ShScratch::default())
            }
            _ => Step::advance(state, started),
        }
    }

    /// Fresh command context: interiors of `$(..)`, backticks and groups,
    /// and everything after a control operator.
    fn command_context(
        &self,
        state: StateId,
        stack_top: Option<&StackSym>,
        byte: u8,
        close: Option<u8>,
    ) -> Step<ShScratch> {
        if let Some(c) = close {
            if byte == c {
                return match c {
                    b')' | b'`' => match stack_top {
                        Some(StackSym::ShSub { resume, .. }) => Step::advance(
                            *resume,
                            ShScratch { word_started: true, ..Default::default() },
                        )
                        .with_stack(StackAction::Pop),
                        _ => Step::advance(self.error, ShScratch::default()),
                    },
                    _ => Step::advance(self.error, ShScratch::default()),
                };
            }
        }
        match byte {
            b if is_blank(b) => Step::advance(state, ShScratch::default()),
            b if is_control(b) => Step::advance(self.control_op, ShScratch::default()),
            b if is_redirect(b) => Step::advance(self.redirection, ShScratch::default()),
            b'\\' => Step::advance(self.start, ShScratch { escape: true, word_started: true, ..Default::default() }),
            b'\'' | b'"' => self.quote_open(byte, self.start),
            b'`' => self.backtick(stack_top, self.start),
            b'$' => self.param_open(self.start),
            b'(' => {
                // arithmetic or nested subshell; treated as another
                // substitution frame so the closing parens stay balanced
                if state == self.dollar_sub {
                    Step::advance(state, ShScratch::default())
                        .with_stack(StackAction::Push(StackSym::ShSub { backtick: false, resume: self.start }))
                } else {
                    Step::advance(self.group, ShScratch { group_open: true, ..Default::default() })
                        .with_stack(StackAction::Push(StackSym::ShGroup))
                }
            }
            b')' => self.close_paren(stack_top),
            b'{' => Step::advance(self.group, ShScratch { group_open: true, ..Default::default() })
                .with_stack(StackAction::Push(StackSym::ShGroup)),
            b'}' => match stack_top {
                Some(StackSym::ShGroup) => {
                    Step::advance(self.group, ShScratch::default()).with_stack(StackAction::Pop)
                }
                _ => Step::advance(self.start, ShScratch { word_started: true, ..Default::default() }),
            },
            b'#' => Step::advance(self.comment, ShScratch::default()),
            _ => Step::advance(self.start, ShScratch { word_started: true, ..Default::default() }),
        }
    }
}

impl AutomatonSpec for ShellSpec {
    type Scratch = ShScratch;

    fn entry(&self) -> StateId {
        self.start
    }

    fn step(
        &self,
        state: StateId,
        scratch: &ShScratch,
        stack_top: Option<&StackSym>,
        byte: u8,
    ) -> Step<ShScratch> {
        if state == self.start || state == self.operand {
            return self.word_state(state, scratch, stack_top, byte);
        }

        if state == self.separator {
            return match byte {
                b if is_blank(b) => Step::advance(state, ShScratch::default()),
                b if is_control(b) => Step::advance(self.control_op, ShScratch::default()),
                b if is_redirect(b) => Step::advance(self.redirection, ShScratch::default()),
                b'\\' => Step::advance(self.operand, ShScratch { escape: true, ..Default::default() }).silent(),
                b'\'' | b'"' => self.quote_open(byte, self.operand),
                b'`' => self.backtick(stack_top, self.operand),
                b'$' => self.param_open(self.operand),
                b'(' | b'{' => {
                    Step::advance(self.group, ShScratch { group_open: true, ..Default::default() })
                        .with_stack(StackAction::Push(StackSym::ShGroup))
                }
                b')' => self.close_paren(stack_top),
                b'}' => match stack_top {
                    Some(StackSym::ShGroup) => Step::advance(self.group, ShScratch::default())
                        .with_stack(StackAction::Pop),
                    _ => Step::advance(self.operand, ShScratch::default()).silent(),
                },
                b'#' => Step::advance(self.comment, ShScratch::default()),
                // entering the argument word is a continuation, not a switch
                _ => Step::advance(self.operand, ShScratch::default()).silent(),
            };
        }

        if state == self.control_op {
            return match byte {
                b if is_blank(b) || is_control(b) => Step::advance(state, ShScratch::default()),
                b if is_redirect(b) => Step::advance(self.redirection, ShScratch::default()),
                _ => self.command_context(state, stack_top, byte, None),
            };
        }

        if state == self.single_quoted {
            return match byte {
                b'\'' => match stack_top {
                    Some(StackSym::ShQuote { resume, .. }) => Step::advance(
                        *resume,
                        ShScratch { word_started: true, ..Default::default() },
                    )
                    .with_stack(StackAction::Pop),
                    _ => Step::advance(self.error, ShScratch::default()),
                },
                _ => Step::advance(state, ShScratch::default()),
            };
        }

        if state == self.double_quoted {
            if scratch.escape {
                return Step::advance(state, ShScratch::default());
            }
            return match byte {
                b'\\' => Step::advance(state, ShScratch { escape: true, ..Default::default() }),
                b'"' => match stack_top {
                    Some(StackSym::ShQuote { resume, .. }) => Step::advance(
                        *resume,
                        ShScratch { word_started: true, ..Default::default() },
                    )
                    .with_stack(StackAction::Pop),
                    _ => Step::advance(self.error, ShScratch::default()),
                },
                b'$' => self.param_open(self.double_quoted),
                b'`' => self.backtick(stack_top, self.double_quoted),
                _ => Step::advance(state, ShScratch::default()),
            };
        }

        if state == self.param_ref {
            if matches!(stack_top, Some(StackSym::ShParam { .. })) {
                return match (byte, stack_top) {
                    (b'}', Some(StackSym::ShParam { resume })) => Step::advance(
                        *resume,
                        ShScratch { word_started: true, ..Default::default() },
                    )
                    .with_stack(StackAction::Pop),
                    _ => Step::advance(state, scratch.clone()),
                };
            }
            let resume = scratch.param_return.unwrap_or(self.operand);
            return match byte {
                b'{' if scratch.param_first => Step::advance(state, ShScratch::default())
                    .with_stack(StackAction::Push(StackSym::ShParam { resume })),
                b'(' if scratch.param_first => Step::advance(self.dollar_sub, ShScratch::default())
                    .with_stack(StackAction::Push(StackSym::ShSub { backtick: false, resume })),
                b if is_var_char(b) => Step::advance(
                    state,
                    ShScratch { param_return: scratch.param_return, ..Default::default() },
                ),
                b'?' | b'@' | b'*' | b'#' | b'$' | b'!' | b'-' if scratch.param_first => {
                    Step::advance(state, ShScratch::default())
                }
                _ => Step::revisit(resume, ShScratch { word_started: true, ..Default::default() }),
            };
        }

        if state == self.dollar_sub || state == self.backtick_sub {
            let close = if state == self.dollar_sub { b')' } else { b'`' };
            return self.command_context(state, stack_top, byte, Some(close));
        }

        if state == self.group {
            if scratch.group_open {
                return self.command_context(state, stack_top, byte, None);
            }
            return match byte {
                b if is_blank(b) => Step::advance(self.separator, ShScratch::default()),
                b if is_control(b) => Step::advance(self.control_op, ShScratch::default()),
                b if is_redirect(b) => Step::advance(self.redirection, ShScratch::default()),
                b'\'' | b'"' => self.quote_open(byte, self.operand),
                b'`' => self.backtick(stack_top, self.operand),
                b'$' => self.param_open(self.operand),
                b')' => self.close_paren(stack_top),
                b'}' => match stack_top {
                    Some(StackSym::ShGroup) => {
                        Step::advance(state, ShScratch::default()).with_stack(StackAction::Pop)
                    }
                    _ => Step::advance(self.operand, ShScratch::default()).silent(),
                },
                b'#' => Step::advance(self.comment, ShScratch::default()),
                _ => Step::advance(self.operand, ShScratch::default()).silent(),
            };
        }

        if state == self.redirection {
            return match byte {
                b if is_redirect(b) || b == b'&' => Step::advance(state, ShScratch::default()),
                b if is_blank(b) => Step::advance(self.separator, ShScratch::default()),
                b if is_control(b) => Step::advance(self.control_op, ShScratch::default()),
                b'\'' | b'"' => self.quote_open(byte, self.operand),
                b'$' => self.param_open(self.operand),
                b'`' => self.backtick(stack_top, self.operand),
                b'(' => Step::advance(self.group, ShScratch { group_open: true, ..Default::default() })
                    .with_stack(StackAction::Push(StackSym::ShGroup)),
                // the redirection target is an ordinary word
                _ => Step::advance(self.operand, ShScratch::default()).silent(),
            };
        }

        if state == self.comment {
            return if byte == b'\n' {
                Step::advance(self.control_op, ShScratch::default())
            } else {
                Step::advance(state, ShScratch::default())
            };
        }

        // Syntax_Error resynchronizes at the next control operator
        if byte == b';' || byte == b'\n' || byte == b'|' || byte == b'&' {
            Step::advance(self.control_op, ShScratch::default())
        } else {
            Step::advance(self.error, ShScratch::default())
        }
    }

    fn error_state(&self, _: StateId) -> StateId {
        self.error
    }

    fn finalize(
        &self,
        state: StateId,
        _: &ShScratch,
        stack: &[StackSym],
    ) -> Option<StateId> {
        if stack.is_empty() || state == self.error {
            None
        } else {
            Some(self.error)
        }
    }
}
