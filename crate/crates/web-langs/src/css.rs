//! CSS tokenization states: selectors, declaration blocks, property names
//! and values, strings, url tokens, comments and at-rules. Declaration-block
//! braces are tracked on the stack; a raw newline inside a string is the
//! tokenizer's unterminated-string error.

use crate::{guard_literal, WebScratch, WebSpec};
use ctxaudit_core::{StackAction, StackSym, StateId, Step};

const END_TAG: &[u8] = b"style";

fn is_ws(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n' | b'\r' | 0x0c)
}

fn is_name_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_' || b == b'-' || b >= 0x80
}

pub(crate) fn step(
    spec: &WebSpec,
    state: StateId,
    scratch: &WebScratch,
    stack_top: Option<&StackSym>,
    byte: u8,
) -> Step<WebScratch> {
    let c = &spec.css;

    if let Some(step) = guard_literal(spec, state, scratch, byte, END_TAG) {
        return step;
    }

    let string = |ret: StateId| {
        let s = WebScratch { css_return: Some(ret), css_quote: byte, ..WebScratch::default() };
        Step::advance(c.string, s)
    };

    // comment opener is `/` `*`; a lone `/` stays put until decided
    let slash_pending = scratch.css_slash;
    let comment = |ret: StateId| {
        let s = WebScratch { css_return: Some(ret), ..WebScratch::default() };
        Step::advance(c.comment, s)
    };

    if state == c.start {
        if slash_pending && byte == b'*' {
            return comment(c.start);
        }
        return match byte {
            b'/' => {
                let s = WebScratch { css_slash: true, ..WebScratch::default() };
                Step::advance(state, s)
            }
            b if is_ws(b) => Step::advance(state, WebScratch::default()),
            b'@' => Step::advance(c.at_rule, WebScratch::default()),
            b'{' => Step::advance(c.block, WebScratch::default())
                .with_stack(StackAction::Push(StackSym::CssBlock)),
            b'}' => match stack_top {
                Some(StackSym::CssBlock) => {
                    Step::advance(state, WebScratch::default()).with_stack(StackAction::Pop)
                }
                _ => Step::advance(c.error, WebScratch::default()),
            },
            b';' => Step::advance(state, WebScratch::default()),
            b'"' | b'\'' => string(c.start),
            _ => Step::advance(c.selector, WebScratch::default()),
        };
    }

    if state == c.selector {
        if slash_pending && byte == b'*' {
            return comment(c.selector);
        }
        return match byte {
            b'/' => {
                let s = WebScratch { css_slash: true, ..WebScratch::default() };
                Step::advance(state, s)
            }
            b'{' => Step::advance(c.block, WebScratch::default())
                .with_stack(StackAction::Push(StackSym::CssBlock)),
            b'}' => match stack_top {
                Some(StackSym::CssBlock) => {
                    Step::advance(c.start, WebScratch::default()).with_stack(StackAction::Pop)
                }
                _ => Step::advance(c.error, WebScratch::default()),
            },
            b'"' | b'\'' => string(c.selector),
            b';' => Step::advance(c.error, WebScratch::default()),
            _ => Step::advance(state, WebScratch::default()),
        };
    }

    if state == c.block {
        if slash_pending && byte == b'*' {
            return comment(c.block);
        }
        return match byte {
            b'/' => {
                let s = WebScratch { css_slash: true, ..WebScratch::default() };
                Step::advance(state, s)
            }
            b if is_ws(b) || b == b';' => Step::advance(state, WebScratch::default()),
            b'}' => match stack_top {
                Some(StackSym::CssBlock) => {
                    Step::advance(c.start, WebScratch::default()).with_stack(StackAction::Pop)
                }
                _ => Step::advance(c.error, WebScratch::default()),
            },
            b'*' => Step::advance(c.property_name, WebScratch::default()),
            b if is_name_start(b) => Step::advance(c.property_name, WebScratch::default()),
            _ => Step::advance(c.error, WebScratch::default()),
        };
    }

    if state == c.property_name {
        return match byte {
            b':' => Step::advance(c.property_value, WebScratch::default()),
            b';' => Step::advance(c.block, WebScratch::default()),
            b'}' => match stack_top {
                Some(StackSym::CssBlock) => {
                    Step::advance(c.start, WebScratch::default()).with_stack(StackAction::Pop)
                }
                _ => Step::advance(c.error, WebScratch::default()),
            },
            b if is_ws(b) => Step::advance(state, WebScratch::default()),
            b if is_name_start(b) || b.is_ascii_digit() => {
                Step::advance(state, WebScratch::default())
            }
            _ => Step::advance(c.error, WebScratch::default()),
        };
    }

    if state == c.property_value {
        if slash_pending && byte == b'*' {
            return comment(c.property_value);
        }
        // match `url(` so the unquoted-url token gets its own state
        let url_hit = scratch.url_progress as usize == 3 && byte == b'(';
        if url_hit {
            return Step::advance(c.url, WebScratch::default());
        }
        let mut s = WebScratch::default();
        s.url_progress = match (scratch.url_progress, byte.to_ascii_lowercase()) {
            (0, b'u') => 1,
            (1, b'r') => 2,
            (2, b'l') => 3,
            _ => 0,
        };
        return match byte {
            b'/' => {
                s.css_slash = true;
                Step::advance(state, s)
            }
            b';' => Step::advance(c.block, WebScratch::default()),
            b'}' => match stack_top {
                Some(StackSym::CssBlock) => {
                    Step::advance(c.start, WebScratch::default()).with_stack(StackAction::Pop)
                }
                _ => Step::advance(c.error, WebScratch::default()),
            },
            b'"' | b'\'' => string(c.property_value),
            b'(' => Step::advance(state, s).with_stack(StackAction::Push(StackSym::CssParen)),
            b')' => match stack_top {
                Some(StackSym::CssParen) => {
                    Step::advance(state, s).with_stack(StackAction::Pop)
                }
                _ => Step::advance(c.error, WebScratch::default()),
            },
            b'{' => Step::advance(c.error, WebScratch::default()),
            _ => Step::advance(state, s),
        };
    }

    if state == c.string {
        if scratch.escape {
            let mut s = scratch.clone();
            s.escape = false;
            return Step::advance(state, s);
        }
        return match byte {
            b'\\' => {
                let mut s = scratch.clone();
                s.escape = true;
                Step::advance(state, s)
            }
            b if b == scratch.css_quote => Step::advance(
                scratch.css_return.unwrap_or(c.start),
                WebScratch::default(),
            ),
            b'\n' => Step::advance(c.error, WebScratch::default()),
            _ => Step::advance(state, scratch.clone()),
        };
    }

    if state == c.url {
        if scratch.escape {
            let mut s = scratch.clone();
            s.escape = false;
            return Step::advance(state, s);
        }
        return match byte {
            b'\\' => {
                let mut s = scratch.clone();
                s.escape = true;
                Step::advance(state, s)
            }
            b')' => Step::advance(c.property_value, WebScratch::default()),
            b'"' | b'\'' => string(c.url),
            _ => Step::advance(state, scratch.clone()),
        };
    }

    if state == c.comment {
        let mut s = scratch.clone();
        if scratch.block_star && byte == b'/' {
            return Step::advance(scratch.css_return.unwrap_or(c.start), WebScratch::default());
        }
        s.block_star = byte == b'*';
        return Step::advance(state, s);
    }

    if state == c.at_rule {
        if slash_pending && byte == b'*' {
            return comment(c.at_rule);
        }
        return match byte {
            b'/' => {
                let s = WebScratch { css_slash: true, ..WebScratch::default() };
                Step::advance(state, s)
            }
            b';' => Step::advance(c.start, WebScratch::default()),
            b'{' => Step::advance(c.start, WebScratch::default())
                .with_stack(StackAction::Push(StackSym::CssBlock)),
            b'"' | b'\'' => string(c.at_rule),
            _ => Step::advance(state, WebScratch::default()),
        };
    }

    // Syntax_Error resynchronizes at the closing brace
    if byte == b'}' {
        return match stack_top {
            Some(StackSym::CssBlock) => {
                Step::advance(c.start, WebScratch::default()).with_stack(StackAction::Pop)
            }
            _ => Step::advance(c.start, WebScratch::default()),
        };
    }
    Step::advance(c.error, WebScratch::default())
}
