//! JavaScript lexical states: statement/operand positions, identifiers and
//! keywords, string/template/numeric/regex literals, comments, grouping on
//! the stack, and statement boundaries.
//!
//! Regex-vs-division is resolved by the previous significant token class;
//! an operator followed by `;` routes to `Syntax_Error` (parse errors count
//! as detections, so conservative failure is safe). Statement boundaries at
//! newlines and closing braces follow the automatic-semicolon-insertion
//! rules at lexical granularity: a newline after a complete value defers
//! until the next token shows the expression cannot continue, a newline
//! after a restricted keyword (`return`, `throw`, `break`, `continue`,
//! `yield`) breaks immediately.

use crate::{guard_literal, IdentBuf, WebScratch, WebSpec};
use ctxaudit_core::{BraceKind, HeadAction, StackAction, StackSym, StateId, Step};
use std::fmt;

const END_TAG: &[u8] = b"script";

const RESTRICTED_KEYWORDS: &[&[u8]] = &[b"return", b"throw", b"break", b"continue", b"yield"];
const VALUE_KEYWORDS: &[&[u8]] = &[b"this", b"true", b"false", b"null", b"undefined", b"super"];
const STRUCTURE_KEYWORDS: &[&[u8]] = &[
    b"var", b"let", b"const", b"new", b"typeof", b"delete", b"void", b"in", b"of",
    b"instanceof", b"if", b"else", b"for", b"while", b"do", b"switch", b"case", b"default",
    b"function", b"class", b"extends", b"try", b"catch", b"finally", b"with", b"await",
];

enum KwClass {
    Restricted,
    Value,
    Structure,
    Plain,
}

fn classify(ident: &[u8]) -> KwClass {
    if RESTRICTED_KEYWORDS.contains(&ident) {
        KwClass::Restricted
    } else if VALUE_KEYWORDS.contains(&ident) {
        KwClass::Value
    } else if STRUCTURE_KEYWORDS.contains(&ident) {
        KwClass::Structure
    } else {
        KwClass::Plain
    }
}

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_' || b == b'$' || b >= 0x80
}

fn is_ident_char(b: u8) -> bool {
    is_ident_start(b) || b.is_ascii_digit()
}

fn is_blank(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\r' | 0x0c)
}

fn is_punct(b: u8) -> bool {
    matches!(
        b,
        b'+' | b'-' | b'*' | b'%' | b'=' | b'!' | b'&' | b'|' | b'^' | b'~' | b'?' | b':'
            | b',' | b'.' | b'>'
    )
}

/// Automatic semicolon insertion is only defined where a statement can end:
/// after a complete value or after a restricted keyword.
#[derive(Debug, PartialEq, Eq)]
pub struct AsiError {
    pub state: &'static str,
}

impl fmt::Display for AsiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "automatic semicolon insertion not applicable in state {}", self.state)
    }
}

impl std::error::Error for AsiError {}

/// Returns the `Automatic_Semicolon_Insertion` state when `state` permits a
/// virtual semicolon; callers route the error case to `Syntax_Error`.
pub fn apply_asi(spec: &WebSpec, state: StateId) -> Result<StateId, AsiError> {
    if state == spec.js.after_value || state == spec.js.after_restricted {
        Ok(spec.js.asi)
    } else {
        Err(AsiError { state: ctxaudit_core::Catalog::shared().name_of(state) })
    }
}

fn into_asi(spec: &WebSpec, state: StateId, head: HeadAction) -> Step<WebScratch> {
    match apply_asi(spec, state) {
        Ok(asi) => Step { next: asi, scratch: WebScratch::default(), stack: StackAction::None, head, silent: false },
        Err(_) => Step::advance(spec.js.error, WebScratch::default()),
    }
}

fn punct(spec: &WebSpec, last: u8) -> Step<WebScratch> {
    let s = WebScratch { punct_last: last, ..WebScratch::default() };
    Step::advance(spec.js.punctuator, s)
}

/// `/` seen: remember whether a regex may start here and where a comment
/// would resume.
fn slash(spec: &WebSpec, regex_position: bool, resume: StateId) -> Step<WebScratch> {
    let s = WebScratch {
        punct_last: b'/',
        slash_regex: regex_position,
        comment_resume: Some(resume),
        ..WebScratch::default()
    };
    Step::advance(spec.js.punctuator, s)
}

fn open_literal(spec: &WebSpec, byte: u8) -> Step<WebScratch> {
    let j = &spec.js;
    match byte {
        b'"' => Step::advance(j.string_double, WebScratch::default()),
        b'\'' => Step::advance(j.string_single, WebScratch::default()),
        _ => Step::advance(j.template, WebScratch::default()),
    }
}

fn close_group(
    spec: &WebSpec,
    stack_top: Option<&StackSym>,
    byte: u8,
) -> Step<WebScratch> {
    let j = &spec.js;
    match (byte, stack_top) {
        (b')', Some(StackSym::Paren)) | (b']', Some(StackSym::Bracket)) => {
            Step::advance(j.after_value, WebScratch::default()).with_stack(StackAction::Pop)
        }
        (b'}', Some(StackSym::TemplateExpr)) => {
            Step::advance(j.template, WebScratch::default()).with_stack(StackAction::Pop)
        }
        (b'}', Some(StackSym::Brace(BraceKind::Object))) => {
            Step::advance(j.after_value, WebScratch::default()).with_stack(StackAction::Pop)
        }
        (b'}', Some(StackSym::Brace(BraceKind::Block))) => {
            let s = WebScratch { brace_pop: true, ..WebScratch::default() };
            Step::advance(j.stmnt_end, s).with_stack(StackAction::Pop)
        }
        _ => Step::advance(j.error, WebScratch::default()),
    }
}

/// Transitions shared by the statement/operand position states
/// (`Script_Start`, `Expr_Start`, `Stmnt_End`) and, for operand bytes, by
/// `After_Restricted_Keyword`.
fn position_step(
    spec: &WebSpec,
    state: StateId,
    scratch: &WebScratch,
    stack_top: Option<&StackSym>,
    byte: u8,
) -> Step<WebScratch> {
    let j = &spec.js;
    match byte {
        b if is_blank(b) || b == b'\n' => Step::advance(state, scratch.clone()),
        b if is_ident_start(b) => {
            let s = WebScratch { ident: IdentBuf::start(byte), ..WebScratch::default() };
            Step::advance(j.identifier, s)
        }
        b if b.is_ascii_digit() => Step::advance(j.numeric, WebScratch::default()),
        b'"' | b'\'' | b'`' => open_literal(spec, byte),
        b'/' => {
            if state == j.stmnt_end && scratch.brace_pop {
                // block end vs object literal is ambiguous here; ties fail
                Step::advance(j.error, WebScratch::default())
            } else {
                slash(spec, true, state)
            }
        }
        b'<' => {
            let s = WebScratch { punct_last: b'<', endtag: 1, ..WebScratch::default() };
            Step::advance(j.punctuator, s)
        }
        b';' => Step::advance(j.stmnt_end, WebScratch::default()),
        b'(' => punct(spec, b'(').with_stack(StackAction::Push(StackSym::Paren)),
        b'[' => punct(spec, b'[').with_stack(StackAction::Push(StackSym::Bracket)),
        b'{' => {
            if state == j.expr_start {
                Step::advance(state, WebScratch::default())
                    .with_stack(StackAction::Push(StackSym::Brace(BraceKind::Object)))
            } else {
                Step::advance(j.script_start, WebScratch::default())
                    .with_stack(StackAction::Push(StackSym::Brace(BraceKind::Block)))
            }
        }
        b')' | b']' | b'}' => close_group(spec, stack_top, byte),
        b if is_punct(b) => punct(spec, b),
        _ => Step::advance(j.error, WebScratch::default()),
    }
}

pub(crate) fn step(
    spec: &WebSpec,
    state: StateId,
    scratch: &WebScratch,
    stack_top: Option<&StackSym>,
    byte: u8,
) -> Step<WebScratch> {
    let j = &spec.js;

    // the insertion itself: terminate the statement, re-consume the byte
    if state == j.asi {
        return Step::revisit(j.stmnt_end, WebScratch::default());
    }

    if state == j.string_double
        || state == j.string_single
        || state == j.template
        || state == j.regex
        || state == j.line_comment
        || state == j.block_comment
        || state == j.error
    {
        if let Some(step) = guard_literal(spec, state, scratch, byte, END_TAG) {
            return step;
        }
        return literal_step(spec, state, scratch, stack_top, byte);
    }

    if state == j.identifier {
        if is_ident_char(byte) {
            let mut s = scratch.clone();
            s.ident.push(byte);
            return Step::advance(state, s);
        }
        let to = match classify(scratch.ident.as_slice()) {
            KwClass::Restricted => j.after_restricted,
            KwClass::Structure => j.expr_start,
            KwClass::Value | KwClass::Plain => j.after_value,
        };
        return Step::revisit(to, WebScratch::default());
    }

    if state == j.numeric {
        if byte.is_ascii_alphanumeric() || byte == b'.' || byte == b'_' {
            let s = WebScratch { num_exp: matches!(byte, b'e' | b'E'), ..WebScratch::default() };
            return Step::advance(state, s);
        }
        if (byte == b'+' || byte == b'-') && scratch.num_exp {
            return Step::advance(state, WebScratch::default());
        }
        return Step::revisit(j.after_value, WebScratch::default());
    }

    if state == j.punctuator {
        return punctuator_step(spec, scratch, stack_top, byte);
    }

    if state == j.after_value {
        return after_value_step(spec, scratch, stack_top, byte);
    }

    if state == j.after_restricted {
        return match byte {
            b if is_blank(b) => Step::advance(state, scratch.clone()),
            b'\n' => into_asi(spec, state, HeadAction::Revisit),
            b';' => Step::advance(j.stmnt_end, WebScratch::default()),
            _ => position_step(spec, state, scratch, stack_top, byte),
        };
    }

    // Script_Start, Expr_Start, Stmnt_End
    position_step(spec, state, scratch, stack_top, byte)
}

fn punctuator_step(
    spec: &WebSpec,
    scratch: &WebScratch,
    stack_top: Option<&StackSym>,
    byte: u8,
) -> Step<WebScratch> {
    let j = &spec.js;

    // end-tag guard in code position: `<` was consumed as an operator and
    // `/script` may follow; a mismatch re-lexes the slash as a regex
    if scratch.endtag == 1 {
        if byte == b'/' {
            let mut s = scratch.clone();
            s.endtag = 2;
            return Step::advance(j.punctuator, s);
        }
        // guard dead; fall through with it cleared
    } else if scratch.endtag >= 2 {
        let matched = (scratch.endtag - 2) as usize;
        if matched < END_TAG.len() && byte.eq_ignore_ascii_case(&END_TAG[matched]) {
            let mut s = scratch.clone();
            s.endtag += 1;
            return Step::advance(j.punctuator, s);
        }
        if matched == END_TAG.len()
            && matches!(byte, b'>' | b'/' | b' ' | b'\t' | b'\n' | b'\r' | 0x0c)
        {
            return Step::revisit(spec.html.end_tag, WebScratch::default())
                .with_stack(StackAction::PopLanguageFrame);
        }
        return Step {
            next: j.expr_start,
            scratch: WebScratch::default(),
            stack: StackAction::None,
            head: HeadAction::SeekBack(scratch.endtag as usize - 1),
            silent: false,
        };
    }

    let last = scratch.punct_last;
    if last == b'/' {
        if byte == b'/' {
            let s = WebScratch { comment_resume: scratch.comment_resume, ..WebScratch::default() };
            return Step::advance(j.line_comment, s);
        }
        if byte == b'*' {
            let s = WebScratch { comment_resume: scratch.comment_resume, ..WebScratch::default() };
            return Step::advance(j.block_comment, s);
        }
        if scratch.slash_regex {
            let mut s = WebScratch::default();
            match byte {
                b'\n' => return Step::advance(j.error, s),
                b'[' => s.regex_class = true,
                b'\\' => s.escape = true,
                _ => {}
            }
            return Step::advance(j.regex, s);
        }
    }

    match byte {
        b if is_blank(b) || b == b'\n' => {
            Step::advance(j.punctuator, WebScratch::default())
        }
        b if is_ident_start(b) => {
            let s = WebScratch { ident: IdentBuf::start(byte), ..WebScratch::default() };
            Step::advance(j.identifier, s)
        }
        b if b.is_ascii_digit() => Step::advance(j.numeric, WebScratch::default()),
        b'"' | b'\'' | b'`' => open_literal(spec, byte),
        b'/' => slash(spec, true, j.expr_start),
        b'<' => {
            let s = WebScratch { punct_last: b'<', endtag: 1, ..WebScratch::default() };
            Step::advance(j.punctuator, s)
        }
        // an operator directly followed by `;` cannot close an expression
        b';' => Step::advance(j.error, WebScratch::default()),
        b'(' => punct(spec, b'(').with_stack(StackAction::Push(StackSym::Paren)),
        b'[' => punct(spec, b'[').with_stack(StackAction::Push(StackSym::Bracket)),
        b'{' => Step::advance(j.punctuator, WebScratch::default())
            .with_stack(StackAction::Push(StackSym::Brace(BraceKind::Object))),
        b')' | b']' | b'}' => close_group(spec, stack_top, byte),
        b if is_punct(b) => punct(spec, b),
        _ => Step::advance(j.error, WebScratch::default()),
    }
}

fn after_value_step(
    spec: &WebSpec,
    scratch: &WebScratch,
    stack_top: Option<&StackSym>,
    byte: u8,
) -> Step<WebScratch> {
    let j = &spec.js;

    // a token that cannot continue the expression fires the deferred
    // insertion back at the newline that requested it
    if scratch.asi_gap.is_some()
        && (is_ident_start(byte)
            || byte.is_ascii_digit()
            || matches!(byte, b'"' | b'\'' | b'`' | b'{'))
    {
        let gap = scratch.asi_gap.unwrap() as usize;
        return into_asi(spec, j.after_value, HeadAction::SeekBack(gap + 1));
    }

    match byte {
        b if is_blank(b) => {
            let mut s = scratch.clone();
            s.asi_gap = s.asi_gap.and_then(|g| g.checked_add(1));
            Step::advance(j.after_value, s)
        }
        b'\n' => {
            let mut s = scratch.clone();
            s.asi_gap = Some(s.asi_gap.and_then(|g| g.checked_add(1)).unwrap_or(0));
            Step::advance(j.after_value, s)
        }
        b if is_ident_start(b) => {
            let s = WebScratch { ident: IdentBuf::start(byte), ..WebScratch::default() };
            Step::advance(j.identifier, s)
        }
        b if b.is_ascii_digit() => Step::advance(j.numeric, WebScratch::default()),
        b'"' | b'\'' | b'`' => open_literal(spec, byte),
        b';' => Step::advance(j.stmnt_end, WebScratch::default()),
        b'/' => slash(spec, false, j.after_value),
        b'<' => {
            let s = WebScratch { punct_last: b'<', endtag: 1, ..WebScratch::default() };
            Step::advance(j.punctuator, s)
        }
        b'(' => punct(spec, b'(').with_stack(StackAction::Push(StackSym::Paren)),
        b'[' => punct(spec, b'[').with_stack(StackAction::Push(StackSym::Bracket)),
        b'{' => Step::advance(j.script_start, WebScratch::default())
            .with_stack(StackAction::Push(StackSym::Brace(BraceKind::Block))),
        b')' => match stack_top {
            Some(StackSym::Paren) => {
                Step::advance(j.after_value, WebScratch::default()).with_stack(StackAction::Pop)
            }
            _ => Step::advance(j.error, WebScratch::default()),
        },
        b']' => match stack_top {
            Some(StackSym::Bracket) => {
                Step::advance(j.after_value, WebScratch::default()).with_stack(StackAction::Pop)
            }
            _ => Step::advance(j.error, WebScratch::default()),
        },
        b'}' => match stack_top {
            Some(StackSym::TemplateExpr) => {
                Step::advance(j.template, WebScratch::default()).with_stack(StackAction::Pop)
            }
            Some(StackSym::Brace(BraceKind::Object)) => {
                Step::advance(j.after_value, WebScratch::default()).with_stack(StackAction::Pop)
            }
            Some(StackSym::Paren) | Some(StackSym::Bracket) => {
                Step::advance(j.error, WebScratch::default())
            }
            // statement-level close: insert the virtual semicolon first
            _ => match scratch.asi_gap {
                Some(gap) => into_asi(spec, j.after_value, HeadAction::SeekBack(gap as usize + 1)),
                None => into_asi(spec, j.after_value, HeadAction::Revisit),
            },
        },
        b if is_punct(b) => punct(spec, b),
        _ => Step::advance(j.error, WebScratch::default()),
    }
}

fn literal_step(
    spec: &WebSpec,
    state: StateId,
    scratch: &WebScratch,
    stack_top: Option<&StackSym>,
    byte: u8,
) -> Step<WebScratch> {
    let j = &spec.js;
    let mut s = scratch.clone();

    if state == j.line_comment {
        return if byte == b'\n' {
            Step::revisit(scratch.comment_resume.unwrap_or(j.script_start), WebScratch::default())
        } else {
            Step::advance(state, s)
        };
    }

    if state == j.block_comment {
        if scratch.block_star && byte == b'/' {
            return Step::advance(
                scratch.comment_resume.unwrap_or(j.script_start),
                WebScratch::default(),
            );
        }
        s.block_star = byte == b'*';
        s.comment_resume = scratch.comment_resume;
        return Step::advance(state, s);
    }

    if state == j.error {
        return match byte {
            b';' => Step::advance(j.stmnt_end, WebScratch::default()),
            b'}' => match stack_top {
                Some(StackSym::Brace(_)) => {
                    Step::advance(j.stmnt_end, WebScratch::default()).with_stack(StackAction::Pop)
                }
                Some(StackSym::TemplateExpr) => {
                    Step::advance(j.template, WebScratch::default()).with_stack(StackAction::Pop)
                }
                _ => Step::advance(state, WebScratch::default()),
            },
            _ => Step::advance(state, WebScratch::default()),
        };
    }

    // strings, template, regex
    if scratch.escape {
        s.escape = false;
        return Step::advance(state, s);
    }
    if byte == b'\\' {
        s.escape = true;
        return Step::advance(state, s);
    }

    if state == j.regex {
        if scratch.regex_class {
            s.regex_class = byte != b']';
            return Step::advance(state, s);
        }
        return match byte {
            b'[' => {
                s.regex_class = true;
                Step::advance(state, s)
            }
            b'/' => Step::advance(j.after_value, WebScratch::default()),
            b'\n' => Step::advance(j.error, WebScratch::default()),
            _ => Step::advance(state, s),
        };
    }

    if state == j.template {
        return match byte {
            b'`' => Step::advance(j.after_value, WebScratch::default()),
            b'$' => {
                s.template_dollar = true;
                Step::advance(state, s)
            }
            b'{' if scratch.template_dollar => Step::advance(j.expr_start, WebScratch::default())
                .with_stack(StackAction::Push(StackSym::TemplateExpr)),
            _ => {
                s.template_dollar = false;
                Step::advance(state, s)
            }
        };
    }

    // double / single quoted strings
    let quote = if state == j.string_double { b'"' } else { b'\'' };
    match byte {
        b if b == quote => Step::advance(j.after_value, WebScratch::default()),
        b'\n' => Step::advance(j.error, WebScratch::default()),
        _ => Step::advance(state, s),
    }
}
