//! HTML tokenization states, following the tokenization stage of the HTML
//! standard at the granularity the detector needs: text, tags, attributes,
//! comments and doctype. Character references stay inert in text and
//! attribute values since browsers emit them as plain characters.

use crate::{Embedded, WebScratch, WebSpec};
use ctxaudit_core::{StackAction, StackSym, StateId, Step};

const SCRIPT: &[u8] = b"script";
const STYLE: &[u8] = b"style";

fn feed_name_matcher(s: &mut WebScratch, byte: u8) {
    let i = s.name_len as usize;
    s.script_ok = s.script_ok && i < SCRIPT.len() && byte.eq_ignore_ascii_case(&SCRIPT[i]);
    s.style_ok = s.style_ok && i < STYLE.len() && byte.eq_ignore_ascii_case(&STYLE[i]);
    s.name_len = s.name_len.saturating_add(1);
}

fn resolve_bridge(s: &WebScratch) -> Option<Embedded> {
    if s.script_ok && s.name_len as usize == SCRIPT.len() {
        Some(Embedded::Script)
    } else if s.style_ok && s.name_len as usize == STYLE.len() {
        Some(Embedded::Style)
    } else {
        None
    }
}

/// Leaving the tag-name state: freeze the matcher result so attribute states
/// carry it to the closing `>`.
fn sealed(scratch: &WebScratch) -> WebScratch {
    WebScratch {
        pending_bridge: scratch.pending_bridge.or_else(|| resolve_bridge(scratch)),
        ..WebScratch::default()
    }
}

/// `>` ends the tag: bridge into the embedded language or back to text.
fn close_tag(spec: &WebSpec, scratch: &WebScratch) -> Step<WebScratch> {
    match sealed(scratch).pending_bridge {
        Some(Embedded::Script) => Step::advance(spec.js.script_start, WebScratch::default())
            .with_stack(StackAction::Push(StackSym::LangFrame(ctxaudit_core::Language::Js))),
        Some(Embedded::Style) => Step::advance(spec.css.start, WebScratch::default())
            .with_stack(StackAction::Push(StackSym::LangFrame(ctxaudit_core::Language::Css))),
        None => Step::advance(spec.html.start, WebScratch::default()),
    }
}

pub(crate) fn step(
    spec: &WebSpec,
    state: StateId,
    scratch: &WebScratch,
    byte: u8,
) -> Step<WebScratch> {
    let h = &spec.html;
    let ws = crate::is_html_ws(byte);

    if state == h.start {
        return if byte == b'<' {
            let s = WebScratch {
                tag_fresh: true,
                script_ok: true,
                style_ok: true,
                ..WebScratch::default()
            };
            Step::advance(h.tag_name, s)
        } else {
            Step::advance(state, WebScratch::default())
        };
    }

    if state == h.tag_name {
        if scratch.tag_fresh {
            return match byte {
                b'/' => Step::advance(h.end_tag, WebScratch::default()),
                b'!' => Step::advance(h.markup_decl, WebScratch::default()),
                b'?' => Step::advance(h.bogus_comment, WebScratch::default()),
                b if b.is_ascii_alphabetic() => {
                    let mut s = scratch.clone();
                    s.tag_fresh = false;
                    feed_name_matcher(&mut s, byte);
                    Step::advance(state, s)
                }
                // `<` followed by anything else is text again
                _ => Step::revisit(h.start, WebScratch::default()),
            };
        }
        return match byte {
            b'>' => close_tag(spec, scratch),
            b'/' => Step::advance(h.self_closing, sealed(scratch)),
            _ if ws => Step::advance(h.before_attr_name, sealed(scratch)),
            _ => {
                let mut s = scratch.clone();
                feed_name_matcher(&mut s, byte);
                Step::advance(state, s)
            }
        };
    }

    if state == h.end_tag {
        return match byte {
            b'>' => Step::advance(h.start, WebScratch::default()),
            _ => Step::advance(state, scratch.clone()),
        };
    }

    if state == h.self_closing {
        return match byte {
            b'>' => close_tag(spec, scratch),
            _ => Step::revisit(h.before_attr_name, scratch.clone()),
        };
    }

    if state == h.before_attr_name {
        return match byte {
            _ if ws => Step::advance(state, scratch.clone()),
            b'>' => close_tag(spec, scratch),
            b'/' => Step::advance(h.self_closing, scratch.clone()),
            _ => Step::advance(h.attr_name, scratch.clone()),
        };
    }

    if state == h.attr_name {
        return match byte {
            b'=' => Step::advance(h.before_attr_value, scratch.clone()),
            b'>' => close_tag(spec, scratch),
            b'/' => Step::advance(h.self_closing, scratch.clone()),
            _ if ws => Step::advance(h.after_attr_name, scratch.clone()),
            _ => Step::advance(state, scratch.clone()),
        };
    }

    if state == h.after_attr_name {
        return match byte {
            _ if ws => Step::advance(state, scratch.clone()),
            b'=' => Step::advance(h.before_attr_value, scratch.clone()),
            b'>' => close_tag(spec, scratch),
            b'/' => Step::advance(h.self_closing, scratch.clone()),
            _ => Step::advance(h.attr_name, scratch.clone()),
        };
    }

    if state == h.before_attr_value {
        return match byte {
            _ if ws => Step::advance(state, scratch.clone()),
            b'"' => Step::advance(h.attr_value_double, scratch.clone()),
            b'\'' => Step::advance(h.attr_value_single, scratch.clone()),
            b'>' => close_tag(spec, scratch),
            _ => Step::advance(h.attr_value_unquoted, scratch.clone()),
        };
    }

    if state == h.attr_value_double || state == h.attr_value_single {
        let quote = if state == h.attr_value_double { b'"' } else { b'\'' };
        return if byte == quote {
            Step::advance(h.after_attr_value, scratch.clone())
        } else {
            Step::advance(state, scratch.clone())
        };
    }

    if state == h.attr_value_unquoted {
        return match byte {
            _ if ws => Step::advance(h.before_attr_name, scratch.clone()),
            b'>' => close_tag(spec, scratch),
            // quote characters inside an unquoted value are tokenizer parse
            // errors and a classic quote-confusion vector
            b'"' | b'\'' | b'<' | b'=' | b'`' => Step::advance(h.error, scratch.clone()),
            _ => Step::advance(state, scratch.clone()),
        };
    }

    if state == h.after_attr_value {
        return match byte {
            _ if ws => Step::advance(h.before_attr_name, scratch.clone()),
            b'>' => close_tag(spec, scratch),
            b'/' => Step::advance(h.self_closing, scratch.clone()),
            _ => Step::revisit(h.before_attr_name, scratch.clone()),
        };
    }

    if state == h.markup_decl {
        return match byte {
            b'-' => {
                let mut s = scratch.clone();
                s.decl_dashes += 1;
                if s.decl_dashes >= 2 {
                    Step::advance(h.comment, WebScratch::default())
                } else {
                    Step::advance(state, s)
                }
            }
            b if b.is_ascii_alphabetic() => Step::advance(h.doctype, WebScratch::default()),
            _ => Step::advance(h.bogus_comment, WebScratch::default()),
        };
    }

    if state == h.comment {
        let mut s = scratch.clone();
        return match byte {
            b'-' => {
                s.comment_dashes = s.comment_dashes.saturating_add(1);
                Step::advance(state, s)
            }
            b'>' if scratch.comment_dashes >= 2 => Step::advance(h.start, WebScratch::default()),
            b'!' if scratch.comment_dashes == 2 => Step::advance(state, s),
            _ => {
                s.comment_dashes = 0;
                Step::advance(state, s)
            }
        };
    }

    if state == h.doctype || state == h.bogus_comment || state == h.error {
        return if byte == b'>' {
            Step::advance(h.start, WebScratch::default())
        } else {
            Step::advance(state, scratch.clone())
        };
    }

    Step::advance(h.error, WebScratch::default())
}
