//! Combined automaton specification for web content: HTML as the primary
//! parser with embedded bridges into CSS and JavaScript and back.
//!
//! `HTML_Start` is the entry state. A `<script>` open tag bridges into
//! `Script_Start`, a `<style>` tag into `CSS_Start`; the matching
//! case-insensitive end tag bridges back, unwinding any nesting the embedded
//! language left on the stack. Inside an embedded language the only
//! HTML-relevant token is that end-tag sequence, so it closes the element
//! from any state, including string literals and comments, the way browsers
//! do.
//!
//! Undefined input routes to the language's `Syntax_Error` state and
//! resynchronizes at `;`/`}` (JavaScript), `}` (CSS) or `>` (HTML).
//! JavaScript statement boundaries follow the automatic-semicolon-insertion
//! rules at newlines and closing braces (see [`apply_asi`]).

mod css;
mod html;
mod js;

pub use js::{apply_asi, AsiError};

use ctxaudit_core::{AutomatonSpec, Catalog, Language, StackSym, StateId, Step};
use std::sync::OnceLock;

/// Which embedded language a tag bridges into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Embedded {
    Script,
    Style,
}

pub(crate) struct HtmlIds {
    pub start: StateId,
    pub tag_name: StateId,
    pub end_tag: StateId,
    pub self_closing: StateId,
    pub before_attr_name: StateId,
    pub attr_name: StateId,
    pub after_attr_name: StateId,
    pub before_attr_value: StateId,
    pub attr_value_double: StateId,
    pub attr_value_single: StateId,
    pub attr_value_unquoted: StateId,
    pub after_attr_value: StateId,
    pub markup_decl: StateId,
    pub comment: StateId,
    pub doctype: StateId,
    pub bogus_comment: StateId,
    pub error: StateId,
}

pub(crate) struct JsIds {
    pub script_start: StateId,
    pub expr_start: StateId,
    pub identifier: StateId,
    pub after_value: StateId,
    pub after_restricted: StateId,
    pub punctuator: StateId,
    pub stmnt_end: StateId,
    pub string_double: StateId,
    pub string_single: StateId,
    pub template: StateId,
    pub numeric: StateId,
    pub regex: StateId,
    pub line_comment: StateId,
    pub block_comment: StateId,
    pub asi: StateId,
    pub error: StateId,
}

pub(crate) struct CssIds {
    pub start: StateId,
    pub selector: StateId,
    pub block: StateId,
    pub property_name: StateId,
    pub property_value: StateId,
    pub string: StateId,
    pub url: StateId,
    pub comment: StateId,
    pub at_rule: StateId,
    pub error: StateId,
}

/// The web automaton: resolved state ids for all three languages.
pub struct WebSpec {
    pub(crate) html: HtmlIds,
    pub(crate) js: JsIds,
    pub(crate) css: CssIds,
}

/// The shared HTML+CSS+JS spec; entry state is `HTML_Start`.
pub fn html_spec() -> &'static WebSpec {
    static SPEC: OnceLock<WebSpec> = OnceLock::new();
    SPEC.get_or_init(|| {
        let cat = Catalog::shared();
        let h = |n| cat.require(Language::Html, n);
        let j = |n| cat.require(Language::Js, n);
        let c = |n| cat.require(Language::Css, n);
        WebSpec {
            html: HtmlIds {
                start: h("HTML_Start"),
                tag_name: h("Tag_Name"),
                end_tag: h("End_Tag"),
                self_closing: h("Self_Closing"),
                before_attr_name: h("Before_Attribute_Name"),
                attr_name: h("Attribute_Name"),
                after_attr_name: h("After_Attribute_Name"),
                before_attr_value: h("Before_Attribute_Value"),
                attr_value_double: h("Attribute_Value_Double"),
                attr_value_single: h("Attribute_Value_Single"),
                attr_value_unquoted: h("Attribute_Value_Unquoted"),
                after_attr_value: h("After_Attribute_Value"),
                markup_decl: h("Markup_Declaration"),
                comment: h("Comment"),
                doctype: h("Doctype"),
                bogus_comment: h("Bogus_Comment"),
                error: h("Syntax_Error"),
            },
            js: JsIds {
                script_start: j("Script_Start"),
                expr_start: j("Expr_Start"),
                identifier: j("Identifier"),
                after_value: j("After_Value"),
                after_restricted: j("After_Restricted_Keyword"),
                punctuator: j("Punctuator"),
                stmnt_end: j("Stmnt_End"),
                string_double: j("Quoted_Literal"),
                string_single: j("Single_Quoted_Literal"),
                template: j("Template_Literal"),
                numeric: j("Numeric_Literal"),
                regex: j("Regex_Literal"),
                line_comment: j("Line_Comment"),
                block_comment: j("Block_Comment"),
                asi: j("Automatic_Semicolon_Insertion"),
                error: j("Syntax_Error"),
            },
            css: CssIds {
                start: c("CSS_Start"),
                selector: c("Selector"),
                block: c("Declaration_Block"),
                property_name: c("Property_Name"),
                property_value: c("Property_Value"),
                string: c("CSS_String"),
                url: c("Url_Token"),
                comment: c("CSS_Comment"),
                at_rule: c("At_Rule"),
                error: c("Syntax_Error"),
            },
        }
    })
}

/// Identifier bytes buffered for keyword classification. Identifiers longer
/// than the buffer cannot be keywords.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct IdentBuf {
    len: u8,
    bytes: [u8; 12],
}

impl IdentBuf {
    pub fn start(byte: u8) -> IdentBuf {
        let mut b = IdentBuf::default();
        b.push(byte);
        b
    }

    pub fn push(&mut self, byte: u8) {
        if self.len as usize >= self.bytes.len() {
            self.len = u8::MAX;
        } else if self.len != u8::MAX {
            self.bytes[self.len as usize] = byte;
            self.len += 1;
        }
    }

    pub fn as_slice(&self) -> &[u8] {
        if self.len == u8::MAX {
            &[]
        } else {
            &self.bytes[..self.len as usize]
        }
    }
}

/// Per-run registers of the web automaton's finite control.
#[derive(Debug, Clone, Default)]
pub struct WebScratch {
    // html: tag-name matching and bridge bookkeeping
    pub(crate) tag_fresh: bool,
    pub(crate) name_len: u8,
    pub(crate) script_ok: bool,
    pub(crate) style_ok: bool,
    pub(crate) pending_bridge: Option<Embedded>,
    pub(crate) comment_dashes: u8,
    pub(crate) decl_dashes: u8,
    // embedded languages: progress through `</name` (0 inactive, 1 `<`,
    // 2 `</`, 2+k after k matched name bytes)
    pub(crate) endtag: u8,
    // literal escapes (js strings/regex, css strings)
    pub(crate) escape: bool,
    // js
    pub(crate) ident: IdentBuf,
    /// Bytes consumed since the newline that may become a virtual semicolon.
    pub(crate) asi_gap: Option<u16>,
    pub(crate) comment_resume: Option<StateId>,
    pub(crate) punct_last: u8,
    pub(crate) slash_regex: bool,
    pub(crate) regex_class: bool,
    pub(crate) block_star: bool,
    pub(crate) template_dollar: bool,
    pub(crate) brace_pop: bool,
    pub(crate) num_exp: bool,
    // css
    pub(crate) css_return: Option<StateId>,
    pub(crate) css_quote: u8,
    pub(crate) css_slash: bool,
    pub(crate) url_progress: u8,
}

impl AutomatonSpec for WebSpec {
    type Scratch = WebScratch;

    fn entry(&self) -> StateId {
        self.html.start
    }

    fn step(
        &self,
        state: StateId,
        scratch: &WebScratch,
        stack_top: Option<&StackSym>,
        byte: u8,
    ) -> Step<WebScratch> {
        match Catalog::shared().get(state).map(|s| s.language) {
            Some(Language::Html) => html::step(self, state, scratch, byte),
            Some(Language::Js) => js::step(self, state, scratch, stack_top, byte),
            Some(Language::Css) => css::step(self, state, scratch, stack_top, byte),
            _ => Step::advance(self.html.error, WebScratch::default()),
        }
    }

    fn error_state(&self, state: StateId) -> StateId {
        match Catalog::shared().get(state).map(|s| s.language) {
            Some(Language::Js) => self.js.error,
            Some(Language::Css) => self.css.error,
            _ => self.html.error,
        }
    }
}

/// Case-insensitive end-tag guard for embedded languages, shared by every
/// JS/CSS state. Returns the step when the guard consumed or decided the
/// byte; `None` hands the (guard-inactive) byte back to the state logic.
///
/// The guard runs as scratch-only progress so a `<` inside a string stays
/// inert unless it really begins the closing tag.
pub(crate) fn guard_literal(
    spec: &WebSpec,
    state: StateId,
    scratch: &WebScratch,
    byte: u8,
    target: &[u8],
) -> Option<Step<WebScratch>> {
    if scratch.endtag == 0 {
        if byte == b'<' {
            let mut s = scratch.clone();
            s.endtag = 1;
            s.escape = false;
            return Some(Step::advance(state, s));
        }
        return None;
    }
    let mut s = scratch.clone();
    if scratch.endtag == 1 {
        if byte == b'/' {
            s.endtag = 2;
            return Some(Step::advance(state, s));
        }
        s.endtag = 0;
        return Some(Step::revisit(state, s));
    }
    let matched = (scratch.endtag - 2) as usize;
    if matched < target.len() {
        if byte.eq_ignore_ascii_case(&target[matched]) {
            s.endtag += 1;
            return Some(Step::advance(state, s));
        }
        s.endtag = 0;
        return Some(Step::revisit(state, s));
    }
    // full name matched; a terminator completes the bridge
    if matches!(byte, b'>' | b'/' | b' ' | b'\t' | b'\n' | b'\r' | 0x0c) {
        return Some(
            Step::revisit(spec.html.end_tag, WebScratch::default())
                .with_stack(ctxaudit_core::StackAction::PopLanguageFrame),
        );
    }
    s.endtag = 0;
    Some(Step::revisit(state, s))
}

pub(crate) fn is_html_ws(byte: u8) -> bool {
    matches!(byte, b' ' | b'\t' | b'\n' | b'\r' | 0x0c)
}
