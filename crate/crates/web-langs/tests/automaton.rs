//! Behavior of the combined HTML/CSS/JS automaton, checked against a naive
//! per-position reparse oracle where label expectations are derived rather
//! than hand-asserted.

use ctxaudit_core::{
    run_automaton, Catalog, EngineConfig, Language, ParseTrace, StateId,
};
use ctxaudit_web_langs::html_spec;
use proptest::prelude::*;

fn cfg() -> EngineConfig {
    EngineConfig::default()
}

fn trace(doc: &[u8]) -> ParseTrace {
    run_automaton(doc, html_spec(), None, &cfg()).unwrap()
}

fn lang_of(id: StateId) -> Language {
    Catalog::shared().get(id).unwrap().language
}

fn name_of(id: StateId) -> &'static str {
    Catalog::shared().name_of(id)
}

fn id(lang: Language, name: &str) -> StateId {
    Catalog::shared().require(lang, name)
}

/// The naive oracle: the label of position `i` is recomputed from scratch by
/// reparsing the prefix that ends just past `i`. Valid for inputs without
/// deferred decisions (no ASI, no re-lexing), where labels settle instantly.
fn naive_labels(doc: &[u8]) -> Vec<StateId> {
    (0..doc.len())
        .map(|i| {
            let t = run_automaton(&doc[..i + 1], html_spec(), None, &cfg()).unwrap();
            t.labels()[i]
        })
        .collect()
}

#[test]
fn empty_input_yields_empty_trace() {
    let t = trace(b"");
    assert_eq!((t.len(), t.events().len(), t.steps()), (0, 0, 0));
}

#[test]
fn simple_tag_has_three_labels_two_events() {
    let doc = b"<b>";
    let t = trace(doc);
    assert_eq!(t.labels(), naive_labels(doc).as_slice());
    assert_eq!(t.len(), 3);
    assert_eq!(t.events().len(), 2);
    assert_eq!(name_of(t.state_at(1).unwrap()), "Tag_Name");
    assert_eq!(name_of(t.state_at(2).unwrap()), "HTML_Start");
}

#[test]
fn markup_round_trip_has_tag_open_and_close_events() {
    let doc = b"<b>x</b>";
    let t = trace(doc);
    assert_eq!(t.labels(), naive_labels(doc).as_slice());
    assert!(t.events().len() >= 2);
    let html_start = id(Language::Html, "HTML_Start");
    let tag_name = id(Language::Html, "Tag_Name");
    assert!(t.events().iter().any(|e| e.from == html_start && e.to == tag_name));
    assert!(t.events().iter().any(|e| e.to == html_start));
    assert!(t.labels().iter().all(|&l| lang_of(l) == Language::Html));
}

#[test]
fn pure_text_stays_in_html_start() {
    let t = trace(b"abc");
    assert_eq!(name_of(t.state_at(0).unwrap()), "HTML_Start");
    assert!(t.events().is_empty());
}

#[test]
fn script_element_bridges_into_js_and_back() {
    let doc = b"<script>var a=1;</script>";
    let t = trace(doc);
    assert!(t.events().iter().any(|e| lang_of(e.to) == Language::Js));
    let back = t
        .events()
        .iter()
        .find(|e| lang_of(e.from) != Language::Html && lang_of(e.to) == Language::Html)
        .expect("end tag bridges back to HTML");
    assert!(back.index >= doc.len() - 9);
    // inside the script body, index 8 is a JS state
    assert_eq!(lang_of(t.state_at(8).unwrap()), Language::Js);
    assert_eq!(name_of(*t.labels().last().unwrap()), "HTML_Start");
}

#[test]
fn style_element_bridges_into_css_and_back() {
    let doc = b"<style>body{color:red}</style>";
    let t = trace(doc);
    let css_entry = t
        .events()
        .iter()
        .find(|e| lang_of(e.to) == Language::Css)
        .expect("events into CSS after <style>");
    assert_eq!(css_entry.index, 6, "the closing > of <style> enters CSS");
    assert!(t
        .events()
        .iter()
        .any(|e| lang_of(e.from) == Language::Css && lang_of(e.to) == Language::Html));
    let body = id(Language::Css, "Selector");
    assert_eq!(t.state_at(8).unwrap(), body);
    assert_eq!(name_of(t.state_at(12).unwrap()), "Property_Name");
    assert_eq!(name_of(t.state_at(19).unwrap()), "Property_Value");
}

#[test]
fn language_closure_between_bridges() {
    let doc = b"<script>var s = \"x<y\"; f(1);</script>ok";
    let t = trace(doc);
    let enter = t.events().iter().find(|e| lang_of(e.to) == Language::Js).unwrap().index;
    let exit = t
        .events()
        .iter()
        .find(|e| lang_of(e.from) == Language::Js && lang_of(e.to) == Language::Html)
        .unwrap()
        .index;
    for i in enter..exit {
        assert_eq!(lang_of(t.state_at(i).unwrap()), Language::Js, "byte {i}");
    }
}

#[test]
fn quoted_literal_is_inert_for_plain_text() {
    // the benign scenario: a reflected value inside a JS double-quoted string
    let doc = b"<script>var user = \"admin\";</script>";
    let t = trace(doc);
    let start = doc.windows(5).position(|w| w == b"admin").unwrap();
    let quoted = id(Language::Js, "Quoted_Literal");
    for i in start..start + 5 {
        assert_eq!(t.state_at(i).unwrap(), quoted, "byte {i}");
    }
    assert!(t.events().iter().all(|e| !(start..start + 5).contains(&e.index)));
}

#[test]
fn string_close_and_statement_end_events() {
    let doc = b"<script>var a = \"x\"; y(1);</script>";
    let t = trace(doc);
    let quote_close = 18; // the closing quote of "x"
    let semi = 19;
    let quoted = id(Language::Js, "Quoted_Literal");
    let after = id(Language::Js, "After_Value");
    let stmnt_end = id(Language::Js, "Stmnt_End");
    assert!(t
        .events()
        .iter()
        .any(|e| e.index == quote_close && e.from == quoted && e.to == after));
    assert!(t.events().iter().any(|e| e.index == semi && e.to == stmnt_end));
}

#[test]
fn end_tag_closes_script_from_inside_a_string() {
    let doc = b"<script>var s = \"</script><img src=x>";
    let t = trace(doc);
    let lt = 17;
    let html_events: Vec<usize> = t
        .events()
        .iter()
        .filter(|e| lang_of(e.from) == Language::Js && lang_of(e.to) == Language::Html)
        .map(|e| e.index)
        .collect();
    assert_eq!(html_events, vec![lt + 8], "bridge fires at the > of </script>");
    // the <img> afterwards parses as HTML again
    assert_eq!(name_of(t.state_at(doc.len() - 2).unwrap()), "Attribute_Value_Unquoted");
}

#[test]
fn end_tag_close_is_case_insensitive_and_allows_whitespace() {
    for doc in [&b"<script>x</SCRIPT>"[..], &b"<script>x</script >"[..]] {
        let t = trace(doc);
        assert_eq!(name_of(*t.labels().last().unwrap()), "HTML_Start", "{:?}", doc);
    }
}

#[test]
fn lookalike_end_tag_stays_in_the_string() {
    let doc = b"<script>var s = \"</scrap>\"; f();</script>";
    let t = trace(doc);
    let body = 17..25;
    let quoted = id(Language::Js, "Quoted_Literal");
    for i in body {
        assert_eq!(t.state_at(i).unwrap(), quoted, "byte {i}");
    }
    assert_eq!(name_of(*t.labels().last().unwrap()), "HTML_Start");
}

#[test]
fn escaped_slash_does_not_close_the_script() {
    let doc = b"<script>var s = \"<\\/script>\"; f();</script>";
    let t = trace(doc);
    let quoted = id(Language::Js, "Quoted_Literal");
    assert_eq!(t.state_at(20).unwrap(), quoted, "escaped close stays literal");
    let bridge = t
        .events()
        .iter()
        .filter(|e| lang_of(e.to) == Language::Html && lang_of(e.from) != Language::Html)
        .count();
    assert_eq!(bridge, 1, "only the real end tag bridges");
}

#[test]
fn character_references_are_inert_text() {
    let t = trace(b"a &lt;script&gt; b");
    assert!(t.events().is_empty());
}

#[test]
fn comment_hyphens_do_not_produce_events() {
    let doc = b"<!-- a-b -- c -->x";
    let t = trace(doc);
    let comment = id(Language::Html, "Comment");
    assert!(t.events().iter().all(|e| e.index <= 3 || e.index >= doc.len() - 2));
    assert_eq!(t.state_at(7).unwrap(), comment);
    assert_eq!(name_of(*t.labels().last().unwrap()), "HTML_Start");
}

#[test]
fn attribute_values_are_inert_data() {
    let doc = b"<input value=\"a <b> & c\">";
    let t = trace(doc);
    let open = 13;
    let close = doc.len() - 2;
    assert!(t.events().iter().all(|e| !(open + 1..close).contains(&e.index)));
    let dq = id(Language::Html, "Attribute_Value_Double");
    assert_eq!(t.state_at(open + 3).unwrap(), dq);
}

#[test]
fn quote_inside_unquoted_attribute_value_is_an_error_signal() {
    let doc = b"<img src=x\"y>";
    let t = trace(doc);
    assert!(t.events().iter().any(|e| e.is_error && e.index == 10));
}

#[test]
fn regex_versus_division_by_previous_token() {
    let regex = id(Language::Js, "Regex_Literal");
    let t = trace(b"<script>a = /x/g;</script>");
    assert_eq!(t.state_at(13).unwrap(), regex);
    let t = trace(b"<script>b = a / 2;</script>");
    assert!(t.labels().iter().all(|&l| l != regex));
    assert!(t.events().iter().all(|e| !e.is_error));
}

#[test]
fn failed_end_tag_guard_relexes_as_regex() {
    let doc = b"<script>a </scrap/ ;</script>";
    let t = trace(doc);
    let regex = id(Language::Js, "Regex_Literal");
    assert_eq!(t.state_at(12).unwrap(), regex, "slash after < re-lexed as regex body");
    assert_eq!(name_of(*t.labels().last().unwrap()), "HTML_Start");
}

#[test]
fn template_literal_tracks_nested_expression() {
    let doc = b"<script>var t = `x ${a + 1} y`;</script>";
    let t = trace(doc);
    let template = id(Language::Js, "Template_Literal");
    let ident = id(Language::Js, "Identifier");
    assert_eq!(t.state_at(17).unwrap(), template);
    assert_eq!(t.state_at(21).unwrap(), ident);
    assert_eq!(t.state_at(28).unwrap(), template, "closing brace returns to the template");
    assert!(t.events().iter().all(|e| !e.is_error));
}

#[test]
fn at_rule_and_url_token_nest_cleanly() {
    let doc = b"<style>@media screen { a { background: url(//e) center } }</style>x";
    let t = trace(doc);
    assert!(t.events().iter().all(|e| !e.is_error), "{:?}", t.events());
    let url = id(Language::Css, "Url_Token");
    let at = id(Language::Css, "At_Rule");
    assert!(t.labels().contains(&at));
    assert!(t.labels().contains(&url));
    assert_eq!(name_of(*t.labels().last().unwrap()), "HTML_Start");
}

#[test]
fn ordinary_for_loop_is_error_free() {
    let doc = b"<script>for (var i = 0; i < 10; i++) { go(i); }</script>";
    let t = trace(doc);
    assert!(t.events().iter().all(|e| !e.is_error), "{:?}", t.events());
    assert_eq!(name_of(*t.labels().last().unwrap()), "HTML_Start");
}

#[test]
fn asi_fires_at_the_newline_between_statements() {
    let doc = b"<script>a = 1\nb = 2</script>";
    let t = trace(doc);
    let nl = 13;
    let asi = id(Language::Js, "Automatic_Semicolon_Insertion");
    let ev = t.events().iter().find(|e| e.to == asi).expect("asi event");
    assert_eq!(ev.index, nl);
    assert_eq!(name_of(t.state_at(nl).unwrap()), "Stmnt_End");
}

#[test]
fn explicit_semicolons_mean_no_asi_events() {
    let doc = b"<script>a = 1; b = 2;</script>";
    let t = trace(doc);
    let asi = id(Language::Js, "Automatic_Semicolon_Insertion");
    assert!(t.events().iter().all(|e| e.to != asi));
}

#[test]
fn restricted_production_inserts_immediately() {
    let doc = b"<script>return\nx</script>";
    let t = trace(doc);
    let asi = id(Language::Js, "Automatic_Semicolon_Insertion");
    let ev = t.events().iter().find(|e| e.to == asi).expect("asi event");
    assert_eq!(ev.index, 14, "right at the newline after return");
}

#[test]
fn call_continuation_suppresses_asi() {
    let doc = b"<script>a = b\n(c);</script>";
    let t = trace(doc);
    let asi = id(Language::Js, "Automatic_Semicolon_Insertion");
    assert!(t.events().iter().all(|e| e.to != asi));
    assert!(t.events().iter().all(|e| !e.is_error));
}

/// Post-ASI label sequences equal the reference trace with explicit
/// semicolons, position-wise, skipping the inserted bytes.
fn assert_asi_labels_match(src: &str, insert_at: &[usize]) {
    let asi_doc = format!("<script>{src}</script>");
    let mut with_semis = String::new();
    let mut prev = 0;
    for &p in insert_at {
        with_semis.push_str(&src[prev..p]);
        with_semis.push(';');
        prev = p;
    }
    with_semis.push_str(&src[prev..]);
    let ref_doc = format!("<script>{with_semis}</script>");

    let asi_trace = trace(asi_doc.as_bytes());
    let ref_trace = trace(ref_doc.as_bytes());
    let pre = "<script>".len();
    for k in 0..src.len() {
        let shift = insert_at.iter().filter(|&&p| p <= k).count();
        let a = asi_trace.state_at(pre + k).unwrap();
        let r = ref_trace.state_at(pre + k + shift).unwrap();
        assert_eq!(
            name_of(a),
            name_of(r),
            "byte {k} ({:?}) of {src:?}",
            src.as_bytes()[k] as char
        );
    }
}

#[test]
fn asi_labels_equal_explicit_semicolon_reference() {
    assert_asi_labels_match("a = 1\nb = 2", &[5]);
    assert_asi_labels_match("return\nx", &[6]);
    assert_asi_labels_match("f()\ng()", &[3]);
    assert_asi_labels_match("x = a + b\ny = 1", &[9]);
}

#[test]
fn parse_error_inside_script_recovers_and_bridges_back() {
    let doc = b"<script>var a = ((;</script>";
    let t = trace(doc);
    let err = t.events().iter().find(|e| e.is_error).expect("is_error event in script body");
    assert_eq!(err.index, 18, "the ; inside the group");
    assert_eq!(lang_of(err.to), Language::Js);
    assert_eq!(name_of(*t.labels().last().unwrap()), "HTML_Start", "still bridges back");
}

#[test]
fn well_formed_document_has_no_error_events() {
    let doc = br#"<!DOCTYPE html>
<html><head><style>body { color: red; } a.x { margin: 0 }</style></head>
<body onload="go">
<h1 class="t">Hello &amp; welcome</h1>
<script>
var user = "admin";
var n = 1 + 2;
if (n > 1) { log("hi", n); }
</script>
<!-- footer -->
</body></html>"#;
    let t = trace(doc);
    let errs: Vec<_> = t.events().iter().filter(|e| e.is_error).collect();
    assert!(errs.is_empty(), "unexpected error events: {errs:?}");
}

#[test]
fn deep_paren_nesting_hits_the_stack_cap() {
    let mut doc = b"<script>".to_vec();
    doc.extend(std::iter::repeat(b'(').take(10_000));
    doc.extend_from_slice(b"</script>");
    let t = trace(&doc);
    let err = t.events().iter().find(|e| e.is_error).expect("stack cap error");
    let syntax_error = id(Language::Js, "Syntax_Error");
    assert_eq!(err.to, syntax_error);
    assert!(t.steps() <= 8 * doc.len() as u64);
}

#[test]
fn apply_asi_rejects_non_insertable_states() {
    use ctxaudit_web_langs::apply_asi;
    let spec = html_spec();
    let quoted = id(Language::Js, "Quoted_Literal");
    let err = apply_asi(spec, quoted).unwrap_err();
    assert_eq!(err.state, "Quoted_Literal");
    assert!(apply_asi(spec, id(Language::Js, "After_Value")).is_ok());
}

proptest! {
    /// Splicing delimiter-free text into a JS double-quoted string produces
    /// no events inside the spliced span.
    #[test]
    fn benign_literal_inertness(s in "[ -~]{0,40}") {
        prop_assume!(!s.contains('"') && !s.contains('\\'));
        prop_assume!(!s.to_ascii_lowercase().contains("</script"));
        let doc = format!("<script>var v = \"{s}\";</script>");
        let t = trace(doc.as_bytes());
        let start = 17;
        let end = start + s.len();
        prop_assert!(t.events().iter().all(|e| !(start..end).contains(&e.index)));
    }

    /// Attribute values behave the same for their quote kind.
    #[test]
    fn attribute_value_inertness(s in "[ -~]{0,40}") {
        prop_assume!(!s.contains('"'));
        let doc = format!("<a href=\"{s}\">x</a>");
        let t = trace(doc.as_bytes());
        let start = 9;
        let end = start + s.len();
        prop_assert!(t.events().iter().all(|e| !(start..end).contains(&e.index)));
    }

    /// Deterministic: identical input, identical trace.
    #[test]
    fn determinism(doc in proptest::collection::vec(any::<u8>(), 0..200)) {
        let a = run_automaton(&doc, html_spec(), None, &cfg()).unwrap();
        let b = run_automaton(&doc, html_spec(), None, &cfg()).unwrap();
        prop_assert_eq!(a.labels(), b.labels());
        prop_assert_eq!(a.events(), b.events());
        prop_assert_eq!(a.steps(), b.steps());
    }

    /// Linear step bound and event/label consistency on arbitrary bytes.
    #[test]
    fn linear_steps_and_event_label_consistency(doc in proptest::collection::vec(any::<u8>(), 0..300)) {
        let t = run_automaton(&doc, html_spec(), None, &cfg()).unwrap();
        prop_assert!(t.steps() <= 8 * doc.len() as u64 + 1);
        prop_assert_eq!(t.len(), doc.len());
        for i in 1..t.len() {
            let prev = t.labels()[i - 1];
            let cur = t.labels()[i];
            if prev != cur {
                prop_assert!(
                    t.events().iter().any(|e| e.index == i),
                    "label change at {i} without event"
                );
            }
        }
        // events are ordered
        prop_assert!(t.events().windows(2).all(|w| w[0].index <= w[1].index));
    }

    /// Labels of the full run match the label each prefix run settles on
    /// within a short window.
    #[test]
    fn prefix_label_stability(doc in "[a-z<>\"'=/ ;(){}]{0,80}") {
        let doc = doc.as_bytes();
        let full = run_automaton(doc, html_spec(), None, &cfg()).unwrap();
        for i in 0..doc.len() {
            let settled = (i + 1..=doc.len().min(i + 16)).any(|k| {
                let t = run_automaton(&doc[..k], html_spec(), None, &cfg()).unwrap();
                t.labels()[i] == full.labels()[i]
            });
            prop_assert!(settled, "label at {i} never settles");
        }
    }
}
