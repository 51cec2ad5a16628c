//! The detection module: given generated output and the byte spans of
//! untrusted input inside it, parse from the first byte to the last tainted
//! byte and flag any context switch or parse error an untrusted byte caused.
//!
//! The reflection finder is the simplest user-input detector: verbatim
//! string matching of request parameter values against the generated
//! content. Matching against transformed input is a pluggable concern; see
//! [`ReflectionFinder`].

mod reflect;

pub use reflect::{
    find_reflections, percent_decode, ReflectionConfig, ReflectionFinder, VerbatimFinder,
};

use ctxaudit_core::{
    run_automaton, Catalog, ContentKind, EngineConfig, EngineError, Language, StateId,
    TaintedContent, TransitionEvent, Verdict,
};
use ctxaudit_shell_lang::shell_spec;
use ctxaudit_web_langs::html_spec;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DetectError {
    /// The engine failed outside any taint span; deployments decide whether
    /// to fail open or closed.
    #[error("engine fault: {0}")]
    Engine(#[from] EngineError),
}

/// Decision plus everything a deployment wants to log about it.
#[derive(Debug, Clone)]
pub struct DetectionReport {
    pub verdict: Verdict,
    /// All transition events whose index falls inside a taint span.
    pub events_in_taint: Vec<TransitionEvent>,
    /// Name of the request parameter whose reflection contains the evidence.
    pub matched_param: Option<String>,
    /// The taint span the evidence falls in.
    pub matched_span: Option<ctxaudit_core::ByteSpan>,
    pub config: ReflectionConfig,
    pub elapsed: Duration,
}

fn first_in_taint<'a>(
    events: &'a [TransitionEvent],
    content: &TaintedContent,
) -> Option<&'a TransitionEvent> {
    events.iter().find(|e| content.is_tainted(e.index))
}

fn error_state_for(state: StateId, kind: ContentKind) -> StateId {
    let cat = Catalog::shared();
    let language = cat.get(state).map(|s| s.language).unwrap_or(match kind {
        ContentKind::HtmlDocument => Language::Html,
        ContentKind::ShellCommand => Language::Shell,
    });
    cat.require(language, "Syntax_Error")
}

/// Runs the automaton for the content kind up to the end of the last taint
/// span and decides. Malicious iff some transition event (parse errors
/// included) has its index inside a taint span; an empty taint set is benign
/// without parsing.
pub fn detect(content: &TaintedContent) -> Result<Verdict, DetectError> {
    detect_with(content, &EngineConfig::default()).map(|(v, _)| v)
}

/// As [`detect`], also returning every event that fell inside taint.
pub fn detect_with(
    content: &TaintedContent,
    cfg: &EngineConfig,
) -> Result<(Verdict, Vec<TransitionEvent>), DetectError> {
    let Some(stop) = content.last_taint_end() else {
        return Ok((Verdict::benign(0), Vec::new()));
    };
    let result = match content.kind() {
        ContentKind::HtmlDocument => {
            run_automaton(content.bytes(), html_spec(), Some(stop), cfg)
        }
        ContentKind::ShellCommand => {
            run_automaton(content.bytes(), shell_spec(), Some(stop), cfg)
        }
    };
    match result {
        Ok(trace) => {
            let hits: Vec<TransitionEvent> = trace
                .events()
                .iter()
                .filter(|e| content.is_tainted(e.index))
                .copied()
                .collect();
            let verdict = match hits.first() {
                Some(ev) => Verdict::malicious(*ev, trace.len()),
                None => Verdict::benign(trace.len()),
            };
            Ok((verdict, hits))
        }
        Err(EngineError::StepBudgetExceeded { index, state, steps, partial }) => {
            // the loop itself counts as a detection when the taint caused it
            if let Some(ev) = first_in_taint(partial.events(), content) {
                return Ok((Verdict::malicious(*ev, partial.len()), vec![*ev]));
            }
            if content.is_tainted(index) {
                let ev = TransitionEvent {
                    index,
                    from: state,
                    to: error_state_for(state, content.kind()),
                    is_error: true,
                };
                return Ok((Verdict::malicious(ev, partial.len()), vec![ev]));
            }
            Err(EngineError::StepBudgetExceeded { index, state, steps, partial }.into())
        }
        Err(e) => Err(e.into()),
    }
}

/// Full pipeline for one exchange: find the verbatim reflections of the
/// request parameters inside the generated output, then detect over the
/// merged spans. When no reflections exist the detector is not invoked.
pub fn analyze_exchange(
    params: &[(String, Vec<u8>)],
    body: &[u8],
    kind: ContentKind,
    cfg: &ReflectionConfig,
) -> Result<DetectionReport, DetectError> {
    let started = Instant::now();
    let mut per_param: Vec<(usize, Vec<ctxaudit_core::ByteSpan>)> = Vec::new();
    let mut all = Vec::new();
    for (i, (_, value)) in params.iter().enumerate() {
        let mut spans = Vec::new();
        for candidate in reflect::candidates(value) {
            spans.extend(find_reflections(&[&candidate], body, cfg));
        }
        let spans = ctxaudit_core::coalesce(spans);
        all.extend(spans.iter().copied());
        per_param.push((i, spans));
    }
    let merged = ctxaudit_core::coalesce(all);
    if merged.is_empty() {
        return Ok(DetectionReport {
            verdict: Verdict::benign(0),
            events_in_taint: Vec::new(),
            matched_param: None,
            matched_span: None,
            config: cfg.clone(),
            elapsed: started.elapsed(),
        });
    }
    let content = TaintedContent::new(body.to_vec(), merged.clone(), kind)
        .expect("coalesced spans are sorted and disjoint");
    let (verdict, events_in_taint) = detect_with(&content, &EngineConfig::default())?;
    let matched_param = verdict.evidence.and_then(|ev| {
        per_param
            .iter()
            .find(|(_, spans)| spans.iter().any(|s| s.contains(ev.index)))
            .map(|(i, _)| params[*i].0.clone())
    });
    let matched_span = verdict
        .evidence
        .and_then(|ev| merged.iter().find(|s| s.contains(ev.index)).copied());
    Ok(DetectionReport {
        verdict,
        events_in_taint,
        matched_param,
        matched_span,
        config: cfg.clone(),
        elapsed: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ctxaudit_core::{ByteSpan, Decision};

    fn html(body: &str, taint: Vec<ByteSpan>) -> TaintedContent {
        TaintedContent::new(body.as_bytes().to_vec(), taint, ContentKind::HtmlDocument).unwrap()
    }

    fn shell(cmd: &str, taint: Vec<ByteSpan>) -> TaintedContent {
        TaintedContent::new(cmd.as_bytes().to_vec(), taint, ContentKind::ShellCommand).unwrap()
    }

    fn span_of(hay: &str, needle: &str) -> ByteSpan {
        let start = hay.find(needle).unwrap();
        ByteSpan::new(start, start + needle.len()).unwrap()
    }

    const PAGE_BENIGN: &str =
        "<html><body><script>document.write(\"Username is: \");\nvar str = \"admin\";\n</script></body></html>";

    #[test]
    fn benign_reflection_inside_quoted_literal() {
        let taint = span_of(PAGE_BENIGN, "admin");
        let v = detect(&html(PAGE_BENIGN, vec![taint])).unwrap();
        assert_eq!(v.decision, Decision::Benign);
        assert!(v.evidence.is_none());
    }

    #[test]
    fn string_breakout_is_malicious_at_the_quote() {
        let page =
            "<html><body><script>var str = \"admin\"; document.write(user);\"suffix\";</script></body></html>";
        let payload = "admin\"; document.write(user);";
        let taint = span_of(page, payload);
        let v = detect(&html(page, vec![taint])).unwrap();
        assert_eq!(v.decision, Decision::Malicious);
        let ev = v.evidence.unwrap();
        assert_eq!(ev.index, page.find("admin\"").unwrap() + 5, "the breakout quote");
        assert_eq!(Catalog::shared().name_of(ev.from), "Quoted_Literal");
    }

    #[test]
    fn waf_bypass_payload_is_malicious() {
        let page = "<script>var str = \"Admin\";alert(1);\"\";</script>";
        let taint = span_of(page, "Admin\";alert(1);\"");
        let v = detect(&html(page, vec![taint])).unwrap();
        assert_eq!(v.decision, Decision::Malicious);
    }

    #[test]
    fn empty_taint_is_benign_without_parsing() {
        let v = detect(&html("<script>junk((", vec![])).unwrap();
        assert_eq!(v.decision, Decision::Benign);
        assert_eq!(v.bytes_parsed, 0);
    }

    #[test]
    fn shell_multi_token_injection_is_malicious() {
        let cmd = "cat userinfo.txt | grep Auditor; rm userinfo.txt";
        let taint = span_of(cmd, "Auditor; rm userinfo.txt");
        let v = detect(&shell(cmd, vec![taint])).unwrap();
        assert_eq!(v.decision, Decision::Malicious);
        assert_eq!(v.evidence.unwrap().index, cmd.find(';').unwrap());
    }

    #[test]
    fn shell_single_token_is_benign() {
        let cmd = "whoami";
        let v = detect(&shell(cmd, vec![ByteSpan::new(0, 6).unwrap()])).unwrap();
        assert_eq!(v.decision, Decision::Benign);
        assert_eq!(v.bytes_parsed, 6);
    }

    #[test]
    fn detection_stops_at_last_tainted_byte() {
        let page = "<p>x</p><script>((((((((";
        let taint = span_of(page, "x");
        let v = detect(&html(page, vec![taint])).unwrap();
        assert_eq!(v.decision, Decision::Benign);
        assert_eq!(v.bytes_parsed, 4, "never parses past the taint");
    }

    #[test]
    fn analyze_exchange_reflective_page_sinks() {
        let make_page = |term: &str, id: &str, color: &str| {
            format!(
                "<html><body><style>body{{ background-color: {color} }}</style>\
                 <script>var str = \"{id}\";</script>\
                 <h2>You were searching for: '{term}'</h2></body></html>"
            )
        };
        let cfg = ReflectionConfig::default();

        // benign: every sink reflects harmless text
        let page = make_page("shoes", "admin", "red");
        let params = vec![
            ("term".to_string(), b"shoes".to_vec()),
            ("id".to_string(), b"admin".to_vec()),
            ("color".to_string(), b"red".to_vec()),
        ];
        let report =
            analyze_exchange(&params, page.as_bytes(), ContentKind::HtmlDocument, &cfg).unwrap();
        assert_eq!(report.verdict.decision, Decision::Benign);

        // html-context exploit
        let payload = "<script>alert('injection');</script>";
        let page = make_page(payload, "admin", "red");
        let params = vec![("term".to_string(), payload.as_bytes().to_vec())];
        let report =
            analyze_exchange(&params, page.as_bytes(), ContentKind::HtmlDocument, &cfg).unwrap();
        assert_eq!(report.verdict.decision, Decision::Malicious);
        assert_eq!(report.matched_param.as_deref(), Some("term"));

        // css-context scriptless exploit
        let payload = "red }; a[href*='A'] { background: url(x?A); }";
        let page = make_page("shoes", "admin", payload);
        let params = vec![("color".to_string(), payload.as_bytes().to_vec())];
        let report =
            analyze_exchange(&params, page.as_bytes(), ContentKind::HtmlDocument, &cfg).unwrap();
        assert_eq!(report.verdict.decision, Decision::Malicious);
        assert!(!report.events_in_taint.is_empty());
    }

    #[test]
    fn analyze_exchange_without_reflection_skips_the_detector() {
        let cfg = ReflectionConfig::default();
        let params = vec![("q".to_string(), b"notinpage".to_vec())];
        let report =
            analyze_exchange(&params, b"<p>hello</p>", ContentKind::HtmlDocument, &cfg).unwrap();
        assert_eq!(report.verdict.decision, Decision::Benign);
        assert_eq!(report.verdict.bytes_parsed, 0);
    }

    #[test]
    fn one_run_covers_all_spans_up_to_the_last() {
        let cfg = ReflectionConfig::default();
        let page = "<p>shoes</p><p>padding</p><p>shoes</p><script>(((";
        let params = vec![("term".to_string(), b"shoes".to_vec())];
        let report =
            analyze_exchange(&params, page.as_bytes(), ContentKind::HtmlDocument, &cfg).unwrap();
        assert_eq!(report.verdict.decision, Decision::Benign);
        let second_end = page.rfind("shoes").unwrap() + 5;
        assert_eq!(report.verdict.bytes_parsed, second_end, "stops at the last span");
    }

    #[test]
    fn budget_exhaustion_inside_taint_is_malicious_evidence() {
        use ctxaudit_core::EngineConfig;
        let starved = EngineConfig { step_budget_factor: 0, ..EngineConfig::default() };
        let content = html("<p>x</p>", vec![ByteSpan::new(0, 4).unwrap()]);
        let (verdict, _) = detect_with(&content, &starved).unwrap();
        assert_eq!(verdict.decision, Decision::Malicious);
        let ev = verdict.evidence.unwrap();
        assert!(ev.is_error);
        assert_eq!(ev.index, 0);
        // exhaustion outside any taint span is an engine fault instead
        let content = html("<p>x</p>", vec![ByteSpan::new(5, 7).unwrap()]);
        assert!(detect_with(&content, &starved).is_err());
    }

    #[test]
    fn percent_encoded_payload_matches_decoded_reflection() {
        let cfg = ReflectionConfig::default();
        // the application decoded %3C to < before reflecting
        let page = "<p><script>alert(1)</script></p>";
        let params = vec![(
            "q".to_string(),
            b"%3Cscript%3Ealert(1)%3C/script%3E".to_vec(),
        )];
        let report =
            analyze_exchange(&params, page.as_bytes(), ContentKind::HtmlDocument, &cfg).unwrap();
        assert_eq!(report.verdict.decision, Decision::Malicious);
    }
}
