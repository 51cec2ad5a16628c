//! Per-byte trace listing for walkthrough debugging.

use ctxaudit_core::{
    run_automaton, Catalog, ContentKind, EngineConfig, EngineError, ParseTrace,
};
use ctxaudit_shell_lang::shell_spec;
use ctxaudit_web_langs::html_spec;

/// Renders `(offset, glyph, state, events)` lines with a header; stable
/// ordering, one line per parsed byte.
pub fn dump_trace(content: &[u8], kind: ContentKind) -> Result<String, EngineError> {
    let cfg = EngineConfig::default();
    let trace = match kind {
        ContentKind::HtmlDocument => run_automaton(content, html_spec(), None, &cfg)?,
        ContentKind::ShellCommand => run_automaton(content, shell_spec(), None, &cfg)?,
    };
    Ok(render(content, &trace))
}

fn glyph(byte: u8) -> String {
    match byte {
        b'\n' => "\\n".to_string(),
        b'\t' => "\\t".to_string(),
        b'\r' => "\\r".to_string(),
        0x20..=0x7e => (byte as char).to_string(),
        _ => format!("\\x{byte:02x}"),
    }
}

fn render(content: &[u8], trace: &ParseTrace) -> String {
    let cat = Catalog::shared();
    let mut out = String::new();
    out.push_str(&format!(
        "offset  byte  state                          events ({} total, {} steps)\n",
        trace.events().len(),
        trace.steps()
    ));
    for (i, label) in trace.labels().iter().enumerate() {
        let events: Vec<String> = trace
            .events()
            .iter()
            .filter(|e| e.index == i)
            .map(|e| {
                format!(
                    "{} -> {}{}",
                    cat.name_of(e.from),
                    cat.name_of(e.to),
                    if e.is_error { " [error]" } else { "" }
                )
            })
            .collect();
        out.push_str(&format!(
            "{:6}  {:4}  {:30} {}\n",
            i,
            glyph(content[i]),
            cat.name_of(*label),
            events.join("; ")
        ));
    }
    out
}
