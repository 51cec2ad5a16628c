//! The per-exchange decision: analyzable or not, benign or malicious,
//! forward or block. Pure logic, independent of sockets.

use ctxaudit_core::{Catalog, ContentKind, Decision};
use ctxaudit_detector::{analyze_exchange, ReflectionConfig};
use flate2::read::{DeflateDecoder, GzDecoder, ZlibDecoder};
use std::io::Read;

/// A fully buffered request/response pair ready for analysis.
#[derive(Debug, Clone)]
pub struct HttpExchange {
    pub method: String,
    pub url: String,
    /// Query, urlencoded-body and cookie values (raw bytes; the detector
    /// also matches their percent-decoded forms). Header values are not
    /// candidate sources.
    pub params: Vec<(String, Vec<u8>)>,
    pub status: u16,
    pub content_type: Option<String>,
    pub content_encoding: Option<String>,
    /// De-framed body as received (possibly still compressed).
    pub body: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Block,
    LogOnly,
}

#[derive(Debug, Clone)]
pub struct ProxyConfig {
    pub listen: String,
    /// Reverse-proxy upstream; forward/CONNECT mode when absent.
    pub upstream: Option<String>,
    pub reflection: ReflectionConfig,
    pub block_status: u16,
    pub mode: Mode,
    pub analyzable_types: Vec<String>,
    pub max_body: usize,
    /// Block on engine faults instead of forwarding.
    pub fail_closed: bool,
}

impl Default for ProxyConfig {
    fn default() -> ProxyConfig {
        ProxyConfig {
            listen: "127.0.0.1:8880".to_string(),
            upstream: None,
            reflection: ReflectionConfig::default(),
            block_status: 404,
            mode: Mode::Block,
            analyzable_types: vec!["text/html".to_string()],
            max_body: 8 * 1024 * 1024,
            fail_closed: false,
        }
    }
}

/// What the service does with the buffered response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProxyAction {
    Forward,
    Block(u16),
    ForwardWithLog,
}

/// One line-delimited JSON log record per noteworthy exchange.
#[derive(Debug, Clone)]
pub struct LogRecord(pub serde_json::Value);

fn decompress(encoding: Option<&str>, body: &[u8]) -> Option<Vec<u8>> {
    let mut out = Vec::new();
    match encoding.map(|e| e.trim().to_ascii_lowercase()).as_deref() {
        None | Some("") | Some("identity") => return Some(body.to_vec()),
        Some("gzip") | Some("x-gzip") => GzDecoder::new(body).read_to_end(&mut out).ok()?,
        Some("deflate") => {
            // deflate in the wild is zlib-wrapped or raw
            let mut zlib = Vec::new();
            if ZlibDecoder::new(body).read_to_end(&mut zlib).is_ok() {
                return Some(zlib);
            }
            DeflateDecoder::new(body).read_to_end(&mut out).ok()?
        }
        Some(_) => return None,
    };
    Some(out)
}

fn now_millis() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// Applies the blocking contract to one exchange. Responses without
/// analyzable params, with a non-analyzable content type, or without
/// reflections forward untouched; detections block (or log in log-only
/// mode); engine faults follow the fail-open/fail-closed policy.
pub fn handle_exchange(ex: &HttpExchange, cfg: &ProxyConfig) -> (ProxyAction, Option<LogRecord>) {
    if ex.params.is_empty() {
        return (ProxyAction::Forward, None);
    }
    let analyzable = ex
        .content_type
        .as_deref()
        .map(|ct| {
            let ct = ct.to_ascii_lowercase();
            cfg.analyzable_types.iter().any(|t| ct.starts_with(t.as_str()))
        })
        .unwrap_or(false);
    if !analyzable {
        return (ProxyAction::Forward, None);
    }
    let Some(body) = decompress(ex.content_encoding.as_deref(), &ex.body) else {
        let rec = serde_json::json!({
            "timestamp": now_millis() as u64,
            "url": ex.url,
            "action": "forward-unanalyzed",
            "reason": format!("unsupported content-encoding {:?}", ex.content_encoding),
        });
        return (ProxyAction::Forward, Some(LogRecord(rec)));
    };

    match analyze_exchange(&ex.params, &body, ContentKind::HtmlDocument, &cfg.reflection) {
        Ok(report) => {
            if report.verdict.decision == Decision::Benign {
                return (ProxyAction::Forward, None);
            }
            let cat = Catalog::shared();
            let ev = report.verdict.evidence.expect("malicious verdict carries evidence");
            let action = match cfg.mode {
                Mode::Block => ProxyAction::Block(cfg.block_status),
                Mode::LogOnly => ProxyAction::ForwardWithLog,
            };
            let rec = serde_json::json!({
                "timestamp": now_millis() as u64,
                "url": ex.url,
                "param": report.matched_param,
                "span": report.matched_span.map(|s| serde_json::json!({
                    "start": s.start(),
                    "end": s.end(),
                })),
                "event": {
                    "index": ev.index,
                    "from": cat.name_of(ev.from),
                    "to": cat.name_of(ev.to),
                    "is_error": ev.is_error,
                },
                "action": match action {
                    ProxyAction::Block(code) => format!("block:{code}"),
                    _ => "log".to_string(),
                },
            });
            (action, Some(LogRecord(rec)))
        }
        Err(fault) => {
            let action = if cfg.fail_closed {
                ProxyAction::Block(cfg.block_status)
            } else {
                ProxyAction::Forward
            };
            let rec = serde_json::json!({
                "timestamp": now_millis() as u64,
                "url": ex.url,
                "action": if cfg.fail_closed { "block:fault" } else { "forward:fault" },
                "reason": fault.to_string(),
            });
            (action, Some(LogRecord(rec)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exchange(params: Vec<(&str, &[u8])>, body: &str) -> HttpExchange {
        HttpExchange {
            method: "GET".to_string(),
            url: "/index.php".to_string(),
            params: params
                .into_iter()
                .map(|(n, v)| (n.to_string(), v.to_vec()))
                .collect(),
            status: 200,
            content_type: Some("text/html; charset=utf-8".to_string()),
            content_encoding: None,
            body: body.as_bytes().to_vec(),
        }
    }

    #[test]
    fn no_params_forwards_without_analysis() {
        let ex = exchange(vec![], "<script>((((</script>");
        let (action, log) = handle_exchange(&ex, &ProxyConfig::default());
        assert_eq!(action, ProxyAction::Forward);
        assert!(log.is_none());
    }

    #[test]
    fn non_html_content_forwards() {
        let mut ex = exchange(vec![("q", b"<script>alert(1)</script>")], "{}");
        ex.content_type = Some("application/json".to_string());
        let (action, _) = handle_exchange(&ex, &ProxyConfig::default());
        assert_eq!(action, ProxyAction::Forward);
    }

    #[test]
    fn reflected_exploit_blocks_with_configured_status() {
        let payload = "x\";alert(1);\"";
        let body = format!("<script>var s = \"{payload}\";</script>");
        let ex = exchange(vec![("id", payload.as_bytes())], &body);
        let (action, log) = handle_exchange(&ex, &ProxyConfig::default());
        assert_eq!(action, ProxyAction::Block(404));
        let rec = log.unwrap().0;
        assert_eq!(rec["param"], "id");
        assert_eq!(rec["event"]["from"], "Quoted_Literal");
    }

    #[test]
    fn log_only_mode_forwards_detections() {
        let payload = "<script>alert(1)</script>";
        let body = format!("<p>{payload}</p>");
        let ex = exchange(vec![("q", payload.as_bytes())], &body);
        let cfg = ProxyConfig { mode: Mode::LogOnly, ..ProxyConfig::default() };
        let (action, log) = handle_exchange(&ex, &cfg);
        assert_eq!(action, ProxyAction::ForwardWithLog);
        assert!(log.is_some());
    }

    #[test]
    fn benign_reflection_forwards() {
        let body = "<p>hello shoes</p>";
        let ex = exchange(vec![("term", b"shoes")], body);
        let (action, log) = handle_exchange(&ex, &ProxyConfig::default());
        assert_eq!(action, ProxyAction::Forward);
        assert!(log.is_none());
    }

    #[test]
    fn gzip_body_is_decompressed_for_analysis() {
        use flate2::write::GzEncoder;
        use flate2::Compression;
        use std::io::Write;
        let payload = "<script>alert(1)</script>";
        let body = format!("<p>{payload}</p>");
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(body.as_bytes()).unwrap();
        let compressed = enc.finish().unwrap();
        let mut ex = exchange(vec![("q", payload.as_bytes())], "");
        ex.body = compressed;
        ex.content_encoding = Some("gzip".to_string());
        let (action, _) = handle_exchange(&ex, &ProxyConfig::default());
        assert_eq!(action, ProxyAction::Block(404));
    }
}
