//! Line-delimited JSON corpus format and the replay runner.
//!
//! One record per line: `label` is the ground-truth class of the request,
//! `expected` the verdict the detector should reach (they differ exactly for
//! the documented single-token shell limitation), `category` tags the
//! injection context for the breakdown. Bodies and commands are base64 to
//! keep fixtures byte-exact.

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use ctxaudit_core::{ContentKind, Decision};
use ctxaudit_detector::{analyze_exchange, ReflectionConfig};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub label: String,
    pub category: String,
    pub kind: String,
    pub request_params: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub response_body_b64: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command_b64: Option<String>,
    pub expected: String,
}

impl CorpusRecord {
    pub fn content_kind(&self) -> Result<ContentKind, String> {
        match self.kind.as_str() {
            "html-document" => Ok(ContentKind::HtmlDocument),
            "shell-command" => Ok(ContentKind::ShellCommand),
            other => Err(format!("unknown kind {other:?}")),
        }
    }

    pub fn content(&self) -> Result<Vec<u8>, String> {
        let encoded = match self.content_kind()? {
            ContentKind::HtmlDocument => self.response_body_b64.as_ref(),
            ContentKind::ShellCommand => self.command_b64.as_ref(),
        }
        .ok_or("record is missing its content field")?;
        B64.decode(encoded).map_err(|e| format!("bad base64: {e}"))
    }

    pub fn expects_malicious(&self) -> Result<bool, String> {
        match self.expected.as_str() {
            "malicious" => Ok(true),
            "benign" => Ok(false),
            other => Err(format!("unknown expected verdict {other:?}")),
        }
    }
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct CategoryStats {
    pub total: usize,
    pub flagged: usize,
}

/// Deterministic replay metrics.
#[derive(Debug, Default, Clone)]
pub struct Metrics {
    pub total: usize,
    pub flagged: usize,
    /// Expected malicious, decided benign.
    pub missed: usize,
    /// Expected benign, decided malicious.
    pub false_flags: usize,
    pub skipped: usize,
    pub by_category: BTreeMap<String, CategoryStats>,
    pub mismatches: Vec<String>,
}

impl Metrics {
    pub fn clean(&self) -> bool {
        self.missed == 0 && self.false_flags == 0
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "total {}  flagged {}  missed {}  false-flags {}  skipped {}",
            self.total, self.flagged, self.missed, self.false_flags, self.skipped
        )?;
        for (category, stats) in &self.by_category {
            writeln!(f, "  {:8} {:4} records, {:4} flagged", category, stats.total, stats.flagged)?;
        }
        for m in &self.mismatches {
            writeln!(f, "  mismatch: {m}")?;
        }
        Ok(())
    }
}

#[derive(Debug)]
pub enum CorpusError {
    Io(std::io::Error),
    /// Malformed record under `--fail-fast`.
    Record { line: usize, message: String },
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::Io(e) => write!(f, "corpus: {e}"),
            CorpusError::Record { line, message } => {
                write!(f, "corpus line {line}: {message}")
            }
        }
    }
}

impl std::error::Error for CorpusError {}

impl From<std::io::Error> for CorpusError {
    fn from(e: std::io::Error) -> CorpusError {
        CorpusError::Io(e)
    }
}

/// Decides one record through the same pipeline the deployments use.
pub fn run_record(record: &CorpusRecord, cfg: &ReflectionConfig) -> Result<Decision, String> {
    let kind = record.content_kind()?;
    let content = record.content()?;
    let params: Vec<(String, Vec<u8>)> = record
        .request_params
        .iter()
        .map(|(k, v)| (k.clone(), v.as_bytes().to_vec()))
        .collect();
    let report =
        analyze_exchange(&params, &content, kind, cfg).map_err(|e| format!("engine fault: {e}"))?;
    Ok(report.verdict.decision)
}

/// Replays a corpus file. Malformed records abort under `fail_fast`,
/// otherwise they are reported with their line number and skipped.
pub fn run_corpus(
    path: &Path,
    cfg: &ReflectionConfig,
    fail_fast: bool,
) -> Result<Metrics, CorpusError> {
    let text = std::fs::read_to_string(path)?;
    let mut metrics = Metrics::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let outcome = serde_json::from_str::<CorpusRecord>(line)
            .map_err(|e| e.to_string())
            .and_then(|record| {
                let expected = record.expects_malicious()?;
                let decision = run_record(&record, cfg)?;
                Ok((record, expected, decision))
            });
        let (record, expected, decision) = match outcome {
            Ok(v) => v,
            Err(message) => {
                if fail_fast {
                    return Err(CorpusError::Record { line: line_no, message });
                }
                metrics.skipped += 1;
                metrics.mismatches.push(format!("line {line_no}: malformed ({message})"));
                continue;
            }
        };
        metrics.total += 1;
        let stats = metrics.by_category.entry(record.category.clone()).or_default();
        stats.total += 1;
        let flagged = decision == Decision::Malicious;
        if flagged {
            metrics.flagged += 1;
            stats.flagged += 1;
        }
        match (expected, flagged) {
            (true, false) => {
                metrics.missed += 1;
                metrics.mismatches.push(format!("line {line_no}: expected malicious, got benign"));
            }
            (false, true) => {
                metrics.false_flags += 1;
                metrics
                    .mismatches
                    .push(format!("line {line_no}: expected benign, got malicious"));
            }
            _ => {}
        }
    }
    Ok(metrics)
}
