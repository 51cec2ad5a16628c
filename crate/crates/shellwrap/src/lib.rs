//! Drop-in wrapper for `sh -c <command>` dispatch: the hosting application
//! exports the request parameters through the `CA_TAINT` environment
//! variable, the wrapper locates their verbatim reflections inside the
//! command string, runs shell-language detection, and either executes the
//! real shell with identical arguments or refuses without spawning
//! anything.
//!
//! `CA_TAINT` carries a sequence of length-prefixed records,
//! `<decimal length>:<raw bytes>` concatenated; empty or unset means no
//! taint. `CA_REAL_SHELL` overrides the `/bin/sh` default.

use ctxaudit_core::{Catalog, ContentKind, TaintedContent, Verdict};
use ctxaudit_detector::{detect, find_reflections, DetectError, ReflectionConfig};
use std::fmt;

pub const TAINT_ENV: &str = "CA_TAINT";
pub const REAL_SHELL_ENV: &str = "CA_REAL_SHELL";

/// Exit status for refused commands ("found but not executable").
pub const EXIT_REFUSED: i32 = 126;
/// Exit status when the real shell cannot be found.
pub const EXIT_NO_SHELL: i32 = 127;
/// Exit status for malformed invocation or environment.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, PartialEq, Eq)]
pub enum TaintEnvError {
    /// A record does not start with a decimal length.
    BadLength { at: usize },
    /// A record's payload runs past the end of the value.
    Truncated { at: usize },
}

impl fmt::Display for TaintEnvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaintEnvError::BadLength { at } => {
                write!(f, "{TAINT_ENV}: expected `<length>:` at byte {at}")
            }
            TaintEnvError::Truncated { at } => {
                write!(f, "{TAINT_ENV}: record at byte {at} is truncated")
            }
        }
    }
}

impl std::error::Error for TaintEnvError {}

/// Parses the length-prefixed taint records.
pub fn parse_taint_env(raw: &[u8]) -> Result<Vec<Vec<u8>>, TaintEnvError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < raw.len() {
        let start = i;
        let mut len: usize = 0;
        let mut digits = 0;
        while i < raw.len() && raw[i].is_ascii_digit() {
            len = len
                .saturating_mul(10)
                .saturating_add((raw[i] - b'0') as usize);
            i += 1;
            digits += 1;
        }
        if digits == 0 || i >= raw.len() || raw[i] != b':' {
            return Err(TaintEnvError::BadLength { at: start });
        }
        i += 1;
        if i + len > raw.len() {
            return Err(TaintEnvError::Truncated { at: start });
        }
        out.push(raw[i..i + len].to_vec());
        i += len;
    }
    Ok(out)
}

/// Finds the taint sources inside the command and runs shell detection.
pub fn analyze_command(
    command: &[u8],
    taint_sources: &[Vec<u8>],
) -> Result<Verdict, DetectError> {
    let refs: Vec<&[u8]> = taint_sources.iter().map(|v| v.as_slice()).collect();
    let spans = find_reflections(&refs, command, &ReflectionConfig::default());
    let content = TaintedContent::new(command.to_vec(), spans, ContentKind::ShellCommand)
        .expect("reflection spans are sorted and disjoint");
    detect(&content)
}

/// The one-line refusal diagnostic.
pub fn refusal_diagnostic(verdict: &Verdict) -> String {
    let cat = Catalog::shared();
    match verdict.evidence {
        Some(ev) => format!(
            "context-auditor: blocked command injection at byte {} ({} -> {})",
            ev.index,
            cat.name_of(ev.from),
            cat.name_of(ev.to)
        ),
        None => "context-auditor: blocked command injection".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ctxaudit_core::Decision;

    #[test]
    fn taint_env_round_trips() {
        let raw = b"7:Auditor24:Auditor; rm userinfo.txt";
        let values = parse_taint_env(raw).unwrap();
        assert_eq!(values, vec![b"Auditor".to_vec(), b"Auditor; rm userinfo.txt".to_vec()]);
        assert_eq!(parse_taint_env(b"").unwrap(), Vec::<Vec<u8>>::new());
        assert_eq!(parse_taint_env(b"0:").unwrap(), vec![Vec::<u8>::new()]);
    }

    #[test]
    fn malformed_taint_env_is_rejected() {
        assert_eq!(parse_taint_env(b"x:abc"), Err(TaintEnvError::BadLength { at: 0 }));
        assert_eq!(parse_taint_env(b"5:ab"), Err(TaintEnvError::Truncated { at: 0 }));
        assert_eq!(parse_taint_env(b"3:abc9"), Err(TaintEnvError::BadLength { at: 5 }));
    }

    #[test]
    fn injection_refused_benign_operand_allowed() {
        let cmd = b"cat userinfo.txt | grep Auditor; rm userinfo.txt";
        let v = analyze_command(cmd, &[b"Auditor; rm userinfo.txt".to_vec()]).unwrap();
        assert_eq!(v.decision, Decision::Malicious);
        let line = refusal_diagnostic(&v);
        assert!(
            line.starts_with("context-auditor: blocked command injection at byte 31 ("),
            "{line}"
        );

        let v = analyze_command(b"cat userinfo.txt | grep Auditor", &[b"Auditor".to_vec()])
            .unwrap();
        assert_eq!(v.decision, Decision::Benign);
    }

    #[test]
    fn single_token_command_stays_allowed() {
        let v = analyze_command(b"whoami", &[b"whoami".to_vec()]).unwrap();
        assert_eq!(v.decision, Decision::Benign);
    }
}
