use ctxaudit_shellwrap::{
    analyze_command, parse_taint_env, refusal_diagnostic, EXIT_NO_SHELL, EXIT_REFUSED,
    EXIT_USAGE, REAL_SHELL_ENV, TAINT_ENV,
};
use std::ffi::OsString;
use std::os::unix::ffi::OsStrExt;
use std::os::unix::process::CommandExt;
use std::process::Command;

fn usage() {
    eprintln!("usage: ctxaudit-sh -c <command> [args...]");
    eprintln!("  {TAINT_ENV}: concatenated `<decimal length>:<raw bytes>` taint records");
    eprintln!("  {REAL_SHELL_ENV}: path to the real shell (default /bin/sh)");
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let args: Vec<OsString> = std::env::args_os().skip(1).collect();

    let taint_sources = match std::env::var_os(TAINT_ENV) {
        None => Vec::new(),
        Some(raw) => match parse_taint_env(raw.as_bytes()) {
            Ok(values) => values,
            Err(err) => {
                eprintln!("ctxaudit-sh: {err}");
                usage();
                return EXIT_USAGE;
            }
        },
    };

    // `sh -c <command>`-compatible dispatch: only the command string is
    // analyzable; other invocation forms pass through to the real shell
    if let Some(i) = args.iter().position(|a| a == "-c") {
        if let Some(command) = args.get(i + 1) {
            match analyze_command(command.as_bytes(), &taint_sources) {
                Ok(verdict) if verdict.is_malicious() => {
                    eprintln!("{}", refusal_diagnostic(&verdict));
                    return EXIT_REFUSED;
                }
                Ok(_) => {}
                Err(fault) => {
                    // a wrapper guarding exec refuses when it cannot decide
                    eprintln!("ctxaudit-sh: refusing on engine fault: {fault}");
                    return EXIT_REFUSED;
                }
            }
        }
    }

    let shell = std::env::var_os(REAL_SHELL_ENV).unwrap_or_else(|| "/bin/sh".into());
    let mut cmd = Command::new(&shell);
    cmd.args(&args);
    cmd.env_remove(TAINT_ENV);
    let err = cmd.exec(); // replaces the process on success
    if err.kind() == std::io::ErrorKind::NotFound {
        eprintln!("ctxaudit-sh: real shell {shell:?} not found");
        EXIT_NO_SHELL
    } else {
        eprintln!("ctxaudit-sh: failed to execute {shell:?}: {err}");
        EXIT_REFUSED
    }
}
