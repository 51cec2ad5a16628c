use clap::Parser;
use ctxaudit_detector::ReflectionConfig;
use ctxaudit_proxy::{Mode, ProxyConfig, ProxyServer};

/// Intercepting HTTP proxy that blocks content injection exploits.
#[derive(Parser, Debug)]
#[command(name = "ctxaudit-proxy", version)]
struct Args {
    /// Address to listen on.
    #[arg(long, default_value = "127.0.0.1:8880")]
    listen: String,

    /// Upstream address for reverse-proxy mode; without it the proxy runs
    /// in forward mode (absolute-form requests, CONNECT tunneling).
    #[arg(long)]
    upstream: Option<String>,

    /// block: replace detected responses; log: forward but log them.
    #[arg(long, default_value = "block", value_parser = ["block", "log"])]
    mode: String,

    /// HTTP status for blocked responses.
    #[arg(long, default_value_t = 404)]
    block_status: u16,

    /// Minimum reflected-value length considered a taint source.
    #[arg(long, default_value_t = 3)]
    min_reflect_len: usize,

    /// Reflections analyzed per parameter value.
    #[arg(long, default_value_t = 5)]
    max_reflections: usize,

    /// Responses larger than this forward unanalyzed (bytes).
    #[arg(long, default_value_t = 8 * 1024 * 1024)]
    max_body: usize,

    /// Block instead of forwarding when the engine faults.
    #[arg(long)]
    fail_closed: bool,
}

fn main() {
    let args = Args::parse();
    if !(400..=599).contains(&args.block_status) {
        eprintln!("ctxaudit-proxy: --block-status must be in 400..=599");
        std::process::exit(2);
    }
    if args.min_reflect_len == 0 || args.max_reflections == 0 {
        eprintln!("ctxaudit-proxy: reflection thresholds must be at least 1");
        std::process::exit(2);
    }
    let cfg = ProxyConfig {
        listen: args.listen,
        upstream: args.upstream,
        reflection: ReflectionConfig {
            min_length: args.min_reflect_len,
            max_reflections_per_param: args.max_reflections,
        },
        block_status: args.block_status,
        mode: if args.mode == "log" { Mode::LogOnly } else { Mode::Block },
        analyzable_types: vec!["text/html".to_string()],
        max_body: args.max_body,
        fail_closed: args.fail_closed,
    };
    let server = match ProxyServer::bind(cfg) {
        Ok(s) => s,
        Err(err) => {
            eprintln!("ctxaudit-proxy: bind failed: {err}");
            std::process::exit(2);
        }
    };
    match server.local_addr() {
        Ok(addr) => eprintln!("ctxaudit-proxy: listening on {addr}"),
        Err(_) => {}
    }
    if let Err(err) = server.run() {
        eprintln!("ctxaudit-proxy: {err}");
        std::process::exit(1);
    }
}
