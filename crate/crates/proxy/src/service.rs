//! The long-running interception service: accepts client connections,
//! forwards to the upstream (reverse mode) or to the request's own host
//! (forward mode, with CONNECT tunneling for non-analyzable traffic),
//! buffers responses, analyzes and forwards or blocks.
//!
//! Each in-flight exchange gets its own analysis context; the log sink is
//! the only serialized resource.

use crate::exchange::{handle_exchange, HttpExchange, LogRecord, ProxyAction, ProxyConfig};
use crate::http::{parse_cookies, parse_form_pairs, read_request, read_response, RawRequest};
use std::io::{self, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

pub type LogSink = Arc<Mutex<Box<dyn Write + Send>>>;

pub struct ProxyServer {
    listener: TcpListener,
    cfg: Arc<ProxyConfig>,
    log: LogSink,
}

impl ProxyServer {
    /// Binds the configured listen address with logs to stdout.
    pub fn bind(cfg: ProxyConfig) -> io::Result<ProxyServer> {
        let sink: LogSink = Arc::new(Mutex::new(Box::new(io::stdout())));
        ProxyServer::bind_with_log(cfg, sink)
    }

    pub fn bind_with_log(cfg: ProxyConfig, log: LogSink) -> io::Result<ProxyServer> {
        let listener = TcpListener::bind(&cfg.listen)?;
        Ok(ProxyServer { listener, cfg: Arc::new(cfg), log })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accept loop; one thread per connection.
    pub fn run(self) -> io::Result<()> {
        for stream in self.listener.incoming() {
            let Ok(stream) = stream else { continue };
            let cfg = Arc::clone(&self.cfg);
            let log = Arc::clone(&self.log);
            thread::spawn(move || {
                let _ = handle_connection(stream, &cfg, &log);
            });
        }
        Ok(())
    }

    /// Runs in a background thread; returns the bound address.
    pub fn spawn(self) -> io::Result<SocketAddr> {
        let addr = self.local_addr()?;
        thread::spawn(move || {
            let _ = self.run();
        });
        Ok(addr)
    }
}

fn emit(log: &LogSink, rec: LogRecord) {
    if let Ok(mut sink) = log.lock() {
        let _ = writeln!(sink, "{}", rec.0);
        let _ = sink.flush();
    }
}

fn write_simple(
    stream: &mut TcpStream,
    status: u16,
    reason: &str,
    body: &[u8],
) -> io::Result<()> {
    write!(
        stream,
        "HTTP/1.1 {status} {reason}\r\ncontent-length: {}\r\nconnection: close\r\n\r\n",
        body.len()
    )?;
    stream.write_all(body)
}

fn handle_connection(stream: TcpStream, cfg: &ProxyConfig, log: &LogSink) -> io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut client = stream;
    let Some(request) = read_request(&mut reader)? else {
        return Ok(());
    };

    if request.method.eq_ignore_ascii_case("CONNECT") {
        return tunnel(client, reader, &request);
    }
    if request.target == "/health" || request.target.starts_with("/health?") {
        return write_simple(&mut client, 200, "OK", b"ok");
    }

    // pick the upstream and the origin-form target
    let (upstream_addr, origin_target) = match (&cfg.upstream, request.target.as_str()) {
        (Some(up), t) => (up.clone(), t.to_string()),
        (None, t) if t.starts_with("http://") => {
            let rest = &t["http://".len()..];
            let (host, path) = match rest.find('/') {
                Some(i) => (&rest[..i], &rest[i..]),
                None => (rest, "/"),
            };
            let host = if host.contains(':') { host.to_string() } else { format!("{host}:80") };
            (host, path.to_string())
        }
        (None, _) => {
            return write_simple(&mut client, 502, "Bad Gateway", b"no upstream configured");
        }
    };

    let Ok(mut upstream) = TcpStream::connect(&upstream_addr) else {
        return write_simple(&mut client, 502, "Bad Gateway", b"upstream unreachable");
    };

    // relay the request with close-delimited framing toward the upstream
    write!(upstream, "{} {} HTTP/1.1\r\n", request.method, origin_target)?;
    for (name, value) in &request.headers {
        if name.eq_ignore_ascii_case("connection")
            || name.eq_ignore_ascii_case("proxy-connection")
            || name.eq_ignore_ascii_case("keep-alive")
        {
            continue;
        }
        upstream.write_all(name.as_bytes())?;
        upstream.write_all(b": ")?;
        upstream.write_all(value)?;
        upstream.write_all(b"\r\n")?;
    }
    upstream.write_all(b"connection: close\r\n\r\n")?;
    upstream.write_all(&request.body)?;
    upstream.flush()?;

    let mut upstream_reader = BufReader::new(upstream.try_clone()?);
    let response = read_response(&mut upstream_reader, cfg.max_body)?;

    if !response.complete {
        // too large to analyze: stream it through untouched
        client.write_all(&response.head)?;
        client.write_all(&response.body_raw)?;
        io::copy(&mut upstream_reader, &mut client)?;
        emit(
            log,
            LogRecord(serde_json::json!({
                "url": request.target,
                "action": "forward-unanalyzed",
                "reason": "body exceeds max-body cap",
            })),
        );
        return Ok(());
    }

    let ex = HttpExchange {
        method: request.method.clone(),
        url: request.target.clone(),
        params: collect_params(&request),
        status: response.status,
        content_type: response.header("content-type"),
        content_encoding: response.header("content-encoding"),
        body: response.body_data.clone(),
    };

    let (action, record) = handle_exchange(&ex, cfg);
    if let Some(rec) = record {
        emit(log, rec);
    }
    match action {
        ProxyAction::Forward | ProxyAction::ForwardWithLog => {
            client.write_all(&response.head)?;
            client.write_all(&response.body_raw)?;
        }
        ProxyAction::Block(status) => {
            write_simple(&mut client, status, "Blocked", b"")?;
        }
    }
    Ok(())
}

/// Candidate taint sources: query values, urlencoded body values, cookies.
fn collect_params(request: &RawRequest) -> Vec<(String, Vec<u8>)> {
    let mut params = Vec::new();
    if let Some((_, query)) = request.target.split_once('?') {
        params.extend(parse_form_pairs(query.as_bytes()));
    }
    let form = request
        .header("content-type")
        .map(|ct| {
            String::from_utf8_lossy(ct)
                .to_ascii_lowercase()
                .starts_with("application/x-www-form-urlencoded")
        })
        .unwrap_or(false);
    if form {
        params.extend(parse_form_pairs(&request.body));
    }
    if let Some(cookie) = request.header("cookie") {
        params.extend(parse_cookies(cookie));
    }
    params.retain(|(_, v)| !v.is_empty());
    params
}

/// Blind CONNECT tunnel; encrypted traffic passes through untouched.
fn tunnel(
    mut client: TcpStream,
    mut client_reader: BufReader<TcpStream>,
    request: &RawRequest,
) -> io::Result<()> {
    let Ok(server) = TcpStream::connect(&request.target) else {
        return write_simple(&mut client, 502, "Bad Gateway", b"");
    };
    client.write_all(b"HTTP/1.1 200 Connection Established\r\n\r\n")?;
    let mut server_write = server.try_clone()?;
    let mut server_read = server;
    let up = thread::spawn(move || {
        let mut buf = [0u8; 8192];
        while let Ok(n) = client_reader.read(&mut buf) {
            if n == 0 || server_write.write_all(&buf[..n]).is_err() {
                break;
            }
        }
        let _ = server_write.shutdown(std::net::Shutdown::Write);
    });
    let mut buf = [0u8; 8192];
    while let Ok(n) = server_read.read(&mut buf) {
        if n == 0 || client.write_all(&buf[..n]).is_err() {
            break;
        }
    }
    let _ = client.shutdown(std::net::Shutdown::Write);
    let _ = up.join();
    Ok(())
}
