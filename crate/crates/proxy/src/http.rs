//! Just enough HTTP/1.1 to intercept: buffered request and response reading
//! with content-length, chunked and close-delimited framing. Forwarded
//! bytes are kept verbatim; analysis works on the de-framed body.

use std::io::{self, BufReader, Read};
use std::net::TcpStream;

#[derive(Debug, Clone)]
pub struct RawRequest {
    pub method: String,
    pub target: String,
    pub headers: Vec<(String, Vec<u8>)>,
    pub body: Vec<u8>,
}

impl RawRequest {
    pub fn header(&self, name: &str) -> Option<&[u8]> {
        self.headers
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_slice())
    }
}

#[derive(Debug, Clone)]
pub struct RawResponse {
    pub status: u16,
    /// Status line and headers exactly as received, including the blank line.
    pub head: Vec<u8>,
    /// Body exactly as received (chunk framing included).
    pub body_raw: Vec<u8>,
    /// Body with transfer framing removed; what analysis sees before
    /// content decoding.
    pub body_data: Vec<u8>,
    /// False when the body exceeded the buffer cap and the rest must be
    /// streamed through unanalyzed.
    pub complete: bool,
}

impl RawResponse {
    pub fn header(&self, name: &str) -> Option<String> {
        let text = String::from_utf8_lossy(&self.head);
        for line in text.split("\r\n").skip(1) {
            if let Some((n, v)) = line.split_once(':') {
                if n.trim().eq_ignore_ascii_case(name) {
                    return Some(v.trim().to_string());
                }
            }
        }
        None
    }
}

fn read_head(reader: &mut BufReader<TcpStream>) -> io::Result<Option<Vec<u8>>> {
    let mut head = Vec::with_capacity(512);
    loop {
        let mut line = Vec::new();
        let n = read_line(reader, &mut line)?;
        if n == 0 {
            return Ok(if head.is_empty() { None } else { Some(head) });
        }
        let blank = line == b"\r\n" || line == b"\n";
        head.extend_from_slice(&line);
        if blank {
            return Ok(Some(head));
        }
        if head.len() > 64 * 1024 {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "header block too large"));
        }
    }
}

fn read_line(reader: &mut BufReader<TcpStream>, out: &mut Vec<u8>) -> io::Result<usize> {
    let mut byte = [0u8; 1];
    let mut n = 0;
    loop {
        match reader.read(&mut byte)? {
            0 => return Ok(n),
            _ => {
                out.push(byte[0]);
                n += 1;
                if byte[0] == b'\n' {
                    return Ok(n);
                }
            }
        }
    }
}

/// Reads one request from the client; `None` on a cleanly closed connection.
pub fn read_request(reader: &mut BufReader<TcpStream>) -> io::Result<Option<RawRequest>> {
    let Some(head) = read_head(reader)? else {
        return Ok(None);
    };
    let mut header_buf = [httparse::EMPTY_HEADER; 64];
    let mut req = httparse::Request::new(&mut header_buf);
    match req.parse(&head) {
        Ok(httparse::Status::Complete(_)) => {}
        _ => return Err(io::Error::new(io::ErrorKind::InvalidData, "malformed request head")),
    }
    let headers: Vec<(String, Vec<u8>)> = req
        .headers
        .iter()
        .map(|h| (h.name.to_string(), h.value.to_vec()))
        .collect();
    let content_length = headers
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case("content-length"))
        .and_then(|(_, v)| String::from_utf8_lossy(v).trim().parse::<usize>().ok())
        .unwrap_or(0);
    let mut body = vec![0u8; content_length.min(16 * 1024 * 1024)];
    reader.read_exact(&mut body)?;
    Ok(Some(RawRequest {
        method: req.method.unwrap_or("").to_string(),
        target: req.path.unwrap_or("").to_string(),
        headers,
        body,
    }))
}

/// Reads one response from the upstream, buffering at most `cap` bytes of
/// body. Raw bytes are preserved for verbatim forwarding.
pub fn read_response(reader: &mut BufReader<TcpStream>, cap: usize) -> io::Result<RawResponse> {
    let head = read_head(reader)?
        .ok_or_else(|| io::Error::new(io::ErrorKind::UnexpectedEof, "upstream closed"))?;
    let mut header_buf = [httparse::EMPTY_HEADER; 64];
    let mut resp = httparse::Response::new(&mut header_buf);
    match resp.parse(&head) {
        Ok(httparse::Status::Complete(_)) => {}
        _ => return Err(io::Error::new(io::ErrorKind::InvalidData, "malformed response head")),
    }
    let status = resp.code.unwrap_or(0);
    let find = |name: &str| {
        resp.headers
            .iter()
            .find(|h| h.name.eq_ignore_ascii_case(name))
            .map(|h| String::from_utf8_lossy(h.value).trim().to_ascii_lowercase())
    };
    let chunked = find("transfer-encoding").map(|v| v.contains("chunked")).unwrap_or(false);
    let content_length = find("content-length").and_then(|v| v.parse::<usize>().ok());

    let mut body_raw = Vec::new();
    let mut body_data = Vec::new();
    let mut complete = true;

    if chunked {
        loop {
            let mut size_line = Vec::new();
            if read_line(reader, &mut size_line)? == 0 {
                complete = false;
                break;
            }
            body_raw.extend_from_slice(&size_line);
            let size_text = String::from_utf8_lossy(&size_line);
            let size = usize::from_str_radix(size_text.trim().split(';').next().unwrap_or(""), 16)
                .map_err(|_| io::Error::new(io::ErrorKind::InvalidData, "bad chunk size"))?;
            if size == 0 {
                // trailer section up to the final blank line
                loop {
                    let mut trailer = Vec::new();
                    let n = read_line(reader, &mut trailer)?;
                    body_raw.extend_from_slice(&trailer);
                    if n == 0 || trailer == b"\r\n" || trailer == b"\n" {
                        break;
                    }
                }
                break;
            }
            if body_data.len() + size > cap {
                complete = false;
                break;
            }
            let mut chunk = vec![0u8; size];
            reader.read_exact(&mut chunk)?;
            body_raw.extend_from_slice(&chunk);
            body_data.extend_from_slice(&chunk);
            let mut crlf = Vec::new();
            read_line(reader, &mut crlf)?;
            body_raw.extend_from_slice(&crlf);
        }
    } else if let Some(len) = content_length {
        if len > cap {
            complete = false;
            let mut partial = vec![0u8; cap];
            reader.read_exact(&mut partial)?;
            body_raw.extend_from_slice(&partial);
        } else {
            let mut body = vec![0u8; len];
            reader.read_exact(&mut body)?;
            body_raw.extend_from_slice(&body);
            body_data = body;
        }
    } else {
        // close-delimited
        let mut buf = Vec::new();
        reader.read_to_end(&mut buf)?;
        if buf.len() > cap {
            complete = false;
        } else {
            body_data = buf.clone();
        }
        body_raw = buf;
    }

    Ok(RawResponse { status, head, body_raw, body_data, complete })
}

/// Splits `name=value&...` keeping values as raw bytes; names are
/// percent-decoded for readability.
pub fn parse_form_pairs(input: &[u8]) -> Vec<(String, Vec<u8>)> {
    input
        .split(|&b| b == b'&')
        .filter(|pair| !pair.is_empty())
        .map(|pair| {
            let mut it = pair.splitn(2, |&b| b == b'=');
            let name = it.next().unwrap_or(&[]);
            let value = it.next().unwrap_or(&[]);
            let name = String::from_utf8_lossy(&ctxaudit_detector::percent_decode(name, true))
                .into_owned();
            (name, value.to_vec())
        })
        .collect()
}

/// Cookie header pairs; values stay raw.
pub fn parse_cookies(header: &[u8]) -> Vec<(String, Vec<u8>)> {
    header
        .split(|&b| b == b';')
        .filter_map(|part| {
            let part = trim_ascii(part);
            if part.is_empty() {
                return None;
            }
            let mut it = part.splitn(2, |&b| b == b'=');
            let name = String::from_utf8_lossy(it.next()?).into_owned();
            let value = it.next().unwrap_or(&[]).to_vec();
            Some((name, value))
        })
        .collect()
}

fn trim_ascii(mut b: &[u8]) -> &[u8] {
    while let Some((first, rest)) = b.split_first() {
        if first.is_ascii_whitespace() {
            b = rest;
        } else {
            break;
        }
    }
    while let Some((last, rest)) = b.split_last() {
        if last.is_ascii_whitespace() {
            b = rest;
        } else {
            break;
        }
    }
    b
}
