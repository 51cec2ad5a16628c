//! An intentionally vulnerable reflection server used by the integration
//! tests and the corpus tooling. It reflects the `color`, `id` and `term`
//! query parameters verbatim (percent-decoded, like a typical server-side
//! template) into a CSS property value, a JS double-quoted string and an
//! HTML text node.

use crate::http::read_request;
use ctxaudit_detector::percent_decode;
use std::io::{self, BufReader, Write};
use std::net::{SocketAddr, TcpListener};
use std::thread;

/// The reflective page: three injection sinks in one document.
pub fn render_page(color: &str, id: &str, term: &str) -> String {
    format!(
        "<html>\n<body>\n<style>\nbody{{\n  background-color: {color}\n}}\n</style>\n\
         <form action=\"index.php\">\n  background Color :</td><td>\n\
         <input type=\"name\" name=\"color\" />\n\
         <input type=\"submit\" value=\"Change Color\" />\n\
         <input type=\"hidden\"\n    name=\"CSRFToken\" value=\"SECRET\">\n</form>\n\
         <script>\n  document.write(\"Username is: \");\n  var str = \"{id}\" ;\n\
         document.write(\"<text>\"+str+\"</text>\");\n</script>\n\
         <h2> You were searching for:\n  '{term}'\n</h2>\n  Here is the result:\n\
         </body>\n</html>\n"
    )
}

/// Binds an ephemeral port and serves in a background thread.
pub fn spawn() -> io::Result<SocketAddr> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { continue };
            thread::spawn(move || {
                let _ = serve_one(stream);
            });
        }
    });
    Ok(addr)
}

fn serve_one(stream: std::net::TcpStream) -> io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut client = stream;
    let Some(request) = read_request(&mut reader)? else {
        return Ok(());
    };
    let mut color = "white".to_string();
    let mut id = "guest".to_string();
    let mut term = "nothing".to_string();
    if let Some((_, query)) = request.target.split_once('?') {
        for pair in query.split('&') {
            let (name, value) = pair.split_once('=').unwrap_or((pair, ""));
            let value =
                String::from_utf8_lossy(&percent_decode(value.as_bytes(), true)).into_owned();
            match name {
                "color" => color = value,
                "id" => id = value,
                "term" => term = value,
                _ => {}
            }
        }
    }
    let body = render_page(&color, &id, &term);
    write!(
        client,
        "HTTP/1.1 200 OK\r\ncontent-type: text/html; charset=utf-8\r\ncontent-length: {}\r\nconnection: close\r\n\r\n",
        body.len()
    )?;
    client.write_all(body.as_bytes())
}
