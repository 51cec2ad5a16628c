//! Intercepting HTTP proxy: analyzes responses to parameterized requests
//! with the context-switch detector and blocks detected exploits. Reverse
//! mode forwards everything to one upstream; forward mode proxies
//! absolute-form requests and tunnels CONNECT traffic untouched.
//!
//! Forwarded responses are byte-identical to what the upstream sent;
//! detection never rewrites. Every block produces one line-delimited JSON
//! log record with the triggering event as evidence.

pub mod exchange;
pub mod http;
pub mod service;
pub mod vulnsrv;

pub use exchange::{handle_exchange, HttpExchange, LogRecord, Mode, ProxyAction, ProxyConfig};
pub use service::ProxyServer;
