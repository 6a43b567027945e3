//! In-process mock chat-completions server for tests and offline
//! pipeline runs: a scripted list of (request matcher, canned
//! response) pairs served over real HTTP on a loopback port.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

/// One scripted exchange. When `expect_substring` is set the request
/// body must contain it, otherwise the server answers 500.
#[derive(Debug, Clone)]
pub struct MockExchange {
    pub expect_substring: Option<String>,
    /// Assistant message content to return (the server wraps it in a
    /// chat-completions envelope).
    pub content: String,
}

impl MockExchange {
    pub fn new(content: impl Into<String>) -> Self {
        Self {
            expect_substring: None,
            content: content.into(),
        }
    }

    pub fn expecting(matcher: impl Into<String>, content: impl Into<String>) -> Self {
        Self {
            expect_substring: Some(matcher.into()),
            content: content.into(),
        }
    }
}

pub struct MockLlmServer {
    addr: SocketAddr,
    requests: Arc<Mutex<Vec<String>>>,
    handle: Option<JoinHandle<()>>,
}

impl MockLlmServer {
    /// Bind a loopback port and serve the scripted exchanges in order;
    /// requests beyond the script get HTTP 500.
    pub fn start(exchanges: Vec<MockExchange>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind loopback");
        let addr = listener.local_addr().expect("local addr");
        let requests: Arc<Mutex<Vec<String>>> = Arc::default();
        let seen = Arc::clone(&requests);
        let handle = std::thread::spawn(move || {
            let mut script = exchanges.into_iter();
            // Stop accepting after the script plus a few error replies.
            for _ in 0..64 {
                let Ok((stream, _)) = listener.accept() else {
                    return;
                };
                let body = match read_request(stream.try_clone().expect("clone stream")) {
                    Some(body) => body,
                    None => return,
                };
                seen.lock().expect("requests lock").push(body.clone());
                match script.next() {
                    Some(exchange) => {
                        let ok = exchange
                            .expect_substring
                            .as_ref()
                            .is_none_or(|needle| body.contains(needle));
                        if ok {
                            respond_completion(stream, &exchange.content);
                        } else {
                            respond_error(stream, "request did not match the scripted exchange");
                        }
                    }
                    None => respond_error(stream, "mock script exhausted"),
                }
            }
        });
        Self {
            addr,
            requests,
            handle: Some(handle),
        }
    }

    /// Base URL to point `CRN_LLM_BASE_URL` (or `LlmConfig`) at.
    pub fn base_url(&self) -> String {
        format!("http://{}/v1", self.addr)
    }

    /// Raw request bodies received so far.
    pub fn requests(&self) -> Vec<String> {
        self.requests.lock().expect("requests lock").clone()
    }
}

impl Drop for MockLlmServer {
    fn drop(&mut self) {
        // Unblock the accept loop, then reap the thread.
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

/// Read one HTTP/1.1 request and return its body; `None` on a bare
/// connection (used to shut the server down).
fn read_request(stream: TcpStream) -> Option<String> {
    let mut reader = BufReader::new(stream);
    let mut line = String::new();
    if reader.read_line(&mut line).ok()? == 0 {
        return None;
    }
    let mut content_length = 0usize;
    loop {
        let mut header = String::new();
        reader.read_line(&mut header).ok()?;
        let header = header.trim_end();
        if header.is_empty() {
            break;
        }
        if let Some(value) = header
            .to_ascii_lowercase()
            .strip_prefix("content-length:")
            .map(str::trim)
        {
            content_length = value.parse().unwrap_or(0);
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body).ok()?;
    Some(String::from_utf8_lossy(&body).into_owned())
}

fn respond_completion(stream: TcpStream, content: &str) {
    let body = serde_json::json!({
        "id": "mock-0",
        "object": "chat.completion",
        "model": "mock",
        "choices": [{
            "index": 0,
            "message": {"role": "assistant", "content": content},
            "finish_reason": "stop"
        }]
    })
    .to_string();
    respond(stream, 200, "OK", &body);
}

fn respond_error(stream: TcpStream, message: &str) {
    let body = serde_json::json!({"error": {"message": message}}).to_string();
    respond(stream, 500, "Internal Server Error", &body);
}

fn respond(mut stream: TcpStream, code: u16, reason: &str, body: &str) {
    let response = format!(
        "HTTP/1.1 {code} {reason}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
        body.len()
    );
    let _ = stream.write_all(response.as_bytes());
    let _ = stream.flush();
}
