//! In-process stand-in for the remote recognizer.
//!
//! Recognition is a table lookup keyed by the SHA-256 of the uploaded bytes.

use std::collections::HashMap;
use std::io;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex, MutexGuard};
use std::thread::JoinHandle;

use sha2::{Digest, Sha256};
use thiserror::Error;
use tiny_http::{Header, Method, Request, Response, Server};

use super::{Transcript, CONFIDENCE_HEADER};

/// Lowercase hex SHA-256 of `payload`.
pub fn fingerprint(payload: &[u8]) -> String {
    hex::encode(Sha256::digest(payload))
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown session {0:?}")]
pub struct UnknownSession(pub String);

#[derive(Debug, Clone, PartialEq)]
pub enum MockPoll {
    Pending,
    Ready(Transcript),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordedRequest {
    pub method: String,
    pub path: String,
}

#[derive(Debug)]
struct PendingResult {
    transcript: Transcript,
    polls_before_ready: u32,
}

/// Fingerprint table plus the sessions opened against it.
#[derive(Debug, Default)]
pub struct MockRecognizer {
    table: HashMap<String, String>,
    sessions: HashMap<String, PendingResult>,
    next_session: u64,
    pending_polls: u32,
    log: Vec<RecordedRequest>,
    languages: Vec<String>,
}

impl MockRecognizer {
    pub fn new(mapping: impl IntoIterator<Item = (String, String)>) -> Self {
        Self {
            table: mapping.into_iter().collect(),
            ..Self::default()
        }
    }

    /// Every session answers `202` this many times before its result.
    pub fn with_pending_polls(mut self, polls: u32) -> Self {
        self.pending_polls = polls;
        self
    }

    pub fn prime(&mut self, payload: &[u8], transcript: impl Into<String>) {
        self.table.insert(fingerprint(payload), transcript.into());
    }

    pub fn prime_fingerprint(
        &mut self,
        fingerprint: impl Into<String>,
        transcript: impl Into<String>,
    ) {
        self.table
            .insert(fingerprint.into().to_ascii_lowercase(), transcript.into());
    }

    pub fn primed(&self) -> usize {
        self.table.len()
    }

    /// First request: store the recognition result, hand back a session id.
    pub fn upload(&mut self, payload: &[u8]) -> String {
        self.next_session += 1;
        let id = format!("s{:06}", self.next_session);
        let transcript = match self.table.get(&fingerprint(payload)) {
            Some(text) => Transcript::new(text.clone()),
            None => Transcript::unrecognized(),
        };
        self.sessions.insert(
            id.clone(),
            PendingResult {
                transcript,
                polls_before_ready: self.pending_polls,
            },
        );
        id
    }

    /// Second request: the result for a session.
    pub fn result(&mut self, session_id: &str) -> Result<MockPoll, UnknownSession> {
        let entry = self
            .sessions
            .get_mut(session_id)
            .ok_or_else(|| UnknownSession(session_id.to_string()))?;
        if entry.polls_before_ready > 0 {
            entry.polls_before_ready -= 1;
            return Ok(MockPoll::Pending);
        }
        Ok(MockPoll::Ready(entry.transcript.clone()))
    }

    pub fn requests(&self) -> &[RecordedRequest] {
        &self.log
    }

    /// `X-Language` values seen on uploads, in order.
    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    fn handle(&mut self, request: &mut Request) -> Response<io::Cursor<Vec<u8>>> {
        let path = request.url().to_string();
        self.log.push(RecordedRequest {
            method: request.method().to_string(),
            path: path.clone(),
        });

        match (request.method(), path.as_str()) {
            (Method::Post, "/recognize") => {
                let mut body = Vec::new();
                if request.as_reader().read_to_end(&mut body).is_err() {
                    return text_response(400, "unreadable body");
                }
                if body.is_empty() {
                    return text_response(400, "empty payload");
                }
                let language = request
                    .headers()
                    .iter()
                    .find(|h| h.field.equiv(super::LANGUAGE_HEADER))
                    .map(|h| h.value.to_string())
                    .unwrap_or_default();
                self.languages.push(language);
                text_response(200, &self.upload(&body))
            }
            (Method::Get, p) if p.starts_with("/result/") => {
                let id = &p["/result/".len()..];
                match self.result(id) {
                    Ok(MockPoll::Pending) => text_response(202, "pending"),
                    Ok(MockPoll::Ready(t)) => {
                        let mut resp = text_response(200, &t.text);
                        if let Some(c) = t.confidence {
                            resp.add_header(
                                Header::from_bytes(
                                    CONFIDENCE_HEADER.as_bytes(),
                                    c.to_string().as_bytes(),
                                )
                                .expect("valid header"),
                            );
                        }
                        resp
                    }
                    Err(e) => text_response(404, &e.to_string()),
                }
            }
            _ => text_response(404, "no such endpoint"),
        }
    }
}

fn text_response(status: u16, body: &str) -> Response<io::Cursor<Vec<u8>>> {
    Response::from_data(body.as_bytes().to_vec())
        .with_status_code(status)
        .with_header(
            Header::from_bytes(&b"Content-Type"[..], &b"text/plain; charset=utf-8"[..])
                .expect("valid header"),
        )
}

/// The mock recognizer served over HTTP from a background thread.
/// Requests are handled one at a time. Dropping the server stops it.
pub struct MockServer {
    server: Arc<Server>,
    state: Arc<Mutex<MockRecognizer>>,
    addr: SocketAddr,
    worker: Option<JoinHandle<()>>,
}

impl MockServer {
    /// Binds `addr` (use port 0 for an ephemeral port) and starts serving.
    pub fn start(recognizer: MockRecognizer, addr: &str) -> io::Result<Self> {
        let server = Server::http(addr).map_err(|e| io::Error::other(e.to_string()))?;
        let local = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| io::Error::other("server is not bound to an IP address"))?;
        let server = Arc::new(server);
        let state = Arc::new(Mutex::new(recognizer));

        let worker = {
            let server = Arc::clone(&server);
            let state = Arc::clone(&state);
            std::thread::spawn(move || {
                for mut request in server.incoming_requests() {
                    let response = lock(&state).handle(&mut request);
                    if let Err(e) = request.respond(response) {
                        log::warn!("mock recognizer failed to respond: {e}");
                    }
                }
            })
        };

        Ok(Self {
            server,
            state,
            addr: local,
            worker: Some(worker),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Base URL, e.g. `http://127.0.0.1:41234`.
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn recognizer(&self) -> MutexGuard<'_, MockRecognizer> {
        lock(&self.state)
    }

    /// Blocks until the server is stopped from another handle or the
    /// process exits.
    pub fn wait(mut self) {
        if let Some(worker) = self.worker.take() {
            let _ = worker.join();
        }
    }
}

fn lock(state: &Mutex<MockRecognizer>) -> MutexGuard<'_, MockRecognizer> {
    state
        .lock()
        .unwrap_or_else(|poisoned| poisoned.into_inner())
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(worker) = self.worker.take() {
            let _ = worker.join();
        }
    }
}
