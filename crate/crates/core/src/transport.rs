//! Request/response plumbing shared by the external proposer, solver and
//! selector adapters.

use std::io::Write;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("endpoint unreachable: {0}")]
    Unreachable(String),
    #[error("endpoint returned an error: {0}")]
    Remote(String),
}

/// Sends one JSON request and returns the raw response body.
pub trait Transport: Send + Sync {
    fn send(&self, request: &Value) -> Result<String, TransportError>;
}

impl<F> Transport for F
where
    F: Fn(&Value) -> Result<String, TransportError> + Send + Sync,
{
    fn send(&self, request: &Value) -> Result<String, TransportError> {
        self(request)
    }
}

/// Bounded retries with exponential backoff capped at `max_backoff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub initial_backoff: Duration,
    pub max_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_retries: 3, initial_backoff: Duration::from_millis(250), max_backoff: Duration::from_secs(8) }
    }
}

impl RetryPolicy {
    /// No waiting between attempts; for tests and local commands.
    pub fn immediate(max_retries: u32) -> Self {
        Self { max_retries, initial_backoff: Duration::ZERO, max_backoff: Duration::ZERO }
    }

    pub fn backoff(&self, retry: u32) -> Duration {
        let factor = 1u32.checked_shl(retry.min(16)).unwrap_or(u32::MAX);
        self.initial_backoff.saturating_mul(factor).min(self.max_backoff)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no response after {attempts} attempt(s): {last}")]
pub struct RetriesExhausted {
    pub attempts: u32,
    pub last: TransportError,
}

/// Sends `request`, retrying failed attempts per `policy`.
pub fn send_with_retry(
    transport: &dyn Transport,
    request: &Value,
    policy: &RetryPolicy,
) -> Result<String, RetriesExhausted> {
    let mut attempt = 0;
    loop {
        match transport.send(request) {
            Ok(body) => return Ok(body),
            Err(e) if attempt >= policy.max_retries => return Err(RetriesExhausted { attempts: attempt + 1, last: e }),
            Err(e) => {
                log::warn!("attempt {} failed: {e}", attempt + 1);
                std::thread::sleep(policy.backoff(attempt));
                attempt += 1;
            }
        }
    }
}

/// Runs a local program per request: JSON on stdin, response on stdout.
#[derive(Debug, Clone)]
pub struct CommandTransport {
    program: String,
    args: Vec<String>,
}

impl CommandTransport {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        Self { program: program.into(), args }
    }
}

impl Transport for CommandTransport {
    fn send(&self, request: &Value) -> Result<String, TransportError> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| TransportError::Unreachable(format!("{}: {e}", self.program)))?;
        let body = serde_json::to_vec(request).expect("in-memory JSON serialization");
        if let Some(mut stdin) = child.stdin.take() {
            stdin.write_all(&body).map_err(|e| TransportError::Unreachable(e.to_string()))?;
        }
        let out = child.wait_with_output().map_err(|e| TransportError::Unreachable(e.to_string()))?;
        if !out.status.success() {
            return Err(TransportError::Remote(format!(
                "{} exited with {}: {}",
                self.program,
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        String::from_utf8(out.stdout).map_err(|e| TransportError::Remote(e.to_string()))
    }
}

/// Evaluates `f` on every job with at most `cap` running at once. Results
/// keep job order regardless of completion order.
pub fn run_bounded<T, R, F>(jobs: &[T], cap: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = cap.max(1).min(jobs.len());
    if workers <= 1 {
        return jobs.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let r = f(job);
                *slots[i].lock().expect("result slot") = Some(r);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().expect("result slot").expect("every job ran")).collect()
}
