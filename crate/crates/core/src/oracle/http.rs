//! Blocking HTTP transport for OpenAI-compatible chat completion endpoints.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde_json::Value;

use super::llm::{ChatRequest, ChatTransport, LlmConfig};
use super::OracleError;

/// Token bucket: `capacity` requests, refilled continuously at `per_minute`.
#[derive(Debug)]
pub struct RateLimiter {
    capacity: f64,
    per_sec: f64,
    state: Mutex<(f64, Instant)>,
}

impl RateLimiter {
    pub fn per_minute(n: u32) -> Self {
        let capacity = f64::from(n.max(1));
        RateLimiter {
            capacity,
            per_sec: capacity / 60.0,
            state: Mutex::new((capacity, Instant::now())),
        }
    }

    /// Time to wait before the next request may go out; takes a token.
    pub fn reserve(&self) -> Duration {
        let mut st = self.state.lock().unwrap_or_else(|e| e.into_inner());
        let now = Instant::now();
        let refill = now.duration_since(st.1).as_secs_f64() * self.per_sec;
        st.0 = (st.0 + refill).min(self.capacity);
        st.1 = now;
        st.0 -= 1.0;
        if st.0 >= 0.0 {
            Duration::ZERO
        } else {
            Duration::from_secs_f64(-st.0 / self.per_sec)
        }
    }
}

pub struct HttpTransport {
    agent: ureq::Agent,
    url: String,
    api_key: Option<String>,
    limiter: Option<RateLimiter>,
}

pub fn completions_url(endpoint: &str) -> String {
    let e = endpoint.trim_end_matches('/');
    if e.ends_with("/chat/completions") {
        e.to_string()
    } else {
        format!("{e}/chat/completions")
    }
}

impl HttpTransport {
    /// Reads the API key from `config.api_key_env`; a missing key sends no
    /// authorization header.
    pub fn new(config: &LlmConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        HttpTransport {
            agent,
            url: completions_url(&config.endpoint),
            api_key: std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty()),
            limiter: config.requests_per_minute.map(RateLimiter::per_minute),
        }
    }
}

fn map_err(e: ureq::Error) -> OracleError {
    match e {
        ureq::Error::Timeout(_) => OracleError::Timeout,
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => OracleError::Timeout,
        other => OracleError::Transport(other.to_string()),
    }
}

impl ChatTransport for HttpTransport {
    fn complete(&self, request: &ChatRequest) -> Result<String, OracleError> {
        if let Some(l) = &self.limiter {
            let wait = l.reserve();
            if !wait.is_zero() {
                std::thread::sleep(wait);
            }
        }
        let mut req = self.agent.post(&self.url).header("Content-Type", "application/json");
        if let Some(k) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {k}"));
        }
        let body = serde_json::to_vec(request).map_err(|e| OracleError::Transport(e.to_string()))?;
        let mut resp = req.send(&body[..]).map_err(map_err)?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(map_err)?;
        if status != 200 {
            return Err(OracleError::Transport(format!(
                "HTTP {status}: {}",
                text.chars().take(200).collect::<String>()
            )));
        }
        let v: Value =
            serde_json::from_str(&text).map_err(|e| OracleError::Transport(format!("bad response body: {e}")))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| OracleError::Transport("response has no choices[0].message.content".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn url_joining() {
        assert_eq!(completions_url("http://h/v1"), "http://h/v1/chat/completions");
        assert_eq!(completions_url("http://h/v1/"), "http://h/v1/chat/completions");
        assert_eq!(
            completions_url("http://h/v1/chat/completions"),
            "http://h/v1/chat/completions"
        );
    }

    #[test]
    fn bucket_allows_burst_then_waits() {
        let l = RateLimiter::per_minute(3);
        for _ in 0..3 {
            assert_eq!(l.reserve(), Duration::ZERO);
        }
        let w = l.reserve();
        assert!(w > Duration::from_secs(15) && w <= Duration::from_secs(20), "{w:?}");
    }
}
