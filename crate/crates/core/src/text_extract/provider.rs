//! Chat-completion providers: an HTTP client for the common
//! `{model, messages}` wire shape and an offline mock that replays canned
//! responses keyed by the prompt digest.

use std::path::PathBuf;
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::prompt::PromptBundle;

pub const ENV_ENDPOINT: &str = "SCENARIO_FORGE_LLM_ENDPOINT";
pub const ENV_MODEL: &str = "SCENARIO_FORGE_LLM_MODEL";
pub const ENV_TOKEN: &str = "SCENARIO_FORGE_LLM_TOKEN";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderKind {
    /// Replays `<dir>/<digest>.txt`; never touches the network.
    Mock { dir: PathBuf },
    Http {
        endpoint: String,
        model: String,
        /// Name of the environment variable holding the bearer token.
        token_env: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub timeout_secs: u64,
    pub retries: u32,
    /// Base delay between attempts; doubles each retry.
    pub backoff_ms: u64,
}

impl ProviderConfig {
    pub fn mock(dir: impl Into<PathBuf>) -> Self {
        ProviderConfig {
            kind: ProviderKind::Mock { dir: dir.into() },
            timeout_secs: 60,
            retries: 2,
            backoff_ms: 250,
        }
    }

    pub fn http(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        ProviderConfig {
            kind: ProviderKind::Http {
                endpoint: endpoint.into(),
                model: model.into(),
                token_env: Some(ENV_TOKEN.to_string()),
            },
            timeout_secs: 60,
            retries: 2,
            backoff_ms: 250,
        }
    }

    /// HTTP provider from `SCENARIO_FORGE_LLM_ENDPOINT` / `_MODEL`; the
    /// token is read from `SCENARIO_FORGE_LLM_TOKEN` at call time.
    pub fn from_env() -> Option<Self> {
        let endpoint = std::env::var(ENV_ENDPOINT).ok()?;
        let model = std::env::var(ENV_MODEL).unwrap_or_else(|_| "gpt-4o".to_string());
        Some(ProviderConfig::http(endpoint, model))
    }

    pub fn check(&self) -> Result<(), ProviderError> {
        if self.timeout_secs == 0 {
            return Err(ProviderError::Config("timeout must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    #[error("transport failed after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("authentication rejected (HTTP {status})")]
    Auth { status: u16 },
    #[error("no canned response for prompt digest {digest} (looked for {path})")]
    MockMissing { digest: String, path: PathBuf },
    #[error("malformed provider response: {0}")]
    BadResponse(String),
    #[error("invalid provider configuration: {0}")]
    Config(String),
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Raw HTTP reply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpReply {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportFailure {
    Timeout,
    Connect(String),
}

/// The network boundary. Swappable so tests can observe or fake calls.
pub trait Transport: Send + Sync {
    fn post_json(
        &self,
        url: &str,
        bearer: Option<&str>,
        body: &Value,
        timeout: Duration,
    ) -> Result<HttpReply, TransportFailure>;
}

/// Blocking HTTP transport.
#[derive(Debug, Default, Clone, Copy)]
pub struct HttpTransport;

impl Transport for HttpTransport {
    fn post_json(
        &self,
        url: &str,
        bearer: Option<&str>,
        body: &Value,
        timeout: Duration,
    ) -> Result<HttpReply, TransportFailure> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut req = agent.post(url).header("Content-Type", "application/json");
        if let Some(token) = bearer {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let map_err = |e: ureq::Error| match e {
            ureq::Error::Timeout(_) => TransportFailure::Timeout,
            other => TransportFailure::Connect(other.to_string()),
        };
        let mut resp = req.send(body.to_string()).map_err(map_err)?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(map_err)?;
        Ok(HttpReply { status, body })
    }
}

/// Hex SHA-256 of the rendered prompt; names mock response files.
pub fn prompt_digest(prompt: &PromptBundle) -> String {
    let digest = Sha256::digest(prompt.render().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Sends `prompt` to the configured provider and returns the model's text.
pub fn complete(config: &ProviderConfig, prompt: &PromptBundle) -> Result<String, ProviderError> {
    complete_with(config, prompt, &HttpTransport)
}

pub fn complete_with(
    config: &ProviderConfig,
    prompt: &PromptBundle,
    transport: &dyn Transport,
) -> Result<String, ProviderError> {
    config.check()?;
    match &config.kind {
        ProviderKind::Mock { dir } => {
            let digest = prompt_digest(prompt);
            let path = dir.join(format!("{digest}.txt"));
            if !path.exists() {
                return Err(ProviderError::MockMissing { digest, path });
            }
            std::fs::read_to_string(&path).map_err(|source| ProviderError::Io { path, source })
        }
        ProviderKind::Http {
            endpoint,
            model,
            token_env,
        } => {
            let token = token_env.as_deref().and_then(|v| std::env::var(v).ok());
            let body = json!({
                "model": model,
                "messages": [{"role": "user", "content": prompt.render()}],
            });
            let timeout = Duration::from_secs(config.timeout_secs);
            let attempts = config.retries + 1;
            let mut last = ProviderError::Transport {
                attempts: 0,
                message: "no attempt made".into(),
            };
            for attempt in 1..=attempts {
                if attempt > 1 && config.backoff_ms > 0 {
                    let factor = 1u64 << (attempt - 2).min(10);
                    thread::sleep(Duration::from_millis(config.backoff_ms * factor));
                }
                match transport.post_json(endpoint, token.as_deref(), &body, timeout) {
                    Ok(reply) if reply.status == 401 || reply.status == 403 => {
                        return Err(ProviderError::Auth {
                            status: reply.status,
                        })
                    }
                    Ok(reply) if (200..300).contains(&reply.status) => {
                        return extract_text(&reply.body)
                    }
                    Ok(reply) if reply.status == 429 || reply.status >= 500 => {
                        last = ProviderError::Transport {
                            attempts: attempt,
                            message: format!("HTTP {}", reply.status),
                        };
                    }
                    Ok(reply) => {
                        return Err(ProviderError::BadResponse(format!(
                            "HTTP {}: {}",
                            reply.status,
                            reply.body.chars().take(200).collect::<String>()
                        )))
                    }
                    Err(TransportFailure::Timeout) => {
                        last = ProviderError::Timeout { attempts: attempt };
                    }
                    Err(TransportFailure::Connect(message)) => {
                        last = ProviderError::Transport {
                            attempts: attempt,
                            message,
                        };
                    }
                }
            }
            Err(last)
        }
    }
}

/// Pulls the completion text out of a chat-completion style response.
fn extract_text(body: &str) -> Result<String, ProviderError> {
    let v: Value =
        serde_json::from_str(body).map_err(|e| ProviderError::BadResponse(e.to_string()))?;
    let candidates = [
        v.pointer("/choices/0/message/content"),
        v.pointer("/choices/0/text"),
        v.pointer("/content/0/text"),
        v.get("text"),
        v.get("output_text"),
    ];
    let text = candidates
        .into_iter()
        .flatten()
        .find_map(|c| c.as_str())
        .map(str::to_string);
    text.ok_or_else(|| ProviderError::BadResponse("no text field in response".into()))
}
