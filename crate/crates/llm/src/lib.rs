//! Free-text reaction extraction via any OpenAI-compatible endpoint.
//!
//! The model is asked for kinetic-table JSON (the same schema the
//! deterministic parser reads, `docs/kinetic_table.schema.json`); the
//! response is schema-parsed and validator-checked, and error-severity
//! findings are sent back as machine-readable repair feedback for up to
//! `max_repair_rounds` extra rounds. Prompt templates are versioned
//! files under `prompts/`, injected verbatim apart from the marked
//! `{{...}}` slots.
//!
//! Configuration comes from `CRN_LLM_BASE_URL`, `CRN_LLM_MODEL` and
//! `CRN_LLM_API_KEY`; the key is never written to transcripts, logs, or
//! metadata.

pub mod client;
pub mod mock;

use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crn_core::network::ReactionNetwork;
use crn_core::table::{parse_kinetic_table, KineticTable, TableError};
use crn_core::validate::{validate, ValidationReport};

use client::{ChatClient, Message};

pub const ENV_BASE_URL: &str = "CRN_LLM_BASE_URL";
pub const ENV_MODEL: &str = "CRN_LLM_MODEL";
pub const ENV_API_KEY: &str = "CRN_LLM_API_KEY";

const EXTRACT_TEMPLATE: &str = include_str!("../prompts/extract_v1.txt");
const REPAIR_TEMPLATE: &str = include_str!("../prompts/repair_v1.txt");
const SCHEMA_JSON: &str = include_str!("../../../docs/kinetic_table.schema.json");

#[derive(Debug, Clone)]
pub struct LlmConfig {
    pub base_url: String,
    pub model: String,
    /// Bearer token; kept out of every artifact this crate produces.
    pub api_key: Option<String>,
    pub temperature: f64,
    pub max_repair_rounds: u32,
    pub timeout: Duration,
}

impl LlmConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            api_key: None,
            temperature: 0.0,
            max_repair_rounds: 3,
            timeout: Duration::from_secs(120),
        }
    }

    /// Read endpoint settings from the `CRN_LLM_*` environment.
    pub fn from_env() -> Result<Self, LlmError> {
        let base_url = std::env::var(ENV_BASE_URL)
            .map_err(|_| LlmError::Config(format!("{ENV_BASE_URL} is not set")))?;
        let model = std::env::var(ENV_MODEL)
            .map_err(|_| LlmError::Config(format!("{ENV_MODEL} is not set")))?;
        let mut config = Self::new(base_url, model);
        config.api_key = std::env::var(ENV_API_KEY).ok();
        Ok(config)
    }
}

/// One prompt/response exchange with its local verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct Round {
    /// The message added this round (full instructions on round one,
    /// repair feedback afterwards).
    pub prompt: String,
    pub raw_response: String,
    pub parse_outcome: String,
    pub validation_report: Option<ValidationReport>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalOutcome {
    Table(KineticTable),
    Failed(String),
}

/// Full record of an extraction conversation.
#[derive(Debug, Clone, Serialize)]
pub struct ExtractionTranscript {
    pub rounds: Vec<Round>,
    #[serde(rename = "final")]
    pub fin: FinalOutcome,
}

impl ExtractionTranscript {
    pub fn to_json(&self) -> String {
        let mut json = serde_json::to_string_pretty(self).expect("transcript serialises");
        json.push('\n');
        json
    }
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("LLM endpoint not configured: {0}")]
    Config(String),
    #[error("endpoint error{}: {detail}", match status { Some(s) => format!(" (HTTP {s})"), None => String::new() })]
    Endpoint { status: Option<u16>, detail: String },
    #[error("model response is not JSON after code-fence stripping")]
    ResponseNotJson { transcript: Box<ExtractionTranscript> },
    #[error("extraction failed after {rounds} round(s)")]
    ExtractionFailed {
        rounds: usize,
        transcript: Box<ExtractionTranscript>,
    },
}

impl LlmError {
    /// Transcript of the failed conversation, when one exists.
    pub fn transcript(&self) -> Option<&ExtractionTranscript> {
        match self {
            LlmError::ResponseNotJson { transcript } | LlmError::ExtractionFailed { transcript, .. } => {
                Some(transcript)
            }
            _ => None,
        }
    }
}

/// Extract a validated network from a free-text description.
///
/// On success the network is admissible and the transcript records
/// every round. Transport problems surface as [`LlmError::Endpoint`];
/// non-JSON responses abort immediately; schema or validation errors
/// trigger repair rounds until `max_repair_rounds` is exhausted.
pub fn extract_network(
    description: &str,
    config: &LlmConfig,
) -> Result<(ReactionNetwork, ExtractionTranscript), LlmError> {
    if description.trim().is_empty() {
        return Err(LlmError::Config("description is empty".into()));
    }
    let client = ChatClient::new(
        &config.base_url,
        &config.model,
        config.api_key.clone(),
        config.temperature,
        config.timeout,
    )?;

    let system_prompt = EXTRACT_TEMPLATE.replace("{{SCHEMA}}", SCHEMA_JSON);
    let mut messages = vec![Message::system(system_prompt), Message::user(description)];
    let mut rounds: Vec<Round> = Vec::new();

    for round_index in 0..=config.max_repair_rounds {
        let prompt = messages.last().expect("conversation is nonempty").content.clone();
        let raw_response = client.complete(&messages)?;
        let stripped = strip_code_fences(&raw_response);

        let issues_json: String;
        match parse_kinetic_table(stripped.as_bytes()) {
            Err(TableError::Json(reason)) => {
                rounds.push(Round {
                    prompt,
                    raw_response,
                    parse_outcome: format!("not_json: {reason}"),
                    validation_report: None,
                });
                return Err(LlmError::ResponseNotJson {
                    transcript: Box::new(ExtractionTranscript {
                        rounds,
                        fin: FinalOutcome::Failed("response is not JSON".into()),
                    }),
                });
            }
            Err(err @ TableError::Schema { .. }) => {
                issues_json = serde_json::json!({ "schema_error": err.to_string() }).to_string();
                rounds.push(Round {
                    prompt,
                    raw_response: raw_response.clone(),
                    parse_outcome: format!("schema_error: {err}"),
                    validation_report: None,
                });
            }
            Ok(parsed) => {
                let report = validate(&parsed.network);
                if report.is_admissible {
                    rounds.push(Round {
                        prompt,
                        raw_response,
                        parse_outcome: "ok".into(),
                        validation_report: Some(report),
                    });
                    let table = KineticTable::from_network(&parsed.network);
                    let transcript = ExtractionTranscript {
                        rounds,
                        fin: FinalOutcome::Table(table),
                    };
                    return Ok((parsed.network, transcript));
                }
                issues_json = report.to_json();
                rounds.push(Round {
                    prompt,
                    raw_response: raw_response.clone(),
                    parse_outcome: "inadmissible".into(),
                    validation_report: Some(report),
                });
            }
        }

        if round_index < config.max_repair_rounds {
            messages.push(Message::assistant(raw_response_of(&rounds)));
            messages.push(Message::user(
                REPAIR_TEMPLATE.replace("{{ISSUES}}", &issues_json),
            ));
        }
    }

    let attempts = rounds.len();
    Err(LlmError::ExtractionFailed {
        rounds: attempts,
        transcript: Box::new(ExtractionTranscript {
            rounds,
            fin: FinalOutcome::Failed(format!("no admissible table after {attempts} round(s)")),
        }),
    })
}

fn raw_response_of(rounds: &[Round]) -> String {
    rounds.last().expect("at least one round").raw_response.clone()
}

/// Strip a surrounding markdown code fence (``` or ```json) if present.
/// Anything else around the JSON stays and will fail JSON parsing.
pub fn strip_code_fences(text: &str) -> String {
    let trimmed = text.trim();
    let Some(rest) = trimmed.strip_prefix("```") else {
        return trimmed.to_owned();
    };
    let rest = rest.strip_prefix("json").or(rest.strip_prefix("JSON")).unwrap_or(rest);
    let rest = rest.strip_prefix('\n').unwrap_or(rest);
    match rest.rfind("```") {
        Some(end) => rest[..end].trim().to_owned(),
        None => rest.trim().to_owned(),
    }
}
