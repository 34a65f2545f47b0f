//! Textual front-end: prompt construction, completion providers and
//! response parsing into a textual scenario IR.

mod prompt;
mod provider;
mod response;

pub use prompt::{
    build_prompt, default_fewshot, grammar_text, FewshotExample, PromptBundle, PromptError,
    CLOSE_MARKER, OPEN_MARKER,
};
pub use provider::{
    complete, complete_with, prompt_digest, HttpReply, HttpTransport, ProviderConfig,
    ProviderError, ProviderKind, Transport, TransportFailure, ENV_ENDPOINT, ENV_MODEL, ENV_TOKEN,
};
pub use response::{extract_block, parse_response, ResponseError, KEY_SYNONYMS};

use crate::ir::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Response(#[from] ResponseError),
}

/// Runs the full textual extraction: prompt, completion, parse. A response
/// whose scenario document fails to parse gets one repair round with the
/// error appended to the prompt; a second failure is returned.
pub fn extract_textual_ir(
    description: &str,
    fewshot: &[FewshotExample],
    provider: &ProviderConfig,
) -> Result<Scenario, ExtractError> {
    extract_textual_ir_with(description, fewshot, provider, &HttpTransport)
}

pub fn extract_textual_ir_with(
    description: &str,
    fewshot: &[FewshotExample],
    provider: &ProviderConfig,
    transport: &dyn Transport,
) -> Result<Scenario, ExtractError> {
    let prompt = build_prompt(description, fewshot)?;
    let raw = complete_with(provider, &prompt, transport)?;
    match parse_response(&raw) {
        Ok(s) => Ok(s),
        Err(ResponseError::Dsl { source, .. }) => {
            let repair = prompt.with_repair(&source.to_string());
            let raw = complete_with(provider, &repair, transport)?;
            Ok(parse_response(&raw)?)
        }
        Err(e) => Err(e.into()),
    }
}
