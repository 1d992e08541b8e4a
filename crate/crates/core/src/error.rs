use thiserror::Error;

use crate::engine::{EngineError, PartyId};
use crate::field::FieldError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("invalid protocol parameters: {0}")]
    Params(String),
    #[error("input {input:?} for {party} is outside the protocol alphabet")]
    InputAlphabet { party: PartyId, input: Vec<u64> },
    #[error("invalid deviation: {0}")]
    Deviation(String),
    #[error("deviation `{deviation}` does not apply to protocol `{protocol}`")]
    ProtocolMismatch { deviation: String, protocol: &'static str },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` appears in more than one argument set")]
    OverlappingVariables(String),
    #[error("distributions are over different variables ({0} vs {1})")]
    DomainMismatch(String, String),
    #[error("{protocol} has no extractor for the effective input of {party}")]
    NoExtractor { party: PartyId, protocol: &'static str },
    #[error("invalid input law: {0}")]
    InputLaw(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
