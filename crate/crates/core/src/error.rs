use thiserror::Error;

use crate::group::GroupError;
use crate::hash::HashError;
use crate::oracle::OracleError;

/// Failures of the protocol state machines.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("ephemeral exponent produces a degenerate message; sample a new one")]
    RetryNonce,
    #[error("ephemeral exponent must lie in [1, q-2]")]
    NonceOutOfRange,
    #[error("no verifier registered for this identity")]
    UnknownIdentity,
    #[error("unmasked value is not in Z_q^*")]
    UnmaskOutOfRange,
    #[error("received value is not in Z_q^*")]
    NotInGroup,
    #[error("authentication failed")]
    AuthFail,
    #[error("operation not valid in phase {0}")]
    WrongPhase(&'static str),
    #[error("identities must differ")]
    SameIdentity,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Hash(#[from] HashError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
