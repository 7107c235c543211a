use thiserror::Error;

use crate::site::SiteKey;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("site {0} appears in both operands")]
    SiteCollision(SiteKey),

    #[error("site {site} has local dimension {found}, expected {expected}")]
    DimensionMismatch {
        site: SiteKey,
        expected: u32,
        found: u32,
    },

    #[error("relabeling moves {from} across the A|B cut to {to}")]
    PartyViolation { from: SiteKey, to: SiteKey },

    #[error("site space mismatch at {site}: {detail}")]
    SiteSpaceMismatch { site: SiteKey, detail: String },

    #[error("state is outside the isometry domain: {0}")]
    DomainViolation(String),

    #[error("catalyst shape error: {0}")]
    CatalystShape(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("{party} isometry touches site {site} of the other party")]
    LocalityViolation { party: crate::site::Party, site: SiteKey },

    #[error("commutation identity violated: deviation {deviation:e} exceeds {tolerance:e}")]
    CommutationViolation { deviation: f64, tolerance: f64 },

    #[error("morphism cannot ingest operator: {0}")]
    MorphismType(String),

    #[error("amplitude count {required} exceeds budget {budget}")]
    SizeBudgetExceeded { required: u128, budget: usize },

    #[error("invalid target state: {0}")]
    InvalidTarget(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("state does not factor across the requested sites")]
    NotProduct,
}
