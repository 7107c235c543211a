//! Finite, exact representations of infinite-tensor-product catalysts and the
//! embezzlement protocols that act on them.
//!
//! States live on named qudit sites with an implicit `|0⟩` tail
//! ([`LazyProductState`]); operators have finite support ([`SiteOperator`]);
//! isometries are sequences of site relabelings and local cores
//! ([`StructuredIsometry`]). On top of these sit the hotel and van Dam-Hayden
//! embezzlers, the conversions between standard and no-input form, the
//! certification of infinitely many commuting target copies, and composite
//! catalysts for families of rational targets.

pub mod certify;
pub mod error;
pub mod isometry;
pub mod operator;
pub mod par;
pub mod probes;
pub mod protocols;
pub mod relabel;
pub mod schmidt;
pub mod site;
pub mod state;
pub mod target;
pub mod universal;

pub use error::{Error, Result};
pub use isometry::{verify_isometry, Step, StructuredIsometry};
pub use operator::SiteOperator;
pub use relabel::{PoolShift, Relabeling};
pub use schmidt::schmidt_spectrum;
pub use site::{Party, Role, SiteId, SiteKey};
pub use state::{tensor_states, LazyProductState, Reservoir};
pub use target::{SchmidtSpectrum, TargetState};

/// Normalization tolerance for states and targets.
pub const NORM_TOL: f64 = 1e-12;
/// Default comparison tolerance for deviations.
pub const TOL: f64 = 1e-12;
/// Amplitudes and matrix entries below this modulus are dropped.
pub const PRUNE_TOL: f64 = 1e-15;
