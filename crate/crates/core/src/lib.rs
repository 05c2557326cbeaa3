//! Step skew products over Bernoulli shifts whose attractor has an
//! epsilon-invisible part: fiber maps, orbits, steering words and
//! numerical certificates.

pub mod certificate;
pub mod commands;
pub mod error;
pub mod fiber;
pub mod geometry;
pub mod hat;
pub mod orbit;
pub mod params;
pub mod perturb;
pub mod scalar;
pub mod symbolic;
pub mod verify;
pub mod words;

pub use certificate::Certificate;
pub use error::{Error, Result};
pub use fiber::{FiberFamily, SymbolVector};
pub use geometry::{BoxN, RegionId};
pub use params::{derive_params, Params};
pub use symbolic::{BaseSequence, Word};
