//! Process constructions: exact product-space models, streaming samplers
//! and the stationary shift representation.

mod description;
mod exact;
mod functional;
mod law;
pub mod presets;
mod sampler;
mod shift;

pub use description::{FunctionalDescription, LawDescription, LawKindName, ModelDescription};
pub use exact::{build_exact, ExactProcess, ExactProcessModel, DEFAULT_ATOM_BUDGET};
pub(crate) use functional::table_len;
pub use functional::{Functional, FunctionalPattern, LocalTable, MAX_TABLE_LEN};
pub use law::{CoordinateLaw, LawKind};
pub use sampler::{replica_rng, SamplerModel, SymbolDrawer};
pub use shift::StationaryShiftModel;
