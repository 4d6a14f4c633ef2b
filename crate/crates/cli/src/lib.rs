//! Orchestration behind the `shimura-hasse` binary: the persistent cache,
//! the per-pair search records, the flagship verification and the output
//! format. The arithmetic lives in `shimura_core`.

pub mod cache;
pub mod error;
pub mod output;
pub mod report;
pub mod verify;

pub use cache::{Cache, CacheError};
pub use error::{exit, CliError, CliResult};
pub use report::{curve_report, search, search_pairs, Classification, CurveReport};
pub use verify::{verify_flagship, Verification};
