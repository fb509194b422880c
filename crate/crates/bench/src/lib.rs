//! Table reproduction and randomized property checks for the preconditioned
//! AOR library.

pub mod config;
pub mod error;
pub mod gmres_table;
pub mod output;
pub mod spectral;
pub mod suite;

pub use config::{BenchConfig, OutputFormat, TableKind};
pub use error::{BenchError, Result};
pub use gmres_table::{run_gmres_table, GmresRow};
pub use spectral::{run_spectral_table, SpectralRow};
pub use suite::{run_property_suite, run_property_suite_with, SuiteOptions, SuiteReport};
