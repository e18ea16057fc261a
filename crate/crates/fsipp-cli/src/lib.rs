//! Problem-file I/O and fixture instances for the solver command line.
//!
//! The binary in this package wraps the `fsipp` library behind a JSON
//! problem format ([`schema::ProblemFile`]), a JSON result format
//! ([`schema::ResultFile`]), and a set of subcommands for solving,
//! membership testing, boundary tracing, certification, exact moments,
//! grid discretization, and SDPA export.  [`fixtures`] holds the reference
//! instances that the integration tests drive.

pub mod fixtures;
pub mod schema;
