//! Library side of the command-line tool: the bundled demo dataset, CSV
//! ingestion and report envelopes.

pub mod demo;
pub mod io;
pub mod report;
