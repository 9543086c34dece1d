//! Library surface of the batch front-end, used by the binary and by the
//! integration tests.

pub mod commands;
pub mod config;
