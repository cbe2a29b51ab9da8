//! JSON formats and the command-line front end over `bes-core`.

pub mod cli;
pub mod dto;
