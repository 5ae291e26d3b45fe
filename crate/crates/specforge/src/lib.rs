//! Solver-backed tools around `specforge-core`: the SMT process bridge,
//! scripted oracles, event-sourced sessions and their storage, the HTTP
//! service and the command line.

pub mod bridge;
pub mod cli;
pub mod config;
pub mod http;
pub mod script;
pub mod service;
pub mod session;
pub mod sexpr;
pub mod store;
