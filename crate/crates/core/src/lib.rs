//! Grammar engine for controlled natural languages.

pub mod chart;
pub mod cli;
pub mod genertest;
pub mod grammar;
pub mod lookahead;
pub mod reference;
pub mod service;
pub mod symbol;
