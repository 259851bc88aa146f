//! Multi-label sequential sentence classification with prompt-based language
//! models.

pub mod backend;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod prompting;
pub mod retrieval;
pub mod verbalizer;
pub mod weighcon;

pub use error::{Error, Result};
