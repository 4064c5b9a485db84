//! Citation auditing: parse reference lists, resolve claimed metadata
//! against scholarly providers, and classify fabricated references by
//! failure mode.

pub mod analytics;
pub mod classifier;
pub mod error;
pub mod identifiers;
pub mod matching;
pub mod model;
pub mod parser;
pub mod report;
pub mod resolver;
pub mod text;
