//! Instance generators, text formats and the built-in example corpus.

pub mod generate;
pub mod format;
pub mod corpus;
