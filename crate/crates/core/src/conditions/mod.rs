//! Word conditions on pairs and the structured generators behind every
//! property check.

pub mod generators;
mod words;

pub use generators::*;
pub use words::{check_word_condition, ConditionReport, WordPattern, MAX_WORD_LENGTH};
