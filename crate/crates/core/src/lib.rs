pub mod error;
pub mod linalg;
pub mod matrix;
pub mod spectral;
pub mod tolerances;
pub mod ginverse;
pub mod conditions;
pub mod theorems;
pub mod cli;
