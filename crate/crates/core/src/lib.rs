pub mod cli;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod green_continuous;
pub mod green_discrete;
pub mod measure;
pub mod plot;
pub mod potential;
pub mod solver;
pub mod walk;
