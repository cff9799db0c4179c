pub mod datasets;
pub mod evaluation;
pub mod fol;
pub mod gateway;
pub mod pipeline;
pub mod prompting;
pub mod prover;

pub use prover::Label;
