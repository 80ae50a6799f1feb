pub mod check;
pub mod library;
pub mod report;
pub mod synth;
pub mod transform;
