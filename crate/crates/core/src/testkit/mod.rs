//! Instance generation and independent oracles for the test suites and
//! benchmarks.

mod generate;
mod naive;
mod reference;
mod sampler;

pub use generate::{adversarial_nested, generate, structure_holds, InstanceSpec, Structure};
pub use naive::{naive_edf_s_schedule, EdfOutcome};
pub use reference::rounded_reference_energy;
pub use sampler::feasible_sampler;
