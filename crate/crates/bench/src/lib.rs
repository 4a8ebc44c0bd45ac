//! Instance families shared by the benchmarks.

use voltsched_core::testkit::{adversarial_nested, generate, InstanceSpec, Structure};
use voltsched_core::JobSet;

/// Random instance of the given structure with a fixed seed.
pub fn family(n: usize, structure: Structure) -> JobSet<f64> {
    generate(&InstanceSpec::new(n, structure, 7))
}

/// Nested chain whose recursion peels a few jobs per level.
pub fn nested_chain(n: usize) -> JobSet<f64> {
    adversarial_nested(n, 1.3)
}
