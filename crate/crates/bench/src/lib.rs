//! Shared workloads for the criterion benchmarks in `benches/`.

use substrat_core::{Fixture, Substitution};

/// Every built-in fixture with its name, validated once.
pub fn fixtures() -> Vec<(&'static str, Substitution)> {
    Fixture::ALL
        .into_iter()
        .map(|f| (f.name(), f.substitution()))
        .collect()
}
