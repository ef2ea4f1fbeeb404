//! Benchmark fixtures shared by the criterion targets.

use eqlyap_core::{catalog_entry, CatalogEntry};

/// Catalog entry by name; panics on a typo in a benchmark.
pub fn entry(name: &str) -> CatalogEntry {
    catalog_entry(name).unwrap_or_else(|| panic!("no catalog entry {name}"))
}
