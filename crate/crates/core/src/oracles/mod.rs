//! Brute-force ground truth for tests and the acceptance suite: exact TSP
//! and Steiner Tree on small graphs, exact highway dimension, a SAT
//! enumerator, and the certified hd-1 instance generator. None of this code
//! shares logic with the tree-decomposition solvers.

mod dreyfus_wagner;
mod generator;
mod held_karp;
mod highway;
mod sat;

pub use dreyfus_wagner::{dreyfus_wagner_steiner, dreyfus_wagner_steiner_capped};
pub use generator::{build_corpus, corpus_params, gen_hd1_instance, CorpusEntry, GeneratedInstance, GeneratorParams};
pub use held_karp::{held_karp_tsp, held_karp_tsp_capped};
pub use highway::{exact_highway_dimension, exact_highway_dimension_capped};
pub use sat::{sat_bruteforce, SAT_MAX_VARS};

/// Environment variable overriding every oracle size cap.
pub const CAP_ENV: &str = "HWY1_MAX_ORACLE_N";

pub const HELD_KARP_CAP: usize = 18;
pub const DREYFUS_WAGNER_CAP: usize = 12;
pub const HIGHWAY_CAP: usize = 12;

/// `default`, unless the override variable holds a number.
pub fn oracle_cap(default: usize) -> usize {
    std::env::var(CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(default)
}
