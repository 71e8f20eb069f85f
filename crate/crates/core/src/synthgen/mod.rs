//! Synthetic corpora with known scripts, controllable noise and
//! cluster-structured features, plus exhaustive reference solvers for
//! small instances.

mod config;
mod generate;
mod oracles;
mod vocab;

pub use config::SynthConfig;
pub use generate::{generate, SynthCorpus};
pub use oracles::{
    brute_force_localize, brute_force_msa, increasing_subsets, LOCALIZE_CAPS, MSA_CAPS,
};
pub use vocab::{distractor_token, step_token};
