//! Multiple sequence alignment of narrated token sequences and extraction
//! of the main ordered steps.

mod alignment;
mod fw;
pub mod io;
mod progressive;
mod steps;
mod token;

pub use alignment::{
    msa_linear_oracle, remapping_score, sum_of_pairs_cost, trace_form_cost, GlobalAlignment,
};
pub use fw::{fw_msa, relaxed_msa_objective, MsaHistory, MsaInit, MsaOptions, MsaSolution};
pub use progressive::progressive_align;
pub use steps::{adaptive_step_count, extract_main_steps, StepAssignment};
pub use token::{
    build_token_cost, token_pair_cost_matrix, Span, Token, TokenCostMatrix, TokenSequence,
    DEFAULT_MATCH_REWARD, DEFAULT_MISMATCH_PENALTY,
};
