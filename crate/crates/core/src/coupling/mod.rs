//! Lock-step couplings with online invariant checks.

pub mod dominance;
pub mod embedding;
pub mod fm_kd;
pub mod log;
pub mod rfm_plus1;

pub use dominance::{check_dominance, DominanceReport};
pub use embedding::Embedding;
pub use fm_kd::{run_coupled_fm, CoupledFmOutcome};
pub use log::{CheckMode, InvariantLog, Violation};
pub use rfm_plus1::{effective_extra_kill, run_coupled_rfm, CoupledRfmOutcome, ExtraKillStats};
