//! Frog models with drift on rooted d-ary trees.
//!
//! Simulators for FM(d,p), the silent-loop variant FM′(d,p) and the
//! recursive model RFM(d,p); lock-step couplings with online invariant
//! checks; and rigorous numerical bounds on the truncated root-visit counts.

pub mod bounds;
pub mod coupling;
pub mod error;
pub mod fm;
pub mod model;
pub mod rde;
pub mod rfm;
pub mod rng;
pub mod runner;
pub mod schedule;
pub mod sim;
pub mod stacks;
pub mod stats;
pub mod sweep;
pub mod tree;

pub use bounds::{
    brw_min_growth, compute_moment_sequences, critical_rho, pa_lower_bound, pz_empirical_check, q_star, MomentBase,
    MomentSequences, ThresholdResult,
};
pub use coupling::{
    check_dominance, effective_extra_kill, run_coupled_fm, run_coupled_rfm, CheckMode, CoupledFmOutcome,
    CoupledRfmOutcome, DominanceReport, Embedding, ExtraKillStats, InvariantLog, Violation,
};
pub use error::{Error, Result};
pub use fm::{run_fm, run_fm_pair, run_fm_prime, FmPairOutcome};
pub use model::{p_of_rho, rho_of_p, sample_fm_step, ModelParams, Step, Vertex};
pub use rde::sample_rde_bound;
pub use rfm::{
    dominance_chain, run_rfm, run_rfm_loop_erased, run_rfm_with, sample_vt, visits_profile, vt_config, ChainOutcome,
    EarlyRemovalPolicy, RfmDriver, RfmRun, RfmStage, VtSample,
};
pub use schedule::{schedule_next, SchedulePolicy};
pub use sim::{
    estimate_root_visits, simulate, KillHistogram, KillReason, Model, RootVisitEstimate, SimConfig, TrialOutcome,
    TrialRow, Truncation,
};
pub use stacks::InstructionStacks;
pub use stats::Summary;
pub use sweep::{run_sweep, SweepConfig, SweepReport};
