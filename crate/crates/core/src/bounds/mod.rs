//! Closed-form and recursive numerics: the P(A) product bound, the
//! threshold it implies, moment recursions and the branching random walk
//! boundary.

pub mod brw;
pub mod moments;
pub mod pa;
pub mod pz;
pub mod threshold;

pub use brw::{brw_argmin, brw_growth, brw_min_growth, q_star};
pub use moments::{
    compute_moment_sequences, ev_fixed_point, stabilization, MomentBase, MomentRow, MomentSequences, Stabilization,
};
pub use pa::{pa_limit, pa_lower_bound, pa_table};
pub use pz::{pz_empirical_check, PzReport};
pub use threshold::{critical_rho, growth_factor, ThresholdResult};
