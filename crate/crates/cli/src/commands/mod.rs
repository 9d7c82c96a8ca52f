pub mod bounds;
pub mod couple;
pub mod moments;
pub mod simulate;
pub mod sweep;
pub mod vt;

/// Master seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_501;
