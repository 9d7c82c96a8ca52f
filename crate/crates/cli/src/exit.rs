//! Error kinds that select the process exit code.

use std::fmt;

pub const USAGE: u8 = 2;
pub const IO: u8 = 3;
pub const INVARIANT: u8 = 4;

#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug)]
pub struct InvariantError(pub String);

impl fmt::Display for InvariantError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvariantError {}

pub fn code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<InvariantError>() {
            return INVARIANT;
        }
        if cause.is::<UsageError>() || cause.is::<frogtree_core::Error>() {
            return USAGE;
        }
        if cause.is::<std::io::Error>() {
            return IO;
        }
        if let Some(e) = cause.downcast_ref::<csv::Error>() {
            if e.is_io_error() {
                return IO;
            }
        }
        if cause.is::<serde_json::Error>() {
            return IO;
        }
    }
    1
}

#[cfg(test)]
mod tests {
    use super::*;
    use anyhow::Context;

    #[test]
    fn codes_follow_the_cause_chain() {
        let inv = anyhow::Error::new(InvariantError("x".into())).context("couple");
        assert_eq!(code_for(&inv), INVARIANT);
        let usage = anyhow::Error::new(frogtree_core::Error::Config("bad".into()));
        assert_eq!(code_for(&usage), USAGE);
        let io: anyhow::Result<()> = Err(std::io::Error::other("disk")).context("writing");
        assert_eq!(code_for(&io.unwrap_err()), IO);
        assert_eq!(code_for(&anyhow::anyhow!("other")), 1);
    }
}
