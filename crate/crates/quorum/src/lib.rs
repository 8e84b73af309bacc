//! File formats, data generation and the benchmark harness for `quorum-core`.
//!
//! The algorithms live in the `no_std` core crate. This crate adds what needs
//! an operating system: reading and writing bitmaps, datasets and compiled
//! programs; synthetic and q-gram datasets; similarity queries; adaptive
//! timing; and competitions that verify every algorithm against the oracle
//! before timing it.

pub mod algos;
pub mod cache;
pub mod competition;
pub mod data;
pub mod error;
pub mod format;
pub mod query;
pub mod schedule;
pub mod timing;

use std::fmt;
use std::str::FromStr;

pub use error::{Error, Result};

/// Which bitmap representation an experiment runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Repr {
    Uncompressed,
    Rle,
}

impl Repr {
    pub const ALL: [Repr; 2] = [Repr::Uncompressed, Repr::Rle];

    pub fn name(self) -> &'static str {
        match self {
            Repr::Uncompressed => "uncompressed",
            Repr::Rle => "ewah",
        }
    }
}

impl fmt::Display for Repr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Repr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uncompressed" | "bitset" => Ok(Repr::Uncompressed),
            "ewah" | "rle" => Ok(Repr::Rle),
            _ => Err(Error::Input(format!("unknown representation `{s}` (expected ewah or uncompressed)"))),
        }
    }
}
