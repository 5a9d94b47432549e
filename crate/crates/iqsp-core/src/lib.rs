//! Exact computation for quantum groups and quantum symmetric pairs of finite
//! type: Laurent/rational-function arithmetic over `Z[q,q^-1]` and `Q(q)`,
//! Cartan and Satake data, the half quantum group `f` with its Serre quotient,
//! PBW and canonical bases, braid operators, the intertwiner of a quantum
//! symmetric pair, i-canonical bases of based modules, and the stabilized
//! canonical basis of the modified coideal subalgebra.
//!
//! Everything is computed over exact coefficient rings; there is no floating
//! point anywhere. The crate is `no_std` (with `alloc`); IO, the CLI, and file
//! formats live in the companion `iqsp-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod scalars;

pub mod linalg;

pub mod cartan;

pub mod falg;

pub mod ualg;

pub mod umod;

pub mod canbasis;

pub mod qsp;

pub mod icanbasis;

use alloc::string::String;

/// Errors surfaced by the algebraic layers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// A requested weight/height exceeds the configured bound.
    BoundExceeded(String),
    /// Input data failed a structural validation (non-finite type, bad
    /// involution, parameter constraint violation, ...).
    Invalid(String),
    /// A linear system that theory asserts is solvable came out singular or
    /// inconsistent; usually means the probe module was too small.
    Singular(String),
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::BoundExceeded(s) => write!(f, "bound exceeded: {s}"),
            Error::Invalid(s) => write!(f, "invalid input: {s}"),
            Error::Singular(s) => write!(f, "singular system: {s}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
