//! Cartan data, root systems, Weyl groups, Satake diagrams, QSP parameters,
//! and the i-weight lattice.

mod datum;
mod iweight;
mod params;
mod satake;
mod weyl;

pub mod catalog;

pub use datum::{CartanDatum, RootDatum, XWeight, YVec};
pub use iweight::{IWeight, IWeightCtx};
pub use params::QSPParams;
pub use satake::{RankOneType, SatakeDiagram, SatakeReport};
pub use weyl::{extremal_string, longest_element, reflect_x, reflect_y, WeylElement};
