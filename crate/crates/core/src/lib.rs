//! Cubic multipoles, normal k-edge-colorings, superpositions of snarks along
//! cycles, and an exhaustive backtracking engine over edge-colorings.
//!
//! The crate is organized around:
//! - [`multipole`]: the data model (vertices, edges, semiedges, connectors)
//!   and structural operations (induced submultipoles, unions, joins).
//! - [`coloring`]: proper and normal colorings, poor/rich classification,
//!   Kempe chains, restriction and compatibility.
//! - [`catalog`]: the fixed constructions (Petersen graph and its truncation,
//!   the superedge and supervertices, a few named snarks).
//! - [`superpose`]: building superpositions of a cycle by supervertices and
//!   superedges, including the twisted wirings.
//! - [`extend`]: the constructive extension of a normal 5-coloring of a base
//!   graph across an even superposed cycle.
//! - [`search`]: the exhaustive solver (exists / count / enumerate /
//!   maximize-poor) and the verification pipelines built on it.

pub mod catalog;
pub mod certificate;
pub mod coloring;
pub mod dot;
pub mod extend;
pub mod graph6;
pub mod iso;
pub mod multipole;
pub mod search;
pub mod superpose;

pub use coloring::{Color, ColorSet, EdgeColoring};
pub use multipole::{ElementId, Multipole};
