//! Edge coloring of multigraphs within `φ + log_{3/2} min(n/3, φ)` colors,
//! where `φ` is the round-up of the fractional chromatic index.
//!
//! [`pipeline::color`] runs the whole method: complete the input to an
//! `r`-graph, decompose it ([`reduction`]), color the leaves and merge the
//! colorings back ([`coloring`]), then certify the bound.

pub mod coloring;
pub mod completion;
pub mod corpus;
pub mod format;
pub mod generate;
pub mod graph;
pub mod invariants;
pub mod matching;
pub mod pipeline;
pub mod reduction;

pub use coloring::{certify, exact_chromatic_index, BoundCertificate, EdgeColoring};
pub use graph::{Edge, EdgeId, Multigraph, VertexSet};
pub use pipeline::{color, ColorOutcome, PipelineConfig};
pub use reduction::{reduce, DecompTree, ReduceConfig};
