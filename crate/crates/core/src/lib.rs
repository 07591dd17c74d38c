//! Local flow algorithms for unit-capacity undirected graphs.
//!
//! Given a graph and a demand `b`, [`solve_single`] either returns a flow
//! routing `b` up to a per-vertex residual of `ε·deg(v)`, or a vertex set `S`
//! with `|b(S)| > δS` proving `b` cannot be routed. [`solve_multi`] does the
//! same for `k` commodities sharing capacity, certifying infeasibility by a
//! potential matrix. Work scales with `‖b‖₁` and `‖b‖₀`, not with the graph.

// `!(x <= y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod flow;
pub mod generate;
pub mod graph;
pub mod io;
pub mod multi;
pub mod mwu;
pub mod single;
pub mod stats;
mod table;
pub mod verify;

pub use error::{DemandError, FormatError, GraphError, MwuError, SolveError};
pub use flow::{decompose_to_pairs, Flow, KFlow, KSource, SourceFunction, WeightedPair};
pub use graph::{EdgeId, Graph, Vertex};
pub use multi::{solve_multi, solve_multi_with, MultiResult, PotentialCertificate};
pub use single::{solve_single, solve_single_with, CutCertificate, SingleResult, SolveConfig};
pub use stats::RunStats;
