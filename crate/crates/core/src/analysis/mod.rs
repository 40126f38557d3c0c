//! Degrees, trace spaces, functional equivalence and de Rham checks.

pub mod degrees;
pub mod derham;
pub mod equivalence;
pub mod traces;

pub use degrees::{default_k_cap, degrees, degrees_with_cap, Degree, DegreeReport};
pub use derham::{derham_containment, DerhamReport};
pub use equivalence::{functionals_equivalent, Equivalence};
pub use traces::{controlled_trace, trace_spaces, trace_spaces_with, uncontrolled_trace, TraceSet, TraceSpaces, TraceSummary};
