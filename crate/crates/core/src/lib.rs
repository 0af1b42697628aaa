//! Clifford circuit optimisation with the ZX-calculus.

pub mod circuit;
pub mod flow;
pub mod graph;
pub mod harness;
pub mod normal_forms;
pub mod optimiser;
pub mod passes;
pub mod rewrite;
pub mod ruleset;
mod iso;
pub mod semantics;

pub use graph::{Colour, Diagram, DiagramError, Phase, VertexId, VertexKind};
pub use semantics::{interpret, scalar_free_equal, ScalarFreeMatrix, SemanticsError};
pub use circuit::{circuit_size, random_clifford_circuit, translate, Circuit, CircuitError, Gate};
pub use passes::{is_simple, simple_form, PassKind};
pub use flow::{extract_circuit, find_path_cover, is_circuit_like, CausalFlow, FlowError, PathCover};
pub use normal_forms::{cc1_table, cc2_contains, cc2_family, cc2_lookup, Cc2Member, Cc2Shape, NormalFormError};
pub use rewrite::{replay, ProofStep, ProofTrace, RewriteError, Rule};
pub use ruleset::{default_ruleset, load_ruleset, RuleGroup, Ruleset, RulesetError};
pub use optimiser::{optimise, OptimiseError, OptimiseResult, OptimiseStats, OptimiserConfig, PauliMetric};
pub use harness::{bench, BenchReport};
