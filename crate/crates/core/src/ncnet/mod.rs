//! Symbolic double-bracket calculus for the cylinder network, its Postnikov
//! dynamics, boundary measurements and conserved quantities.

pub mod bracket;
pub mod eval;
pub mod expr;
pub mod network;
pub mod suite;

pub use bracket::{double_bracket, h0_jacobi_residual, induced_bracket, jacobi_triple_sum};
pub use eval::{expr_drift, nc_equal, tensor_drift, trace_drift, EvalPoint};
pub use expr::{
    AtomId, AtomTable, BaseGen, ExprPrinter, GenKind, Letter, NCExpr, NcnetError, Sym,
    Tensor3Expr, TensorExpr, Word,
};
pub use network::{
    black_swap, boundary_matrix, invariants_conservation, lax_factorization_residual, step_xy,
    step_xy_symbolic, t_invariants, tilde_weights, white_swap, xy_words, ConservationReport,
    NetworkError, NumericNetwork, TildeWeights, XyWeights,
};
pub use suite::{bracket_relation_suite, RelationReport, SuiteReport};
