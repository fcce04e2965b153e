//! SMT encodings of the size-bounded weak-PAXp query.

mod bridge;
mod encode;
mod problem;
pub mod sexp;

pub use bridge::{parse_response, solve_external, SolverConfig, SolverError, Verdict, SOLVER_ENV};
pub use encode::{emit_add_encoding, emit_mult_encoding, encode, EncodeOptions};
pub use problem::{
    universal_var, Definition, Encoding, Evaluation, Problem, ProblemError, Role, Sort, Term,
};

/// Evaluates an emitted problem under a full assignment of the u variables.
pub fn evaluate_encoding(
    problem: &Problem,
    universal: &[bool],
) -> Result<Evaluation, ProblemError> {
    problem.evaluate(universal)
}
