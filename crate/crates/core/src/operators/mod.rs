//! Matrix models of shifts, multipliers, Cauchy duals, projections and
//! wandering subspaces.

pub mod matrix;
pub mod projections;
pub mod symbol;
pub mod wandering;
pub mod witness;

pub use matrix::{adjoint_compression, multiplier_matrix, shift_matrix, shift_tuple, Exactness, OperatorMatrix};
pub use projections::{
    cauchy_dual, doubly_commuting_check, range_projection, union_projection, wandering_subspace,
    DoublyCommutingReport, SubspaceFrame, LEFT_INVERTIBLE_TOL, NULL_THRESHOLD,
};
pub use symbol::{slice_symbol, MultiplierSymbol};
pub use wandering::{
    dual_tuple, orbit_vectors, partial_isometry_wandering_check, wandering_decomposition_check,
    wandering_property_check,
};
pub use witness::{generated_invariant_subspace, wandering_witness, witness_preconditions, Witness, WitnessOutcome};
