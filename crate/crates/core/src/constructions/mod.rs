//! Hand-weighted transformers for counter languages, exact evaluation, and
//! executable checks of what masking-only models cannot represent.

pub mod builders;
pub mod hand;
pub mod impossibility;
pub mod scalar;
pub mod verify;

pub use builders::{build_boolexp, build_rcl, build_shuffle_dyck, shuffle_stateless_machine, BOOLEXP_START};
pub use hand::{Acceptor, HandRunner, HandTransformer, Trace, TraceExport, TraceStep};
pub use impossibility::{
    check_masking_constancy, check_reset_invariance, max_step_deviation, reset_deltas, ResetDeltas,
};
pub use scalar::Scalar;
pub use verify::{verify_all, SuiteReport, VerifyOptions};
