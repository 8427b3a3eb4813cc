//! Instrumented micro-controller-class ECC: fixed-width modular arithmetic,
//! the co-Z Montgomery ladder with countermeasure variants, and ECDSA.
//!
//! Every modular add, subtract, and multiply executed by the ladder appends
//! an event to a per-execution [`OpLog`]; the conditional-reduction flags in
//! that log are the side channel the rest of the workspace analyzes.

pub mod curve;
pub mod ecdsa;
pub mod error;
pub mod field;
pub mod ladder;
mod limb;
pub mod oplog;
pub mod reference;

pub use curve::{AffinePoint, CoZPair, CurveParams};
pub use ecdsa::{keygen, sample_nonce, sign, sign_with_nonce, verify, SignatureRecord};
pub use error::EccError;
pub use field::{FieldElement, Modulus};
pub use ladder::{
    apply_z, canonical_kind_sequence, final_inv_z, scalar_mul, xycz_add, xycz_addc, xycz_idbl,
};
pub use oplog::{so_runs, LadderVariant, OpEvent, OpKind, OpLog, Phase, SoRun};
