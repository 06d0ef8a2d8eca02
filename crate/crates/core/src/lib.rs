//! Verification toolkit for a family of reciprocal-type functional
//! equations: exact residual checks for the closed-form solutions,
//! direct-method stability bounds over the reals, and the corresponding
//! non-Archimedean (p-adic) bounds.

pub mod control;
pub mod equation;
pub mod exact;
pub mod hyers;
pub mod padic;
pub mod real;

pub use control::{
    AlphaFunction, ClosedFormBound, ControlError, ControlFunction, SeriesEvaluation, TailBound,
};
pub use equation::{
    EquationError, EquationVariant, EvalPoint, ReciprocalParams, SpecializationVerdict,
};
pub use exact::{ExactError, Rational};
pub use hyers::{
    ApproximationSequence, ControlFamilyShape, HyersError, PerturbedReciprocal, Perturbation,
    StabilityReport, StabilitySettings,
};
pub use padic::{
    Agreement, C0Status, CorollaryBound, DirectBound, NonArchVerdict, PadicContext, PadicError,
    PadicNorm, SubmultiplicativeCheck,
};
pub use real::{HighPrecisionReal, Precision, RealError};
