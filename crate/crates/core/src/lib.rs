//! Certified exponential-decay bounds for damped linear systems
//! `M ẍ + C ẋ + K x = 0` with symmetric positive definite coefficients.
//!
//! The phase-space generator `A` is dissipative, so `e^{At}` contracts. A
//! shift `μ < 0` of the quadratic pencil that keeps `K(μ) = μ²M + μC + K`
//! and `2μM + C` positive definite yields a similarity `L(μ)` turning
//! `A − μI` into another dissipative generator, hence
//! `‖e^{At}‖ ≤ cond(L(μ))·e^{μt}`. The infimum of admissible shifts is the
//! spectral-shift abscissa `γ`.

// `!(x > 0.0)` is used on purpose so that NaN fails positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod envelope;
pub mod error;
pub mod generate;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod spectral_shift;
pub mod system;
pub mod transform;
pub mod wave;

pub use envelope::{
    batkai_bound, classify, envelope, modal_decompose, modal_envelope, mu_grid, ComparisonReport,
    CondMode, DecayCertificate, EnvelopeCurve, Mode,
};
pub use error::{Error, Result};
pub use linalg::{Matrix, SymMatrix, Vector};
pub use oracle::{closed_form_exp, norm_curve, verify_certificate, ClosedForm2x2, NormCurve};
pub use spectral_shift::{compute_gamma, GammaPath, GammaResult};
pub use system::SecondOrderSystem;
pub use transform::{build_transform, certificate_at, ShiftTransform};
