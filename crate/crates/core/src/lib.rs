//! Construction and measurement of piecewise-smooth maps between spheres.
//!
//! The crate has four subsystems:
//!
//! - [`ledger`]: exact-rational decision procedures and certificates for the
//!   small-dilation filtration of homotopy groups of spheres.
//! - [`expr`]: composable map expressions (Hopf map, cube collapses, folded
//!   rectangle charts, smash products, suspensions) with evaluation and
//!   analytic/finite-difference differentials.
//! - [`dilation`]: singular values of differentials, exterior-power norms,
//!   and supremal k-dilation estimation over compact domains.
//! - [`hopf`]: Hopf invariants of maps from the 3-sphere to the 2-sphere via
//!   preimage tracing and Gauss linking numbers.

pub mod dilation;
pub mod error;
pub mod expr;
pub mod geom;
pub mod hopf;
pub mod ledger;
pub mod space;
pub mod svd;

pub use dilation::{
    interpolation_check, jacobian, kdilation, lambda_k_norm, scaling_sweep, DilationReport,
    JacobianMode, JacobianSample, SweepResult,
};
pub use error::{DilationError, HopfError, LedgerError, MapError};
pub use expr::MapExpr;
pub use hopf::{gromov_audit, hopf_invariant, linking_number, trace_preimage, CurveTrace};
pub use ledger::{
    certificate_check, filtration_table, min_k_for_suspension, theorem1_targets, Certificate,
    CertificateStore, ClassDescriptor, Rule, Verdict,
};
pub use space::{Point, Space};
