//! Robust inverse kinematics for dual-arm manipulators.
//!
//! The pipeline: screw-theory kinematics build a relative Jacobian for the
//! pseudo-single arm formed by both chains ([`kinematics`]); a joint-space
//! error ball is propagated through it into task-space error ellipsoids and
//! worst-case bounds P*, O*, M* ([`uncertainty`]); candidate IK pairs for a
//! desired relative pose are enumerated, scored, and the min-max pair selected
//! ([`robust_ik`]); a Monte Carlo peg-in-hole simulator validates selections
//! ([`assembly`]).
//!
//! All math is generic over the scalar type via [`Float`]; `*64` aliases at
//! the crate root fix the common `f64` instantiations.

use nalgebra as na;
use num_traits as nt;

pub mod assembly;
pub mod kinematics;
pub mod models;
pub mod robust_ik;
pub mod se3;
pub mod uncertainty;

/// Scalar type the library is generic over. Implemented for `f32` and `f64`.
pub trait Float: Copy + nt::FloatConst + nt::FromPrimitive + nt::ToPrimitive + na::RealField {}

impl Float for f32 {}
impl Float for f64 {}

/// Converts an `f64` literal into the working scalar type.
pub(crate) fn real<T: Float>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal must be representable")
}

/// Lossy view of a scalar as `f64`, for error payloads and diagnostics.
pub(crate) fn to_f64<T: Float>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Which arm of a dual-arm model a joint or joint vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArmSide {
    Left,
    Right,
}

impl std::fmt::Display for ArmSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ArmSide::Left => write!(f, "left"),
            ArmSide::Right => write!(f, "right"),
        }
    }
}

/// Errors reported by the library.
///
/// Validation errors carry enough context to name the offending field or
/// joint; numerical errors flag non-finite intermediate results.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("quaternion is not unit: |norm - 1| = {deviation:.3e}")]
    NonUnitQuaternion { deviation: f64 },
    #[error("{context}: vector is not unit (norm = {norm})")]
    NonUnitVector { context: &'static str, norm: f64 },
    #[error("invalid twist: {reason}")]
    InvalidTwist { reason: String },
    #[error("matrix is not a rotation: max defect {defect:.3e} exceeds {tolerance:.1e}")]
    NotARotation { defect: f64, tolerance: f64 },
    #[error("invalid homogeneous matrix: {reason}")]
    NotRigid { reason: String },
    #[error("{side} arm, joint {index}: {reason}")]
    InvalidJoint {
        side: ArmSide,
        index: usize,
        reason: String,
    },
    #[error("{context}: expected {expected} joint values, got {got}")]
    JointCountMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("expected a {expected} Jacobian, got {got}")]
    JacobianKindMismatch {
        expected: &'static str,
        got: &'static str,
    },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("failed to parse {context}: {reason}")]
    Parse { context: &'static str, reason: String },
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },
    #[error("no IK solutions: {reason}")]
    NoSolutions { reason: String },
}

/// Crate-wide result type.
pub type Result<V> = std::result::Result<V, Error>;

pub type UnitQuaternion64 = se3::UnitQuaternion<f64>;
pub type Twist64 = se3::Twist<f64>;
pub type Pose64 = se3::Pose<f64>;
pub type AdjointMatrix64 = se3::AdjointMatrix<f64>;
pub type ArmModel64 = kinematics::ArmModel<f64>;
pub type DualArmModel64 = kinematics::DualArmModel<f64>;
pub type JointVector64 = kinematics::JointVector<f64>;
pub type JacobianMatrix64 = kinematics::JacobianMatrix<f64>;
pub type JointNoiseModel64 = uncertainty::JointNoiseModel<f64>;
pub type ErrorEllipsoid64 = uncertainty::ErrorEllipsoid<f64>;
pub type WorstCaseError64 = uncertainty::WorstCaseError<f64>;
pub type IkPair64 = robust_ik::IkPair<f64>;
pub type FeasibilityReport64 = robust_ik::FeasibilityReport<f64>;
pub type TaskSpec64 = assembly::TaskSpec<f64>;
pub type TrialOutcome64 = assembly::TrialOutcome<f64>;
pub type SweepResult64 = assembly::SweepResult<f64>;
