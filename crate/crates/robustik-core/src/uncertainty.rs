//! Propagation of joint-space noise into task-space error bounds.
//!
//! Joint noise is modeled as a ball δΘᵀδΘ ≤ c with c = (kσ)²: each joint
//! carries i.i.d. N(0, σ²) noise and k standard deviations define the
//! confidence set. Pushing the ball through the analytical relative Jacobian
//! gives ellipsoidal error sets:
//!
//! * position: δXᵀ (J_p J_pᵀ)⁻¹ δX ≤ c, worst case P* = √(c λ_max(J_p J_pᵀ));
//! * orientation, through the quaternion rate δq = ½ Hᵀ J_r δΘ:
//!   δεᵀ (J_r J_rᵀ)⁻¹ δε ≤ c/4, worst case O* = arccos(q_relᵀ q*) where
//!   q* = (q_rel + Hᵀ v*)/‖·‖ and v* = ½ √(c λ_max(J_r J_rᵀ)) V_max.
//!
//! The scalar objective combines both: M* = P* + γ O*. Monte Carlo noise is
//! *not* truncated to the ball; the ball is a confidence set, and simulated
//! trials must exercise tail events.

use nalgebra::{DVector, Matrix3, Matrix3xX, Matrix4, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::kinematics::{JacobianKind, JacobianMatrix};
use crate::se3::UnitQuaternion;
use crate::{real, to_f64, Error, Float, Result};

/// Eigenvalues below this floor are treated as zero rank: the inverse is
/// floored (a pseudo-inverse) and the ellipsoid flagged degenerate.
pub const EIGENVALUE_FLOOR: f64 = 1e-14;

/// Shared-σ joint noise ball over the pseudo-chain coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointNoiseModel<T: Float> {
    sigma: T,
    k: T,
    dim: usize,
}

impl<T: Float> JointNoiseModel<T> {
    /// σ > 0 (rad), k > 0 (number of std devs), dim = n+m joints.
    pub fn new(sigma: T, k: T, dim: usize) -> Result<Self> {
        if !(sigma > T::zero() && sigma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("must be positive and finite, got {}", to_f64(sigma)),
            });
        }
        if !(k > T::zero() && k.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "k",
                reason: format!("must be positive and finite, got {}", to_f64(k)),
            });
        }
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dim",
                reason: "noise model needs at least one joint".into(),
            });
        }
        Ok(Self { sigma, k, dim })
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// The ball radius squared: c = (kσ)².
pub fn joint_error_bound<T: Float>(model: &JointNoiseModel<T>) -> T {
    let ks = model.k() * model.sigma();
    ks * ks
}

/// Which task space an error ellipsoid lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorSpace {
    Position,
    Orientation,
}

/// Task-space error set { δ : δᵀ C δ ≤ bound }.
///
/// Position: δ is the relative-position deviation (m), bound = c.
/// Orientation: δ is the quaternion vector-part deviation ½ J_r δΘ,
/// bound = c/4; [`ErrorEllipsoid::quaternion_form`] lifts the characteristic
/// to the 4×4 quaternion-space matrix Hᵀ C H.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorEllipsoid<T: Float> {
    characteristic: Matrix3<T>,
    bound: T,
    space: ErrorSpace,
    degenerate: bool,
    q_rel: Option<UnitQuaternion<T>>,
}

impl<T: Float> ErrorEllipsoid<T> {
    /// Symmetric positive-semidefinite characteristic matrix C.
    pub fn characteristic(&self) -> &Matrix3<T> {
        &self.characteristic
    }

    pub fn bound(&self) -> T {
        self.bound
    }

    pub fn space(&self) -> ErrorSpace {
        self.space
    }

    /// True when the generating J Jᵀ was rank-deficient and the inverse was
    /// floored: membership tests along the null directions are vacuous.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Membership test δᵀ C δ ≤ bound.
    pub fn contains(&self, delta: &Vector3<T>) -> bool {
        (self.characteristic * delta).dot(delta) <= self.bound
    }

    /// Orientation ellipsoids only: the quaternion-space form Hᵀ C H with
    /// H = H(q_rel), bounding quaternion deviations δq = ½ Hᵀ J_r δΘ.
    pub fn quaternion_form(&self) -> Result<Matrix4<T>> {
        let q_rel = self.q_rel.as_ref().ok_or(Error::InvalidParameter {
            name: "ellipsoid",
            reason: "quaternion form exists only for orientation ellipsoids".into(),
        })?;
        let h = q_rel.rate_matrix();
        Ok(h.transpose() * self.characteristic * h)
    }
}

/// Symmetrized eigen-inverse with [`EIGENVALUE_FLOOR`]; also reports whether
/// flooring kicked in.
fn floored_inverse<T: Float>(m: &Matrix3<T>) -> (Matrix3<T>, bool) {
    let sym = (m + m.transpose()) * real::<T>(0.5);
    let eig = sym.symmetric_eigen();
    let floor = real::<T>(EIGENVALUE_FLOOR);
    let mut degenerate = false;
    let mut inv_diag = Vector3::zeros();
    for i in 0..3 {
        let lam = eig.eigenvalues[i];
        if lam < floor {
            degenerate = true;
            inv_diag[i] = T::one() / floor;
        } else {
            inv_diag[i] = T::one() / lam;
        }
    }
    let inv = eig.eigenvectors * Matrix3::from_diagonal(&inv_diag) * eig.eigenvectors.transpose();
    // Eigenvector products keep symmetry only to round-off; make it exact.
    ((inv + inv.transpose()) * real::<T>(0.5), degenerate)
}

fn max_eigenpair<T: Float>(m: &Matrix3<T>) -> (T, Vector3<T>) {
    let sym = (m + m.transpose()) * real::<T>(0.5);
    let eig = sym.symmetric_eigen();
    let mut best = 0;
    for i in 1..3 {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    (eig.eigenvalues[best], eig.eigenvectors.column(best).into_owned())
}

fn check_finite<T: Float>(j: &Matrix3xX<T>, context: &'static str) -> Result<()> {
    if j.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context });
    }
    Ok(())
}

fn check_bound<T: Float>(c: T) -> Result<()> {
    if !(c > T::zero() && c.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "c",
            reason: format!("joint error bound must be positive, got {}", to_f64(c)),
        });
    }
    Ok(())
}

/// Worst-case position error over the ball: P* = √(c λ_max(J_p J_pᵀ)), the
/// longest semi-axis of the position error ellipsoid (m).
pub fn max_position_error<T: Float>(j_p: &Matrix3xX<T>, c: T) -> Result<T> {
    check_finite(j_p, "max_position_error")?;
    check_bound(c)?;
    let (lam_max, _) = max_eigenpair(&(j_p * j_p.transpose()));
    let lam = if lam_max > T::zero() { lam_max } else { T::zero() };
    Ok((c * lam).sqrt())
}

/// Worst-case orientation error over the ball (rad), with the quaternion
/// that attains it.
///
/// v* = ½ √(c λ_max(J_r J_rᵀ)) V_max, q* = (q_rel + Hᵀ v*)/‖·‖, and
/// O* = arccos(|q_relᵀ q*|), the inner product clamped to [0, 1]. The
/// absolute value folds out the antipodal ambiguity of q*. A zero J_r yields
/// (0, q_rel).
pub fn max_orientation_error<T: Float>(
    j_r: &Matrix3xX<T>,
    q_rel: &UnitQuaternion<T>,
    c: T,
) -> Result<(T, UnitQuaternion<T>)> {
    check_finite(j_r, "max_orientation_error")?;
    check_bound(c)?;
    let (lam_max, v_max) = max_eigenpair(&(j_r * j_r.transpose()));
    if lam_max <= T::zero() {
        return Ok((T::zero(), *q_rel));
    }
    let v_star = v_max * ((c * lam_max).sqrt() * real::<T>(0.5));
    let raw = q_rel.as_vector() + q_rel.rate_matrix().transpose() * v_star;
    let normalized = raw / raw.norm();
    let q_star = UnitQuaternion::new(
        normalized[0],
        Vector3::new(normalized[1], normalized[2], normalized[3]),
    )?;
    // q and -q name the same rotation, and construction canonicalizes the
    // sign of q*, so compare hemispheres through |<q_rel, q*>|.
    let mut dot = q_rel.dot(&q_star).abs();
    if dot > T::one() {
        dot = T::one();
    }
    Ok((dot.acos(), q_star))
}

/// Scalar objective M* = P* + γ O*.
pub fn weighted_metric<T: Float>(p_star: T, o_star: T, gamma: T) -> T {
    p_star + gamma * o_star
}

/// P*, O*, and the combined M* for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstCaseError<T: Float> {
    p_star: T,
    o_star: T,
    m_star: T,
    gamma: T,
}

impl<T: Float> WorstCaseError<T> {
    pub fn new(p_star: T, o_star: T, gamma: T) -> Result<Self> {
        if !(p_star.is_finite() && o_star.is_finite() && gamma.is_finite()) {
            return Err(Error::NonFinite {
                context: "worst-case error",
            });
        }
        if p_star < T::zero() || o_star < T::zero() || o_star > T::PI() || gamma < T::zero() {
            return Err(Error::InvalidParameter {
                name: "worst_case_error",
                reason: format!(
                    "need p_star >= 0, o_star in [0, pi], gamma >= 0; got ({}, {}, {})",
                    to_f64(p_star),
                    to_f64(o_star),
                    to_f64(gamma)
                ),
            });
        }
        Ok(Self {
            p_star,
            o_star,
            m_star: weighted_metric(p_star, o_star, gamma),
            gamma,
        })
    }

    /// Worst-case position error (m).
    pub fn p_star(&self) -> T {
        self.p_star
    }

    /// Worst-case orientation error (rad).
    pub fn o_star(&self) -> T {
        self.o_star
    }

    /// M* = P* + γ O*.
    pub fn m_star(&self) -> T {
        self.m_star
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }
}

/// Builds the position and orientation error ellipsoids from an analytical
/// relative Jacobian.
///
/// Position: characteristic (J_p J_pᵀ)⁻¹ with bound c. Orientation:
/// characteristic (J_r J_rᵀ)⁻¹ with bound c/4, carrying q_rel for the
/// quaternion-space form. Rank-deficient blocks flag the ellipsoid
/// degenerate instead of failing.
pub fn build_ellipsoids<T: Float>(
    j_a: &JacobianMatrix<T>,
    q_rel: &UnitQuaternion<T>,
    c: T,
) -> Result<(ErrorEllipsoid<T>, ErrorEllipsoid<T>)> {
    if j_a.kind() != JacobianKind::AnalyticalRelative {
        return Err(Error::JacobianKindMismatch {
            expected: "analytical_relative",
            got: match j_a.kind() {
                JacobianKind::SpatialRelative => "spatial_relative",
                JacobianKind::AnalyticalRelative => "analytical_relative",
            },
        });
    }
    check_bound(c)?;
    let j_p = j_a.linear_rows();
    let j_r = j_a.angular_rows();
    check_finite(&j_p, "build_ellipsoids")?;

    let (pos_char, pos_degenerate) = floored_inverse(&(&j_p * j_p.transpose()));
    let (rot_char, rot_degenerate) = floored_inverse(&(&j_r * j_r.transpose()));
    let position = ErrorEllipsoid {
        characteristic: pos_char,
        bound: c,
        space: ErrorSpace::Position,
        degenerate: pos_degenerate,
        q_rel: None,
    };
    let orientation = ErrorEllipsoid {
        characteristic: rot_char,
        bound: c / real::<T>(4.0),
        space: ErrorSpace::Orientation,
        degenerate: rot_degenerate,
        q_rel: Some(*q_rel),
    };
    Ok((position, orientation))
}

/// Streaming Gaussian joint-noise generator with explicit state.
///
/// Uses a counter-based RNG so parallel workers can draw from independent
/// streams of one master seed ([`JointNoiseSampler::with_stream`]), or share
/// an identical sequence for common-random-number comparisons.
pub struct JointNoiseSampler<T: Float> {
    rng: ChaCha12Rng,
    sigma: T,
    dim: usize,
}

impl<T: Float> JointNoiseSampler<T> {
    pub fn new(model: &JointNoiseModel<T>, seed: u64) -> Self {
        Self {
            rng: ChaCha12Rng::seed_from_u64(seed),
            sigma: model.sigma(),
            dim: model.dim(),
        }
    }

    /// Same master seed, independent stream: draws never overlap across
    /// distinct stream indices.
    pub fn with_stream(model: &JointNoiseModel<T>, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            rng,
            sigma: model.sigma(),
            dim: model.dim(),
        }
    }

    /// One δΘ draw: i.i.d. N(0, σ²) per pseudo-chain joint, untruncated.
    pub fn next_sample(&mut self) -> DVector<T> {
        DVector::from_fn(self.dim, |_, _| {
            let z: f64 = self.rng.sample(StandardNormal);
            real::<T>(z) * self.sigma
        })
    }
}

/// Draws `count` noise vectors deterministically from `seed`.
pub fn sample_joint_noise<T: Float>(
    model: &JointNoiseModel<T>,
    count: usize,
    seed: u64,
) -> Result<Vec<DVector<T>>> {
    if count == 0 {
        return Err(Error::InvalidParameter {
            name: "count",
            reason: "need at least one sample".into(),
        });
    }
    let mut sampler = JointNoiseSampler::new(model, seed);
    Ok((0..count).map(|_| sampler.next_sample()).collect())
}

/// On-disk noise/scoring configuration.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseConfig {
    /// Per-joint noise std dev (rad).
    pub sigma: f64,
    /// Number of std devs bounding the error ball.
    pub k: f64,
    /// Position/orientation weight (m per rad) in M* = P* + γ O*.
    #[serde(default)]
    pub gamma: f64,
    /// Master seed for noise sampling.
    #[serde(default)]
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigma: 0.0045,
            k: 2.0,
            gamma: 0.0,
            seed: 42,
        }
    }
}

impl NoiseConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            context: "noise config",
            reason: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("noise config serializes");
        out.push('\n');
        out
    }

    /// Instantiates the noise ball over `dim` pseudo-chain joints.
    pub fn to_model(&self, dim: usize) -> Result<JointNoiseModel<f64>> {
        JointNoiseModel::new(self.sigma, self.k, dim)
    }
}
