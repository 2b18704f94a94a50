//! Rigid-body and quaternion algebra: the foundation every other module
//! builds on.
//!
//! Conventions, fixed once here and used everywhere:
//!
//! * Quaternions are scalar-first pairs q = (η, ε) with ‖q‖ = 1, stored in
//!   canonical sign (η ≥ 0; if η = 0 the first nonzero component of ε is
//!   positive). q⁺ and q⊕ denote the left/right compound matrices, so
//!   q₁ ⊗ q₂ = q₁⁺ q₂ = q₂⊕ q₁.
//! * Twists are 6-vectors ξ = (v, ω): linear components first. A revolute
//!   joint through point q with unit axis ω has v = −ω × q; a prismatic
//!   joint has ω = 0 and unit v.
//! * Poses g = (R, p) act on points as p' = R p + t; composition is
//!   matrix-like, g₁ ∘ g₂ applies g₂ first.
//! * The adjoint of g is [[R, p̂R], [0, R]], matching the (v, ω) stacking.

use nalgebra::{Matrix3, Matrix3x4, Matrix4, Matrix6, Vector3, Vector4, Vector6};

use crate::{real, to_f64, Error, Float, Result};

/// Acceptance tolerance for unit-norm inputs (quaternions, axes, directions).
/// Inputs within this tolerance are renormalized; beyond it they are rejected.
pub const UNIT_INPUT_TOL: f64 = 1e-9;

/// Maximum allowed entrywise defect of RᵀR − I (and |det R − 1|) for a
/// matrix accepted as a rotation by strict constructors.
pub const ROTATION_DEFECT_TOL: f64 = 1e-10;

/// Rotation angles below this threshold (rad) are treated as zero inside
/// [`exp_twist`], avoiding a degenerate screw-translation term.
pub const SMALL_ANGLE: f64 = 1e-10;

/// Skew-symmetric cross-product matrix: `hat(w) * v == w × v`.
pub fn hat<T: Float>(w: &Vector3<T>) -> Matrix3<T> {
    let z = T::zero();
    Matrix3::new(z, -w.z, w.y, w.z, z, -w.x, -w.y, w.x, z)
}

/// Inverse of [`hat`] on the skew-symmetric part: extracts (m₂₁, m₀₂, m₁₀).
pub fn vee<T: Float>(m: &Matrix3<T>) -> Vector3<T> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Largest entrywise defect of RᵀR − I, plus |det R − 1|.
fn rotation_defect<T: Float>(r: &Matrix3<T>) -> T {
    let gram = r.transpose() * r - Matrix3::identity();
    let mut defect = gram.abs().max();
    let det_defect = (r.determinant() - T::one()).abs();
    if det_defect > defect {
        defect = det_defect;
    }
    defect
}

/// Projects an approximate rotation onto SO(3) (closest in Frobenius norm).
///
/// Used when ingesting rotation matrices printed with few decimals. Fails if
/// the input is singular enough that the projection is ambiguous.
pub fn nearest_rotation<T: Float>(m: &Matrix3<T>) -> Result<Matrix3<T>> {
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => {
            return Err(Error::NotARotation {
                defect: f64::INFINITY,
                tolerance: ROTATION_DEFECT_TOL,
            })
        }
    };
    let det = (u * v_t).determinant();
    if det.abs() < real::<T>(0.5) {
        return Err(Error::NotARotation {
            defect: to_f64(rotation_defect(m)),
            tolerance: ROTATION_DEFECT_TOL,
        });
    }
    let flip = if det > T::zero() { T::one() } else { -T::one() };
    let correction = Matrix3::from_diagonal(&Vector3::new(T::one(), T::one(), flip));
    Ok(u * correction * v_t)
}

/// Unit quaternion q = (η, ε) in canonical sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion<T: Float> {
    eta: T,
    eps: Vector3<T>,
}

impl<T: Float> UnitQuaternion<T> {
    /// Builds a quaternion from scalar and vector parts.
    ///
    /// The input must be unit within [`UNIT_INPUT_TOL`]; it is renormalized
    /// and sign-canonicalized.
    pub fn new(eta: T, eps: Vector3<T>) -> Result<Self> {
        let norm = (eta * eta + eps.norm_squared()).sqrt();
        let deviation = (norm - T::one()).abs();
        if deviation > real::<T>(UNIT_INPUT_TOL) {
            return Err(Error::NonUnitQuaternion {
                deviation: to_f64(deviation),
            });
        }
        Ok(Self::canonical(eta / norm, eps / norm))
    }

    /// Normalized, canonically signed construction from raw parts.
    fn canonical(eta: T, eps: Vector3<T>) -> Self {
        let mut q = Self { eta, eps };
        let neg = if q.eta != T::zero() {
            q.eta < T::zero()
        } else {
            // η = 0: first nonzero vector component decides the sign.
            let first = if q.eps.x != T::zero() {
                q.eps.x
            } else if q.eps.y != T::zero() {
                q.eps.y
            } else {
                q.eps.z
            };
            first < T::zero()
        };
        if neg {
            q.eta = -q.eta;
            q.eps = -q.eps;
        }
        q
    }

    /// The identity rotation (1, 0).
    pub fn identity() -> Self {
        Self {
            eta: T::one(),
            eps: Vector3::zeros(),
        }
    }

    /// q(ω, θ) = (cos θ/2, ω sin θ/2) for a unit axis ω.
    pub fn from_axis_angle(axis: &Vector3<T>, angle: T) -> Result<Self> {
        let norm = axis.norm();
        if (norm - T::one()).abs() > real::<T>(UNIT_INPUT_TOL) {
            return Err(Error::NonUnitVector {
                context: "rotation axis",
                norm: to_f64(norm),
            });
        }
        let half = angle / real::<T>(2.0);
        Ok(Self::canonical(half.cos(), axis * (half.sin() / norm)))
    }

    /// Converts a rotation matrix (defect within [`ROTATION_DEFECT_TOL`]).
    ///
    /// Uses Shepperd's branch selection: the largest of the four quaternion
    /// components is computed from the diagonal, keeping the conversion
    /// well-conditioned for all rotations.
    pub fn from_rotation_matrix(r: &Matrix3<T>) -> Result<Self> {
        let defect = rotation_defect(r);
        if defect > real::<T>(ROTATION_DEFECT_TOL) {
            return Err(Error::NotARotation {
                defect: to_f64(defect),
                tolerance: ROTATION_DEFECT_TOL,
            });
        }
        let quarter = real::<T>(0.25);
        let one = T::one();
        let trace = r.trace();
        let (w, x, y, z);
        if trace > T::zero() {
            let s = (trace + one).sqrt() * real::<T>(2.0);
            w = quarter * s;
            x = (r[(2, 1)] - r[(1, 2)]) / s;
            y = (r[(0, 2)] - r[(2, 0)]) / s;
            z = (r[(1, 0)] - r[(0, 1)]) / s;
        } else if r[(0, 0)] > r[(1, 1)] && r[(0, 0)] > r[(2, 2)] {
            let s = (one + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]).sqrt() * real::<T>(2.0);
            w = (r[(2, 1)] - r[(1, 2)]) / s;
            x = quarter * s;
            y = (r[(0, 1)] + r[(1, 0)]) / s;
            z = (r[(0, 2)] + r[(2, 0)]) / s;
        } else if r[(1, 1)] > r[(2, 2)] {
            let s = (one + r[(1, 1)] - r[(0, 0)] - r[(2, 2)]).sqrt() * real::<T>(2.0);
            w = (r[(0, 2)] - r[(2, 0)]) / s;
            x = (r[(0, 1)] + r[(1, 0)]) / s;
            y = quarter * s;
            z = (r[(1, 2)] + r[(2, 1)]) / s;
        } else {
            let s = (one + r[(2, 2)] - r[(0, 0)] - r[(1, 1)]).sqrt() * real::<T>(2.0);
            w = (r[(1, 0)] - r[(0, 1)]) / s;
            x = (r[(0, 2)] + r[(2, 0)]) / s;
            y = (r[(1, 2)] + r[(2, 1)]) / s;
            z = quarter * s;
        }
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        Ok(Self::canonical(w / norm, Vector3::new(x, y, z) / norm))
    }

    /// R = (η² − εᵀε) I + 2εεᵀ + 2η ε̂.
    pub fn to_rotation_matrix(&self) -> Matrix3<T> {
        let two = real::<T>(2.0);
        let scale = self.eta * self.eta - self.eps.norm_squared();
        Matrix3::identity() * scale
            + self.eps * self.eps.transpose() * two
            + hat(&self.eps) * (two * self.eta)
    }

    /// Left compound q⁺ = [[η, −εᵀ], [ε, ηI + ε̂]], so q₁ ⊗ q₂ = q₁⁺ q₂.
    pub fn left_compound(&self) -> Matrix4<T> {
        self.compound(T::one())
    }

    /// Right compound q⊕ = [[η, −εᵀ], [ε, ηI − ε̂]], so q₁ ⊗ q₂ = q₂⊕ q₁.
    pub fn right_compound(&self) -> Matrix4<T> {
        self.compound(-T::one())
    }

    fn compound(&self, hat_sign: T) -> Matrix4<T> {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = self.eta;
        for i in 0..3 {
            m[(0, i + 1)] = -self.eps[i];
            m[(i + 1, 0)] = self.eps[i];
        }
        let block = Matrix3::identity() * self.eta + hat(&self.eps) * hat_sign;
        m.fixed_view_mut::<3, 3>(1, 1).copy_from(&block);
        m
    }

    /// Hamilton product a ⊗ b, evaluated through the left compound operator.
    pub fn multiply(&self, other: &Self) -> Self {
        let product = self.left_compound() * other.as_vector();
        let norm = product.norm();
        Self::canonical(
            product[0] / norm,
            Vector3::new(product[1], product[2], product[3]) / norm,
        )
    }

    /// Conjugate q* = (η, −ε); inverse for unit quaternions.
    pub fn conjugate(&self) -> Self {
        Self::canonical(self.eta, -self.eps)
    }

    /// Rotates a vector: the sandwich q ⊗ (0, p) ⊗ q*, expanded in closed
    /// form as p + 2ε × (ε × p + ηp).
    pub fn rotate(&self, p: &Vector3<T>) -> Vector3<T> {
        let t = self.eps.cross(p) + p * self.eta;
        p + self.eps.cross(&t) * real::<T>(2.0)
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn eps(&self) -> Vector3<T> {
        self.eps
    }

    /// Components as (η, ε_x, ε_y, ε_z).
    pub fn as_vector(&self) -> Vector4<T> {
        Vector4::new(self.eta, self.eps.x, self.eps.y, self.eps.z)
    }

    /// 4-vector inner product with another quaternion.
    pub fn dot(&self, other: &Self) -> T {
        self.eta * other.eta + self.eps.dot(&other.eps)
    }

    /// Rotation angle in [0, π] (canonical sign keeps η ≥ 0).
    pub fn angle(&self) -> T {
        self.eps.norm().atan2(self.eta) * real::<T>(2.0)
    }

    /// Axis-times-angle vector; zero for the identity rotation.
    pub fn rotation_vector(&self) -> Vector3<T> {
        let sin_half = self.eps.norm();
        if sin_half < real::<T>(SMALL_ANGLE) {
            return self.eps * real::<T>(2.0);
        }
        self.eps * (self.angle() / sin_half)
    }

    /// The 3×4 rate matrix H(q) = [−ε | ηI + ε̂].
    ///
    /// For a spatial angular velocity ω, q̇ = ½ Hᵀ ω. Satisfies H Hᵀ = I₃,
    /// H q = 0, and Hᵀ v = q⊕ (0, v).
    pub fn rate_matrix(&self) -> Matrix3x4<T> {
        let mut h = Matrix3x4::zeros();
        for i in 0..3 {
            h[(i, 0)] = -self.eps[i];
        }
        let block = Matrix3::identity() * self.eta + hat(&self.eps);
        h.fixed_view_mut::<3, 3>(0, 1).copy_from(&block);
        h
    }
}

/// Joint screw ξ = (v, ω): revolute (unit ω, v = −ω × q) or prismatic
/// (ω = 0, unit v).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist<T: Float> {
    v: Vector3<T>,
    omega: Vector3<T>,
}

impl<T: Float> Twist<T> {
    /// Revolute joint about the unit `axis` passing through `point`.
    pub fn revolute(axis: &Vector3<T>, point: &Vector3<T>) -> Result<Self> {
        let norm = axis.norm();
        if (norm - T::one()).abs() > real::<T>(UNIT_INPUT_TOL) {
            return Err(Error::NonUnitVector {
                context: "revolute joint axis",
                norm: to_f64(norm),
            });
        }
        let omega = axis / norm;
        Ok(Self {
            v: -omega.cross(point),
            omega,
        })
    }

    /// Prismatic joint along the unit `direction`.
    pub fn prismatic(direction: &Vector3<T>) -> Result<Self> {
        let norm = direction.norm();
        if (norm - T::one()).abs() > real::<T>(UNIT_INPUT_TOL) {
            return Err(Error::NonUnitVector {
                context: "prismatic joint direction",
                norm: to_f64(norm),
            });
        }
        Ok(Self {
            v: direction / norm,
            omega: Vector3::zeros(),
        })
    }

    /// Validates and classifies raw (v, ω) coordinates.
    ///
    /// ‖ω‖ near 1 → revolute (v must be orthogonal to ω, i.e. a zero-pitch
    /// screw); ‖ω‖ near 0 → prismatic (unit v). Anything else is rejected.
    pub fn from_vector(xi: &Vector6<T>) -> Result<Self> {
        let v = Vector3::new(xi[0], xi[1], xi[2]);
        let omega = Vector3::new(xi[3], xi[4], xi[5]);
        let tol = real::<T>(UNIT_INPUT_TOL);
        let omega_norm = omega.norm();
        if omega_norm <= tol {
            let v_norm = v.norm();
            if (v_norm - T::one()).abs() > tol {
                return Err(Error::InvalidTwist {
                    reason: format!(
                        "prismatic twist needs unit v, got norm {}",
                        to_f64(v_norm)
                    ),
                });
            }
            return Ok(Self {
                v: v / v_norm,
                omega: Vector3::zeros(),
            });
        }
        if (omega_norm - T::one()).abs() > tol {
            return Err(Error::InvalidTwist {
                reason: format!("revolute twist needs unit ω, got norm {}", to_f64(omega_norm)),
            });
        }
        let pitch = omega.dot(&v).abs();
        if pitch > tol * (T::one() + v.norm()) {
            return Err(Error::InvalidTwist {
                reason: format!(
                    "revolute twist must be zero-pitch (v ⟂ ω), got ω·v = {}",
                    to_f64(omega.dot(&v))
                ),
            });
        }
        Ok(Self {
            v,
            omega: omega / omega_norm,
        })
    }

    pub fn v(&self) -> Vector3<T> {
        self.v
    }

    pub fn omega(&self) -> Vector3<T> {
        self.omega
    }

    pub fn is_revolute(&self) -> bool {
        self.omega.norm_squared() > real::<T>(0.25)
    }

    /// Coordinates stacked as (v, ω).
    pub fn as_vector(&self) -> Vector6<T> {
        Vector6::new(
            self.v.x, self.v.y, self.v.z, self.omega.x, self.omega.y, self.omega.z,
        )
    }
}

/// Rigid transform g = (R, p) ∈ SE(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose<T: Float> {
    rotation: Matrix3<T>,
    translation: Vector3<T>,
}

impl<T: Float> Pose<T> {
    /// Builds a pose, validating R against [`ROTATION_DEFECT_TOL`].
    pub fn new(rotation: Matrix3<T>, translation: Vector3<T>) -> Result<Self> {
        let defect = rotation_defect(&rotation);
        if defect > real::<T>(ROTATION_DEFECT_TOL) {
            return Err(Error::NotARotation {
                defect: to_f64(defect),
                tolerance: ROTATION_DEFECT_TOL,
            });
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Internal constructor for rotations produced by our own group
    /// operations, which preserve orthonormality to machine precision.
    pub(crate) fn trusted(rotation: Matrix3<T>, translation: Vector3<T>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Pure translation.
    pub fn translation_only(p: Vector3<T>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: p,
        }
    }

    /// g₁ ∘ g₂ (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    /// g⁻¹ = (Rᵀ, −Rᵀp).
    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn rotation(&self) -> Matrix3<T> {
        self.rotation
    }

    pub fn translation(&self) -> Vector3<T> {
        self.translation
    }

    /// p' = R p + t.
    pub fn transform_point(&self, p: &Vector3<T>) -> Vector3<T> {
        self.rotation * p + self.translation
    }

    /// v' = R v (no translation).
    pub fn transform_vector(&self, v: &Vector3<T>) -> Vector3<T> {
        self.rotation * v
    }

    /// 4×4 homogeneous matrix.
    pub fn matrix(&self) -> Matrix4<T> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Parses a homogeneous matrix; the rotation block must satisfy the
    /// strict [`ROTATION_DEFECT_TOL`].
    pub fn from_matrix(m: &Matrix4<T>) -> Result<Self> {
        Self::from_matrix_inner(m, None)
    }

    /// Parses a homogeneous matrix whose rotation block may carry round-off
    /// up to `defect_tol` (e.g. printed with 3 decimals); the block is
    /// projected onto the nearest rotation.
    pub fn from_matrix_projected(m: &Matrix4<T>, defect_tol: T) -> Result<Self> {
        Self::from_matrix_inner(m, Some(defect_tol))
    }

    fn from_matrix_inner(m: &Matrix4<T>, defect_tol: Option<T>) -> Result<Self> {
        let bottom_ok = m[(3, 0)] == T::zero()
            && m[(3, 1)] == T::zero()
            && m[(3, 2)] == T::zero()
            && m[(3, 3)] == T::one();
        if !bottom_ok {
            return Err(Error::NotRigid {
                reason: "bottom row must be (0, 0, 0, 1)".into(),
            });
        }
        let r = m.fixed_view::<3, 3>(0, 0).into_owned();
        let p = m.fixed_view::<3, 1>(0, 3).into_owned();
        match defect_tol {
            None => Self::new(r, p),
            Some(tol) => {
                let defect = rotation_defect(&r);
                if defect > tol {
                    return Err(Error::NotARotation {
                        defect: to_f64(defect),
                        tolerance: to_f64(tol),
                    });
                }
                Ok(Self::trusted(nearest_rotation(&r)?, p))
            }
        }
    }

    /// Canonically signed quaternion of the rotation part.
    pub fn to_quaternion(&self) -> UnitQuaternion<T> {
        UnitQuaternion::from_rotation_matrix(&self.rotation)
            .expect("pose rotation stays orthonormal")
    }

    pub fn from_quaternion(q: &UnitQuaternion<T>, p: Vector3<T>) -> Self {
        Self {
            rotation: q.to_rotation_matrix(),
            translation: p,
        }
    }
}

impl<T: Float> std::ops::Mul for &Pose<T> {
    type Output = Pose<T>;

    fn mul(self, rhs: &Pose<T>) -> Pose<T> {
        self.compose(rhs)
    }
}

impl<T: Float> std::ops::Mul for Pose<T> {
    type Output = Pose<T>;

    fn mul(self, rhs: Pose<T>) -> Pose<T> {
        self.compose(&rhs)
    }
}

/// Exponential map of a joint twist: the pose reached by moving the joint by
/// `theta` (rad for revolute, m for prismatic).
///
/// Revolute: R = I + sin θ ω̂ + (1 − cos θ) ω̂², p = (I − R)(ω × v) + ω ωᵀ v θ.
/// Prismatic: R = I, p = v θ. Angles below [`SMALL_ANGLE`] keep R = I with
/// the first-order translation p = v θ.
pub fn exp_twist<T: Float>(xi: &Twist<T>, theta: T) -> Pose<T> {
    if !xi.is_revolute() || theta.abs() < real::<T>(SMALL_ANGLE) {
        return Pose::trusted(Matrix3::identity(), xi.v() * theta);
    }
    let omega = xi.omega();
    let v = xi.v();
    let w = hat(&omega);
    let rotation =
        Matrix3::identity() + w * theta.sin() + w * w * (T::one() - theta.cos());
    let translation = (Matrix3::identity() - rotation) * omega.cross(&v)
        + omega * (omega.dot(&v) * theta);
    Pose::trusted(rotation, translation)
}

/// 6×6 adjoint of a pose: transforms twist coordinates between frames.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointMatrix<T: Float> {
    m: Matrix6<T>,
}

/// Ad_g = [[R, p̂R], [0, R]] for g = (R, p), acting on (v, ω) stacks.
pub fn adjoint<T: Float>(g: &Pose<T>) -> AdjointMatrix<T> {
    let r = g.rotation();
    let ph_r = hat(&g.translation()) * r;
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&ph_r);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&r);
    AdjointMatrix { m }
}

impl<T: Float> AdjointMatrix<T> {
    pub fn matrix(&self) -> &Matrix6<T> {
        &self.m
    }

    /// Transforms twist coordinates (v, ω).
    pub fn apply(&self, xi: &Vector6<T>) -> Vector6<T> {
        self.m * xi
    }
}
