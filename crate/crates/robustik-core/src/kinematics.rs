//! Product-of-exponentials kinematics for a dual-arm system and the relative
//! Jacobians of the pseudo-single arm.
//!
//! Each arm is a serial chain g(Θ) = (∏ᵢ e^{θᵢ ξ̂ᵢ}) g₀ with joints numbered
//! 1..n from the base. The two chains are reinterpreted as one serial chain
//! from the left gripper to the right gripper, ordered
//!
//! ```text
//! Θ = (θ_nL, …, θ_1L, θ_1R, …, θ_mR)
//! ```
//!
//! whose end-effector pose is the relative pose g_rel = g_L⁻¹ g_R. Jacobian
//! columns, noise vectors, and error ellipsoids all use this ordering.
//!
//! The relative spatial Jacobian (twists expressed in the left gripper
//! frame) is assembled column by column with two running partial products:
//!
//! * left columns: A_n = g_L0⁻¹, A_k = A_{k+1} e^{−θ_{k+1,L} ξ̂_{k+1,L}},
//!   column(θ_kL) = −Ad_{A_k} ξ_kL;
//! * right columns: B_1 = g_L⁻¹, B_k = B_{k−1} e^{θ_{k−1,R} ξ̂_{k−1,R}},
//!   column(θ_kR) = +Ad_{B_k} ξ_kR.
//!
//! That is O(n+m) pose products total. The analytical Jacobian re-expresses
//! the linear rows at the relative-frame origin, J_a = [I, −p̂_rel; 0, I] J_s,
//! and the quaternion route rebuilds the angular rows through pure quaternion
//! products as an independent cross-check, with ∂q_rel/∂Θ = ½ Hᵀ J_r.

use nalgebra::{DVector, Matrix3xX, Matrix4, Matrix6xX, Vector6};

use crate::se3::{adjoint, exp_twist, hat, vee, Pose, Twist, UnitQuaternion};
use crate::{real, to_f64, ArmSide, Error, Float, Result};

/// Bounds accepted for the finite-difference step (rad).
pub const FD_STEP_RANGE: (f64, f64) = (1e-8, 1e-3);

/// One serial chain: joint twists base→tip and the zero-configuration pose.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmModel<T: Float> {
    side: ArmSide,
    twists: Vec<Twist<T>>,
    g0: Pose<T>,
    limits: Option<Vec<[T; 2]>>,
}

impl<T: Float> ArmModel<T> {
    /// Builds an arm. `limits` (if given) must provide one finite `[lo, hi]`
    /// interval per joint with `lo <= hi`.
    pub fn new(
        side: ArmSide,
        twists: Vec<Twist<T>>,
        g0: Pose<T>,
        limits: Option<Vec<[T; 2]>>,
    ) -> Result<Self> {
        if twists.is_empty() {
            return Err(Error::InvalidParameter {
                name: "twists",
                reason: "an arm needs at least one joint".into(),
            });
        }
        if let Some(lims) = &limits {
            if lims.len() != twists.len() {
                return Err(Error::JointCountMismatch {
                    context: "joint limits",
                    expected: twists.len(),
                    got: lims.len(),
                });
            }
            for (i, lim) in lims.iter().enumerate() {
                if !lim[0].is_finite() || !lim[1].is_finite() {
                    return Err(Error::InvalidJoint {
                        side,
                        index: i + 1,
                        reason: "joint limits must be finite".into(),
                    });
                }
                if lim[0] > lim[1] {
                    return Err(Error::InvalidJoint {
                        side,
                        index: i + 1,
                        reason: format!(
                            "lower limit {} exceeds upper limit {}",
                            to_f64(lim[0]),
                            to_f64(lim[1])
                        ),
                    });
                }
            }
        }
        Ok(Self {
            side,
            twists,
            g0,
            limits,
        })
    }

    pub fn side(&self) -> ArmSide {
        self.side
    }

    pub fn joint_count(&self) -> usize {
        self.twists.len()
    }

    pub fn twists(&self) -> &[Twist<T>] {
        &self.twists
    }

    pub fn g0(&self) -> &Pose<T> {
        &self.g0
    }

    pub fn limits(&self) -> Option<&[[T; 2]]> {
        self.limits.as_deref()
    }

    /// Clamps a joint vector into the limit box (identity if limitless).
    pub fn clamp_to_limits(&self, theta: &mut DVector<T>) {
        if let Some(lims) = &self.limits {
            for (value, lim) in theta.iter_mut().zip(lims.iter()) {
                *value = na_clamp(*value, lim[0], lim[1]);
            }
        }
    }

    /// True when every joint value lies inside the limit box.
    pub fn within_limits(&self, theta: &[T]) -> bool {
        match &self.limits {
            None => true,
            Some(lims) => theta
                .iter()
                .zip(lims.iter())
                .all(|(&v, lim)| v >= lim[0] && v <= lim[1]),
        }
    }
}

fn na_clamp<T: Float>(x: T, lo: T, hi: T) -> T {
    if x < lo {
        lo
    } else if x > hi {
        hi
    } else {
        x
    }
}

/// Both chains of a dual-arm system; owns the pseudo-chain joint ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct DualArmModel<T: Float> {
    left: ArmModel<T>,
    right: ArmModel<T>,
}

impl<T: Float> DualArmModel<T> {
    pub fn new(left: ArmModel<T>, right: ArmModel<T>) -> Result<Self> {
        if left.side() != ArmSide::Left || right.side() != ArmSide::Right {
            return Err(Error::InvalidParameter {
                name: "arms",
                reason: "left slot must hold a left arm and right slot a right arm".into(),
            });
        }
        Ok(Self { left, right })
    }

    pub fn left(&self) -> &ArmModel<T> {
        &self.left
    }

    pub fn right(&self) -> &ArmModel<T> {
        &self.right
    }

    /// (n, m) joint counts.
    pub fn joint_counts(&self) -> (usize, usize) {
        (self.left.joint_count(), self.right.joint_count())
    }

    /// n + m, the pseudo-chain length.
    pub fn total_joints(&self) -> usize {
        self.left.joint_count() + self.right.joint_count()
    }
}

/// Which chain (or the combined pseudo-chain) a joint vector indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointLayout {
    Left,
    Right,
    /// Combined ordering θ_nL, …, θ_1L, θ_1R, …, θ_mR.
    Pseudo,
}

impl JointLayout {
    fn as_str(self) -> &'static str {
        match self {
            JointLayout::Left => "left",
            JointLayout::Right => "right",
            JointLayout::Pseudo => "pseudo",
        }
    }
}

/// Joint values (rad) tagged with the layout they are ordered in.
#[derive(Debug, Clone, PartialEq)]
pub struct JointVector<T: Float> {
    values: DVector<T>,
    layout: JointLayout,
}

impl<T: Float> JointVector<T> {
    pub fn left(values: &[T]) -> Self {
        Self {
            values: DVector::from_column_slice(values),
            layout: JointLayout::Left,
        }
    }

    pub fn right(values: &[T]) -> Self {
        Self {
            values: DVector::from_column_slice(values),
            layout: JointLayout::Right,
        }
    }

    /// Builds the pseudo-chain vector: Θ_L reversed, then Θ_R appended.
    pub fn pseudo(theta_l: &Self, theta_r: &Self) -> Result<Self> {
        expect_layout(theta_l, JointLayout::Left, "theta_l")?;
        expect_layout(theta_r, JointLayout::Right, "theta_r")?;
        let n = theta_l.len();
        let mut values = DVector::zeros(n + theta_r.len());
        for (j, &v) in theta_l.values.iter().rev().enumerate() {
            values[j] = v;
        }
        for (j, &v) in theta_r.values.iter().enumerate() {
            values[n + j] = v;
        }
        Ok(Self {
            values,
            layout: JointLayout::Pseudo,
        })
    }

    /// Splits a pseudo vector back into (Θ_L, Θ_R) given the left count n.
    pub fn split(&self, n: usize) -> Result<(Self, Self)> {
        expect_layout(self, JointLayout::Pseudo, "self")?;
        if n > self.len() {
            return Err(Error::JointCountMismatch {
                context: "pseudo split",
                expected: n,
                got: self.len(),
            });
        }
        let left: Vec<T> = self.values.iter().take(n).rev().copied().collect();
        let right: Vec<T> = self.values.iter().skip(n).copied().collect();
        Ok((Self::left(&left), Self::right(&right)))
    }

    pub fn layout(&self) -> JointLayout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.len() == 0
    }

    pub fn values(&self) -> &DVector<T> {
        &self.values
    }

    pub fn as_slice(&self) -> &[T] {
        self.values.as_slice()
    }
}

fn expect_layout<T: Float>(
    v: &JointVector<T>,
    want: JointLayout,
    name: &'static str,
) -> Result<()> {
    if v.layout() != want {
        return Err(Error::InvalidParameter {
            name,
            reason: format!(
                "expected a {} joint vector, got {}",
                want.as_str(),
                v.layout().as_str()
            ),
        });
    }
    Ok(())
}

fn expect_length<T: Float>(
    v: &JointVector<T>,
    expected: usize,
    context: &'static str,
) -> Result<()> {
    if v.len() != expected {
        return Err(Error::JointCountMismatch {
            context,
            expected,
            got: v.len(),
        });
    }
    Ok(())
}

/// Flavor of a 6×(n+m) relative Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianKind {
    /// Twist coordinates in the left gripper frame.
    SpatialRelative,
    /// Linear rows differentiate the relative-frame origin directly.
    AnalyticalRelative,
}

impl JacobianKind {
    fn as_str(self) -> &'static str {
        match self {
            JacobianKind::SpatialRelative => "spatial_relative",
            JacobianKind::AnalyticalRelative => "analytical_relative",
        }
    }
}

/// 6×(n+m) relative Jacobian: rows 1–3 linear, rows 4–6 angular, columns in
/// pseudo-chain order.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianMatrix<T: Float> {
    m: Matrix6xX<T>,
    kind: JacobianKind,
}

impl<T: Float> JacobianMatrix<T> {
    /// Assembles a Jacobian from raw parts; only in-crate tests mint these,
    /// keeping the kind tag truthful for library callers.
    #[cfg(test)]
    pub(crate) fn from_parts(m: Matrix6xX<T>, kind: JacobianKind) -> Self {
        Self { m, kind }
    }

    pub fn kind(&self) -> JacobianKind {
        self.kind
    }

    pub fn matrix(&self) -> &Matrix6xX<T> {
        &self.m
    }

    pub fn ncols(&self) -> usize {
        self.m.ncols()
    }

    /// Rows 1–3. For the analytical kind this is J_p, the position block.
    pub fn linear_rows(&self) -> Matrix3xX<T> {
        self.m.fixed_rows::<3>(0).into_owned()
    }

    /// Rows 4–6. For the analytical kind this is J_r, the angular block.
    pub fn angular_rows(&self) -> Matrix3xX<T> {
        self.m.fixed_rows::<3>(3).into_owned()
    }
}

/// Product-of-exponentials forward kinematics: (∏ᵢ e^{θᵢ ξ̂ᵢ}) g₀, ordered
/// base→tip.
pub fn forward_kinematics<T: Float>(arm: &ArmModel<T>, theta: &JointVector<T>) -> Result<Pose<T>> {
    if theta.layout() == JointLayout::Pseudo {
        return Err(Error::InvalidParameter {
            name: "theta",
            reason: "forward kinematics takes a per-arm joint vector, not a pseudo one".into(),
        });
    }
    expect_length(theta, arm.joint_count(), "forward_kinematics")?;
    Ok(fk_unchecked(arm, theta.as_slice()))
}

/// FK core without layout bookkeeping; callers guarantee the length.
pub(crate) fn fk_unchecked<T: Float>(arm: &ArmModel<T>, theta: &[T]) -> Pose<T> {
    let mut g = Pose::identity();
    for (xi, &th) in arm.twists().iter().zip(theta.iter()) {
        g = g.compose(&exp_twist(xi, th));
    }
    g.compose(arm.g0())
}

/// Relative pose of the right gripper in the left gripper frame:
/// g_rel = g_L⁻¹ g_R.
pub fn relative_pose<T: Float>(
    dual: &DualArmModel<T>,
    theta_l: &JointVector<T>,
    theta_r: &JointVector<T>,
) -> Result<Pose<T>> {
    let g_l = forward_kinematics(dual.left(), theta_l)?;
    let g_r = forward_kinematics(dual.right(), theta_r)?;
    Ok(g_l.inverse().compose(&g_r))
}

/// Same relative pose evaluated as the pseudo-chain product
/// g_L0⁻¹ (∏ e^{−θ_iL ξ̂_iL}) (∏ e^{θ_iR ξ̂_iR}) g_R0, with the left factors
/// ordered tip→base. Exists as a structural cross-check on the chain
/// ordering; agrees with [`relative_pose`] to machine precision.
pub fn pseudo_chain_relative_pose<T: Float>(
    dual: &DualArmModel<T>,
    theta_l: &JointVector<T>,
    theta_r: &JointVector<T>,
) -> Result<Pose<T>> {
    expect_layout(theta_l, JointLayout::Left, "theta_l")?;
    expect_layout(theta_r, JointLayout::Right, "theta_r")?;
    expect_length(theta_l, dual.left().joint_count(), "pseudo_chain_relative_pose")?;
    expect_length(theta_r, dual.right().joint_count(), "pseudo_chain_relative_pose")?;
    let mut g = dual.left().g0().inverse();
    for (xi, &th) in dual
        .left()
        .twists()
        .iter()
        .zip(theta_l.as_slice().iter())
        .rev()
    {
        g = g.compose(&exp_twist(xi, -th));
    }
    for (xi, &th) in dual.right().twists().iter().zip(theta_r.as_slice().iter()) {
        g = g.compose(&exp_twist(xi, th));
    }
    Ok(g.compose(dual.right().g0()))
}

/// Relative spatial Jacobian of the pseudo-single arm, columns ordered
/// θ_nL, …, θ_1L, θ_1R, …, θ_mR, twists in the left gripper frame.
pub fn relative_spatial_jacobian<T: Float>(
    dual: &DualArmModel<T>,
    theta_l: &JointVector<T>,
    theta_r: &JointVector<T>,
) -> Result<JacobianMatrix<T>> {
    expect_layout(theta_l, JointLayout::Left, "theta_l")?;
    expect_layout(theta_r, JointLayout::Right, "theta_r")?;
    let n = dual.left().joint_count();
    let m = dual.right().joint_count();
    expect_length(theta_l, n, "relative_spatial_jacobian")?;
    expect_length(theta_r, m, "relative_spatial_jacobian")?;

    let mut j = Matrix6xX::zeros(n + m);
    let tl = theta_l.as_slice();
    let tr = theta_r.as_slice();

    // Left columns: running product A_k = g_L0⁻¹ e^{−θ_nL ξ̂_nL} … e^{−θ_{k+1,L} ξ̂_{k+1,L}}.
    let mut a = dual.left().g0().inverse();
    for c in 0..n {
        let joint = n - 1 - c;
        if c > 0 {
            let prev = joint + 1;
            a = a.compose(&exp_twist(&dual.left().twists()[prev], -tl[prev]));
        }
        let col = adjoint(&a).apply(&dual.left().twists()[joint].as_vector());
        j.set_column(c, &(-col));
    }

    // Right columns: running product B_k = g_L⁻¹ e^{θ_1R ξ̂_1R} … e^{θ_{k−1,R} ξ̂_{k−1,R}}.
    let mut b = fk_unchecked(dual.left(), tl).inverse();
    for k in 0..m {
        if k > 0 {
            b = b.compose(&exp_twist(&dual.right().twists()[k - 1], tr[k - 1]));
        }
        let col = adjoint(&b).apply(&dual.right().twists()[k].as_vector());
        j.set_column(n + k, &col);
    }

    Ok(JacobianMatrix {
        m: j,
        kind: JacobianKind::SpatialRelative,
    })
}

/// Re-expresses the linear rows at the relative-frame origin:
/// J_a = [I, −p̂_rel; 0, I] J_s. Angular rows are unchanged.
pub fn analytical_from_spatial<T: Float>(
    j: &JacobianMatrix<T>,
    g_rel: &Pose<T>,
) -> Result<JacobianMatrix<T>> {
    if j.kind() != JacobianKind::SpatialRelative {
        return Err(Error::JacobianKindMismatch {
            expected: JacobianKind::SpatialRelative.as_str(),
            got: j.kind().as_str(),
        });
    }
    let p_hat = hat(&g_rel.translation());
    let mut m = j.m.clone();
    let linear = j.m.rows(0, 3) - p_hat * j.m.rows(3, 3);
    m.rows_mut(0, 3).copy_from(&linear);
    Ok(JacobianMatrix {
        m,
        kind: JacobianKind::AnalyticalRelative,
    })
}

fn joint_quaternion<T: Float>(xi: &Twist<T>, theta: T) -> UnitQuaternion<T> {
    if xi.is_revolute() {
        UnitQuaternion::from_axis_angle(&xi.omega(), theta)
            .expect("twist invariant guarantees a unit axis")
    } else {
        UnitQuaternion::identity()
    }
}

/// Angular Jacobian J_r rebuilt through pure quaternion products, plus the
/// relative quaternion q_rel (canonical sign).
///
/// Columns are −(R_kL ω_kL) for the left chain and +(R_kR ω_kR) for the
/// right, where R_kL, R_kR are the rotation parts of the running products in
/// [`relative_spatial_jacobian`], here accumulated as quaternions. The
/// quaternion rate follows as ∂q_rel/∂Θ = ½ H(q_rel)ᵀ J_r, and J_r equals
/// the angular rows of the spatial relative Jacobian.
pub fn quaternion_jacobian<T: Float>(
    dual: &DualArmModel<T>,
    theta_l: &JointVector<T>,
    theta_r: &JointVector<T>,
) -> Result<(Matrix3xX<T>, UnitQuaternion<T>)> {
    expect_layout(theta_l, JointLayout::Left, "theta_l")?;
    expect_layout(theta_r, JointLayout::Right, "theta_r")?;
    let n = dual.left().joint_count();
    let m = dual.right().joint_count();
    expect_length(theta_l, n, "quaternion_jacobian")?;
    expect_length(theta_r, m, "quaternion_jacobian")?;

    let tl = theta_l.as_slice();
    let tr = theta_r.as_slice();
    let mut j = Matrix3xX::zeros(n + m);

    // q_L = q_1L ⊗ … ⊗ q_nL ⊗ q(g_L0), assembled purely from quaternions.
    let mut q_left = UnitQuaternion::identity();
    for (xi, &th) in dual.left().twists().iter().zip(tl.iter()) {
        q_left = q_left.multiply(&joint_quaternion(xi, th));
    }
    q_left = q_left.multiply(&dual.left().g0().to_quaternion());

    // Left columns: a_k = q(g_L0)* ⊗ q(−θ_nL) ⊗ … ⊗ q(−θ_{k+1,L}).
    let mut a = dual.left().g0().to_quaternion().conjugate();
    for c in 0..n {
        let joint = n - 1 - c;
        if c > 0 {
            let prev = joint + 1;
            a = a.multiply(&joint_quaternion(&dual.left().twists()[prev], -tl[prev]));
        }
        j.set_column(c, &(-a.rotate(&dual.left().twists()[joint].omega())));
    }

    // Right columns: b_k = q_L* ⊗ q(θ_1R) ⊗ … ⊗ q(θ_{k−1,R}).
    let mut b = q_left.conjugate();
    let mut q_rel = q_left.conjugate();
    for k in 0..m {
        if k > 0 {
            b = b.multiply(&joint_quaternion(&dual.right().twists()[k - 1], tr[k - 1]));
        }
        j.set_column(n + k, &b.rotate(&dual.right().twists()[k].omega()));
        q_rel = q_rel.multiply(&joint_quaternion(&dual.right().twists()[k], tr[k]));
    }
    q_rel = q_rel.multiply(&dual.right().g0().to_quaternion());

    Ok((j, q_rel))
}

/// Central-difference relative Jacobian, spatial convention; a test oracle,
/// never used by the analytic path. `step` must lie in [`FD_STEP_RANGE`].
pub fn finite_difference_relative_jacobian<T: Float>(
    dual: &DualArmModel<T>,
    theta_l: &JointVector<T>,
    theta_r: &JointVector<T>,
    step: T,
) -> Result<Matrix6xX<T>> {
    let (lo, hi) = FD_STEP_RANGE;
    if !(step >= real::<T>(lo) && step <= real::<T>(hi)) {
        return Err(Error::InvalidParameter {
            name: "step",
            reason: format!(
                "finite-difference step must lie in [{lo:.0e}, {hi:.0e}], got {}",
                to_f64(step)
            ),
        });
    }
    expect_layout(theta_l, JointLayout::Left, "theta_l")?;
    expect_layout(theta_r, JointLayout::Right, "theta_r")?;
    let n = dual.left().joint_count();
    let m = dual.right().joint_count();
    expect_length(theta_l, n, "finite_difference_relative_jacobian")?;
    expect_length(theta_r, m, "finite_difference_relative_jacobian")?;

    let rel = |tl: &[T], tr: &[T]| -> Matrix4<T> {
        fk_unchecked(dual.left(), tl)
            .inverse()
            .compose(&fk_unchecked(dual.right(), tr))
            .matrix()
    };

    let g_inv = relative_pose(dual, theta_l, theta_r)?.inverse().matrix();
    let mut j = Matrix6xX::zeros(n + m);
    let two_h = step + step;

    for col in 0..n + m {
        let mut tl_p = theta_l.as_slice().to_vec();
        let mut tr_p = theta_r.as_slice().to_vec();
        let mut tl_m = tl_p.clone();
        let mut tr_m = tr_p.clone();
        if col < n {
            let joint = n - 1 - col;
            tl_p[joint] += step;
            tl_m[joint] -= step;
        } else {
            let joint = col - n;
            tr_p[joint] += step;
            tr_m[joint] -= step;
        }
        let dg = (rel(&tl_p, &tr_p) - rel(&tl_m, &tr_m)) / two_h;
        // Spatial twist coordinates: X = dg · g_rel⁻¹, v = X p-column,
        // ω = vee of the antisymmetrized rotation block.
        let x = dg * g_inv;
        let w = x.fixed_view::<3, 3>(0, 0).into_owned();
        let omega = vee(&((w - w.transpose()) * real::<T>(0.5)));
        let v = x.fixed_view::<3, 1>(0, 3).into_owned();
        j.set_column(
            col,
            &Vector6::new(v.x, v.y, v.z, omega.x, omega.y, omega.z),
        );
    }
    Ok(j)
}

/// On-disk model document: one arm per side, twists as (v, ω) 6-vectors,
/// g0 as a row-major 4×4 homogeneous matrix, optional per-joint limits.
#[derive(serde::Serialize, serde::Deserialize)]
struct ArmModelFile {
    twists: Vec<[f64; 6]>,
    g0: [[f64; 4]; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    limits: Option<Vec<[f64; 2]>>,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct DualArmModelFile {
    left: ArmModelFile,
    right: ArmModelFile,
}

fn arm_from_file(side: ArmSide, file: &ArmModelFile) -> Result<ArmModel<f64>> {
    let mut twists = Vec::with_capacity(file.twists.len());
    for (i, raw) in file.twists.iter().enumerate() {
        let xi = Twist::from_vector(&Vector6::from_column_slice(raw)).map_err(|e| {
            Error::InvalidJoint {
                side,
                index: i + 1,
                reason: e.to_string(),
            }
        })?;
        twists.push(xi);
    }
    let mut g0 = Matrix4::zeros();
    for (r, row) in file.g0.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            g0[(r, c)] = v;
        }
    }
    ArmModel::new(side, twists, Pose::from_matrix(&g0)?, file.limits.clone())
}

fn arm_to_file(arm: &ArmModel<f64>) -> ArmModelFile {
    let m = arm.g0().matrix();
    let mut g0 = [[0.0; 4]; 4];
    for (r, row) in g0.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = m[(r, c)];
        }
    }
    ArmModelFile {
        twists: arm
            .twists()
            .iter()
            .map(|xi| {
                let v = xi.as_vector();
                [v[0], v[1], v[2], v[3], v[4], v[5]]
            })
            .collect(),
        g0,
        limits: arm.limits().map(|l| l.to_vec()),
    }
}

impl DualArmModel<f64> {
    /// Parses a model document (see the module docs for the schema).
    pub fn from_json(text: &str) -> Result<Self> {
        let file: DualArmModelFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            context: "dual-arm model document",
            reason: e.to_string(),
        })?;
        DualArmModel::new(
            arm_from_file(ArmSide::Left, &file.left)?,
            arm_from_file(ArmSide::Right, &file.right)?,
        )
    }

    /// Serializes the model to the same document schema, pretty-printed.
    pub fn to_json(&self) -> String {
        let file = DualArmModelFile {
            left: arm_to_file(self.left()),
            right: arm_to_file(self.right()),
        };
        let mut out = serde_json::to_string_pretty(&file).expect("model document serializes");
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{Matrix3, Vector3, Vector4};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_unit(rng: &mut ChaCha12Rng) -> Vector3<f64> {
        loop {
            let v = Vector3::new(
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
            );
            let n = v.norm();
            if n > 1e-2 {
                return v / n;
            }
        }
    }

    fn random_arm(rng: &mut ChaCha12Rng, side: ArmSide, joints: usize) -> ArmModel<f64> {
        let twists: Vec<Twist<f64>> = (0..joints)
            .map(|_| {
                let axis = random_unit(rng);
                let point = Vector3::new(
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                );
                Twist::revolute(&axis, &point).unwrap()
            })
            .collect();
        let q = UnitQuaternion::from_axis_angle(&random_unit(rng), rng.random::<f64>() * 2.0 - 1.0)
            .unwrap();
        let g0 = Pose::from_quaternion(
            &q,
            Vector3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()),
        );
        ArmModel::new(side, twists, g0, None).unwrap()
    }

    fn random_dual(rng: &mut ChaCha12Rng, n: usize, m: usize) -> DualArmModel<f64> {
        DualArmModel::new(
            random_arm(rng, ArmSide::Left, n),
            random_arm(rng, ArmSide::Right, m),
        )
        .unwrap()
    }

    fn random_angles(rng: &mut ChaCha12Rng, len: usize) -> Vec<f64> {
        (0..len).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect()
    }

    #[test]
    fn fk_zero_configuration_returns_g0() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let arm = random_arm(&mut rng, ArmSide::Left, 7);
        let g = forward_kinematics(&arm, &JointVector::left(&[0.0; 7])).unwrap();
        assert_eq!(g, *arm.g0());
    }

    #[test]
    fn fk_single_revolute_joint_quarter_turn() {
        let xi = Twist::revolute(&Vector3::z(), &Vector3::zeros()).unwrap();
        let arm = ArmModel::new(
            ArmSide::Left,
            vec![xi],
            Pose::translation_only(Vector3::x()),
            None,
        )
        .unwrap();
        let g = forward_kinematics(&arm, &JointVector::left(&[std::f64::consts::FRAC_PI_2]))
            .unwrap();
        assert_relative_eq!(g.translation(), Vector3::y(), epsilon = 1e-15);
    }

    #[test]
    fn fk_matches_homogeneous_matrix_chain_oracle() {
        // Oracle path: per-joint 4×4 matrices built from quaternion rotation
        // plus the closed-form screw translation, multiplied as raw matrices.
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        for _ in 0..20 {
            let arm = random_arm(&mut rng, ArmSide::Left, 7);
            let theta = random_angles(&mut rng, 7);

            let mut oracle = Matrix4::<f64>::identity();
            for (xi, &th) in arm.twists().iter().zip(theta.iter()) {
                let q = UnitQuaternion::from_axis_angle(&xi.omega(), th).unwrap();
                let r = q.to_rotation_matrix();
                let p = (Matrix3::identity() - r) * xi.omega().cross(&xi.v());
                let mut m = Matrix4::identity();
                m.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
                m.fixed_view_mut::<3, 1>(0, 3).copy_from(&p);
                oracle *= m;
            }
            oracle *= arm.g0().matrix();

            let g = forward_kinematics(&arm, &JointVector::left(&theta)).unwrap();
            assert_relative_eq!(g.matrix(), oracle, epsilon = 1e-10);
        }
    }

    #[test]
    fn fk_rejects_bad_inputs() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let arm = random_arm(&mut rng, ArmSide::Left, 3);
        assert!(forward_kinematics(&arm, &JointVector::left(&[0.0; 2])).is_err());
        let pseudo = JointVector::pseudo(
            &JointVector::left(&[0.0; 3]),
            &JointVector::right(&[0.0; 3]),
        )
        .unwrap();
        assert!(forward_kinematics(&arm, &pseudo).is_err());
    }

    #[test]
    fn joint_vector_pseudo_ordering_and_split() {
        let l = JointVector::left(&[1.0, 2.0, 3.0]);
        let r = JointVector::right(&[4.0, 5.0]);
        let p = JointVector::pseudo(&l, &r).unwrap();
        assert_eq!(p.as_slice(), &[3.0, 2.0, 1.0, 4.0, 5.0]);
        let (l2, r2) = p.split(3).unwrap();
        assert_eq!(l2, l);
        assert_eq!(r2, r);
        // Layout misuse is rejected.
        assert!(JointVector::pseudo(&r, &l).is_err());
        assert!(l.split(1).is_err());
    }

    #[test]
    fn relative_pose_zero_configuration() {
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        let dual = random_dual(&mut rng, 7, 7);
        let g = relative_pose(
            &dual,
            &JointVector::left(&[0.0; 7]),
            &JointVector::right(&[0.0; 7]),
        )
        .unwrap();
        let expected = dual.left().g0().inverse().compose(dual.right().g0());
        assert_relative_eq!(g.matrix(), expected.matrix(), epsilon = 1e-15);
    }

    #[test]
    fn relative_pose_of_identical_arms_is_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(15);
        let left = random_arm(&mut rng, ArmSide::Left, 7);
        let right = ArmModel::new(
            ArmSide::Right,
            left.twists().to_vec(),
            *left.g0(),
            None,
        )
        .unwrap();
        let dual = DualArmModel::new(left, right).unwrap();
        let theta = random_angles(&mut rng, 7);
        let g = relative_pose(
            &dual,
            &JointVector::left(&theta),
            &JointVector::right(&theta),
        )
        .unwrap();
        assert_relative_eq!(g.rotation(), Matrix3::identity(), epsilon = 1e-12);
        assert_relative_eq!(g.translation(), Vector3::zeros(), epsilon = 1e-12);
    }

    #[test]
    fn relative_pose_two_formulas_agree() {
        let mut rng = ChaCha12Rng::seed_from_u64(16);
        for _ in 0..20 {
            let dual = random_dual(&mut rng, 7, 7);
            let tl = JointVector::left(&random_angles(&mut rng, 7));
            let tr = JointVector::right(&random_angles(&mut rng, 7));
            let direct = relative_pose(&dual, &tl, &tr).unwrap();
            let chained = pseudo_chain_relative_pose(&dual, &tl, &tr).unwrap();
            assert_relative_eq!(direct.matrix(), chained.matrix(), epsilon = 1e-10);
        }
    }

    #[test]
    fn spatial_jacobian_zero_configuration_columns() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let dual = random_dual(&mut rng, 7, 6);
        let j = relative_spatial_jacobian(
            &dual,
            &JointVector::left(&[0.0; 7]),
            &JointVector::right(&[0.0; 6]),
        )
        .unwrap();
        let ad = adjoint(&dual.left().g0().inverse());
        for c in 0..7 {
            let joint = 7 - 1 - c;
            let expected = -ad.apply(&dual.left().twists()[joint].as_vector());
            assert_relative_eq!(j.matrix().column(c).into_owned(), expected, epsilon = 1e-12);
        }
        for k in 0..6 {
            let expected = ad.apply(&dual.right().twists()[k].as_vector());
            assert_relative_eq!(
                j.matrix().column(7 + k).into_owned(),
                expected,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn spatial_jacobian_matches_finite_differences() {
        let mut rng = ChaCha12Rng::seed_from_u64(18);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let dual = random_dual(&mut rng, 7, 7);
            let tl = JointVector::left(&random_angles(&mut rng, 7));
            let tr = JointVector::right(&random_angles(&mut rng, 7));
            let j = relative_spatial_jacobian(&dual, &tl, &tr).unwrap();
            let fd = finite_difference_relative_jacobian(&dual, &tl, &tr, 1e-6).unwrap();
            worst = worst.max((j.matrix() - &fd).abs().max());
        }
        assert!(worst < 1e-6, "max |analytic - FD| = {worst:.3e}");
    }

    #[test]
    fn finite_difference_step_is_validated_and_converges() {
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        let dual = random_dual(&mut rng, 7, 7);
        let tl = JointVector::left(&random_angles(&mut rng, 7));
        let tr = JointVector::right(&random_angles(&mut rng, 7));
        assert!(finite_difference_relative_jacobian(&dual, &tl, &tr, 1e-9).is_err());
        assert!(finite_difference_relative_jacobian(&dual, &tl, &tr, 1e-2).is_err());

        // Central differences are second order: shrinking the step from 1e-4
        // to 1e-6 must shrink the deviation from the analytic Jacobian.
        let j = relative_spatial_jacobian(&dual, &tl, &tr).unwrap();
        let coarse = finite_difference_relative_jacobian(&dual, &tl, &tr, 1e-4).unwrap();
        let fine = finite_difference_relative_jacobian(&dual, &tl, &tr, 1e-6).unwrap();
        let dev_coarse = (j.matrix() - &coarse).abs().max();
        let dev_fine = (j.matrix() - &fine).abs().max();
        assert!(
            dev_fine < dev_coarse,
            "expected convergence, got {dev_coarse:.3e} -> {dev_fine:.3e}"
        );
    }

    #[test]
    fn relative_motion_cancels_for_mirrored_perturbations() {
        // Identical arms in identical configurations: moving every joint of
        // both arms by the same amount leaves g_rel fixed, so the Jacobian
        // annihilates the matched all-ones direction.
        let mut rng = ChaCha12Rng::seed_from_u64(20);
        let left = random_arm(&mut rng, ArmSide::Left, 7);
        let right = ArmModel::new(
            ArmSide::Right,
            left.twists().to_vec(),
            *left.g0(),
            None,
        )
        .unwrap();
        let dual = DualArmModel::new(left, right).unwrap();
        let theta = random_angles(&mut rng, 7);
        let tl = JointVector::left(&theta);
        let tr = JointVector::right(&theta);

        let ones = DVector::from_element(14, 1.0);
        let j = relative_spatial_jacobian(&dual, &tl, &tr).unwrap();
        assert!((j.matrix() * &ones).norm() < 1e-12);
        let fd = finite_difference_relative_jacobian(&dual, &tl, &tr, 1e-6).unwrap();
        assert!((fd * ones).norm() < 1e-6);
    }

    #[test]
    fn analytical_jacobian_blocks() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let dual = random_dual(&mut rng, 7, 7);
        let tl = JointVector::left(&random_angles(&mut rng, 7));
        let tr = JointVector::right(&random_angles(&mut rng, 7));
        let spatial = relative_spatial_jacobian(&dual, &tl, &tr).unwrap();
        let g_rel = relative_pose(&dual, &tl, &tr).unwrap();
        let analytical = analytical_from_spatial(&spatial, &g_rel).unwrap();

        // Angular rows are unchanged; kind is retagged.
        assert_eq!(analytical.kind(), JacobianKind::AnalyticalRelative);
        assert_eq!(analytical.angular_rows(), spatial.angular_rows());
        // Feeding an analytical Jacobian back in is rejected.
        assert!(analytical_from_spatial(&analytical, &g_rel).is_err());

        // Zero lever arm: with p_rel = 0 the transform is the identity.
        let at_origin = Pose::from_quaternion(&g_rel.to_quaternion(), Vector3::zeros());
        let same = analytical_from_spatial(&spatial, &at_origin).unwrap();
        assert_eq!(same.matrix(), spatial.matrix());
    }

    #[test]
    fn analytical_linear_rows_differentiate_position() {
        let mut rng = ChaCha12Rng::seed_from_u64(22);
        let step = 1e-6;
        for _ in 0..20 {
            let dual = random_dual(&mut rng, 7, 7);
            let theta_l = random_angles(&mut rng, 7);
            let theta_r = random_angles(&mut rng, 7);
            let tl = JointVector::left(&theta_l);
            let tr = JointVector::right(&theta_r);
            let spatial = relative_spatial_jacobian(&dual, &tl, &tr).unwrap();
            let g_rel = relative_pose(&dual, &tl, &tr).unwrap();
            let j_p = analytical_from_spatial(&spatial, &g_rel).unwrap().linear_rows();

            for col in 0..14 {
                let mut lp = theta_l.clone();
                let mut lm = theta_l.clone();
                let mut rp = theta_r.clone();
                let mut rm = theta_r.clone();
                if col < 7 {
                    lp[6 - col] += step;
                    lm[6 - col] -= step;
                } else {
                    rp[col - 7] += step;
                    rm[col - 7] -= step;
                }
                let plus = relative_pose(&dual, &JointVector::left(&lp), &JointVector::right(&rp))
                    .unwrap()
                    .translation();
                let minus =
                    relative_pose(&dual, &JointVector::left(&lm), &JointVector::right(&rm))
                        .unwrap()
                        .translation();
                let fd = (plus - minus) / (2.0 * step);
                assert_relative_eq!(j_p.column(col).into_owned(), fd, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn quaternion_jacobian_zero_configuration_columns() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let dual = random_dual(&mut rng, 7, 6);
        let (j, q_rel) = quaternion_jacobian(
            &dual,
            &JointVector::left(&[0.0; 7]),
            &JointVector::right(&[0.0; 6]),
        )
        .unwrap();
        let r0_t = dual.left().g0().rotation().transpose();
        for c in 0..7 {
            let joint = 7 - 1 - c;
            let expected = -(r0_t * dual.left().twists()[joint].omega());
            assert_relative_eq!(j.column(c).into_owned(), expected, epsilon = 1e-12);
        }
        let expected_q = dual
            .left()
            .g0()
            .inverse()
            .compose(dual.right().g0())
            .to_quaternion();
        assert_relative_eq!(q_rel.as_vector(), expected_q.as_vector(), epsilon = 1e-12);
    }

    #[test]
    fn quaternion_jacobian_equals_spatial_angular_rows() {
        let mut rng = ChaCha12Rng::seed_from_u64(24);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let dual = random_dual(&mut rng, 7, 7);
            let tl = JointVector::left(&random_angles(&mut rng, 7));
            let tr = JointVector::right(&random_angles(&mut rng, 7));
            let (j_r, q_rel) = quaternion_jacobian(&dual, &tl, &tr).unwrap();
            let spatial = relative_spatial_jacobian(&dual, &tl, &tr).unwrap();
            worst = worst.max((j_r - spatial.angular_rows()).abs().max());
            // The returned quaternion matches the relative pose (both canonical).
            let q_pose = relative_pose(&dual, &tl, &tr).unwrap().to_quaternion();
            assert_relative_eq!(q_rel.as_vector(), q_pose.as_vector(), epsilon = 1e-12);
        }
        assert!(worst < 1e-9, "max |J_r - spatial rows 4-6| = {worst:.3e}");
    }

    #[test]
    fn quaternion_rate_matches_finite_differences() {
        // ∂q_rel/∂Θ = ½ Hᵀ J_r against central differences of the sampled
        // quaternion, sign-aligned to the reference to undo canonicalization.
        let mut rng = ChaCha12Rng::seed_from_u64(25);
        let step = 1e-6;
        for _ in 0..10 {
            let dual = random_dual(&mut rng, 7, 7);
            let theta_l = random_angles(&mut rng, 7);
            let theta_r = random_angles(&mut rng, 7);
            let tl = JointVector::left(&theta_l);
            let tr = JointVector::right(&theta_r);
            let (j_r, q_rel) = quaternion_jacobian(&dual, &tl, &tr).unwrap();
            let rate = q_rel.rate_matrix().transpose() * j_r * 0.5;

            let aligned = |tl: &[f64], tr: &[f64]| -> Vector4<f64> {
                let q = relative_pose(&dual, &JointVector::left(tl), &JointVector::right(tr))
                    .unwrap()
                    .to_quaternion();
                let v = q.as_vector();
                if v.dot(&q_rel.as_vector()) < 0.0 {
                    -v
                } else {
                    v
                }
            };

            for col in 0..14 {
                let mut lp = theta_l.clone();
                let mut lm = theta_l.clone();
                let mut rp = theta_r.clone();
                let mut rm = theta_r.clone();
                if col < 7 {
                    lp[6 - col] += step;
                    lm[6 - col] -= step;
                } else {
                    rp[col - 7] += step;
                    rm[col - 7] -= step;
                }
                let fd = (aligned(&lp, &rp) - aligned(&lm, &rm)) / (2.0 * step);
                assert_relative_eq!(rate.column(col).into_owned(), fd, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn prismatic_joints_contribute_no_rotation() {
        // A prismatic joint moves the relative position but never the
        // orientation: its angular column is structurally zero.
        let mut rng = ChaCha12Rng::seed_from_u64(26);
        let mut twists = vec![
            Twist::prismatic(&Vector3::z()).unwrap(),
            Twist::revolute(&Vector3::x(), &Vector3::new(0.1, 0.2, 0.0)).unwrap(),
        ];
        twists.push(Twist::revolute(&Vector3::y(), &Vector3::new(0.0, 0.3, 0.1)).unwrap());
        let left = ArmModel::new(
            ArmSide::Left,
            twists.clone(),
            Pose::translation_only(Vector3::new(0.4, 0.0, 0.2)),
            None,
        )
        .unwrap();
        let right = random_arm(&mut rng, ArmSide::Right, 3);
        let dual = DualArmModel::new(left, right).unwrap();
        let tl = JointVector::left(&[0.3, -0.8, 0.4]);
        let tr = JointVector::right(&[0.9, 0.2, -1.1]);

        let spatial = relative_spatial_jacobian(&dual, &tl, &tr).unwrap();
        // Prismatic joint 1L sits at pseudo column n − 1 = 2.
        assert_relative_eq!(
            spatial.angular_rows().column(2).into_owned(),
            Vector3::zeros(),
            epsilon = 1e-15
        );
        let fd = finite_difference_relative_jacobian(&dual, &tl, &tr, 1e-6).unwrap();
        assert!((spatial.matrix() - fd).abs().max() < 1e-6);
    }

    #[test]
    fn model_document_round_trip_and_validation() {
        let mut rng = ChaCha12Rng::seed_from_u64(27);
        let left = random_arm(&mut rng, ArmSide::Left, 4);
        let limits = vec![[-1.0, 1.0]; 3];
        let right = ArmModel::new(
            ArmSide::Right,
            random_arm(&mut rng, ArmSide::Right, 3).twists().to_vec(),
            Pose::translation_only(Vector3::new(0.1, -0.2, 0.3)),
            Some(limits),
        )
        .unwrap();
        let dual = DualArmModel::new(left, right).unwrap();

        let text = dual.to_json();
        let back = DualArmModel::from_json(&text).unwrap();
        // Poses and limits survive bitwise; twist axes may shift by one ulp
        // from renormalization on ingest.
        for (a, b) in [
            (dual.left(), back.left()),
            (dual.right(), back.right()),
        ] {
            assert_eq!(a.g0(), b.g0());
            assert_eq!(a.limits(), b.limits());
            for (xa, xb) in a.twists().iter().zip(b.twists().iter()) {
                assert_relative_eq!(xa.as_vector(), xb.as_vector(), epsilon = 1e-15);
            }
        }

        // A non-unit axis must be reported against the right joint, 1-based.
        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        doc["right"]["twists"][1][5] = serde_json::json!(2.0);
        let err = DualArmModel::from_json(&doc.to_string()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("right") && msg.contains("joint 2"), "{msg}");

        // Mismatched limit count is rejected.
        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        doc["left"]["limits"] = serde_json::json!([[0.0, 1.0]]);
        assert!(DualArmModel::from_json(&doc.to_string()).is_err());

        // Inverted limits name the joint.
        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        doc["right"]["limits"][2] = serde_json::json!([1.0, -1.0]);
        let msg = DualArmModel::from_json(&doc.to_string())
            .unwrap_err()
            .to_string();
        assert!(msg.contains("joint 3"), "{msg}");

        // Garbage input is a parse error, not a panic.
        assert!(DualArmModel::from_json("{ not json").is_err());
    }

    #[test]
    fn arm_model_validation() {
        let xi = Twist::revolute(&Vector3::z(), &Vector3::zeros()).unwrap();
        assert!(ArmModel::<f64>::new(ArmSide::Left, vec![], Pose::identity(), None).is_err());
        assert!(ArmModel::new(
            ArmSide::Left,
            vec![xi],
            Pose::identity(),
            Some(vec![[0.0, 1.0], [0.0, 1.0]])
        )
        .is_err());
        let arm = ArmModel::new(
            ArmSide::Left,
            vec![xi],
            Pose::identity(),
            Some(vec![[-0.5, 0.5]]),
        )
        .unwrap();
        assert!(arm.within_limits(&[0.3]));
        assert!(!arm.within_limits(&[0.7]));
        let mut theta = DVector::from_column_slice(&[0.7]);
        arm.clamp_to_limits(&mut theta);
        assert_eq!(theta[0], 0.5);
    }
}
