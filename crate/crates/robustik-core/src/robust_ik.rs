//! Candidate enumeration and worst-case-robust selection of dual-arm IK
//! solutions.
//!
//! Enumeration runs damped-least-squares IK per arm from a deterministic
//! low-discrepancy (Halton) multistart inside the joint limits, deduplicates
//! converged configurations, and takes the cross product of left and right
//! solutions. For arms with redundant degrees of freedom a designated joint
//! is additionally locked on a grid across its range so distinct self-motion
//! branches are reached. Every reported pair satisfies the placement
//! invariant: each arm within [`PLACEMENT_POSITION_TOL`] of the target
//! position and [`PLACEMENT_ROTATION_TOL`] of the target orientation.
//!
//! Scoring propagates the joint-noise ball through the relative Jacobian at
//! the candidate: P* from the position rows, O* from the orientation rows
//! and relative quaternion, combined as M* = P* + γO*. Selection picks the
//! candidate minimizing M*, with deterministic tie-breaking (smaller P*,
//! then configuration closest to joint mid-range, then input order), and a
//! feasibility check compares the winner's M* against a task tolerance.

use nalgebra::{DVector, Matrix6, Matrix6xX, Vector3, Vector6};

use crate::kinematics::{
    analytical_from_spatial, fk_unchecked, relative_pose, relative_spatial_jacobian, ArmModel,
    DualArmModel, JointVector,
};
use crate::se3::{adjoint, exp_twist, hat, Pose};
use crate::uncertainty::{
    joint_error_bound, max_orientation_error, max_position_error, JointNoiseModel, WorstCaseError,
};
use crate::{real, to_f64, Error, Float, Result};

/// Largest acceptable position residual (m) per arm for a reported pair.
pub const PLACEMENT_POSITION_TOL: f64 = 1e-6;
/// Largest acceptable orientation residual (rad) per arm for a reported pair.
pub const PLACEMENT_ROTATION_TOL: f64 = 1e-6;
/// Bound on [`IkPair::residual`] (both arms' position and rotation residuals
/// summed) implied by the per-component tolerances above; scoring rejects
/// pairs beyond it since the error bound is only meaningful at a solution.
pub const PAIR_RESIDUAL_TOL: f64 =
    2.0 * (PLACEMENT_POSITION_TOL + PLACEMENT_ROTATION_TOL);

/// Per-iteration cap (rad) on the DLS update norm; keeps far seeds from
/// overshooting into a different basin each step.
const MAX_STEP: f64 = 0.5;
/// Arms with at least this many joints get the redundancy grid by default.
const AUTO_REDUNDANCY_MIN: usize = 7;
/// Default locked joint for the redundancy grid (0-based).
const DEFAULT_REDUNDANCY_JOINT: usize = 2;
/// Joint range used for seeding and redundancy grids when an arm has no
/// declared limits.
const UNLIMITED_RANGE: (f64, f64) = (-std::f64::consts::PI, std::f64::consts::PI);

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Tuning for the IK multistart. `Default` matches the values used for the
/// bundled model; deserializing fills missing fields from `Default`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnumerationStrategy {
    /// Halton seeds per arm.
    pub seeds: usize,
    /// Joint locked on a grid to sample self-motion branches. `None` picks
    /// joint 2 automatically for arms with 7 or more joints.
    pub redundancy_joint: Option<usize>,
    /// Grid resolution across the locked joint's range; 0 disables the grid.
    pub redundancy_steps: usize,
    /// Halton seeds per grid value.
    pub redundancy_seeds: usize,
    /// DLS damping λ; the normal matrix is J Jᵀ + λ²I.
    pub damping: f64,
    /// Convergence threshold on the stacked position/orientation error norm.
    pub tolerance: f64,
    /// Iteration cap per seed.
    pub max_iterations: usize,
    /// Configurations within this ∞-norm distance (rad) are merged.
    pub dedup_tolerance: f64,
    /// Left-arm configurations sampled by
    /// [`enumerate_ik_pairs_for_relative`].
    pub left_samples: usize,
}

impl Default for EnumerationStrategy {
    fn default() -> Self {
        Self {
            seeds: 64,
            redundancy_joint: None,
            redundancy_steps: 16,
            redundancy_seeds: 4,
            damping: 1e-3,
            tolerance: 1e-9,
            max_iterations: 500,
            dedup_tolerance: 1e-3,
            left_samples: 8,
        }
    }
}

fn validate_strategy(s: &EnumerationStrategy) -> Result<()> {
    let positive = [
        ("damping", s.damping),
        ("tolerance", s.tolerance),
        ("dedup_tolerance", s.dedup_tolerance),
    ];
    for (name, value) in positive {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("must be positive and finite, got {value}"),
            });
        }
    }
    let nonzero = [
        ("seeds", s.seeds),
        ("max_iterations", s.max_iterations),
        ("left_samples", s.left_samples),
    ];
    for (name, value) in nonzero {
        if value == 0 {
            return Err(Error::InvalidParameter {
                name,
                reason: "must be at least 1".into(),
            });
        }
    }
    if s.redundancy_steps > 0 && s.redundancy_seeds == 0 {
        return Err(Error::InvalidParameter {
            name: "redundancy_seeds",
            reason: "must be at least 1 when the redundancy grid is enabled".into(),
        });
    }
    Ok(())
}

/// Per-arm multistart counters. In the free-left mode the left counters
/// describe sampled configurations rather than IK runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct ArmDiagnostics {
    /// IK runs attempted (seeds plus redundancy-grid runs).
    pub attempts: usize,
    /// Runs that met the convergence tolerance inside the limits.
    pub converged: usize,
    /// Converged runs merged into an earlier solution.
    pub duplicates: usize,
    /// Distinct solutions kept.
    pub solutions: usize,
}

impl ArmDiagnostics {
    fn absorb(&mut self, other: &ArmDiagnostics) {
        self.attempts += other.attempts;
        self.converged += other.converged;
        self.duplicates += other.duplicates;
        self.solutions += other.solutions;
    }
}

/// Multistart counters for one enumeration call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct EnumerationDiagnostics {
    pub left: ArmDiagnostics,
    pub right: ArmDiagnostics,
    /// Cross-product pairs dropped for violating the placement invariant.
    pub residual_rejections: usize,
}

impl EnumerationDiagnostics {
    pub fn summary(&self) -> String {
        format!(
            "left arm: {} solutions ({} of {} runs converged, {} duplicates); \
             right arm: {} solutions ({} of {} runs converged, {} duplicates); \
             {} pairs rejected by the placement invariant",
            self.left.solutions,
            self.left.converged,
            self.left.attempts,
            self.left.duplicates,
            self.right.solutions,
            self.right.converged,
            self.right.attempts,
            self.right.duplicates,
            self.residual_rejections
        )
    }
}

/// One joint-space candidate: both arm configurations, the summed placement
/// residual they were verified at, and the worst-case score once attached.
#[derive(Debug, Clone, PartialEq)]
pub struct IkPair<T: Float> {
    theta_left: JointVector<T>,
    theta_right: JointVector<T>,
    residual: T,
    score: Option<WorstCaseError<T>>,
}

impl<T: Float> IkPair<T> {
    /// Wraps a user-supplied pair whose own forward kinematics define the
    /// reference placement, so the residual is zero by construction. Joint
    /// limits are not enforced here.
    pub fn nominal(
        dual: &DualArmModel<T>,
        theta_left: &[T],
        theta_right: &[T],
    ) -> Result<Self> {
        let (n, m) = dual.joint_counts();
        if theta_left.len() != n {
            return Err(Error::JointCountMismatch {
                context: "nominal pair, left arm",
                expected: n,
                got: theta_left.len(),
            });
        }
        if theta_right.len() != m {
            return Err(Error::JointCountMismatch {
                context: "nominal pair, right arm",
                expected: m,
                got: theta_right.len(),
            });
        }
        if !theta_left.iter().chain(theta_right).all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "nominal pair joint values",
            });
        }
        Ok(Self {
            theta_left: JointVector::left(theta_left),
            theta_right: JointVector::right(theta_right),
            residual: T::zero(),
            score: None,
        })
    }

    pub fn theta_left(&self) -> &JointVector<T> {
        &self.theta_left
    }

    pub fn theta_right(&self) -> &JointVector<T> {
        &self.theta_right
    }

    /// Sum of both arms' position (m) and orientation (rad) residuals
    /// against the enumeration targets.
    pub fn residual(&self) -> T {
        self.residual
    }

    pub fn score(&self) -> Option<&WorstCaseError<T>> {
        self.score.as_ref()
    }

    pub(crate) fn set_score(&mut self, score: WorstCaseError<T>) {
        self.score = Some(score);
    }
}

/// Enumeration output: deterministic candidate list plus counters.
#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration<T: Float> {
    pub pairs: Vec<IkPair<T>>,
    pub diagnostics: EnumerationDiagnostics,
}

fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

fn seed_box<T: Float>(arm: &ArmModel<T>) -> Vec<(f64, f64)> {
    match arm.limits() {
        Some(l) => l
            .iter()
            .map(|lim| (to_f64(lim[0]), to_f64(lim[1])))
            .collect(),
        None => vec![UNLIMITED_RANGE; arm.joint_count()],
    }
}

fn halton_seed<T: Float>(index: u64, bounds: &[(f64, f64)]) -> DVector<T> {
    DVector::from_iterator(
        bounds.len(),
        bounds.iter().enumerate().map(|(j, (lo, hi))| {
            let u = halton(index, PRIMES[j % PRIMES.len()]);
            real::<T>(lo + u * (hi - lo))
        }),
    )
}

/// FK pose together with the 6×n map from joint rates to the stacked
/// (endpoint velocity, world angular velocity) used by the DLS update.
fn arm_pose_and_jacobian<T: Float>(
    arm: &ArmModel<T>,
    theta: &[T],
) -> (Pose<T>, Matrix6xX<T>) {
    let n = arm.joint_count();
    let mut j = Matrix6xX::zeros(n);
    let mut partial = Pose::identity();
    for (i, xi) in arm.twists().iter().enumerate() {
        let col = adjoint(&partial).apply(&xi.as_vector());
        j.set_column(i, &col);
        partial = partial.compose(&exp_twist(xi, theta[i]));
    }
    let g = partial.compose(arm.g0());
    let linear = j.rows(0, 3) - hat(&g.translation()) * j.rows(3, 3);
    j.rows_mut(0, 3).copy_from(&linear);
    (g, j)
}

/// Stacked placement error (target position minus current, rotation vector
/// of the residual rotation).
fn pose_error<T: Float>(g: &Pose<T>, target: &Pose<T>) -> Vector6<T> {
    let dp = target.translation() - g.translation();
    let drot = Pose::trusted(
        target.rotation() * g.rotation().transpose(),
        Vector3::zeros(),
    )
    .to_quaternion()
    .rotation_vector();
    let mut e = Vector6::zeros();
    e.fixed_rows_mut::<3>(0).copy_from(&dp);
    e.fixed_rows_mut::<3>(3).copy_from(&drot);
    e
}

/// Damped-least-squares descent from one seed; `locked` pins a joint for the
/// redundancy grid. Returns the configuration with its final position and
/// rotation residuals, or `None` without convergence.
fn dls_solve<T: Float>(
    arm: &ArmModel<T>,
    target: &Pose<T>,
    mut theta: DVector<T>,
    locked: Option<(usize, T)>,
    strategy: &EnumerationStrategy,
) -> Option<(DVector<T>, T, T)> {
    let lambda2 = real::<T>(strategy.damping * strategy.damping);
    let tol = real::<T>(strategy.tolerance);
    let cap = real::<T>(MAX_STEP);
    if let Some((j, v)) = locked {
        theta[j] = v;
    }
    arm.clamp_to_limits(&mut theta);
    for _ in 0..strategy.max_iterations {
        let (g, mut jac) = arm_pose_and_jacobian(arm, theta.as_slice());
        let e = pose_error(&g, target);
        if e.norm() < tol {
            let pos = e.fixed_rows::<3>(0).norm();
            let rot = e.fixed_rows::<3>(3).norm();
            return Some((theta, pos, rot));
        }
        if let Some((j, _)) = locked {
            jac.set_column(j, &Vector6::zeros());
        }
        let normal = &jac * jac.transpose() + Matrix6::identity() * lambda2;
        let mut step = jac.transpose() * normal.cholesky()?.solve(&e);
        let norm = step.norm();
        if norm > cap {
            step *= cap / norm;
        }
        theta += step;
        if let Some((j, v)) = locked {
            theta[j] = v;
        }
        arm.clamp_to_limits(&mut theta);
    }
    None
}

fn push_deduplicated<T: Float>(
    found: &mut Vec<(DVector<T>, T, T)>,
    candidate: (DVector<T>, T, T),
    tol: T,
    diag: &mut ArmDiagnostics,
) {
    if found
        .iter()
        .any(|(existing, _, _)| (&candidate.0 - existing).amax() < tol)
    {
        diag.duplicates += 1;
    } else {
        found.push(candidate);
    }
}

fn redundancy_joint_for<T: Float>(
    arm: &ArmModel<T>,
    strategy: &EnumerationStrategy,
) -> Result<Option<usize>> {
    if strategy.redundancy_steps == 0 {
        return Ok(None);
    }
    match strategy.redundancy_joint {
        Some(j) if j >= arm.joint_count() => Err(Error::InvalidParameter {
            name: "redundancy_joint",
            reason: format!(
                "index {j} out of range for the {} arm with {} joints",
                arm.side(),
                arm.joint_count()
            ),
        }),
        Some(j) => Ok(Some(j)),
        None if arm.joint_count() >= AUTO_REDUNDANCY_MIN => Ok(Some(DEFAULT_REDUNDANCY_JOINT)),
        None => Ok(None),
    }
}

/// Converged configurations with their final position and rotation
/// residuals.
type ArmSolutions<T> = Vec<(DVector<T>, T, T)>;

fn solve_arm<T: Float>(
    arm: &ArmModel<T>,
    target: &Pose<T>,
    strategy: &EnumerationStrategy,
) -> Result<(ArmSolutions<T>, ArmDiagnostics)> {
    let bounds = seed_box(arm);
    let dedup = real::<T>(strategy.dedup_tolerance);
    let mut found = Vec::new();
    let mut diag = ArmDiagnostics::default();

    for s in 0..strategy.seeds {
        diag.attempts += 1;
        let seed = halton_seed((s + 1) as u64, &bounds);
        if let Some(c) = dls_solve(arm, target, seed, None, strategy) {
            diag.converged += 1;
            push_deduplicated(&mut found, c, dedup, &mut diag);
        }
    }

    if let Some(j) = redundancy_joint_for(arm, strategy)? {
        let (lo, hi) = bounds[j];
        for k in 0..strategy.redundancy_steps {
            let value = lo + (k as f64 + 0.5) / strategy.redundancy_steps as f64 * (hi - lo);
            for s in 0..strategy.redundancy_seeds {
                diag.attempts += 1;
                let index = strategy.seeds + k * strategy.redundancy_seeds + s;
                let seed = halton_seed((index + 1) as u64, &bounds);
                if let Some(c) =
                    dls_solve(arm, target, seed, Some((j, real(value))), strategy)
                {
                    diag.converged += 1;
                    push_deduplicated(&mut found, c, dedup, &mut diag);
                }
            }
        }
    }

    diag.solutions = found.len();
    Ok((found, diag))
}

fn cross_pairs<T: Float>(
    lefts: &[(DVector<T>, T, T)],
    rights: &[(DVector<T>, T, T)],
    rejections: &mut usize,
) -> Vec<IkPair<T>> {
    let pos_tol = real::<T>(PLACEMENT_POSITION_TOL);
    let rot_tol = real::<T>(PLACEMENT_ROTATION_TOL);
    let mut pairs = Vec::with_capacity(lefts.len() * rights.len());
    for (tl, pl, rl) in lefts {
        for (tr, pr, rr) in rights {
            if *pl > pos_tol || *pr > pos_tol || *rl > rot_tol || *rr > rot_tol {
                *rejections += 1;
                continue;
            }
            pairs.push(IkPair {
                theta_left: JointVector::left(tl.as_slice()),
                theta_right: JointVector::right(tr.as_slice()),
                residual: *pl + *rl + *pr + *rr,
                score: None,
            });
        }
    }
    pairs
}

/// Enumerates IK pairs placing the left gripper at `g_left` and the right at
/// `g_right`. Deterministic for a fixed strategy; an unreachable target
/// yields an empty list with the failure visible in the diagnostics.
pub fn enumerate_ik_pairs<T: Float>(
    dual: &DualArmModel<T>,
    g_left: &Pose<T>,
    g_right: &Pose<T>,
    strategy: &EnumerationStrategy,
) -> Result<Enumeration<T>> {
    validate_strategy(strategy)?;
    let (lefts, left_diag) = solve_arm(dual.left(), g_left, strategy)?;
    let (rights, right_diag) = solve_arm(dual.right(), g_right, strategy)?;
    let mut rejections = 0;
    let pairs = cross_pairs(&lefts, &rights, &mut rejections);
    Ok(Enumeration {
        pairs,
        diagnostics: EnumerationDiagnostics {
            left: left_diag,
            right: right_diag,
            residual_rejections: rejections,
        },
    })
}

/// Enumeration with only the relative pose constrained: left configurations
/// are sampled from the Halton sequence (their placement is exact by
/// construction) and the right arm is solved for g_L g_rel.
pub fn enumerate_ik_pairs_for_relative<T: Float>(
    dual: &DualArmModel<T>,
    g_rel: &Pose<T>,
    strategy: &EnumerationStrategy,
) -> Result<Enumeration<T>> {
    validate_strategy(strategy)?;
    let bounds = seed_box(dual.left());
    let mut diagnostics = EnumerationDiagnostics::default();
    let mut pairs = Vec::new();
    for s in 0..strategy.left_samples {
        let theta_l = halton_seed::<T>((s + 1) as u64, &bounds);
        diagnostics.left.attempts += 1;
        diagnostics.left.converged += 1;
        let target_r = fk_unchecked(dual.left(), theta_l.as_slice()).compose(g_rel);
        let (rights, right_diag) = solve_arm(dual.right(), &target_r, strategy)?;
        diagnostics.right.absorb(&right_diag);
        if !rights.is_empty() {
            diagnostics.left.solutions += 1;
        }
        let lefts = [(theta_l, T::zero(), T::zero())];
        pairs.extend(cross_pairs(
            &lefts,
            &rights,
            &mut diagnostics.residual_rejections,
        ));
    }
    Ok(Enumeration { pairs, diagnostics })
}

/// Worst-case error of one pair under the joint-noise ball: P* and O* from
/// the relative Jacobian at the pair, combined with weight `gamma`.
///
/// The pair must satisfy the placement invariant ([`PAIR_RESIDUAL_TOL`]) and
/// the noise model's dimension must cover both arms.
pub fn score_pair<T: Float>(
    dual: &DualArmModel<T>,
    pair: &IkPair<T>,
    noise: &JointNoiseModel<T>,
    gamma: T,
) -> Result<WorstCaseError<T>> {
    let (n, m) = dual.joint_counts();
    if pair.theta_left.len() != n || pair.theta_right.len() != m {
        return Err(Error::JointCountMismatch {
            context: "score_pair",
            expected: n + m,
            got: pair.theta_left.len() + pair.theta_right.len(),
        });
    }
    if noise.dim() != n + m {
        return Err(Error::JointCountMismatch {
            context: "score_pair noise model",
            expected: n + m,
            got: noise.dim(),
        });
    }
    if pair.residual > real::<T>(PAIR_RESIDUAL_TOL) || !pair.residual.is_finite() {
        return Err(Error::InvalidParameter {
            name: "pair.residual",
            reason: format!(
                "placement residual {} exceeds {PAIR_RESIDUAL_TOL}; the worst-case bound \
                 is only meaningful at an exact solution",
                to_f64(pair.residual)
            ),
        });
    }
    let c = joint_error_bound(noise);
    let spatial = relative_spatial_jacobian(dual, &pair.theta_left, &pair.theta_right)?;
    let g_rel = relative_pose(dual, &pair.theta_left, &pair.theta_right)?;
    let analytical = analytical_from_spatial(&spatial, &g_rel)?;
    let p_star = max_position_error(&analytical.linear_rows(), c)?;
    let (o_star, _) =
        max_orientation_error(&analytical.angular_rows(), &g_rel.to_quaternion(), c)?;
    WorstCaseError::new(p_star, o_star, gamma)
}

/// Distance of the pair from joint mid-range, ∞-norm over all joints of both
/// arms; mid-range is 0 for unlimited joints. Third selection tie-breaker.
fn midrange_distance<T: Float>(pair: &IkPair<T>, dual: &DualArmModel<T>) -> T {
    let half = real::<T>(0.5);
    let mut d = T::zero();
    let arms = [
        (dual.left(), &pair.theta_left),
        (dual.right(), &pair.theta_right),
    ];
    for (arm, theta) in arms {
        for (i, &th) in theta.as_slice().iter().enumerate() {
            let mid = arm
                .limits()
                .map(|l| (l[i][0] + l[i][1]) * half)
                .unwrap_or_else(T::zero);
            d = d.max((th - mid).abs());
        }
    }
    d
}

/// Strict "a beats b" ordering for selection: smaller M*, then smaller P*,
/// then closer to joint mid-range; equality on all keys keeps input order.
fn preferred<T: Float>(a: &IkPair<T>, b: &IkPair<T>, dual: &DualArmModel<T>) -> bool {
    let (sa, sb) = (a.score.as_ref().unwrap(), b.score.as_ref().unwrap());
    if sa.m_star() != sb.m_star() {
        return sa.m_star() < sb.m_star();
    }
    if sa.p_star() != sb.p_star() {
        return sa.p_star() < sb.p_star();
    }
    let (da, db) = (midrange_distance(a, dual), midrange_distance(b, dual));
    da < db
}

/// Scored candidate set with the minimizer of M* marked.
#[derive(Debug, Clone)]
pub struct Selection<T: Float> {
    index: usize,
    pairs: Vec<IkPair<T>>,
}

impl<T: Float> Selection<T> {
    /// Index of the selected pair in [`Self::pairs`] (input order).
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn best(&self) -> &IkPair<T> {
        &self.pairs[self.index]
    }

    /// All candidates with scores attached, in input order.
    pub fn pairs(&self) -> &[IkPair<T>] {
        &self.pairs
    }

    /// Index of the pair maximizing M* (ties: larger P*, then farther from
    /// mid-range, then input order). Serves as the pessimistic baseline.
    pub fn worst_index(&self, dual: &DualArmModel<T>) -> usize {
        let mut worst = 0;
        for i in 1..self.pairs.len() {
            if preferred(&self.pairs[worst], &self.pairs[i], dual) {
                worst = i;
            }
        }
        worst
    }
}

/// Scores every candidate (replacing any attached score) and selects the
/// minimizer of M* = P* + γO* with deterministic tie-breaking.
pub fn select_robust_pair<T: Float>(
    dual: &DualArmModel<T>,
    pairs: &[IkPair<T>],
    noise: &JointNoiseModel<T>,
    gamma: T,
) -> Result<Selection<T>> {
    if pairs.is_empty() {
        return Err(Error::NoSolutions {
            reason: "no candidate pairs to select from".into(),
        });
    }
    let mut scored = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let mut p = pair.clone();
        p.set_score(score_pair(dual, pair, noise, gamma)?);
        scored.push(p);
    }
    let mut index = 0;
    for i in 1..scored.len() {
        if preferred(&scored[i], &scored[index], dual) {
            index = i;
        }
    }
    Ok(Selection {
        index,
        pairs: scored,
    })
}

/// Closed-tolerance feasibility verdict for a scored pair: feasible iff
/// M* ≤ ε, with margin ε − M*.
#[derive(Debug, Clone)]
pub struct FeasibilityReport<T: Float> {
    epsilon: T,
    best: IkPair<T>,
    feasible: bool,
    margin: T,
}

impl<T: Float> FeasibilityReport<T> {
    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn best(&self) -> &IkPair<T> {
        &self.best
    }

    pub fn feasible(&self) -> bool {
        self.feasible
    }

    /// ε − M*; negative when the task tolerance cannot be guaranteed.
    pub fn margin(&self) -> T {
        self.margin
    }
}

pub fn feasibility_check<T: Float>(best: &IkPair<T>, epsilon: T) -> Result<FeasibilityReport<T>> {
    if !epsilon.is_finite() || epsilon <= T::zero() {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: format!("task tolerance must be positive, got {}", to_f64(epsilon)),
        });
    }
    let score = best.score().ok_or(Error::InvalidParameter {
        name: "best",
        reason: "candidate must be scored before the feasibility check".into(),
    })?;
    let m = score.m_star();
    Ok(FeasibilityReport {
        epsilon,
        best: best.clone(),
        feasible: m <= epsilon,
        margin: epsilon - m,
    })
}
