//! Square peg-in-hole assembly geometry and Monte Carlo validation.
//!
//! A task fixes the board-frame peg and hole poses g_bp, g_bh, the gripper
//! tip offsets l_p, l_h (pure z-translations from gripper to part tip), and
//! the part dimensions (peg height h_p, peg width w_p, hole width w_h). The
//! relative pose between the part tips is ḡ = ˡg_p⁻¹ g_rel ʳg_h, so its
//! desired value ᵇg_p⁻¹ ᵇg_h depends only on the board poses.
//!
//! The scalar assembly error between two relative poses adds a position term
//! expanded by the hole offset, ‖(p^d − p^a) + l_h(R^d ẑ − R^a ẑ)‖, and a
//! peg-height tilt term h_p |sin Δθ_z| from the angle between the frames'
//! x-axes; adding the terms (rather than anything tighter) keeps the measure
//! an upper envelope of the clearance actually consumed.
//!
//! Insertion is decided geometrically: the four corners of the peg's leading
//! face slide along the peg axis onto the hole plane, and each projected
//! corner must stay within the hole's half-width (closed boundary; a peg
//! axis parallel to the hole plane never inserts and reports −∞ margins).
//!
//! The Monte Carlo layer perturbs a candidate pair with per-joint Gaussian
//! noise (untruncated, in pseudo-chain ordering) and reports the percentage
//! of successful insertions; the sweep runs a σ × clearance grid where each
//! cell uses its own counter-derived noise stream and every pair inside a
//! cell replays the identical noise sequence, so comparisons between pairs
//! are paired comparisons.

use nalgebra::{Matrix4, Vector3};

use crate::kinematics::{fk_unchecked, DualArmModel};
use crate::robust_ik::{EnumerationStrategy, IkPair};
use crate::se3::Pose;
use crate::uncertainty::{JointNoiseModel, JointNoiseSampler};
use crate::{real, to_f64, Error, Float, Result};

/// Rotation defect accepted when parsing config poses, generous enough for
/// matrices published with three significant decimals.
pub const CONFIG_ROTATION_DEFECT_TOL: f64 = 5e-3;

/// A peg axis with |direction·ẑ| below this never meets the hole plane.
const AXIS_PARALLEL_TOL: f64 = 1e-9;

/// Geometry of one peg-in-hole task. Lengths in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec<T: Float> {
    g_bp: Pose<T>,
    g_bh: Pose<T>,
    l_p: T,
    l_h: T,
    h_p: T,
    w_p: T,
    w_h: T,
}

impl<T: Float> TaskSpec<T> {
    pub fn new(
        g_bp: Pose<T>,
        g_bh: Pose<T>,
        l_p: T,
        l_h: T,
        h_p: T,
        w_p: T,
        w_h: T,
    ) -> Result<Self> {
        let nonnegative = [("l_p", l_p), ("l_h", l_h)];
        for (name, v) in nonnegative {
            if !v.is_finite() || v < T::zero() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("tip offset must be finite and >= 0, got {}", to_f64(v)),
                });
            }
        }
        let positive = [("h_p", h_p), ("w_p", w_p), ("w_h", w_h)];
        for (name, v) in positive {
            if !v.is_finite() || v <= T::zero() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("dimension must be finite and positive, got {}", to_f64(v)),
                });
            }
        }
        if w_h <= w_p {
            return Err(Error::InvalidParameter {
                name: "w_h",
                reason: format!(
                    "hole width {} must exceed peg width {} for a positive clearance",
                    to_f64(w_h),
                    to_f64(w_p)
                ),
            });
        }
        Ok(Self {
            g_bp,
            g_bh,
            l_p,
            l_h,
            h_p,
            w_p,
            w_h,
        })
    }

    pub fn g_bp(&self) -> &Pose<T> {
        &self.g_bp
    }

    pub fn g_bh(&self) -> &Pose<T> {
        &self.g_bh
    }

    pub fn l_p(&self) -> T {
        self.l_p
    }

    pub fn l_h(&self) -> T {
        self.l_h
    }

    pub fn h_p(&self) -> T {
        self.h_p
    }

    pub fn w_p(&self) -> T {
        self.w_p
    }

    pub fn w_h(&self) -> T {
        self.w_h
    }

    /// Per-side clearance (w_h − w_p)/2.
    pub fn clearance(&self) -> T {
        (self.w_h - self.w_p) * real::<T>(0.5)
    }

    /// Same task with the hole resized to the given per-side clearance.
    pub fn with_clearance(&self, clearance: T) -> Result<Self> {
        Self::new(
            self.g_bp,
            self.g_bh,
            self.l_p,
            self.l_h,
            self.h_p,
            self.w_p,
            self.w_p + clearance + clearance,
        )
    }

    /// Gripper poses that place the parts at their board poses:
    /// g_L = g_bp T(−l_p ẑ), g_R = g_bh T(−l_h ẑ).
    pub fn gripper_targets(&self) -> (Pose<T>, Pose<T>) {
        (
            self.g_bp.compose(&translate_z(-self.l_p)),
            self.g_bh.compose(&translate_z(-self.l_h)),
        )
    }

    /// Desired gripper-level relative pose g_L⁻¹ g_R.
    pub fn desired_gripper_relative(&self) -> Pose<T> {
        let (g_l, g_r) = self.gripper_targets();
        g_l.inverse().compose(&g_r)
    }

    /// Desired tip-level relative pose, ᵇg_p⁻¹ ᵇg_h.
    pub fn desired_tip_relative(&self) -> Pose<T> {
        self.g_bp.inverse().compose(&self.g_bh)
    }
}

fn translate_z<T: Float>(d: T) -> Pose<T> {
    Pose::translation_only(Vector3::new(T::zero(), T::zero(), d))
}

/// Tip-level relative pose ḡ = T(l_p ẑ)⁻¹ g_rel T(l_h ẑ) of a gripper-level
/// relative pose.
pub fn tip_relative_pose<T: Float>(g_rel: &Pose<T>, task: &TaskSpec<T>) -> Pose<T> {
    translate_z(-task.l_p)
        .compose(g_rel)
        .compose(&translate_z(task.l_h))
}

/// Conservative scalar misalignment between two gripper-level relative
/// poses: ‖(p^d − p^a) + l_h(R^d ẑ − R^a ẑ)‖ + h_p |sin Δθ_z|, where Δθ_z is
/// the angle between the two x-axes. Symmetric, zero iff the tip positions
/// and in-plane headings coincide.
pub fn assembly_error_measure<T: Float>(
    desired: &Pose<T>,
    achieved: &Pose<T>,
    task: &TaskSpec<T>,
) -> T {
    let z = Vector3::z();
    let z_d = desired.rotation() * z;
    let z_a = achieved.rotation() * z;
    let offset = (desired.translation() - achieved.translation()) + (z_d - z_a) * task.l_h;
    let x_d = desired.rotation() * Vector3::x();
    let x_a = achieved.rotation() * Vector3::x();
    // ‖x̂_d × x̂_a‖ = |sin Δθ_z| for unit vectors, no clamping needed.
    offset.norm() + task.h_p * x_d.cross(&x_a).norm()
}

/// One simulated insertion attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome<T: Float> {
    /// All four projected corners inside the hole (closed boundary).
    pub success: bool,
    /// Tip-level relative pose the trial produced.
    pub achieved_rel: Pose<T>,
    /// [`assembly_error_measure`] against the task's desired relative pose.
    pub error_measure: T,
    /// Per-corner w_h/2 − max(|x|, |y|) on the hole plane, corner order
    /// (−,−), (−,+), (+,−), (+,+); −∞ when the peg axis is parallel to the
    /// hole plane.
    pub vertex_margins: [T; 4],
}

/// Decides insertion for a gripper-level relative pose: the peg's leading
/// face corners slide along the peg axis onto the hole plane and must all
/// land within the hole.
pub fn insertion_success_test<T: Float>(g_rel: &Pose<T>, task: &TaskSpec<T>) -> TrialOutcome<T> {
    let error_measure = assembly_error_measure(&task.desired_gripper_relative(), g_rel, task);
    let tip = tip_relative_pose(g_rel, task);
    // Peg pose in the hole frame.
    let peg = tip.inverse();
    let axis = peg.rotation() * Vector3::z();

    let half_p = task.w_p * real::<T>(0.5);
    let half_h = task.w_h * real::<T>(0.5);
    let corners = [
        (-half_p, -half_p),
        (-half_p, half_p),
        (half_p, -half_p),
        (half_p, half_p),
    ];

    let mut vertex_margins = [T::zero(); 4];
    if axis.z.abs() < real::<T>(AXIS_PARALLEL_TOL) {
        log::debug!("peg axis parallel to the hole plane; insertion impossible");
        vertex_margins = [real::<T>(f64::NEG_INFINITY); 4];
    } else {
        for (k, (cx, cy)) in corners.into_iter().enumerate() {
            let v = peg.transform_point(&Vector3::new(cx, cy, T::zero()));
            let t = -v.z / axis.z;
            let x = v.x + axis.x * t;
            let y = v.y + axis.y * t;
            vertex_margins[k] = half_h - x.abs().max(y.abs());
        }
    }

    TrialOutcome {
        success: vertex_margins.iter().all(|m| *m >= T::zero()),
        achieved_rel: tip,
        error_measure,
        vertex_margins,
    }
}

fn check_pair_shape<T: Float>(
    dual: &DualArmModel<T>,
    pair: &IkPair<T>,
    context: &'static str,
) -> Result<()> {
    let (n, m) = dual.joint_counts();
    if pair.theta_left().len() != n || pair.theta_right().len() != m {
        return Err(Error::JointCountMismatch {
            context,
            expected: n + m,
            got: pair.theta_left().len() + pair.theta_right().len(),
        });
    }
    Ok(())
}

/// Perturbs the pair with one noise draw per trial and counts insertions.
/// The sample vector uses pseudo-chain ordering (left joints reversed, then
/// right joints), matching the relative Jacobian columns.
fn run_trials<T: Float>(
    dual: &DualArmModel<T>,
    pair: &IkPair<T>,
    task: &TaskSpec<T>,
    sampler: &mut JointNoiseSampler<T>,
    trials: usize,
) -> T {
    let theta_l = pair.theta_left().as_slice();
    let theta_r = pair.theta_right().as_slice();
    let n = theta_l.len();
    let mut successes = 0usize;
    let mut tl = vec![T::zero(); theta_l.len()];
    let mut tr = vec![T::zero(); theta_r.len()];
    for _ in 0..trials {
        let delta = sampler.next_sample();
        for (i, t) in tl.iter_mut().enumerate() {
            *t = theta_l[i] + delta[n - 1 - i];
        }
        for (k, t) in tr.iter_mut().enumerate() {
            *t = theta_r[k] + delta[n + k];
        }
        let g_rel = fk_unchecked(dual.left(), &tl)
            .inverse()
            .compose(&fk_unchecked(dual.right(), &tr));
        if insertion_success_test(&g_rel, task).success {
            successes += 1;
        }
    }
    real::<T>(100.0 * successes as f64 / trials as f64)
}

/// Success percentage of `trials` noisy insertions of one pair.
pub fn monte_carlo_success_rate<T: Float>(
    dual: &DualArmModel<T>,
    pair: &IkPair<T>,
    task: &TaskSpec<T>,
    noise: &JointNoiseModel<T>,
    trials: usize,
    seed: u64,
) -> Result<T> {
    check_pair_shape(dual, pair, "monte_carlo_success_rate")?;
    if noise.dim() != dual.total_joints() {
        return Err(Error::JointCountMismatch {
            context: "monte_carlo noise model",
            expected: dual.total_joints(),
            got: noise.dim(),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter {
            name: "trials",
            reason: "must be at least 1".into(),
        });
    }
    let mut sampler = JointNoiseSampler::new(noise, seed);
    Ok(run_trials(dual, pair, task, &mut sampler, trials))
}

/// Success rates over a σ × clearance grid for labeled pairs.
///
/// Cell (i, j) covers `sigmas[i]` with the hole resized to `clearances[j]`
/// and draws its noise from stream i·len(clearances)+j of the master seed;
/// all pairs within a cell replay the same stream. Results are independent
/// of `threads`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T: Float> {
    sigmas: Vec<T>,
    clearances: Vec<T>,
    pair_ids: Vec<String>,
    trials: usize,
    /// rates[pair][i·len(clearances)+j], percent.
    rates: Vec<Vec<T>>,
}

impl<T: Float> SweepResult<T> {
    pub fn sigmas(&self) -> &[T] {
        &self.sigmas
    }

    pub fn clearances(&self) -> &[T] {
        &self.clearances
    }

    pub fn pair_ids(&self) -> &[String] {
        &self.pair_ids
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    /// Success percentage of one pair in one grid cell.
    pub fn rate(&self, pair: usize, sigma_index: usize, clearance_index: usize) -> T {
        self.rates[pair][sigma_index * self.clearances.len() + clearance_index]
    }

    /// CSV rows in fixed grid order: σ outer, clearance inner, pairs last.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sigma,clearance,pair_id,trials,success_pct\n");
        for (i, sigma) in self.sigmas.iter().enumerate() {
            for (j, clearance) in self.clearances.iter().enumerate() {
                for (p, id) in self.pair_ids.iter().enumerate() {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        sigma,
                        clearance,
                        id,
                        self.trials,
                        self.rate(p, i, j)
                    ));
                }
            }
        }
        out
    }
}

/// Runs the full σ × clearance grid; see [`SweepResult`] for the layout.
/// `threads` > 1 distributes cells across OS threads without changing any
/// result.
#[allow(clippy::too_many_arguments)]
pub fn sweep<T: Float + Send + Sync>(
    dual: &DualArmModel<T>,
    pairs: &[(String, IkPair<T>)],
    task: &TaskSpec<T>,
    sigmas: &[T],
    clearances: &[T],
    trials: usize,
    seed: u64,
    threads: usize,
) -> Result<SweepResult<T>> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter {
            name: "pairs",
            reason: "sweep needs at least one pair".into(),
        });
    }
    if sigmas.is_empty() || clearances.is_empty() {
        return Err(Error::InvalidParameter {
            name: "sigmas",
            reason: "sweep needs a non-empty sigma and clearance grid".into(),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter {
            name: "trials",
            reason: "must be at least 1".into(),
        });
    }
    let dim = dual.total_joints();
    for (_, pair) in pairs {
        check_pair_shape(dual, pair, "sweep")?;
    }
    // Validate the whole grid up front so the parallel section is infallible.
    let mut noises = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        // k does not matter for sampling; the ball radius only scales bounds.
        noises.push(JointNoiseModel::new(sigma, T::one(), dim)?);
    }
    let mut tasks = Vec::with_capacity(clearances.len());
    for &c in clearances {
        tasks.push(task.with_clearance(c)?);
    }

    let cells: Vec<(usize, usize)> = (0..sigmas.len())
        .flat_map(|i| (0..clearances.len()).map(move |j| (i, j)))
        .collect();
    let compute_cell = |i: usize, j: usize| -> Vec<T> {
        let stream = (i * clearances.len() + j) as u64;
        pairs
            .iter()
            .map(|(_, pair)| {
                let mut sampler = JointNoiseSampler::with_stream(&noises[i], seed, stream);
                run_trials(dual, pair, &tasks[j], &mut sampler, trials)
            })
            .collect()
    };

    let mut rates = vec![vec![T::zero(); cells.len()]; pairs.len()];
    if threads <= 1 {
        for &(i, j) in &cells {
            for (p, rate) in compute_cell(i, j).into_iter().enumerate() {
                rates[p][i * clearances.len() + j] = rate;
            }
        }
    } else {
        let chunk = cells.len().div_ceil(threads);
        let results: Vec<(usize, Vec<T>)> = std::thread::scope(|scope| {
            let handles: Vec<_> = cells
                .chunks(chunk)
                .map(|chunk_cells| {
                    scope.spawn(|| {
                        chunk_cells
                            .iter()
                            .map(|&(i, j)| (i * clearances.len() + j, compute_cell(i, j)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        });
        for (cell, per_pair) in results {
            for (p, rate) in per_pair.into_iter().enumerate() {
                rates[p][cell] = rate;
            }
        }
    }

    Ok(SweepResult {
        sigmas: sigmas.to_vec(),
        clearances: clearances.to_vec(),
        pair_ids: pairs.iter().map(|(id, _)| id.clone()).collect(),
        trials,
        rates,
    })
}

fn default_tip_offset() -> f64 {
    0.05
}

fn default_peg_height() -> f64 {
    0.05
}

fn default_peg_width() -> f64 {
    0.03
}

fn default_clearances() -> Vec<f64> {
    vec![0.004, 0.005, 0.006]
}

fn default_sigmas() -> Vec<f64> {
    vec![0.0020, 0.0025, 0.0030, 0.0035, 0.0040, 0.0045]
}

fn default_trials() -> usize {
    10000
}

fn default_seed() -> u64 {
    42
}

/// On-disk task description: board poses as row-major homogeneous matrices
/// (rotations may be coarsely rounded; they are re-projected on load), part
/// dimensions, and the Monte Carlo grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub g_bp: [[f64; 4]; 4],
    pub g_bh: [[f64; 4]; 4],
    #[serde(default = "default_tip_offset")]
    pub l_p: f64,
    #[serde(default = "default_tip_offset")]
    pub l_h: f64,
    #[serde(default = "default_peg_height")]
    pub h_p: f64,
    #[serde(default = "default_peg_width")]
    pub w_p: f64,
    #[serde(default = "default_clearances")]
    pub clearances: Vec<f64>,
    #[serde(default = "default_sigmas")]
    pub sigmas: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worst-case tolerance for the feasibility verdict, if any.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Overrides for the IK multistart.
    #[serde(default)]
    pub enumeration: Option<EnumerationStrategy>,
}

impl TaskConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            context: "task config",
            reason: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(self).expect("task config serializes infallibly");
        text.push('\n');
        text
    }

    fn validate(&self) -> Result<()> {
        if self.clearances.is_empty() {
            return Err(Error::InvalidParameter {
                name: "clearances",
                reason: "must not be empty".into(),
            });
        }
        if self.sigmas.is_empty() {
            return Err(Error::InvalidParameter {
                name: "sigmas",
                reason: "must not be empty".into(),
            });
        }
        for &sigma in &self.sigmas {
            if !sigma.is_finite() || sigma <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "sigmas",
                    reason: format!("sigma must be positive and finite, got {sigma}"),
                });
            }
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter {
                name: "trials",
                reason: "must be at least 1".into(),
            });
        }
        if let Some(eps) = self.epsilon {
            if !eps.is_finite() || eps <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "epsilon",
                    reason: format!("must be positive and finite, got {eps}"),
                });
            }
        }
        // Every grid cell must form a valid task.
        for &c in &self.clearances {
            self.spec_for_clearance(c)?;
        }
        Ok(())
    }

    pub fn pose_bp(&self) -> Result<Pose<f64>> {
        parse_pose(&self.g_bp)
    }

    pub fn pose_bh(&self) -> Result<Pose<f64>> {
        parse_pose(&self.g_bh)
    }

    /// Task geometry with the hole sized for one clearance value.
    pub fn spec_for_clearance(&self, clearance: f64) -> Result<TaskSpec<f64>> {
        if !clearance.is_finite() || clearance <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "clearances",
                reason: format!("clearance must be positive and finite, got {clearance}"),
            });
        }
        TaskSpec::new(
            self.pose_bp()?,
            self.pose_bh()?,
            self.l_p,
            self.l_h,
            self.h_p,
            self.w_p,
            self.w_p + 2.0 * clearance,
        )
    }

    /// Task geometry at the first clearance in the grid.
    pub fn default_spec(&self) -> Result<TaskSpec<f64>> {
        self.spec_for_clearance(self.clearances[0])
    }
}

fn parse_pose(rows: &[[f64; 4]; 4]) -> Result<Pose<f64>> {
    let m = Matrix4::from_fn(|r, c| rows[r][c]);
    Pose::from_matrix_projected(&m, CONFIG_ROTATION_DEFECT_TOL)
}
