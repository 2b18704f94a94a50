//! End-to-end acceptance gate. One test per criterion; each prints a single
//! `criterion N: PASS — ...` line with the measured numbers (visible with
//! `--nocapture`), and a failed assertion marks the criterion failed.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DVector, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use robustik_core::assembly::{self, TaskConfig};
use robustik_core::kinematics::{
    analytical_from_spatial, finite_difference_relative_jacobian, quaternion_jacobian,
    relative_pose, relative_spatial_jacobian, JointVector,
};
use robustik_core::models::{planar_dual_3r, planar_3r};
use robustik_core::robust_ik::{
    enumerate_ik_pairs, score_pair, select_robust_pair, EnumerationStrategy, IkPair,
};
use robustik_core::se3::Pose;
use robustik_core::uncertainty::{build_ellipsoids, JointNoiseModel, NoiseConfig};
use robustik_core::{ArmSide, DualArmModel64, JointVector64};

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn bundled_model() -> DualArmModel64 {
    let text = std::fs::read_to_string(config_path("baxter_dual.json")).unwrap();
    DualArmModel64::from_json(&text).unwrap()
}

fn bundled_task() -> TaskConfig {
    let text = std::fs::read_to_string(config_path("peg_task.json")).unwrap();
    TaskConfig::from_json(&text).unwrap()
}

fn bundled_noise() -> NoiseConfig {
    let text = std::fs::read_to_string(config_path("noise.json")).unwrap();
    NoiseConfig::from_json(&text).unwrap()
}

/// Uniform configuration within the arm limits.
fn random_config(rng: &mut ChaCha12Rng, dual: &DualArmModel64) -> (JointVector64, JointVector64) {
    let draw = |arm: &robustik_core::ArmModel64, rng: &mut ChaCha12Rng| -> Vec<f64> {
        let limits = arm.limits().expect("bundled model has limits");
        limits
            .iter()
            .map(|&[lo, hi]| lo + rng.random::<f64>() * (hi - lo))
            .collect()
    };
    let l = draw(dual.left(), rng);
    let r = draw(dual.right(), rng);
    (JointVector::left(&l), JointVector::right(&r))
}

/// Uniform direction on the unit sphere of R^dim.
fn sphere_point(rng: &mut ChaCha12Rng, dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| {
            let z: f64 = rng.sample(StandardNormal);
            z
        });
        let norm = v.norm();
        if norm > 1e-9 {
            return v / norm;
        }
    }
}

/// Applies a perturbation to pseudo-chain coordinate `k` of the pair.
fn perturb(
    tl: &JointVector64,
    tr: &JointVector64,
    k: usize,
    h: f64,
) -> (JointVector64, JointVector64) {
    let n = tl.len();
    let mut l = tl.as_slice().to_vec();
    let mut r = tr.as_slice().to_vec();
    if k < n {
        l[n - 1 - k] += h;
    } else {
        r[k - n] += h;
    }
    (JointVector::left(&l), JointVector::right(&r))
}

#[test]
fn criterion_1_analytic_jacobian_matches_finite_differences() {
    let dual = bundled_model();
    let mut rng = ChaCha12Rng::seed_from_u64(101);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (tl, tr) = random_config(&mut rng, &dual);
        let j = relative_spatial_jacobian(&dual, &tl, &tr).unwrap();
        let fd = finite_difference_relative_jacobian(&dual, &tl, &tr, 1e-6).unwrap();
        worst = worst.max((j.matrix() - fd).amax());
    }
    let elapsed = start.elapsed();
    assert!(worst < 1e-6, "max |analytic - FD| = {worst:.3e}");
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:.2?}");
    println!(
        "criterion 1: PASS - max |analytic - FD| = {worst:.3e} over 100 configs in {elapsed:.2?}"
    );
}

#[test]
fn criterion_2_quaternion_jacobian_is_consistent() {
    let dual = bundled_model();
    let mut rng = ChaCha12Rng::seed_from_u64(102);
    let h = 1e-6;
    let mut worst_rows: f64 = 0.0;
    let mut worst_rate: f64 = 0.0;
    for _ in 0..100 {
        let (tl, tr) = random_config(&mut rng, &dual);
        let j_s = relative_spatial_jacobian(&dual, &tl, &tr).unwrap();
        let (j_r, q_rel) = quaternion_jacobian(&dual, &tl, &tr).unwrap();
        worst_rows = worst_rows.max((&j_r - j_s.angular_rows()).amax());

        // Quaternion rate ½HᵀJ_r against sign-aligned central differences.
        let analytic = q_rel.rate_matrix().transpose() * &j_r * 0.5;
        let q0 = q_rel.as_vector();
        for k in 0..dual.total_joints() {
            let quat_at = |s: f64| {
                let (pl, pr) = perturb(&tl, &tr, k, s);
                let q = relative_pose(&dual, &pl, &pr).unwrap().to_quaternion();
                let v = q.as_vector();
                if v.dot(&q0) < 0.0 {
                    -v
                } else {
                    v
                }
            };
            let fd_col = (quat_at(h) - quat_at(-h)) / (2.0 * h);
            worst_rate = worst_rate.max((fd_col - analytic.column(k)).amax());
        }
    }
    assert!(worst_rows < 1e-9, "J_r vs spatial rows: {worst_rows:.3e}");
    assert!(worst_rate < 1e-6, "rate vs FD: {worst_rate:.3e}");
    println!(
        "criterion 2: PASS - J_r vs spatial rows {worst_rows:.3e}, \
         quaternion rate vs FD {worst_rate:.3e} over 100 configs"
    );
}

#[test]
fn criterion_3_worst_case_bounds_match_sampled_extremes() {
    let dual = bundled_model();
    let noise = JointNoiseModel::new(0.0045, 2.0, dual.total_joints()).unwrap();
    let c = robustik_core::uncertainty::joint_error_bound(&noise);
    let mut rng = ChaCha12Rng::seed_from_u64(103);
    let mut worst_p_gap: f64 = 0.0;
    let mut worst_o_gap: f64 = 0.0;
    for _ in 0..20 {
        let (tl, tr) = random_config(&mut rng, &dual);
        let j_s = relative_spatial_jacobian(&dual, &tl, &tr).unwrap();
        let g_rel = relative_pose(&dual, &tl, &tr).unwrap();
        let j_a = analytical_from_spatial(&j_s, &g_rel).unwrap();
        let q_rel = g_rel.to_quaternion();
        let j_p = j_a.linear_rows();
        let j_r = j_a.angular_rows();

        let p_star = robustik_core::uncertainty::max_position_error(&j_p, c).unwrap();
        let (o_star, _) =
            robustik_core::uncertainty::max_orientation_error(&j_r, &q_rel, c).unwrap();

        // P*: sampled max of ‖J_p δ‖ over ball-boundary points within 1%.
        // The maximizer lives in the row space of J_p, so half the samples
        // are drawn there; uniform directions alone cannot resolve the top
        // eigendirection of a 14-dimensional sphere.
        let mut best_p: f64 = 0.0;
        for _ in 0..50_000 {
            let delta = sphere_point(&mut rng, dual.total_joints()) * c.sqrt();
            let norm = (&j_p * delta).norm();
            assert!(norm <= p_star * (1.0 + 1e-12));
            best_p = best_p.max(norm);
        }
        for _ in 0..50_000 {
            let u = sphere_point(&mut rng, 3);
            let dir = j_p.transpose() * Vector3::new(u[0], u[1], u[2]);
            let norm = dir.norm();
            if norm < 1e-12 {
                continue;
            }
            let sample = (&j_p * (dir * (c.sqrt() / norm))).norm();
            assert!(sample <= p_star * (1.0 + 1e-12));
            best_p = best_p.max(sample);
        }
        assert!(best_p >= 0.99 * p_star, "{best_p:.6e} vs P* {p_star:.6e}");
        worst_p_gap = worst_p_gap.max(1.0 - best_p / p_star);

        // O*: linearized orientation deviations stay below it; row-space
        // directed samples come within 5%.
        let h_t = q_rel.rate_matrix().transpose();
        let angle_of = |delta: &DVector<f64>| -> f64 {
            let raw = q_rel.as_vector() + h_t * ((&j_r * delta) * 0.5);
            let dot = (raw / raw.norm()).dot(&q_rel.as_vector()).abs();
            dot.min(1.0).acos()
        };
        let mut best_o: f64 = 0.0;
        for _ in 0..5_000 {
            let delta = sphere_point(&mut rng, dual.total_joints()) * c.sqrt();
            let angle = angle_of(&delta);
            assert!(angle <= o_star * (1.0 + 1e-12));
            best_o = best_o.max(angle);
        }
        for _ in 0..5_000 {
            let u = sphere_point(&mut rng, 3);
            let dir = j_r.transpose() * Vector3::new(u[0], u[1], u[2]);
            let norm = dir.norm();
            if norm < 1e-12 {
                continue;
            }
            let angle = angle_of(&(dir * (c.sqrt() / norm)));
            assert!(angle <= o_star * (1.0 + 1e-12));
            best_o = best_o.max(angle);
        }
        assert!(best_o >= 0.95 * o_star, "{best_o:.6e} vs O* {o_star:.6e}");
        worst_o_gap = worst_o_gap.max(1.0 - best_o / o_star);
    }
    println!(
        "criterion 3: PASS - sampled P* within {:.2}%, sampled O* within {:.2}% \
         over 20 configs",
        100.0 * worst_p_gap,
        100.0 * worst_o_gap
    );
}

#[test]
fn criterion_4_ellipsoids_contain_every_linearized_sample() {
    let dual = bundled_model();
    let noise = JointNoiseModel::new(0.0045, 2.0, dual.total_joints()).unwrap();
    let c = robustik_core::uncertainty::joint_error_bound(&noise);
    let mut rng = ChaCha12Rng::seed_from_u64(104);
    let mut checked = 0usize;
    for _ in 0..5 {
        let (tl, tr) = random_config(&mut rng, &dual);
        let j_s = relative_spatial_jacobian(&dual, &tl, &tr).unwrap();
        let g_rel = relative_pose(&dual, &tl, &tr).unwrap();
        let j_a = analytical_from_spatial(&j_s, &g_rel).unwrap();
        let q_rel = g_rel.to_quaternion();
        let (position, orientation) = build_ellipsoids(&j_a, &q_rel, c).unwrap();
        let quat_form = orientation.quaternion_form().unwrap();
        let j_p = j_a.linear_rows();
        let j_r = j_a.angular_rows();
        let dim = dual.total_joints();
        for _ in 0..10_000 {
            // Uniform in the ball: boundary direction, radius ∝ u^(1/dim).
            let radius = c.sqrt() * rng.random::<f64>().powf(1.0 / dim as f64);
            let delta = sphere_point(&mut rng, dim) * radius;
            let dx = &j_p * &delta;
            assert!(position.contains(&dx), "position violation at {dx:?}");
            let dq = (&j_r * &delta) * 0.5;
            assert!(orientation.contains(&dq), "orientation violation");
            let dq4 = q_rel.rate_matrix().transpose() * dq;
            let val = (quat_form * dq4).dot(&dq4);
            assert!(val <= orientation.bound() * (1.0 + 1e-9));
            checked += 1;
        }
    }
    println!("criterion 4: PASS - zero violations over {checked} in-ball samples");
}

#[test]
fn criterion_5_sweep_favors_the_selected_pair_in_every_cell() {
    let start = Instant::now();
    let dual = bundled_model();
    let task = bundled_task();
    let noise_cfg = bundled_noise();
    let noise = noise_cfg.to_model(dual.total_joints()).unwrap();
    let strategy = task.enumeration.clone().unwrap_or_default();
    let spec = task.default_spec().unwrap();
    let (g_left, g_right) = spec.gripper_targets();

    let enumeration = enumerate_ik_pairs(&dual, &g_left, &g_right, &strategy).unwrap();
    let selection =
        select_robust_pair(&dual, &enumeration.pairs, &noise, noise_cfg.gamma).unwrap();
    let worst_index = selection.worst_index(&dual);
    assert_ne!(selection.index(), worst_index);
    let named = vec![
        ("selected".to_string(), selection.best().clone()),
        ("worst".to_string(), selection.pairs()[worst_index].clone()),
    ];

    let result = assembly::sweep(
        &dual,
        &named,
        &spec,
        &task.sigmas,
        &task.clearances,
        task.trials,
        task.seed,
        4,
    )
    .unwrap();
    let elapsed = start.elapsed();

    println!("  sigma     c=0.004          c=0.005          c=0.006  (selected / worst, %)");
    for (i, sigma) in task.sigmas.iter().enumerate() {
        let cells: Vec<String> = (0..task.clearances.len())
            .map(|j| format!("{:5.2} / {:5.2}", result.rate(0, i, j), result.rate(1, i, j)))
            .collect();
        println!("  {:6.4}  {}", sigma, cells.join("    "));
    }

    // Selected at least matches the worst pair cell by cell (shared noise
    // streams make the comparison paired).
    for i in 0..task.sigmas.len() {
        for j in 0..task.clearances.len() {
            assert!(
                result.rate(0, i, j) >= result.rate(1, i, j),
                "cell ({i},{j}): selected {} < worst {}",
                result.rate(0, i, j),
                result.rate(1, i, j)
            );
        }
    }
    // Monotone in sigma (falling) and clearance (rising) up to 2 points.
    for p in 0..2 {
        for j in 0..task.clearances.len() {
            for i in 1..task.sigmas.len() {
                assert!(result.rate(p, i, j) <= result.rate(p, i - 1, j) + 2.0);
            }
        }
        for i in 0..task.sigmas.len() {
            for j in 1..task.clearances.len() {
                assert!(result.rate(p, i, j) >= result.rate(p, i, j - 1) - 2.0);
            }
        }
    }
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:.2?}");
    println!(
        "criterion 5: PASS - selected >= worst in all {} cells, monotone within 2 points, \
         {} trials/cell in {elapsed:.2?}",
        task.sigmas.len() * task.clearances.len(),
        task.trials
    );
}

#[test]
fn criterion_6_reference_pairs_keep_their_score_ordering() {
    #[derive(serde::Deserialize)]
    struct Entry {
        id: String,
        theta_left: Vec<f64>,
        theta_right: Vec<f64>,
    }
    let dual = bundled_model();
    let text = std::fs::read_to_string(config_path("reference_pairs.json")).unwrap();
    let entries: Vec<Entry> = serde_json::from_str(&text).unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0].id, "robust");
    assert_eq!(entries[1].id, "baseline");

    let noise = JointNoiseModel::new(0.0045, 2.0, dual.total_joints()).unwrap();
    let gamma = bundled_noise().gamma;
    let mut scores = Vec::new();
    for entry in &entries {
        let pair = IkPair::nominal(&dual, &entry.theta_left, &entry.theta_right).unwrap();
        scores.push(score_pair(&dual, &pair, &noise, gamma).unwrap());
    }
    let (robust, baseline) = (scores[0].m_star(), scores[1].m_star());
    assert!(
        robust < baseline,
        "ordering violated: M*(robust) = {robust:.6} >= M*(baseline) = {baseline:.6}"
    );

    // Published reference magnitudes; these depend on kinematic constants
    // the bundled model only approximates, so deviations are reported as a
    // model-fidelity caveat rather than failed.
    let targets = [0.0079, 0.0093];
    let mut caveats = Vec::new();
    for (score, target) in [robust, baseline].iter().zip(targets) {
        let deviation = (score - target) / target;
        if deviation.abs() > 0.20 {
            caveats.push(format!(
                "{score:.4} vs {target:.4} ({:+.0}%)",
                100.0 * deviation
            ));
        }
    }
    if caveats.is_empty() {
        println!(
            "criterion 6: PASS - M*(robust) = {robust:.4} < M*(baseline) = {baseline:.4}, \
             both within 20% of the reference values"
        );
    } else {
        println!(
            "criterion 6: PASS - M*(robust) = {robust:.4} < M*(baseline) = {baseline:.4}; \
             model-fidelity caveat: {}",
            caveats.join(", ")
        );
    }
}

#[test]
fn criterion_7_cli_reruns_are_byte_identical() {
    let bin = env!("CARGO_BIN_EXE_robustik");
    let dir = tempfile::tempdir().unwrap();
    let model = config_path("baxter_dual.json");
    let task = config_path("peg_task.json");
    let noise = config_path("noise.json");
    let pairs = config_path("reference_pairs.json");
    let arg = |p: &Path| p.to_str().unwrap().to_string();

    let commands: Vec<(&str, Vec<String>)> = vec![
        (
            "fk",
            vec![
                "fk".into(),
                "--model".into(),
                arg(&model),
                "--pairs".into(),
                arg(&pairs),
            ],
        ),
        (
            "relpose",
            vec![
                "relpose".into(),
                "--model".into(),
                arg(&model),
                "--pairs".into(),
                arg(&pairs),
            ],
        ),
        (
            "jacobian",
            vec![
                "jacobian".into(),
                "--model".into(),
                arg(&model),
                "--pairs".into(),
                arg(&pairs),
            ],
        ),
        (
            "errset",
            vec![
                "errset".into(),
                "--model".into(),
                arg(&model),
                "--noise".into(),
                arg(&noise),
                "--pairs".into(),
                arg(&pairs),
            ],
        ),
        (
            "select",
            vec![
                "select".into(),
                "--model".into(),
                arg(&model),
                "--task".into(),
                arg(&task),
                "--noise".into(),
                arg(&noise),
            ],
        ),
        (
            "simulate",
            vec![
                "simulate".into(),
                "--model".into(),
                arg(&model),
                "--task".into(),
                arg(&task),
                "--noise".into(),
                arg(&noise),
                "--pairs".into(),
                arg(&pairs),
            ],
        ),
        (
            "sweep",
            vec![
                "sweep".into(),
                "--model".into(),
                arg(&model),
                "--task".into(),
                arg(&task),
                "--noise".into(),
                arg(&noise),
                "--threads".into(),
                "3".into(),
            ],
        ),
    ];

    for (name, args) in &commands {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out_file = dir.path().join(format!("{name}_{run}.out"));
            let output = Command::new(bin)
                .args(args)
                .arg("--out")
                .arg(&out_file)
                .output()
                .unwrap();
            assert!(
                output.status.success(),
                "{name} run {run} failed: {}",
                String::from_utf8_lossy(&output.stderr)
            );
            let file_bytes = std::fs::read(&out_file).unwrap();
            outputs.push((file_bytes, output.stdout));
        }
        assert_eq!(outputs[0].0, outputs[1].0, "{name}: --out files differ");
        assert_eq!(outputs[0].1, outputs[1].1, "{name}: stdout differs");
    }
    println!(
        "criterion 7: PASS - {} subcommands rerun byte-identically",
        commands.len()
    );
}

/// Closed-form planar 3R IK for a tip target (x, y, yaw) in arm-base
/// coordinates: both elbow branches, None when out of reach.
fn planar_branches(lengths: [f64; 3], x: f64, y: f64, yaw: f64) -> Vec<[f64; 3]> {
    let wrap = |a: f64| -> f64 {
        let mut v = a;
        while v > std::f64::consts::PI {
            v -= 2.0 * std::f64::consts::PI;
        }
        while v < -std::f64::consts::PI {
            v += 2.0 * std::f64::consts::PI;
        }
        v
    };
    let [l1, l2, l3] = lengths;
    let wx = x - l3 * yaw.cos();
    let wy = y - l3 * yaw.sin();
    let d2 = wx * wx + wy * wy;
    let cos_t2 = (d2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
    if cos_t2.abs() > 1.0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for sign in [1.0, -1.0] {
        let t2 = sign * cos_t2.acos();
        let t1 = wy.atan2(wx) - (l2 * t2.sin()).atan2(l1 + l2 * t2.cos());
        let t3 = wrap(yaw - t1 - t2);
        out.push([wrap(t1), wrap(t2), t3]);
    }
    out
}

#[test]
fn criterion_8_planar_enumeration_is_exhaustive_and_selection_exact() {
    let lengths = [0.3, 0.25, 0.2];
    let separation = 0.6;
    let dual = planar_dual_3r(separation, lengths);
    let rot_z = |a: f64| {
        Matrix3::new(
            a.cos(),
            -a.sin(),
            0.0,
            a.sin(),
            a.cos(),
            0.0,
            0.0,
            0.0,
            1.0,
        )
    };
    let left_target = (0.30, 0.20, 0.40);
    let right_target = (0.35, 0.40, -0.30);
    let g_left = Pose::new(rot_z(left_target.2), Vector3::new(left_target.0, left_target.1, 0.0))
        .unwrap();
    let g_right = Pose::new(
        rot_z(right_target.2),
        Vector3::new(right_target.0, right_target.1, 0.0),
    )
    .unwrap();

    let strategy = EnumerationStrategy::default();
    let enumeration = enumerate_ik_pairs(&dual, &g_left, &g_right, &strategy).unwrap();
    assert_eq!(
        enumeration.pairs.len(),
        4,
        "expected all elbow combinations: {}",
        enumeration.diagnostics.summary()
    );

    // Every enumerated arm solution matches an analytic branch and both
    // branches of both arms appear.
    let left_branches = planar_branches(lengths, left_target.0, left_target.1, left_target.2);
    let right_branches = planar_branches(
        lengths,
        right_target.0,
        right_target.1 - separation,
        right_target.2,
    );
    assert_eq!(left_branches.len(), 2);
    assert_eq!(right_branches.len(), 2);
    let match_branch = |theta: &[f64], branches: &[[f64; 3]]| -> Option<usize> {
        branches.iter().position(|b| {
            theta
                .iter()
                .zip(b.iter())
                .all(|(a, e)| (a - e).abs() < 1e-7)
        })
    };
    let mut seen = [[false; 2]; 2];
    for pair in &enumeration.pairs {
        let li = match_branch(pair.theta_left().as_slice(), &left_branches)
            .expect("left solution matches an analytic branch");
        let ri = match_branch(pair.theta_right().as_slice(), &right_branches)
            .expect("right solution matches an analytic branch");
        assert!(!seen[li][ri], "duplicate branch combination");
        seen[li][ri] = true;
    }
    assert!(seen.iter().flatten().all(|&s| s));

    // Selection equals exhaustive scoring, bit for bit.
    let noise = JointNoiseModel::new(0.0045, 2.0, dual.total_joints()).unwrap();
    let gamma = 0.1;
    let selection = select_robust_pair(&dual, &enumeration.pairs, &noise, gamma).unwrap();
    let exhaustive: Vec<f64> = enumeration
        .pairs
        .iter()
        .map(|p| score_pair(&dual, p, &noise, gamma).unwrap().m_star())
        .collect();
    let argmin = exhaustive
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    assert_eq!(selection.index(), argmin);
    assert_eq!(
        selection.best().score().unwrap().m_star(),
        exhaustive[argmin]
    );
    println!(
        "criterion 8: PASS - 4 of 4 elbow combinations enumerated, selection matches \
         exhaustive scoring (M* = {:.6})",
        exhaustive[argmin]
    );
}

/// The planar helper is exercised against forward kinematics so the
/// criterion-8 oracle is self-validating.
#[test]
fn planar_branch_oracle_agrees_with_forward_kinematics() {
    let lengths = [0.3, 0.25, 0.2];
    let arm = planar_3r(ArmSide::Left, Vector3::zeros(), lengths);
    for (x, y, yaw) in [(0.30, 0.20, 0.40), (0.42, -0.1, -0.9), (0.1, 0.3, 2.0)] {
        let branches = planar_branches(lengths, x, y, yaw);
        assert_eq!(branches.len(), 2);
        for b in &branches {
            let pose =
                robustik_core::kinematics::forward_kinematics(&arm, &JointVector::left(&b[..]))
                    .unwrap();
            let p = pose.translation();
            assert!((p.x - x).abs() < 1e-9 && (p.y - y).abs() < 1e-9);
            let r = pose.rotation();
            assert!((r[(1, 0)].atan2(r[(0, 0)]) - yaw).abs() < 1e-9);
        }
    }
}
