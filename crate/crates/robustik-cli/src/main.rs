//! Command-line front end for robust dual-arm IK.
//!
//! Subcommands walk the pipeline stage by stage: `fk` and `relpose` evaluate
//! poses at given configurations, `jacobian` and `errset` expose the relative
//! Jacobian and the worst-case error bounds built from it, `select`
//! enumerates and scores candidate IK pairs, and `simulate`/`sweep` run the
//! Monte Carlo insertion model. Reports are pretty-printed JSON; grids are
//! CSV. All randomness flows from a single seed, so rerunning a command with
//! identical inputs produces byte-identical output.
//!
//! Exit codes: 0 success, 2 config error, 3 no IK solutions, 4 numerical
//! failure. Set `ROBUSTIK_LOG=debug` for diagnostics on stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::{Matrix3, Matrix4, Matrix6xX};
use serde::Serialize;

use robustik_core::assembly::{self, TaskConfig};
use robustik_core::kinematics::{self, JointVector};
use robustik_core::robust_ik::{self, EnumerationDiagnostics, EnumerationStrategy, IkPair};
use robustik_core::uncertainty::{self, NoiseConfig};
use robustik_core::{ArmSide, DualArmModel64, Error as CoreError, IkPair64, Pose64};

/// CLI failure classes, one per nonzero exit code.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    NoSolution(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::NoSolution(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NoSolutions { .. } => CliError::NoSolution(e.to_string()),
            CoreError::NonFinite { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "robustik",
    version,
    about = "Robust IK pair selection for dual-arm manipulators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Side {
    Left,
    Right,
}

impl From<Side> for ArmSide {
    fn from(side: Side) -> Self {
        match side {
            Side::Left => ArmSide::Left,
            Side::Right => ArmSide::Right,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Forward kinematics of one arm, at --theta or at each --pairs entry.
    Fk {
        /// Dual-arm model file (JSON).
        #[arg(long)]
        model: PathBuf,
        /// Arm the --theta values belong to; with --pairs, a filter.
        #[arg(long, value_enum)]
        side: Option<Side>,
        /// Comma-separated joint values in radians (requires --side).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Option<Vec<f64>>,
        /// Joint-pair file: [{"id", "theta_left", "theta_right"}, ...].
        #[arg(long)]
        pairs: Option<PathBuf>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pose of the right gripper in the left gripper frame per pair.
    Relpose {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Relative spatial and analytical Jacobians per pair.
    Jacobian {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst-case error bounds P*, O*, M* and their ellipsoids per pair.
    Errset {
        #[arg(long)]
        model: PathBuf,
        /// Noise config file: {"sigma", "k", "gamma", "seed"}.
        #[arg(long)]
        noise: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate IK pairs for the task targets, score them, pick the best.
    Select {
        #[arg(long)]
        model: PathBuf,
        /// Task config file (grasp poses, geometry, grids, epsilon).
        #[arg(long)]
        task: PathBuf,
        #[arg(long)]
        noise: PathBuf,
        /// Score these pairs instead of enumerating.
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo insertion success rate per pair at the configured noise.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        task: PathBuf,
        #[arg(long)]
        noise: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        /// Master seed; overrides the task file's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Success-rate CSV over the task's sigma and clearance grids.
    Sweep {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        task: PathBuf,
        /// Needed to derive the default pair set (selected + worst).
        #[arg(long)]
        noise: Option<PathBuf>,
        /// Sweep these pairs instead of the selected/worst pair.
        #[arg(long)]
        pairs: Option<PathBuf>,
        /// Master seed; overrides the task file's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for the grid; results do not depend on this.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// CSV output file; with it, a JSON summary goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("ROBUSTIK_LOG")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Fk {
            model,
            side,
            theta,
            pairs,
            out,
        } => cmd_fk(&model, side, theta, pairs.as_deref(), out.as_deref()),
        Command::Relpose { model, pairs, out } => cmd_relpose(&model, &pairs, out.as_deref()),
        Command::Jacobian { model, pairs, out } => cmd_jacobian(&model, &pairs, out.as_deref()),
        Command::Errset {
            model,
            noise,
            pairs,
            out,
        } => cmd_errset(&model, &noise, &pairs, out.as_deref()),
        Command::Select {
            model,
            task,
            noise,
            pairs,
            out,
        } => cmd_select(&model, &task, &noise, pairs.as_deref(), out.as_deref()),
        Command::Simulate {
            model,
            task,
            noise,
            pairs,
            seed,
            out,
        } => cmd_simulate(&model, &task, &noise, &pairs, seed, out.as_deref()),
        Command::Sweep {
            model,
            task,
            noise,
            pairs,
            seed,
            threads,
            out,
        } => cmd_sweep(
            &model,
            &task,
            noise.as_deref(),
            pairs.as_deref(),
            seed,
            threads,
            out.as_deref(),
        ),
    }
}

// ---------------------------------------------------------------- loading

fn read_file(path: &Path, what: &str) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {what} {}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<DualArmModel64, CliError> {
    Ok(DualArmModel64::from_json(&read_file(path, "model file")?)?)
}

fn load_task(path: &Path) -> Result<TaskConfig, CliError> {
    Ok(TaskConfig::from_json(&read_file(path, "task file")?)?)
}

fn load_noise(path: &Path) -> Result<NoiseConfig, CliError> {
    Ok(NoiseConfig::from_json(&read_file(path, "noise file")?)?)
}

/// One entry of a `--pairs` file.
#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct PairEntry {
    #[serde(default)]
    id: Option<String>,
    theta_left: Vec<f64>,
    theta_right: Vec<f64>,
}

fn load_pairs(path: &Path, dual: &DualArmModel64) -> Result<Vec<(String, IkPair64)>, CliError> {
    let text = read_file(path, "pairs file")?;
    let entries: Vec<PairEntry> = serde_json::from_str(&text).map_err(|e| {
        CliError::Config(format!("failed to parse pairs file {}: {e}", path.display()))
    })?;
    if entries.is_empty() {
        return Err(CliError::Config(format!(
            "pairs file {} is empty",
            path.display()
        )));
    }
    entries
        .iter()
        .enumerate()
        .map(|(i, entry)| {
            let id = entry.id.clone().unwrap_or_else(|| format!("pair_{i}"));
            let pair = IkPair::nominal(dual, &entry.theta_left, &entry.theta_right)
                .map_err(|e| CliError::Config(format!("pairs file entry {i} ({id}): {e}")))?;
            Ok((id, pair))
        })
        .collect()
}

// ---------------------------------------------------------------- output

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_text<S: Serialize>(value: &S) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize infallibly");
    text.push('\n');
    text
}

fn pose_rows(pose: &Pose64) -> [[f64; 4]; 4] {
    rows4(&pose.matrix())
}

fn rows3(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]))
}

fn rows4(m: &Matrix4<f64>) -> [[f64; 4]; 4] {
    std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]))
}

fn rows6xn(m: &Matrix6xX<f64>) -> Vec<Vec<f64>> {
    (0..6)
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

// ---------------------------------------------------------------- fk

#[derive(Serialize)]
struct FkEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    side: String,
    theta: Vec<f64>,
    pose: [[f64; 4]; 4],
}

#[derive(Serialize)]
struct FkReport {
    command: &'static str,
    results: Vec<FkEntry>,
}

fn cmd_fk(
    model_path: &Path,
    side: Option<Side>,
    theta: Option<Vec<f64>>,
    pairs_path: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let dual = load_model(model_path)?;
    let mut results = Vec::new();
    match (theta, pairs_path) {
        (Some(values), None) => {
            let side =
                side.ok_or_else(|| CliError::Config("--theta requires --side".to_string()))?;
            let (arm, theta_vec) = match side {
                Side::Left => (dual.left(), JointVector::left(&values)),
                Side::Right => (dual.right(), JointVector::right(&values)),
            };
            let pose = kinematics::forward_kinematics(arm, &theta_vec)?;
            results.push(FkEntry {
                id: None,
                side: ArmSide::from(side).to_string(),
                theta: values,
                pose: pose_rows(&pose),
            });
        }
        (None, Some(path)) => {
            let pairs = load_pairs(path, &dual)?;
            for (id, pair) in &pairs {
                let arms = [
                    (Side::Left, dual.left(), pair.theta_left()),
                    (Side::Right, dual.right(), pair.theta_right()),
                ];
                for (arm_side, arm, theta_vec) in arms {
                    if side.is_some_and(|want| want != arm_side) {
                        continue;
                    }
                    let pose = kinematics::forward_kinematics(arm, theta_vec)?;
                    results.push(FkEntry {
                        id: Some(id.clone()),
                        side: ArmSide::from(arm_side).to_string(),
                        theta: theta_vec.as_slice().to_vec(),
                        pose: pose_rows(&pose),
                    });
                }
            }
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "pass either --theta or --pairs, not both".to_string(),
            ));
        }
        (None, None) => {
            return Err(CliError::Config(
                "fk needs --theta with --side, or --pairs".to_string(),
            ));
        }
    }
    emit(
        out,
        &json_text(&FkReport {
            command: "fk",
            results,
        }),
    )
}

// ---------------------------------------------------------------- relpose

#[derive(Serialize)]
struct RelposeEntry {
    id: String,
    theta_left: Vec<f64>,
    theta_right: Vec<f64>,
    relative_pose: [[f64; 4]; 4],
}

#[derive(Serialize)]
struct RelposeReport {
    command: &'static str,
    results: Vec<RelposeEntry>,
}

fn cmd_relpose(model_path: &Path, pairs_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let dual = load_model(model_path)?;
    let pairs = load_pairs(pairs_path, &dual)?;
    let mut results = Vec::new();
    for (id, pair) in &pairs {
        let g_rel = kinematics::relative_pose(&dual, pair.theta_left(), pair.theta_right())?;
        results.push(RelposeEntry {
            id: id.clone(),
            theta_left: pair.theta_left().as_slice().to_vec(),
            theta_right: pair.theta_right().as_slice().to_vec(),
            relative_pose: pose_rows(&g_rel),
        });
    }
    emit(
        out,
        &json_text(&RelposeReport {
            command: "relpose",
            results,
        }),
    )
}

// ---------------------------------------------------------------- jacobian

#[derive(Serialize)]
struct JacobianEntry {
    id: String,
    spatial: Vec<Vec<f64>>,
    analytical: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct JacobianReport {
    command: &'static str,
    /// Fixed pseudo-chain column convention, echoed for downstream tools.
    column_order: &'static str,
    results: Vec<JacobianEntry>,
}

fn cmd_jacobian(model_path: &Path, pairs_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let dual = load_model(model_path)?;
    let pairs = load_pairs(pairs_path, &dual)?;
    let mut results = Vec::new();
    for (id, pair) in &pairs {
        let j_s =
            kinematics::relative_spatial_jacobian(&dual, pair.theta_left(), pair.theta_right())?;
        let g_rel = kinematics::relative_pose(&dual, pair.theta_left(), pair.theta_right())?;
        let j_a = kinematics::analytical_from_spatial(&j_s, &g_rel)?;
        results.push(JacobianEntry {
            id: id.clone(),
            spatial: rows6xn(j_s.matrix()),
            analytical: rows6xn(j_a.matrix()),
        });
    }
    emit(
        out,
        &json_text(&JacobianReport {
            command: "jacobian",
            column_order: "left joints tip to base, then right joints base to tip",
            results,
        }),
    )
}

// ---------------------------------------------------------------- errset

#[derive(Serialize)]
struct EllipsoidJson {
    characteristic: [[f64; 3]; 3],
    bound: f64,
    degenerate: bool,
}

#[derive(Serialize)]
struct OrientationEllipsoidJson {
    characteristic: [[f64; 3]; 3],
    bound: f64,
    degenerate: bool,
    /// Relative quaternion as (eta, eps_x, eps_y, eps_z).
    quaternion: [f64; 4],
    quaternion_form: [[f64; 4]; 4],
}

#[derive(Serialize)]
struct ErrsetEntry {
    id: String,
    p_star: f64,
    o_star: f64,
    m_star: f64,
    position: EllipsoidJson,
    orientation: OrientationEllipsoidJson,
}

#[derive(Serialize)]
struct ErrsetReport {
    command: &'static str,
    sigma: f64,
    k: f64,
    gamma: f64,
    /// Squared error-ball radius (k sigma)^2 bounding both ellipsoids.
    bound: f64,
    results: Vec<ErrsetEntry>,
}

fn cmd_errset(
    model_path: &Path,
    noise_path: &Path,
    pairs_path: &Path,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let dual = load_model(model_path)?;
    let noise_cfg = load_noise(noise_path)?;
    let pairs = load_pairs(pairs_path, &dual)?;
    let noise = noise_cfg.to_model(dual.total_joints())?;
    let c = uncertainty::joint_error_bound(&noise);

    let mut results = Vec::new();
    for (id, pair) in &pairs {
        let score = robust_ik::score_pair(&dual, pair, &noise, noise_cfg.gamma)?;
        let j_s =
            kinematics::relative_spatial_jacobian(&dual, pair.theta_left(), pair.theta_right())?;
        let g_rel = kinematics::relative_pose(&dual, pair.theta_left(), pair.theta_right())?;
        let j_a = kinematics::analytical_from_spatial(&j_s, &g_rel)?;
        let q_rel = g_rel.to_quaternion();
        let (position, orientation) = uncertainty::build_ellipsoids(&j_a, &q_rel, c)?;
        results.push(ErrsetEntry {
            id: id.clone(),
            p_star: score.p_star(),
            o_star: score.o_star(),
            m_star: score.m_star(),
            position: EllipsoidJson {
                characteristic: rows3(position.characteristic()),
                bound: position.bound(),
                degenerate: position.is_degenerate(),
            },
            orientation: OrientationEllipsoidJson {
                characteristic: rows3(orientation.characteristic()),
                bound: orientation.bound(),
                degenerate: orientation.is_degenerate(),
                quaternion: [q_rel.eta(), q_rel.eps().x, q_rel.eps().y, q_rel.eps().z],
                quaternion_form: rows4(&orientation.quaternion_form()?),
            },
        });
    }
    emit(
        out,
        &json_text(&ErrsetReport {
            command: "errset",
            sigma: noise_cfg.sigma,
            k: noise_cfg.k,
            gamma: noise_cfg.gamma,
            bound: c,
            results,
        }),
    )
}

// ---------------------------------------------------------------- select

#[derive(Serialize)]
struct SelectPairJson {
    index: usize,
    id: String,
    theta_left: Vec<f64>,
    theta_right: Vec<f64>,
    residual: f64,
    p_star: f64,
    o_star: f64,
    m_star: f64,
}

#[derive(Serialize)]
struct FeasibilityJson {
    epsilon: f64,
    m_star: f64,
    feasible: bool,
    margin: f64,
}

#[derive(Serialize)]
struct SelectReport {
    command: &'static str,
    /// "enumerated" when candidates come from the IK multistart,
    /// "provided" when they come from a --pairs file.
    source: &'static str,
    sigma: f64,
    k: f64,
    gamma: f64,
    candidates: usize,
    selected_index: usize,
    selected_id: String,
    worst_index: usize,
    worst_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostics: Option<EnumerationDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    feasibility: Option<FeasibilityJson>,
    pairs: Vec<SelectPairJson>,
}

/// Candidate pairs for selection: either the task-target enumeration or the
/// contents of a --pairs file.
struct Candidates {
    ids: Vec<String>,
    pairs: Vec<IkPair64>,
    diagnostics: Option<EnumerationDiagnostics>,
    source: &'static str,
}

fn candidate_pairs(
    dual: &DualArmModel64,
    task: &TaskConfig,
    pairs_path: Option<&Path>,
) -> Result<Candidates, CliError> {
    match pairs_path {
        Some(path) => {
            let (ids, pairs) = load_pairs(path, dual)?.into_iter().unzip();
            Ok(Candidates {
                ids,
                pairs,
                diagnostics: None,
                source: "provided",
            })
        }
        None => {
            let strategy: EnumerationStrategy = task.enumeration.clone().unwrap_or_default();
            let spec = task.default_spec()?;
            let (g_left, g_right) = spec.gripper_targets();
            let enumeration = robust_ik::enumerate_ik_pairs(dual, &g_left, &g_right, &strategy)?;
            if enumeration.pairs.is_empty() {
                return Err(CliError::NoSolution(format!(
                    "no IK solutions: {}",
                    enumeration.diagnostics.summary()
                )));
            }
            let ids = (0..enumeration.pairs.len())
                .map(|i| format!("pair_{i}"))
                .collect();
            Ok(Candidates {
                ids,
                pairs: enumeration.pairs,
                diagnostics: Some(enumeration.diagnostics),
                source: "enumerated",
            })
        }
    }
}

fn cmd_select(
    model_path: &Path,
    task_path: &Path,
    noise_path: &Path,
    pairs_path: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let dual = load_model(model_path)?;
    let task = load_task(task_path)?;
    let noise_cfg = load_noise(noise_path)?;
    let noise = noise_cfg.to_model(dual.total_joints())?;

    let candidates = candidate_pairs(&dual, &task, pairs_path)?;
    let ids = candidates.ids;
    let selection =
        robust_ik::select_robust_pair(&dual, &candidates.pairs, &noise, noise_cfg.gamma)?;
    let worst_index = selection.worst_index(&dual);
    let feasibility = match task.epsilon {
        Some(epsilon) => {
            let report = robust_ik::feasibility_check(selection.best(), epsilon)?;
            Some(FeasibilityJson {
                epsilon: report.epsilon(),
                m_star: report
                    .best()
                    .score()
                    .expect("feasibility requires a scored pair")
                    .m_star(),
                feasible: report.feasible(),
                margin: report.margin(),
            })
        }
        None => None,
    };

    let pairs = selection
        .pairs()
        .iter()
        .enumerate()
        .map(|(index, pair)| {
            let score = pair.score().expect("selection scores every candidate");
            SelectPairJson {
                index,
                id: ids[index].clone(),
                theta_left: pair.theta_left().as_slice().to_vec(),
                theta_right: pair.theta_right().as_slice().to_vec(),
                residual: pair.residual(),
                p_star: score.p_star(),
                o_star: score.o_star(),
                m_star: score.m_star(),
            }
        })
        .collect();

    emit(
        out,
        &json_text(&SelectReport {
            command: "select",
            source: candidates.source,
            sigma: noise_cfg.sigma,
            k: noise_cfg.k,
            gamma: noise_cfg.gamma,
            candidates: selection.pairs().len(),
            selected_index: selection.index(),
            selected_id: ids[selection.index()].clone(),
            worst_index,
            worst_id: ids[worst_index].clone(),
            diagnostics: candidates.diagnostics,
            feasibility,
            pairs,
        }),
    )
}

// ---------------------------------------------------------------- simulate

#[derive(Serialize)]
struct SimulateEntry {
    id: String,
    success_pct: f64,
}

#[derive(Serialize)]
struct SimulateReport {
    command: &'static str,
    sigma: f64,
    clearance: f64,
    trials: usize,
    seed: u64,
    results: Vec<SimulateEntry>,
}

fn cmd_simulate(
    model_path: &Path,
    task_path: &Path,
    noise_path: &Path,
    pairs_path: &Path,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let dual = load_model(model_path)?;
    let task = load_task(task_path)?;
    let noise_cfg = load_noise(noise_path)?;
    let pairs = load_pairs(pairs_path, &dual)?;
    let noise = noise_cfg.to_model(dual.total_joints())?;
    let spec = task.default_spec()?;
    let seed = seed.unwrap_or(task.seed);

    let mut results = Vec::new();
    for (id, pair) in &pairs {
        let success_pct =
            assembly::monte_carlo_success_rate(&dual, pair, &spec, &noise, task.trials, seed)?;
        results.push(SimulateEntry {
            id: id.clone(),
            success_pct,
        });
    }
    emit(
        out,
        &json_text(&SimulateReport {
            command: "simulate",
            sigma: noise_cfg.sigma,
            clearance: task.clearances[0],
            trials: task.trials,
            seed,
            results,
        }),
    )
}

// ---------------------------------------------------------------- sweep

#[derive(Serialize)]
struct SweepSummary {
    command: &'static str,
    pair_ids: Vec<String>,
    sigmas: Vec<f64>,
    clearances: Vec<f64>,
    trials: usize,
    seed: u64,
    /// Success percentages per pair, sigma-major then clearance.
    rates: Vec<Vec<f64>>,
}

fn cmd_sweep(
    model_path: &Path,
    task_path: &Path,
    noise_path: Option<&Path>,
    pairs_path: Option<&Path>,
    seed: Option<u64>,
    threads: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let dual = load_model(model_path)?;
    let task = load_task(task_path)?;
    let seed = seed.unwrap_or(task.seed);

    let named_pairs = match pairs_path {
        Some(path) => load_pairs(path, &dual)?,
        None => {
            // Default pair set: rerun the selection stage and sweep its best
            // and worst candidates side by side.
            let noise_path = noise_path.ok_or_else(|| {
                CliError::Config(
                    "sweep needs --noise to derive the selected/worst pairs, or --pairs".to_string(),
                )
            })?;
            let noise_cfg = load_noise(noise_path)?;
            let noise = noise_cfg.to_model(dual.total_joints())?;
            let candidates = candidate_pairs(&dual, &task, None)?;
            let selection =
                robust_ik::select_robust_pair(&dual, &candidates.pairs, &noise, noise_cfg.gamma)?;
            let worst_index = selection.worst_index(&dual);
            let mut named = vec![("selected".to_string(), selection.best().clone())];
            if worst_index != selection.index() {
                named.push(("worst".to_string(), selection.pairs()[worst_index].clone()));
            }
            named
        }
    };

    let spec = task.default_spec()?;
    let result = assembly::sweep(
        &dual,
        &named_pairs,
        &spec,
        &task.sigmas,
        &task.clearances,
        task.trials,
        seed,
        threads,
    )?;
    let csv = result.to_csv();

    match out {
        Some(path) => {
            emit(Some(path), &csv)?;
            let mut rates = Vec::with_capacity(result.pair_ids().len());
            for p in 0..result.pair_ids().len() {
                let mut row = Vec::with_capacity(result.sigmas().len() * result.clearances().len());
                for i in 0..result.sigmas().len() {
                    for j in 0..result.clearances().len() {
                        row.push(result.rate(p, i, j));
                    }
                }
                rates.push(row);
            }
            emit(
                None,
                &json_text(&SweepSummary {
                    command: "sweep",
                    pair_ids: result.pair_ids().to_vec(),
                    sigmas: result.sigmas().to_vec(),
                    clearances: result.clearances().to_vec(),
                    trials: result.trials(),
                    seed,
                    rates,
                }),
            )
        }
        None => emit(None, &csv),
    }
}
