//! Bundled reference models.
//!
//! [`baxter_like`] reconstructs a two-armed research manipulator (7 revolute
//! joints per arm) from publicly documented kinematic constants: a chain of
//! fixed frames, each joint rotating about its local z-axis. The twists and
//! zero-configuration poses are derived by accumulating the frame chain and
//! reading off each joint axis and origin in the base frame.
//!
//! The gripper frame includes a tool-plate-to-fingertip offset
//! ([`TOOL_OFFSET`]) calibrated so the bundled task poses are reached with
//! small residuals; the builder is parametric over that offset for tests.
//!
//! [`planar_dual_3r`] builds a small planar 3R+3R system whose inverse
//! kinematics have closed-form elbow-up/down branches, used as a brute-force
//! oracle for enumeration tests.

use nalgebra::{Matrix3, Vector3};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::kinematics::{ArmModel, DualArmModel};
use crate::se3::{Pose, Twist};
use crate::ArmSide;

/// Distance (m) from the wrist plate frame to the gripper contact frame
/// along local z, bundled into the default model's g0.
pub const TOOL_OFFSET: f64 = 0.12;

/// Rotation from roll-pitch-yaw angles: R = R_z(yaw) R_y(pitch) R_x(roll).
pub fn rpy_rotation(roll: f64, pitch: f64, yaw: f64) -> Matrix3<f64> {
    let (sr, cr) = roll.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let (sy, cy) = yaw.sin_cos();
    let rz = Matrix3::new(cy, -sy, 0.0, sy, cy, 0.0, 0.0, 0.0, 1.0);
    let ry = Matrix3::new(cp, 0.0, sp, 0.0, 1.0, 0.0, -sp, 0.0, cp);
    let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, cr, -sr, 0.0, sr, cr);
    rz * ry * rx
}

fn frame(xyz: [f64; 3], rpy: [f64; 3]) -> Pose<f64> {
    Pose::new(
        rpy_rotation(rpy[0], rpy[1], rpy[2]),
        Vector3::new(xyz[0], xyz[1], xyz[2]),
    )
    .expect("rpy rotations are orthonormal")
}

/// Per-joint frame chain shared by both arms: (xyz, rpy, [lo, hi]).
/// Each joint rotates about the z-axis of its accumulated frame. The limits
/// are the published values verbatim, even where one sits near a constant.
#[allow(clippy::approx_constant)]
const JOINT_FRAMES: [([f64; 3], [f64; 3], [f64; 2]); 7] = [
    (
        [0.055695, 0.0, 0.011038],
        [0.0, 0.0, 0.0],
        [-1.70167993878, 1.70167993878],
    ),
    (
        [0.069, 0.0, 0.27035],
        [-FRAC_PI_2, 0.0, 0.0],
        [-2.147, 1.047],
    ),
    (
        [0.102, 0.0, 0.0],
        [FRAC_PI_2, 0.0, FRAC_PI_2],
        [-3.05417993878, 3.05417993878],
    ),
    (
        [0.069, 0.0, 0.26242],
        [-FRAC_PI_2, -FRAC_PI_2, 0.0],
        [-0.05, 2.618],
    ),
    (
        [0.10359, 0.0, 0.0],
        [FRAC_PI_2, 0.0, FRAC_PI_2],
        [-3.059, 3.059],
    ),
    (
        [0.01, 0.0, 0.2707],
        [-FRAC_PI_2, -FRAC_PI_2, 0.0],
        [-1.57079632679, 2.094],
    ),
    (
        [0.115975, 0.0, 0.0],
        [FRAC_PI_2, 0.0, FRAC_PI_2],
        [-3.059, 3.059],
    ),
];

/// Wrist-plate-to-hand frame, after the last joint.
const HAND_FRAME: [f64; 3] = [0.0, 0.0, 0.11355];

fn build_arm(side: ArmSide, tool_offset: f64) -> ArmModel<f64> {
    let mirror = match side {
        ArmSide::Left => 1.0,
        ArmSide::Right => -1.0,
    };
    let mut g = frame(
        [0.024645, mirror * 0.219645, 0.118588],
        [0.0, 0.0, mirror * FRAC_PI_4],
    );

    let mut twists = Vec::with_capacity(7);
    let mut limits = Vec::with_capacity(7);
    for (xyz, rpy, lim) in JOINT_FRAMES {
        g = g.compose(&frame(xyz, rpy));
        let axis = g.rotation() * Vector3::z();
        twists.push(Twist::revolute(&axis, &g.translation()).expect("axis is a rotated unit z"));
        limits.push(lim);
    }
    g = g.compose(&Pose::translation_only(Vector3::new(
        HAND_FRAME[0],
        HAND_FRAME[1],
        HAND_FRAME[2] + tool_offset,
    )));

    ArmModel::new(side, twists, g, Some(limits)).expect("builder produces a valid arm")
}

/// The bundled 7+7 dual-arm model with the default [`TOOL_OFFSET`].
pub fn baxter_like() -> DualArmModel<f64> {
    baxter_like_with_tool(TOOL_OFFSET)
}

/// Same chain with an explicit gripper offset (m) along the hand z-axis.
pub fn baxter_like_with_tool(tool_offset: f64) -> DualArmModel<f64> {
    DualArmModel::new(
        build_arm(ArmSide::Left, tool_offset),
        build_arm(ArmSide::Right, tool_offset),
    )
    .expect("builder wires sides correctly")
}

/// Planar 3R arm in the z = 0 plane: all joints rotate about +z, links run
/// along +x at zero configuration, the base sits at `origin`.
pub fn planar_3r(side: ArmSide, origin: Vector3<f64>, lengths: [f64; 3]) -> ArmModel<f64> {
    let mut twists = Vec::with_capacity(3);
    let mut reach = 0.0;
    for len in lengths {
        twists.push(
            Twist::revolute(&Vector3::z(), &(origin + Vector3::new(reach, 0.0, 0.0)))
                .expect("unit z axis"),
        );
        reach += len;
    }
    let g0 = Pose::translation_only(origin + Vector3::new(reach, 0.0, 0.0));
    ArmModel::new(side, twists, g0, Some(vec![[-PI, PI]; 3])).expect("valid planar arm")
}

/// Two identical planar 3R arms, the right one offset along +y.
pub fn planar_dual_3r(separation: f64, lengths: [f64; 3]) -> DualArmModel<f64> {
    DualArmModel::new(
        planar_3r(ArmSide::Left, Vector3::zeros(), lengths),
        planar_3r(ArmSide::Right, Vector3::new(0.0, separation, 0.0), lengths),
    )
    .expect("builder wires sides correctly")
}
