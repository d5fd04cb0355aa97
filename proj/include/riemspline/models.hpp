#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "riemspline/geometry.hpp"
#include "riemspline/types.hpp"

namespace riemspline {

/// One revolute joint of a serial chain. The link frame attached to the joint
/// is  parent * pre * Rot(axis, q) * post;  the rotation axis passes through
/// the origin of parent * pre.
struct Joint {
  Eigen::Isometry3d pre = Eigen::Isometry3d::Identity();
  Vec3 axis = Vec3::UnitZ();
  Eigen::Isometry3d post = Eigen::Isometry3d::Identity();
};

/// Rigid-body data of one link, expressed in its link frame.
struct LinkBody {
  double mass = 0.0;
  Vec3 com = Vec3::Zero();
  Mat3 rot_inertia = Mat3::Zero();  // about the com
};

/// Serial revolute chain with gravity. Planar chains report 2-d task
/// positions (x, y); spatial chains report 3-d.
struct KinematicChain {
  std::vector<Joint> joints;
  std::vector<LinkBody> links;
  std::vector<double> link_lengths;
  Vec3 end_offset = Vec3::Zero();  // end-effector point in the last link frame
  double gravity_accel = 9.81;
  Vec3 gravity_dir = -Vec3::UnitY();  // unit vector pointing "down"
  bool planar = false;

  int joint_count() const { return static_cast<int>(joints.size()); }
  int task_dim() const { return planar ? 2 : 3; }
  void validate() const;  // throws std::invalid_argument
};

/// World-frame kinematic state of a chain at a configuration.
struct FkResult {
  std::vector<Mat3> link_rot;      // link frame orientation
  std::vector<Vec3> link_origin;   // link frame origin
  std::vector<Vec3> joint_origin;  // point on the joint axis
  std::vector<Vec3> joint_axis;    // unit axis in world frame
  std::vector<Vec3> com;           // link com in world frame
  Vec3 end;                        // end-effector point in world frame
  Vec task_position;               // (x, y) for planar chains, (x, y, z) otherwise
};

FkResult forward_kinematics(const KinematicChain& chain, const Vec& q);

/// World-frame Jacobians: per link k, column j of linear[k] is the com
/// velocity response to qdot_j and column j of angular[k] the angular one
/// (planar chains use the z row as the scalar rate). end_linear holds the
/// task-space rows of the end-effector Jacobian.
struct LinkJacobians {
  std::vector<Mat> linear;   // 3 x n each
  std::vector<Mat> angular;  // 3 x n each
  Mat end_linear;            // task_dim x n
};

LinkJacobians link_jacobians(const KinematicChain& chain, const Vec& q);

/// Pullback mass matrix g(q) = sum_k Jv_k^T m_k Jv_k + Jw_k^T (R I R^T) Jw_k.
Mat mass_matrix(const KinematicChain& chain, const Vec& q);

/// Closed-form coordinate partials of the pullback mass matrix.
std::vector<Mat> mass_matrix_partials(const KinematicChain& chain, const Vec& q);
std::vector<std::vector<Mat>> mass_matrix_second_partials(const KinematicChain& chain,
                                                          const Vec& q);

double potential_energy(const KinematicChain& chain, const Vec& q);
Vec potential_gradient(const KinematicChain& chain, const Vec& q);
Mat potential_hessian(const KinematicChain& chain, const Vec& q);

/// Constant diagonal joint-friction tensor diag(coeffs).
Mat joint_drag_tensor(const Vec& coeffs);

/// Isotropic task-space drag pulled back through the end-effector Jacobian:
/// D(q) = coeff * Je^T Je.
Mat endpoint_drag_tensor(const KinematicChain& chain, const Vec& q, double coeff);
std::vector<Mat> endpoint_drag_partials(const KinematicChain& chain, const Vec& q, double coeff);

enum class DragKind { none, joint, endpoint };

/// A mechanical system: inertia metric, potential field, drag tensor field,
/// and actuation cometric. Values are immutable once built.
struct MechModel {
  std::string name;
  int dim = 0;
  std::optional<KinematicChain> chain;  // absent for flat models
  Vec frozen_tail;                      // extra joint values appended for FK (UR5 wrist)
  MetricField inertia;
  ScalarField potential;
  std::function<Mat(const Vec&)> drag;                  // symmetric PSD
  std::function<std::vector<Mat>(const Vec&)> drag_partials;
  Mat actuation_cometric;  // constant SPD
  bool gravity_on = false;
  DragKind drag_kind = DragKind::none;

  bool has_drag() const { return drag_kind != DragKind::none; }
  bool has_external_force() const { return gravity_on || has_drag(); }

  /// Full joint vector for kinematics: q with the frozen tail appended.
  Vec full_config(const Vec& q) const;
  /// End-effector task position (empty optional for flat models).
  std::optional<Vec> task_position(const Vec& q) const;
};

struct TwoLinkParams {
  double m1 = 1.0, m2 = 1.0;
  double l1 = 1.0, l2 = 1.0;
  double com1 = 0.5, com2 = 0.5;        // distance from joint axis to com
  double rot_inertia1 = 1.0 / 12.0;     // about the com
  double rot_inertia2 = 1.0 / 12.0;
  double gravity_accel = 9.81;
};

struct DragConfig {
  DragKind kind = DragKind::none;
  Vec joint_coeffs;   // per-joint viscous coefficients
  double endpoint_coeff = 0.0;
};

KinematicChain two_link_chain(const TwoLinkParams& params);
MechModel two_link_model(const TwoLinkParams& params, bool gravity, const DragConfig& drag);

/// UR5 chain parameters: key-value records per link parsed from the embedded
/// data file (see data/ur5.params for the schema).
struct Ur5LinkRecord {
  double a = 0.0, d = 0.0, alpha = 0.0;  // frame offsets
  double mass = 0.0;
  Vec3 com = Vec3::Zero();
  Vec3 inertia_diag = Vec3::Zero();
};
struct Ur5Params {
  std::vector<Ur5LinkRecord> links;
  double gravity_accel = 9.81;
};

/// The embedded parameter file text (same content as data/ur5.params).
const char* ur5_params_text();
Ur5Params parse_ur5_params(const std::string& text);  // throws ParseError on missing entries
KinematicChain ur5_chain(const Ur5Params& params);

/// Three-joint UR5 model: inertia and potential of the full chain with the
/// wrist frozen at `fixed_wrist`, restricted to the first three coordinates.
MechModel ur5_model(const Ur5Params& params, const Vec3& fixed_wrist, bool gravity,
                    const DragConfig& drag);
MechModel ur5_model_default(const Vec3& fixed_wrist, bool gravity, const DragConfig& drag);

/// Flat model: identity metric, no potential; optional isotropic joint drag.
MechModel flat_model(int dim, const DragConfig& drag = {});

}  // namespace riemspline
