#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "wbc/base_velocity_admittance.hpp"
#include "wbc/common.hpp"

namespace wbc {

/// One revolute arm joint and the rigid body it drives.
///
/// `origin` places the joint frame in the parent link frame (or in the arm
/// mount frame for the first joint). The joint rotates about `axis`, given in
/// the joint frame; the link frame is the joint frame after that rotation.
/// `com` and `inertia` are expressed in the link frame, inertia about the COM.
struct Link {
  Eigen::Vector3d axis{Eigen::Vector3d::UnitZ()};
  Eigen::Isometry3d origin{Eigen::Isometry3d::Identity()};
  double mass{1.0};
  Eigen::Vector3d com{Eigen::Vector3d::Zero()};
  Eigen::Matrix3d inertia{Eigen::Matrix3d::Identity() * 1e-2};
};

/// Planar PPR platform (x, y, yaw) carrying a serial revolute arm.
///
/// Generalized coordinates are ordered [x, y, yaw, q_arm...]. The platform is
/// modelled by its virtual admittance inertia/damping and is inertially
/// decoupled from the arm.
struct KinematicChain {
  static constexpr int kBaseDofs = 3;

  Eigen::Isometry3d base_mount{Eigen::Isometry3d::Identity()};
  std::vector<Link> links;
  Eigen::Vector3d gravity{0.0, 0.0, -9.81};
  Eigen::Isometry3d ee_offset{Eigen::Isometry3d::Identity()};
  BaseAdmittanceParams base;

  int arm_dofs() const { return static_cast<int>(links.size()); }
  int dofs() const { return kBaseDofs + arm_dofs(); }
};

struct JointState {
  Eigen::VectorXd q;
  Eigen::VectorXd qd;

  static JointState zero(int dofs) {
    return {Eigen::VectorXd::Zero(dofs), Eigen::VectorXd::Zero(dofs)};
  }
};

struct Pose {
  Eigen::Vector3d position{Eigen::Vector3d::Zero()};
  Eigen::Quaterniond orientation{Eigen::Quaterniond::Identity()};
};

/// End-effector pose and world-frame twist (linear first, then angular).
struct SpatialState {
  Pose pose;
  Vector6d twist{Vector6d::Zero()};
};

/// Checks n >= 2, positive masses, SPD inertias, unit axes, positive base
/// admittance. Throws ContractViolation naming the offending link.
void validate(const KinematicChain& chain);

/// 3 + 7 chain with alternating z/y axes, roughly Panda-sized.
KinematicChain default_chain();
/// 3 + 2 chain with both joints about the mount y axis, thin uniform rods.
KinematicChain planar_two_link_chain(double l1 = 0.5, double l2 = 0.4,
                                     double m1 = 2.0, double m2 = 1.5);
/// Posture reference matching default_chain(): arm bent forward.
Eigen::VectorXd default_posture(const KinematicChain& chain);

/// Adds a point mass at the end-effector frame origin to the last link.
KinematicChain with_payload(const KinematicChain& chain, double mass);

SpatialState forward_kinematics(const KinematicChain& chain, const JointState& state);

/// World-frame link poses (after each joint rotation), for energy and
/// geometry queries.
std::vector<Eigen::Isometry3d> link_poses(const KinematicChain& chain,
                                          const Eigen::VectorXd& q);

/// Geometric Jacobian of the end-effector origin in the world frame, 6×(m+n).
/// The platform columns are prismatic x, prismatic y, revolute yaw.
Eigen::MatrixXd jacobian_ee(const KinematicChain& chain, const JointState& state);

/// Block-diagonal joint-space inertia diag(M_adm, M_a(q_a)); the arm block is
/// accumulated with composite rigid bodies.
Eigen::MatrixXd mass_matrix(const KinematicChain& chain, const JointState& state);

/// C(q, q̇) q̇: D_adm q̇_m on the platform rows, arm Coriolis/centrifugal below.
Eigen::VectorXd bias_forces(const KinematicChain& chain, const JointState& state);

/// Gravity torques; zero on the platform rows.
Eigen::VectorXd gravity_vector(const KinematicChain& chain, const JointState& state);

/// M q̈ + C q̇ + g, evaluated by recursive Newton-Euler on the arm.
Eigen::VectorXd inverse_dynamics(const KinematicChain& chain, const JointState& state,
                                 const Eigen::VectorXd& qdd);

/// ½ q̇_aᵀ M_a q̇_a, arm only.
double arm_kinetic_energy(const KinematicChain& chain, const JointState& state);

/// −Σ m_i gᵀ c_i over the arm links (world COM positions).
double arm_potential_energy(const KinematicChain& chain, const Eigen::VectorXd& q);

}  // namespace wbc
