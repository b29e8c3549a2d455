#pragma once

#include <Eigen/Core>

#include "wbc/admittance_interface.hpp"
#include "wbc/common.hpp"
#include "wbc/rigid_body_model.hpp"

namespace wbc {

/// Diagonal priority weights H = diag(η_B I_m, η_A I_n). A larger η
/// penalizes motion of that part of the robot.
struct PriorityWeights {
  double eta_b{5.0};
  double eta_a{1.0};
  PriorityMode mode{PriorityMode::manipulation};

  static PriorityWeights manipulation() { return {5.0, 1.0, PriorityMode::manipulation}; }
  static PriorityWeights locomotion() { return {1.0, 3.0, PriorityMode::locomotion}; }
};

/// Positive weights, and η_B > η_A in manipulation, η_B < η_A in locomotion.
void validate(const PriorityWeights& weights);

/// Cartesian impedance (K, D on the end-effector) and null-space joint
/// impedance (K_0, D_0 around q_0).
struct ImpedanceGains {
  Vector6d k_cart{Vector6d::Zero()};
  Vector6d d_cart{Vector6d::Zero()};
  Eigen::VectorXd k_joint;
  Eigen::VectorXd d_joint;
  Eigen::VectorXd q_0;
};

void validate(const ImpedanceGains& gains, int dofs);

/// K = diag(500 ×3, 50 ×3); D = 2 sqrt(K_ii Λ_ii) with Λ taken at the
/// posture q_0; K_0 = 10 and D_0 = 2 on the arm joints, zero on the platform.
ImpedanceGains default_gains(const KinematicChain& chain, const Eigen::VectorXd& q_0);

struct TaskInertias {
  Matrix6d lambda;    // (J M⁻¹ Jᵀ)⁻¹
  Matrix6d lambda_w;  // (J M⁻¹ W⁻¹ M⁻¹ Jᵀ)⁻¹, possibly damped
  double min_singular_value{0.0};  // of J M⁻¹ W⁻¹ M⁻¹ Jᵀ
  bool damped{false};
};

/// Eq-4 torque split into its Cartesian and null-space parts.
struct TorqueSplit {
  Eigen::VectorXd task;
  Eigen::VectorXd null;
  bool damped{false};
};

struct ControlOutput {
  Eigen::VectorXd tau;       // [τ_vir (m); τ_a (n)], compensation included on the arm rows
  Vector6d f_cartesian{Vector6d::Zero()};
  Eigen::VectorXd tau_task;  // Cartesian component of the weighted solution
  Eigen::VectorXd tau_null;  // projected posture component
  bool damped{false};

  Eigen::Vector3d tau_vir() const { return tau.head<KinematicChain::kBaseDofs>(); }
  Eigen::VectorXd tau_arm() const { return tau.tail(tau.size() - KinematicChain::kBaseDofs); }
};

namespace controller {

/// Rank threshold on J below which no torque is produced.
inline constexpr double kRankTolerance = 1e-9;
/// Damping threshold on σ_min(J M⁻¹ W⁻¹ M⁻¹ Jᵀ) and the Tikhonov term used
/// below it.
inline constexpr double kDampingThreshold = 1e-8;
inline constexpr double kDampingLambda = 1e-6;

Eigen::MatrixXd priority_matrix(const PriorityWeights& weights, int base_dofs, int arm_dofs);

/// W = Hᵀ M⁻¹ H. Throws NumericalError if M is not positive definite.
Eigen::MatrixXd weight_matrix(const PriorityWeights& weights, const Eigen::MatrixXd& m_mat,
                              int base_dofs = KinematicChain::kBaseDofs);

/// Cartesian inertia and weighted Cartesian inertia.
///
/// For a square invertible J the weighted inertia J⁻ᵀ M W M J⁻¹ is the inverse
/// of J M⁻¹ W⁻¹ M⁻¹ Jᵀ, so the latter is used for every shape; it is the
/// only choice for which J̄ᵀ τ = F holds when J is redundant.
/// Throws SingularityError when σ_min(J) < kRankTolerance.
TaskInertias task_inertias(const Eigen::MatrixXd& j, const Eigen::MatrixXd& m_mat,
                           const PriorityWeights& weights,
                           int base_dofs = KinematicChain::kBaseDofs);

/// F = −D ẋ − K (x − x_d). The rotational error is twice the vector part of
/// q q_d⁻¹ taken on the short arc.
Vector6d cartesian_impedance_force(const SpatialState& x, const Pose& x_d,
                                   const ImpedanceGains& gains);

/// τ_0 = −D_0 q̇ − K_0 (q − q_0).
Eigen::VectorXd nullspace_torque(const JointState& state, const ImpedanceGains& gains);

/// τ = W⁻¹M⁻¹JᵀΛ_W Λ⁻¹ F + (I − W⁻¹M⁻¹JᵀΛ_W J M⁻¹) τ_0.
TorqueSplit weighted_torque(const Eigen::MatrixXd& j, const Eigen::MatrixXd& m_mat,
                            const PriorityWeights& weights, const Vector6d& f,
                            const Eigen::VectorXd& tau_0,
                            int base_dofs = KinematicChain::kBaseDofs);

/// The matrix I − W⁻¹M⁻¹JᵀΛ_W J M⁻¹ that multiplies τ_0.
Eigen::MatrixXd nullspace_projector(const Eigen::MatrixXd& j, const Eigen::MatrixXd& m_mat,
                                    const PriorityWeights& weights,
                                    int base_dofs = KinematicChain::kBaseDofs);

/// Full control law: impedance force, weighted torque, and gravity plus
/// Coriolis compensation on the arm rows only (the platform admittance keeps
/// its own damping).
ControlOutput compute_torques(const KinematicChain& chain, const JointState& state,
                              const Pose& x_d, const ImpedanceGains& gains,
                              const PriorityWeights& weights,
                              bool coriolis_compensation = true);

}  // namespace controller
}  // namespace wbc
