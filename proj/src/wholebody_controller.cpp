#include "wbc/wholebody_controller.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace wbc {
namespace {

// Quantities shared by the torque law: X = M⁻¹Jᵀ and W⁻¹ = H⁻¹ M H⁻¹.
// W⁻¹ is formed in closed form from H rather than by inverting W.
struct WeightedTask {
  Eigen::MatrixXd minv_jt;
  Eigen::MatrixXd w_inv;
  Eigen::LLT<Matrix6d> a_llt;  // factor of Λ_W⁻¹ (damped if flagged)
  TaskInertias inertias;
};

Eigen::LLT<Eigen::MatrixXd> factor_inertia(const Eigen::MatrixXd& m_mat) {
  if (m_mat.rows() != m_mat.cols()) {
    throw ContractViolation("inertia matrix must be square");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m_mat);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("inertia matrix is not positive definite");
  }
  return llt;
}

Eigen::VectorXd inverse_priority_diagonal(const PriorityWeights& weights, int base_dofs,
                                          int total) {
  if (!(weights.eta_b > 0.0) || !(weights.eta_a > 0.0)) {
    throw ContractViolation("priority weights must be positive");
  }
  Eigen::VectorXd h_inv(total);
  h_inv.head(base_dofs).setConstant(1.0 / weights.eta_b);
  h_inv.tail(total - base_dofs).setConstant(1.0 / weights.eta_a);
  return h_inv;
}

Matrix6d spd_inverse(const Matrix6d& a, const char* what) {
  Eigen::LLT<Matrix6d> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string(what) + " is not positive definite");
  }
  return llt.solve(Matrix6d::Identity());
}

WeightedTask weighted_task(const Eigen::MatrixXd& j, const Eigen::MatrixXd& m_mat,
                           const PriorityWeights& weights, int base_dofs) {
  if (j.rows() != 6 || j.cols() != m_mat.rows()) {
    throw ContractViolation("Jacobian must be 6×N with N matching the inertia matrix");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
  // Fewer columns than task rows leaves singular values that SVD does not report.
  const double sigma_j = j.cols() < j.rows() ? 0.0 : svd.singularValues().minCoeff();
  if (sigma_j < controller::kRankTolerance) {
    std::ostringstream msg;
    msg << "task Jacobian is rank deficient (smallest singular value " << sigma_j << ")";
    throw SingularityError(msg.str(), sigma_j);
  }

  const auto llt = factor_inertia(m_mat);
  const Eigen::VectorXd h_inv = inverse_priority_diagonal(weights, base_dofs, m_mat.rows());

  WeightedTask out;
  out.minv_jt = llt.solve(j.transpose());
  out.w_inv = h_inv.asDiagonal() * m_mat * h_inv.asDiagonal();

  const Matrix6d lambda_inv = j * out.minv_jt;
  out.inertias.lambda = spd_inverse(0.5 * (lambda_inv + lambda_inv.transpose()), "J M⁻¹ Jᵀ");

  Matrix6d a = out.minv_jt.transpose() * out.w_inv * out.minv_jt;
  a = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix6d> eig(a, Eigen::EigenvaluesOnly);
  out.inertias.min_singular_value = eig.eigenvalues().cwiseAbs().minCoeff();
  if (out.inertias.min_singular_value < controller::kDampingThreshold) {
    a += controller::kDampingLambda * Matrix6d::Identity();
    out.inertias.damped = true;
  }
  out.a_llt.compute(a);
  if (out.a_llt.info() != Eigen::Success) {
    throw NumericalError("J M⁻¹ W⁻¹ M⁻¹ Jᵀ is not positive definite");
  }
  out.inertias.lambda_w = out.a_llt.solve(Matrix6d::Identity());
  return out;
}

}  // namespace

void validate(const PriorityWeights& weights) {
  if (!(weights.eta_b > 0.0) || !(weights.eta_a > 0.0)) {
    throw ContractViolation("priority weights: eta_b and eta_a must be > 0");
  }
  if (weights.mode == PriorityMode::manipulation && !(weights.eta_b > weights.eta_a)) {
    throw ContractViolation("priority weights: manipulation requires eta_b > eta_a");
  }
  if (weights.mode == PriorityMode::locomotion && !(weights.eta_b < weights.eta_a)) {
    throw ContractViolation("priority weights: locomotion requires eta_b < eta_a");
  }
}

void validate(const ImpedanceGains& gains, int dofs) {
  if (gains.k_joint.size() != dofs || gains.d_joint.size() != dofs || gains.q_0.size() != dofs) {
    throw ContractViolation("impedance gains: joint vectors must have " + std::to_string(dofs) +
                            " entries");
  }
  if ((gains.k_cart.array() < 0.0).any() || (gains.d_cart.array() < 0.0).any() ||
      (gains.k_joint.array() < 0.0).any() || (gains.d_joint.array() < 0.0).any()) {
    throw ContractViolation("impedance gains: diagonals must be >= 0");
  }
  if (!gains.q_0.allFinite()) {
    throw ContractViolation("impedance gains: posture reference must be finite");
  }
}

ImpedanceGains default_gains(const KinematicChain& chain, const Eigen::VectorXd& q_0) {
  const int dofs = chain.dofs();
  const int base = KinematicChain::kBaseDofs;
  ImpedanceGains gains;
  gains.k_cart << 500.0, 500.0, 500.0, 50.0, 50.0, 50.0;
  gains.q_0 = q_0;
  gains.k_joint = Eigen::VectorXd::Zero(dofs);
  gains.d_joint = Eigen::VectorXd::Zero(dofs);
  gains.k_joint.tail(dofs - base).setConstant(10.0);
  gains.d_joint.tail(dofs - base).setConstant(2.0);

  const JointState at_rest{q_0, Eigen::VectorXd::Zero(dofs)};
  const Eigen::MatrixXd j = jacobian_ee(chain, at_rest);
  const Eigen::MatrixXd m = mass_matrix(chain, at_rest);
  const Matrix6d lambda_inv = j * m.llt().solve(j.transpose());
  const Matrix6d lambda = lambda_inv.inverse();
  for (int i = 0; i < 6; ++i) {
    gains.d_cart[i] = 2.0 * std::sqrt(gains.k_cart[i] * lambda(i, i));
  }
  return gains;
}

namespace controller {

Eigen::MatrixXd priority_matrix(const PriorityWeights& weights, int base_dofs, int arm_dofs) {
  Eigen::VectorXd h(base_dofs + arm_dofs);
  h.head(base_dofs).setConstant(weights.eta_b);
  h.tail(arm_dofs).setConstant(weights.eta_a);
  return h.asDiagonal();
}

Eigen::MatrixXd weight_matrix(const PriorityWeights& weights, const Eigen::MatrixXd& m_mat,
                              int base_dofs) {
  const auto llt = factor_inertia(m_mat);
  const int total = static_cast<int>(m_mat.rows());
  const Eigen::MatrixXd h = priority_matrix(weights, base_dofs, total - base_dofs);
  if (!(weights.eta_b > 0.0) || !(weights.eta_a > 0.0)) {
    throw ContractViolation("priority weights must be positive");
  }
  Eigen::MatrixXd w = h.transpose() * llt.solve(h);
  return 0.5 * (w + w.transpose());
}

TaskInertias task_inertias(const Eigen::MatrixXd& j, const Eigen::MatrixXd& m_mat,
                           const PriorityWeights& weights, int base_dofs) {
  return weighted_task(j, m_mat, weights, base_dofs).inertias;
}

Vector6d cartesian_impedance_force(const SpatialState& x, const Pose& x_d,
                                   const ImpedanceGains& gains) {
  Eigen::Quaterniond err = x.pose.orientation * x_d.orientation.conjugate();
  if (err.w() < 0.0) {
    err.coeffs() = -err.coeffs();
  }
  Vector6d e;
  e << x.pose.position - x_d.position, 2.0 * err.vec();
  return -gains.d_cart.cwiseProduct(x.twist) - gains.k_cart.cwiseProduct(e);
}

Eigen::VectorXd nullspace_torque(const JointState& state, const ImpedanceGains& gains) {
  if (state.q.size() != gains.q_0.size() || state.qd.size() != gains.q_0.size() ||
      gains.k_joint.size() != gains.q_0.size() || gains.d_joint.size() != gains.q_0.size()) {
    throw ContractViolation("nullspace_torque: dimension mismatch");
  }
  return -gains.d_joint.cwiseProduct(state.qd) - gains.k_joint.cwiseProduct(state.q - gains.q_0);
}

TorqueSplit weighted_torque(const Eigen::MatrixXd& j, const Eigen::MatrixXd& m_mat,
                            const PriorityWeights& weights, const Vector6d& f,
                            const Eigen::VectorXd& tau_0, int base_dofs) {
  if (tau_0.size() != m_mat.rows()) {
    throw ContractViolation("weighted_torque: posture torque has wrong size");
  }
  const WeightedTask t = weighted_task(j, m_mat, weights, base_dofs);
  // Λ_W is applied through its factor rather than the explicit inverse.
  const auto apply = [&t](const Vector6d& v) -> Eigen::VectorXd {
    return t.w_inv * (t.minv_jt * t.a_llt.solve(v));  // W⁻¹M⁻¹JᵀΛ_W v
  };
  TorqueSplit out;
  out.task = apply(j * (t.minv_jt * f));  // Λ⁻¹ F = J M⁻¹ Jᵀ F
  out.null = tau_0 - apply(t.minv_jt.transpose() * tau_0);
  out.null -= apply(t.minv_jt.transpose() * out.null);
  out.damped = t.inertias.damped;
  return out;
}

Eigen::MatrixXd nullspace_projector(const Eigen::MatrixXd& j, const Eigen::MatrixXd& m_mat,
                                    const PriorityWeights& weights, int base_dofs) {
  const WeightedTask t = weighted_task(j, m_mat, weights, base_dofs);
  const int n = static_cast<int>(m_mat.rows());
  return Eigen::MatrixXd::Identity(n, n) -
         t.w_inv * t.minv_jt * t.inertias.lambda_w * t.minv_jt.transpose();
}

ControlOutput compute_torques(const KinematicChain& chain, const JointState& state,
                              const Pose& x_d, const ImpedanceGains& gains,
                              const PriorityWeights& weights, bool coriolis_compensation) {
  const int base = KinematicChain::kBaseDofs;
  const int n = chain.arm_dofs();
  const Eigen::MatrixXd j = jacobian_ee(chain, state);
  const Eigen::MatrixXd m = mass_matrix(chain, state);

  SpatialState x;
  x.pose = forward_kinematics(chain, state).pose;
  x.twist = j * state.qd;

  ControlOutput out;
  out.f_cartesian = cartesian_impedance_force(x, x_d, gains);
  const TorqueSplit split =
      weighted_torque(j, m, weights, out.f_cartesian, nullspace_torque(state, gains), base);
  out.tau_task = split.task;
  out.tau_null = split.null;
  out.damped = split.damped;

  out.tau = split.task + split.null;
  out.tau.tail(n) += gravity_vector(chain, state).tail(n);
  if (coriolis_compensation) {
    out.tau.tail(n) += bias_forces(chain, state).tail(n);
  }
  return out;
}

}  // namespace controller
}  // namespace wbc
