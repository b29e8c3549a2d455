#include "wbc/admittance_interface.hpp"

#include <cmath>
#include <string>

namespace wbc {

AdmittancePresets default_admittance_presets() {
  constexpr double kTimeConstant = 0.5;
  const double linear_gain[] = {0.02, 0.05, 0.1};
  const double angular_gain[] = {0.2, 0.5, 1.0};
  AdmittancePresets presets;
  for (int level = 0; level < 3; ++level) {
    Vector6d d;
    d << Eigen::Vector3d::Constant(1.0 / linear_gain[level]),
        Eigen::Vector3d::Constant(1.0 / angular_gain[level]);
    presets[level].d_d = d;
    presets[level].lambda_d = kTimeConstant * d;
  }
  return presets;
}

void validate(const AdmittanceParams& params) {
  if (!(params.lambda_d.array() > 0.0).all() || !(params.d_d.array() > 0.0).all() ||
      !params.lambda_d.allFinite() || !params.d_d.allFinite()) {
    throw ContractViolation("admittance: inertia and damping diagonals must be > 0");
  }
}

void validate(const AdmittancePresets& presets) {
  for (const auto& p : presets) {
    validate(p);
  }
  for (int level = 1; level < 3; ++level) {
    const double lower = presets[level - 1].d_d.cwiseInverse().norm();
    const double upper = presets[level].d_d.cwiseInverse().norm();
    if (!(upper > lower)) {
      throw ContractViolation("admittance: preset " + std::to_string(level) +
                              " must have a larger steady-state gain than preset " +
                              std::to_string(level - 1));
    }
  }
}

void validate(const FrameOffset& offset) {
  const Eigen::Matrix3d& r = offset.rotation;
  if ((r.transpose() * r - Eigen::Matrix3d::Identity()).norm() > 1e-9 ||
      std::abs(r.determinant() - 1.0) > 1e-9) {
    throw ContractViolation("frame offset: rotation must be orthonormal with det +1");
  }
}

namespace admittance {

WrenchReading transform_wrench(const WrenchReading& w, const FrameOffset& offset) {
  if (w.frame != WrenchFrame::sensor) {
    throw ContractViolation("transform_wrench: input must be in the sensor frame");
  }
  WrenchReading out;
  out.force = offset.rotation * w.force;
  out.torque = offset.rotation * w.torque + offset.translation.cross(out.force);
  out.frame = WrenchFrame::end_effector;
  return out;
}

WrenchReading to_sensor_frame(const WrenchReading& w, const FrameOffset& offset) {
  if (w.frame != WrenchFrame::end_effector) {
    throw ContractViolation("to_sensor_frame: input must be end-effector referred");
  }
  WrenchReading out;
  out.force = offset.rotation.transpose() * w.force;
  out.torque = offset.rotation.transpose() * (w.torque - offset.translation.cross(w.force));
  out.frame = WrenchFrame::sensor;
  return out;
}

WrenchReading measured_force(const WrenchReading& f_h, const WrenchReading& f_a) {
  if (f_h.frame != WrenchFrame::end_effector || f_a.frame != WrenchFrame::end_effector) {
    throw ContractViolation("measured_force: both wrenches must be end-effector referred");
  }
  return {f_h.force - f_a.force, f_h.torque - f_a.torque, WrenchFrame::end_effector};
}

AdmittanceState step(const AdmittanceState& state, const AdmittanceParams& params,
                     const WrenchReading& f_m, double dt) {
  if (!(dt > 0.0)) {
    throw ContractViolation("admittance step: dt must be positive");
  }
  if (f_m.frame != WrenchFrame::end_effector) {
    throw ContractViolation("admittance step: wrench must be end-effector referred");
  }
  const Vector6d acc =
      (f_m.stacked() - params.d_d.cwiseProduct(state.xd_d)).cwiseQuotient(params.lambda_d);

  AdmittanceState next;
  next.xd_d = state.xd_d + dt * acc;
  next.x_d.position = state.x_d.position + dt * next.xd_d.head<3>();

  const Eigen::Vector3d rotation = dt * next.xd_d.tail<3>();
  const double angle = rotation.norm();
  Eigen::Quaterniond delta = Eigen::Quaterniond::Identity();
  if (angle > 0.0) {
    delta = Eigen::Quaterniond(Eigen::AngleAxisd(angle, rotation / angle));
  }
  next.x_d.orientation = (delta * state.x_d.orientation).normalized();
  return next;
}

AdmittanceState hold(const Pose& pose) {
  AdmittanceState out;
  out.x_d = pose;
  out.x_d.orientation.normalize();
  return out;
}

double time_constant(const AdmittanceParams& params) {
  return params.lambda_d.cwiseQuotient(params.d_d).maxCoeff();
}

}  // namespace admittance
}  // namespace wbc
