#pragma once

#include <array>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "wbc/common.hpp"
#include "wbc/rigid_body_model.hpp"

namespace wbc {

/// Diagonal inertia Λ_d and damping D_d of Λ_d ẍ_d + D_d ẋ_d = f_m.
struct AdmittanceParams {
  Vector6d lambda_d{Vector6d::Constant(1.0)};
  Vector6d d_d{Vector6d::Constant(1.0)};
};

/// Low / medium / high admittance, selected by the HMI level (0, 1, 2).
using AdmittancePresets = std::array<AdmittanceParams, 3>;

/// Time constant 0.5 s; steady-state gains 0.02 / 0.05 / 0.1 m/s per N and
/// 0.2 / 0.5 / 1.0 rad/s per N·m.
AdmittancePresets default_admittance_presets();

void validate(const AdmittanceParams& params);
/// Each preset valid, and the steady-state gain 1/D_d grows with the level.
void validate(const AdmittancePresets& presets);

/// Reference pose and twist commanded by the interface.
struct AdmittanceState {
  Pose x_d;
  Vector6d xd_d{Vector6d::Zero()};
};

enum class WrenchFrame { sensor, end_effector };

struct WrenchReading {
  Eigen::Vector3d force{Eigen::Vector3d::Zero()};
  Eigen::Vector3d torque{Eigen::Vector3d::Zero()};
  WrenchFrame frame{WrenchFrame::end_effector};

  Vector6d stacked() const {
    Vector6d w;
    w << force, torque;
    return w;
  }
  static WrenchReading from(const Vector6d& w, WrenchFrame frame) {
    return {w.head<3>(), w.tail<3>(), frame};
  }
};

/// Pose of the sensor frame in the end-effector frame.
struct FrameOffset {
  Eigen::Matrix3d rotation{Eigen::Matrix3d::Identity()};
  Eigen::Vector3d translation{Eigen::Vector3d::Zero()};
};

void validate(const FrameOffset& offset);

namespace admittance {

/// Re-expresses a sensor-frame wrench at the end-effector origin:
/// f = R f_s, τ = R τ_s + t × (R f_s).
WrenchReading transform_wrench(const WrenchReading& w, const FrameOffset& offset);

/// Inverse of transform_wrench: end-effector wrench to the reading the sensor
/// would report.
WrenchReading to_sensor_frame(const WrenchReading& w, const FrameOffset& offset);

/// f_m = f_h − f_a. Both readings must already be end-effector referred.
WrenchReading measured_force(const WrenchReading& f_h, const WrenchReading& f_a);

/// One step of the admittance law: velocity first, then pose with the new
/// velocity; orientation advanced by the quaternion exponential.
AdmittanceState step(const AdmittanceState& state, const AdmittanceParams& params,
                     const WrenchReading& f_m, double dt);

/// Bumpless hold used on deactivation: reference at `pose`, zero velocity.
AdmittanceState hold(const Pose& pose);

/// max_i Λ_ii / D_ii.
double time_constant(const AdmittanceParams& params);

}  // namespace admittance
}  // namespace wbc
