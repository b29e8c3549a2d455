#pragma once

#include <Eigen/Core>

#include "wbc/common.hpp"

namespace wbc {

/// Virtual inertia and damping of the platform admittance mapping
/// M_adm q̈_m + D_adm q̇_m = τ_vir. Diagonals only.
struct BaseAdmittanceParams {
  Eigen::Vector3d m_adm{60.0, 60.0, 14.0};
  Eigen::Vector3d d_adm{120.0, 120.0, 28.0};
};

/// Platform joint-space velocity (x, y, yaw) sent to the low-level wheel
/// controller, stamped with simulation time.
struct BaseVelocityCommand {
  Eigen::Vector3d qd_m{Eigen::Vector3d::Zero()};
  double stamp{0.0};
};

void validate(const BaseAdmittanceParams& params);

namespace base_admittance {

/// One update of the virtual base admittance. The velocity is advanced
/// explicitly from q̈_m = M_adm⁻¹(τ_vir − D_adm q̇_m); the stamp advances by dt.
/// Throws ContractViolation for dt <= 0.
BaseVelocityCommand step(const BaseVelocityCommand& current,
                         const BaseAdmittanceParams& params,
                         const Eigen::Vector3d& tau_vir, double dt);

/// Time constant max_i(M_ii / D_ii) of the first-order base response.
double time_constant(const BaseAdmittanceParams& params);

}  // namespace base_admittance
}  // namespace wbc
