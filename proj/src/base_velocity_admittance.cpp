#include "wbc/base_velocity_admittance.hpp"

#include <cmath>

namespace wbc {

void validate(const BaseAdmittanceParams& params) {
  for (int i = 0; i < 3; ++i) {
    if (!(params.m_adm[i] > 0.0) || !(params.d_adm[i] > 0.0)) {
      throw ContractViolation("base admittance: inertia and damping diagonals must be > 0");
    }
  }
}

namespace base_admittance {

BaseVelocityCommand step(const BaseVelocityCommand& current,
                         const BaseAdmittanceParams& params,
                         const Eigen::Vector3d& tau_vir, double dt) {
  if (!(dt > 0.0)) {
    throw ContractViolation("base admittance: dt must be positive");
  }
  const Eigen::Vector3d qdd =
      (tau_vir - params.d_adm.cwiseProduct(current.qd_m)).cwiseQuotient(params.m_adm);
  BaseVelocityCommand next;
  next.qd_m = current.qd_m + dt * qdd;
  next.stamp = current.stamp + dt;
  return next;
}

double time_constant(const BaseAdmittanceParams& params) {
  return params.m_adm.cwiseQuotient(params.d_adm).maxCoeff();
}

}  // namespace base_admittance
}  // namespace wbc
