#include "wbc/rigid_body_model.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace wbc {
namespace {

constexpr int kB = KinematicChain::kBaseDofs;

void check_vector(const KinematicChain& chain, const Eigen::VectorXd& v, const char* what) {
  if (v.size() != chain.dofs()) {
    throw ContractViolation(std::string(what) + ": expected " + std::to_string(chain.dofs()) +
                            " entries, got " + std::to_string(v.size()));
  }
  if (!v.allFinite()) {
    throw ContractViolation(std::string(what) + ": non-finite entry");
  }
}

void check_state(const KinematicChain& chain, const JointState& state) {
  check_vector(chain, state.q, "joint positions");
  check_vector(chain, state.qd, "joint velocities");
}

Eigen::Isometry3d planar_transform(const Eigen::VectorXd& q) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.translation() = Eigen::Vector3d(q[0], q[1], 0.0);
  t.linear() = Eigen::AngleAxisd(q[2], Eigen::Vector3d::UnitZ()).toRotationMatrix();
  return t;
}

// Arm geometry expressed in the platform frame.
struct ArmFrames {
  std::vector<Eigen::Isometry3d> link;
  std::vector<Eigen::Vector3d> axis;
  Eigen::Isometry3d ee;
};

ArmFrames arm_frames(const KinematicChain& chain, const Eigen::VectorXd& q) {
  ArmFrames f;
  const int n = chain.arm_dofs();
  f.link.reserve(n);
  f.axis.reserve(n);
  Eigen::Isometry3d t = chain.base_mount;
  for (int i = 0; i < n; ++i) {
    const Link& link = chain.links[i];
    t = t * link.origin * Eigen::AngleAxisd(q[kB + i], link.axis);
    f.link.push_back(t);
    f.axis.push_back(t.linear() * link.axis);
  }
  f.ee = t * chain.ee_offset;
  return f;
}

// Recursive Newton-Euler on the fixed-mount arm. All vectors live in the
// platform frame; `gravity` is already rotated into it.
Eigen::VectorXd arm_rnea(const KinematicChain& chain, const ArmFrames& f,
                         const Eigen::VectorXd& qd, const Eigen::VectorXd& qdd,
                         const Eigen::Vector3d& gravity) {
  const int n = chain.arm_dofs();
  std::vector<Eigen::Vector3d> force(n), moment(n), com(n);

  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
  Eigen::Vector3d alpha = Eigen::Vector3d::Zero();
  Eigen::Vector3d acc = -gravity;  // linear acceleration of the previous joint origin
  Eigen::Vector3d prev_origin = chain.base_mount.translation();

  for (int i = 0; i < n; ++i) {
    const Link& link = chain.links[i];
    const Eigen::Vector3d& z = f.axis[i];
    const Eigen::Vector3d origin = f.link[i].translation();
    const Eigen::Vector3d r = origin - prev_origin;

    acc += alpha.cross(r) + omega.cross(omega.cross(r));
    const Eigen::Vector3d omega_next = omega + z * qd[kB + i];
    alpha += z * qdd[kB + i] + omega.cross(z * qd[kB + i]);
    omega = omega_next;

    const Eigen::Matrix3d& rot = f.link[i].linear();
    com[i] = f.link[i] * link.com;
    const Eigen::Vector3d rc = com[i] - origin;
    const Eigen::Vector3d acc_com = acc + alpha.cross(rc) + omega.cross(omega.cross(rc));
    const Eigen::Matrix3d inertia = rot * link.inertia * rot.transpose();

    force[i] = link.mass * acc_com;
    moment[i] = inertia * alpha + omega.cross(inertia * omega);
    prev_origin = origin;
  }

  Eigen::VectorXd tau(n);
  Eigen::Vector3d f_next = Eigen::Vector3d::Zero();
  Eigen::Vector3d n_next = Eigen::Vector3d::Zero();
  for (int i = n - 1; i >= 0; --i) {
    const Eigen::Vector3d origin = f.link[i].translation();
    Eigen::Vector3d n_i = moment[i] + (com[i] - origin).cross(force[i]) + n_next;
    if (i + 1 < n) {
      n_i += (f.link[i + 1].translation() - origin).cross(f_next);
    }
    f_next = force[i] + f_next;
    n_next = n_i;
    tau[i] = f.axis[i].dot(n_i);
  }
  return tau;
}

Eigen::Vector3d platform_gravity(const KinematicChain& chain, const Eigen::VectorXd& q) {
  return planar_transform(q).linear().transpose() * chain.gravity;
}

Eigen::Matrix3d rod_inertia(double mass, double length, double radius, int long_axis) {
  const double across = mass * (3.0 * radius * radius + length * length) / 12.0;
  const double along = 0.5 * mass * radius * radius;
  Eigen::Matrix3d inertia = Eigen::Matrix3d::Identity() * across;
  inertia(long_axis, long_axis) = along;
  return inertia;
}

}  // namespace

void validate(const KinematicChain& chain) {
  if (chain.arm_dofs() < 2) {
    throw ContractViolation("chain: at least two arm joints are required");
  }
  for (int i = 0; i < chain.arm_dofs(); ++i) {
    const Link& link = chain.links[i];
    const std::string tag = "chain: link " + std::to_string(i) + ": ";
    if (!(link.mass > 0.0) || !std::isfinite(link.mass)) {
      throw ContractViolation(tag + "mass must be positive");
    }
    if (std::abs(link.axis.norm() - 1.0) > 1e-9) {
      throw ContractViolation(tag + "joint axis must be unit-norm");
    }
    if ((link.inertia - link.inertia.transpose()).norm() > 1e-12 * (1.0 + link.inertia.norm())) {
      throw ContractViolation(tag + "inertia must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(link.inertia, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) {
      throw ContractViolation(tag + "inertia must be positive definite");
    }
  }
  validate(chain.base);
}

KinematicChain default_chain() {
  KinematicChain chain;
  chain.base_mount.translation() = Eigen::Vector3d(0.2, 0.0, 0.5);

  struct Segment {
    Eigen::Vector3d offset;  // joint origin in the parent link frame
    Eigen::Vector3d axis;
    double mass;
    double length;  // extent along local z to the next joint
  };
  const Segment segments[] = {
      {{0.0, 0.0, 0.0}, Eigen::Vector3d::UnitZ(), 4.0, 0.333},
      {{0.0, 0.0, 0.333}, Eigen::Vector3d::UnitY(), 3.5, 0.316},
      {{0.0, 0.0, 0.316}, Eigen::Vector3d::UnitZ(), 3.0, 0.2},
      {{0.0825, 0.0, 0.2}, Eigen::Vector3d::UnitY(), 2.5, 0.184},
      {{-0.0825, 0.0, 0.184}, Eigen::Vector3d::UnitZ(), 2.0, 0.2},
      {{0.0, 0.0, 0.2}, Eigen::Vector3d::UnitY(), 1.5, 0.088},
      {{0.088, 0.0, 0.088}, Eigen::Vector3d::UnitZ(), 0.8, 0.107},
  };
  // Each link's COM sits halfway to the next joint origin.
  const int count = static_cast<int>(std::size(segments));
  for (int i = 0; i < count; ++i) {
    Link link;
    link.origin = Eigen::Isometry3d::Identity();
    link.origin.translation() = segments[i].offset;
    link.axis = segments[i].axis;
    link.mass = segments[i].mass;
    const Eigen::Vector3d next =
        i + 1 < count ? segments[i + 1].offset : Eigen::Vector3d(0.0, 0.0, segments[i].length);
    link.com = 0.5 * next;
    link.inertia = rod_inertia(link.mass, next.norm(), 0.05, 2);
    chain.links.push_back(link);
  }
  chain.ee_offset.translation() = Eigen::Vector3d(0.0, 0.0, 0.107);
  return chain;
}

KinematicChain planar_two_link_chain(double l1, double l2, double m1, double m2) {
  KinematicChain chain;
  Link first;
  first.axis = Eigen::Vector3d::UnitY();
  first.mass = m1;
  first.com = Eigen::Vector3d(0.5 * l1, 0.0, 0.0);
  first.inertia = rod_inertia(m1, l1, 0.01, 0);

  Link second;
  second.axis = Eigen::Vector3d::UnitY();
  second.origin.translation() = Eigen::Vector3d(l1, 0.0, 0.0);
  second.mass = m2;
  second.com = Eigen::Vector3d(0.5 * l2, 0.0, 0.0);
  second.inertia = rod_inertia(m2, l2, 0.01, 0);

  chain.links = {first, second};
  chain.ee_offset.translation() = Eigen::Vector3d(l2, 0.0, 0.0);
  return chain;
}

Eigen::VectorXd default_posture(const KinematicChain& chain) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(chain.dofs());
  if (chain.arm_dofs() == 7) {
    q.tail(7) << 0.0, 0.4, 0.0, 1.6, 0.0, 1.1, 0.0;
  } else {
    for (int i = 0; i < chain.arm_dofs(); ++i) {
      q[kB + i] = (i % 2 == 0) ? 0.3 : 0.6;
    }
  }
  return q;
}

KinematicChain with_payload(const KinematicChain& chain, double mass) {
  if (!(mass >= 0.0)) {
    throw ContractViolation("payload mass must be >= 0");
  }
  KinematicChain out = chain;
  if (mass == 0.0 || out.links.empty()) {
    return out;
  }
  Link& last = out.links.back();
  const Eigen::Vector3d point = chain.ee_offset.translation();
  const double total = last.mass + mass;
  const Eigen::Vector3d com = (last.mass * last.com + mass * point) / total;
  // Parallel-axis shift of both bodies to the combined COM.
  auto shift = [](double m, const Eigen::Vector3d& d) {
    return m * (d.squaredNorm() * Eigen::Matrix3d::Identity() - d * d.transpose());
  };
  last.inertia = last.inertia + shift(last.mass, last.com - com) + shift(mass, point - com);
  last.com = com;
  last.mass = total;
  return out;
}

SpatialState forward_kinematics(const KinematicChain& chain, const JointState& state) {
  check_state(chain, state);
  const ArmFrames f = arm_frames(chain, state.q);
  const Eigen::Isometry3d ee = planar_transform(state.q) * f.ee;
  SpatialState out;
  out.pose.position = ee.translation();
  out.pose.orientation = Eigen::Quaterniond(ee.linear()).normalized();
  out.twist = jacobian_ee(chain, state) * state.qd;
  return out;
}

std::vector<Eigen::Isometry3d> link_poses(const KinematicChain& chain, const Eigen::VectorXd& q) {
  check_vector(chain, q, "joint positions");
  ArmFrames f = arm_frames(chain, q);
  const Eigen::Isometry3d base = planar_transform(q);
  for (auto& t : f.link) {
    t = base * t;
  }
  return f.link;
}

Eigen::MatrixXd jacobian_ee(const KinematicChain& chain, const JointState& state) {
  check_state(chain, state);
  const Eigen::VectorXd& q = state.q;
  const ArmFrames f = arm_frames(chain, q);
  const Eigen::Isometry3d base = planar_transform(q);
  const Eigen::Vector3d p_ee = base * f.ee.translation();

  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(6, chain.dofs());
  j(0, 0) = 1.0;
  j(1, 1) = 1.0;
  const Eigen::Vector3d yaw_axis = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d yaw_point(q[0], q[1], 0.0);
  j.block<3, 1>(0, 2) = yaw_axis.cross(p_ee - yaw_point);
  j.block<3, 1>(3, 2) = yaw_axis;

  for (int i = 0; i < chain.arm_dofs(); ++i) {
    const Eigen::Vector3d z = base.linear() * f.axis[i];
    const Eigen::Vector3d p = base * f.link[i].translation();
    j.block<3, 1>(0, kB + i) = z.cross(p_ee - p);
    j.block<3, 1>(3, kB + i) = z;
  }
  return j;
}

Eigen::MatrixXd mass_matrix(const KinematicChain& chain, const JointState& state) {
  check_state(chain, state);
  const int n = chain.arm_dofs();
  const ArmFrames f = arm_frames(chain, state.q);

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(chain.dofs(), chain.dofs());
  m.topLeftCorner<kB, kB>() = chain.base.m_adm.asDiagonal();

  // Composite body of links k..n-1: mass, COM and rotational inertia about
  // that COM, accumulated tip to root.
  std::vector<double> c_mass(n);
  std::vector<Eigen::Vector3d> c_com(n);
  std::vector<Eigen::Matrix3d> c_inertia(n);
  double acc_mass = 0.0;
  Eigen::Vector3d acc_moment = Eigen::Vector3d::Zero();  // Σ m c
  for (int k = n - 1; k >= 0; --k) {
    const Link& link = chain.links[k];
    acc_mass += link.mass;
    acc_moment += link.mass * (f.link[k] * link.com);
    c_mass[k] = acc_mass;
    c_com[k] = acc_moment / acc_mass;
  }
  for (int k = 0; k < n; ++k) {
    Eigen::Matrix3d inertia = Eigen::Matrix3d::Zero();
    for (int j = k; j < n; ++j) {
      const Link& link = chain.links[j];
      const Eigen::Matrix3d& rot = f.link[j].linear();
      const Eigen::Vector3d d = f.link[j] * link.com - c_com[k];
      inertia += rot * link.inertia * rot.transpose() +
                 link.mass * (d.squaredNorm() * Eigen::Matrix3d::Identity() - d * d.transpose());
    }
    c_inertia[k] = inertia;
  }

  // Unit acceleration of joint k moves composite k rigidly; joint i <= k
  // feels the resulting wrench about its own origin.
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector3d& zk = f.axis[k];
    const Eigen::Vector3d pk = f.link[k].translation();
    const Eigen::Vector3d force = c_mass[k] * zk.cross(c_com[k] - pk);
    const Eigen::Vector3d moment_com = c_inertia[k] * zk;
    for (int i = 0; i <= k; ++i) {
      const Eigen::Vector3d pi = f.link[i].translation();
      const double value = f.axis[i].dot(moment_com + (c_com[k] - pi).cross(force));
      m(kB + i, kB + k) = value;
      m(kB + k, kB + i) = value;
    }
  }
  return m;
}

Eigen::VectorXd bias_forces(const KinematicChain& chain, const JointState& state) {
  check_state(chain, state);
  Eigen::VectorXd out(chain.dofs());
  out.head<kB>() = chain.base.d_adm.cwiseProduct(state.qd.head<kB>());
  const ArmFrames f = arm_frames(chain, state.q);
  out.tail(chain.arm_dofs()) = arm_rnea(chain, f, state.qd, Eigen::VectorXd::Zero(chain.dofs()),
                                        Eigen::Vector3d::Zero());
  return out;
}

Eigen::VectorXd gravity_vector(const KinematicChain& chain, const JointState& state) {
  check_state(chain, state);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(chain.dofs());
  const ArmFrames f = arm_frames(chain, state.q);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(chain.dofs());
  out.tail(chain.arm_dofs()) = arm_rnea(chain, f, zero, zero, platform_gravity(chain, state.q));
  return out;
}

Eigen::VectorXd inverse_dynamics(const KinematicChain& chain, const JointState& state,
                                 const Eigen::VectorXd& qdd) {
  check_state(chain, state);
  check_vector(chain, qdd, "joint accelerations");
  Eigen::VectorXd out(chain.dofs());
  out.head<kB>() = chain.base.m_adm.cwiseProduct(qdd.head<kB>()) +
                   chain.base.d_adm.cwiseProduct(state.qd.head<kB>());
  const ArmFrames f = arm_frames(chain, state.q);
  out.tail(chain.arm_dofs()) =
      arm_rnea(chain, f, state.qd, qdd, platform_gravity(chain, state.q));
  return out;
}

double arm_kinetic_energy(const KinematicChain& chain, const JointState& state) {
  const Eigen::MatrixXd m = mass_matrix(chain, state);
  const int n = chain.arm_dofs();
  const Eigen::VectorXd qd = state.qd.tail(n);
  return 0.5 * qd.dot(m.bottomRightCorner(n, n) * qd);
}

double arm_potential_energy(const KinematicChain& chain, const Eigen::VectorXd& q) {
  const auto poses = link_poses(chain, q);
  double energy = 0.0;
  for (int i = 0; i < chain.arm_dofs(); ++i) {
    energy -= chain.links[i].mass * chain.gravity.dot(poses[i] * chain.links[i].com);
  }
  return energy;
}

}  // namespace wbc
