#pragma once

// Test-only reference computations. Nothing here calls into the code paths
// it is used to check.

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "wbc/rigid_body_model.hpp"

namespace wbc::oracle {

inline Eigen::Matrix4d homogeneous(const Eigen::Matrix3d& r, const Eigen::Vector3d& p) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t.topLeftCorner<3, 3>() = r;
  t.topRightCorner<3, 1>() = p;
  return t;
}

// Rodrigues: I + sinθ K + (1 − cosθ) K².
inline Eigen::Matrix3d rodrigues(const Eigen::Vector3d& axis, double angle) {
  Eigen::Matrix3d k;
  k << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
  return Eigen::Matrix3d::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

inline Eigen::Matrix4d as_matrix(const Eigen::Isometry3d& t) {
  return homogeneous(t.linear(), t.translation());
}

/// End-effector pose as a plain product of 4×4 matrices.
inline Eigen::Matrix4d fk_product(const KinematicChain& chain, const Eigen::VectorXd& q) {
  Eigen::Matrix4d t = homogeneous(rodrigues(Eigen::Vector3d::UnitZ(), q[2]),
                                  Eigen::Vector3d(q[0], q[1], 0.0));
  t = t * as_matrix(chain.base_mount);
  for (int i = 0; i < chain.arm_dofs(); ++i) {
    t = t * as_matrix(chain.links[i].origin);
    t = t * homogeneous(rodrigues(chain.links[i].axis, q[3 + i]), Eigen::Vector3d::Zero());
  }
  return t * as_matrix(chain.ee_offset);
}

/// Potential energy of the arm links from plain matrix products.
inline double potential_energy(const KinematicChain& chain, const Eigen::VectorXd& q) {
  Eigen::Matrix4d t = homogeneous(rodrigues(Eigen::Vector3d::UnitZ(), q[2]),
                                  Eigen::Vector3d(q[0], q[1], 0.0));
  t = t * as_matrix(chain.base_mount);
  double v = 0.0;
  for (int i = 0; i < chain.arm_dofs(); ++i) {
    t = t * as_matrix(chain.links[i].origin);
    t = t * homogeneous(rodrigues(chain.links[i].axis, q[3 + i]), Eigen::Vector3d::Zero());
    const Eigen::Vector3d com = (t * chain.links[i].com.homogeneous()).head<3>();
    v -= chain.links[i].mass * chain.gravity.dot(com);
  }
  return v;
}

/// Closed-form dynamics of planar_two_link_chain(l1, l2, m1, m2): joints
/// about y, links along x, so the arm moves in the x-z plane with the angle
/// measured downward. Rod inertias use a 0.01 m radius.
struct TwoLink {
  double l1, l2, m1, m2, g{9.81}, radius{0.01};

  double lc1() const { return 0.5 * l1; }
  double lc2() const { return 0.5 * l2; }
  double i1() const { return m1 * (3 * radius * radius + l1 * l1) / 12.0; }
  double i2() const { return m2 * (3 * radius * radius + l2 * l2) / 12.0; }

  Eigen::Matrix2d mass(double q2) const {
    const double c2 = std::cos(q2);
    Eigen::Matrix2d m;
    m(0, 0) = i1() + i2() + m1 * lc1() * lc1() + m2 * (l1 * l1 + lc2() * lc2() + 2 * l1 * lc2() * c2);
    m(0, 1) = m(1, 0) = i2() + m2 * (lc2() * lc2() + l1 * lc2() * c2);
    m(1, 1) = i2() + m2 * lc2() * lc2();
    return m;
  }

  Eigen::Vector2d coriolis(double q2, double qd1, double qd2) const {
    const double h = m2 * l1 * lc2() * std::sin(q2);
    return {-h * (2 * qd1 * qd2 + qd2 * qd2), h * qd1 * qd1};
  }

  Eigen::Vector2d gravity(double q1, double q2) const {
    const double c1 = std::cos(q1), c12 = std::cos(q1 + q2);
    return {-g * ((m1 * lc1() + m2 * l1) * c1 + m2 * lc2() * c12), -g * m2 * lc2() * c12};
  }
};

inline Eigen::VectorXd random_state_vector(std::mt19937_64& rng, int dofs, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd v(dofs);
  for (int i = 0; i < dofs; ++i) v[i] = u(rng);
  return v;
}

inline JointState random_state(std::mt19937_64& rng, const KinematicChain& chain) {
  JointState s;
  s.q = random_state_vector(rng, chain.dofs(), 2.0);
  s.q.head<3>() *= 0.5;
  s.qd = random_state_vector(rng, chain.dofs(), 1.0);
  return s;
}

/// Rotation vector taking `from` to `to`, world frame.
inline Eigen::Vector3d rotation_delta(const Eigen::Quaterniond& from, const Eigen::Quaterniond& to) {
  const Eigen::AngleAxisd aa(to * from.conjugate());
  double angle = aa.angle();
  Eigen::Vector3d axis = aa.axis();
  if (angle > M_PI) {
    angle -= 2 * M_PI;
  }
  return angle * axis;
}

}  // namespace wbc::oracle
