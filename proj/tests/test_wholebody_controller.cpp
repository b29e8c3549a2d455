#include <doctest.h>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "oracles.hpp"
#include "wbc/wholebody_controller.hpp"

using namespace wbc;
using namespace wbc::controller;

namespace {

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int n) {
  const Eigen::MatrixXd a = oracle::random_state_vector(rng, n * n, 1.0).reshaped(n, n);
  return a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
}

// 3 platform + 3 arm joints, so the Jacobian is square.
KinematicChain square_chain() {
  KinematicChain chain = default_chain();
  chain.links.resize(3);
  chain.links[0].axis = Eigen::Vector3d::UnitY();
  chain.links[1].axis = Eigen::Vector3d::UnitX();
  chain.links[2].axis = Eigen::Vector3d::UnitY();
  chain.links[2].origin.translation() = Eigen::Vector3d(0.1, 0.05, 0.316);
  chain.ee_offset.translation() = Eigen::Vector3d(0.2, 0.1, 0.3);
  return chain;
}

double min_sv(const Eigen::MatrixXd& j) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(j).singularValues().minCoeff();
}

// Random state of the default chain whose Jacobian is comfortably full rank.
JointState well_conditioned_state(std::mt19937_64& rng, const KinematicChain& chain) {
  for (;;) {
    JointState s = oracle::random_state(rng, chain);
    if (min_sv(jacobian_ee(chain, s)) > 1e-2) return s;
  }
}

}  // namespace

TEST_SUITE("wholebody_controller") {

TEST_CASE("weight matrix: identity priorities give the inverse inertia") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd m = random_spd(rng, 10);
  const Eigen::MatrixXd w = weight_matrix({1.0, 1.0, PriorityMode::manipulation}, m);
  CHECK((w - m.inverse()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("weight matrix: unit inertia with the manipulation weights") {
  const Eigen::MatrixXd w = weight_matrix(PriorityWeights::manipulation(),
                                          Eigen::MatrixXd::Identity(10, 10));
  Eigen::VectorXd expected(10);
  expected << 25, 25, 25, 1, 1, 1, 1, 1, 1, 1;
  CHECK((w - Eigen::MatrixXd(expected.asDiagonal())).norm() < 1e-14);
}

TEST_CASE("weight matrix is symmetric positive definite") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> eta(0.2, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::MatrixXd m = random_spd(rng, 10);
    const Eigen::MatrixXd w = weight_matrix({eta(rng), eta(rng), PriorityMode::manipulation}, m);
    CHECK((w - w.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(w.llt().info() == Eigen::Success);
  }
}

TEST_CASE("weight matrix rejects indefinite inertia") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(10, 10);
  m(4, 4) = -1.0;
  CHECK_THROWS_AS(weight_matrix(PriorityWeights::manipulation(), m), NumericalError);
}

TEST_CASE("priority weights validation") {
  CHECK_NOTHROW(validate(PriorityWeights::manipulation()));
  CHECK_NOTHROW(validate(PriorityWeights::locomotion()));
  CHECK_THROWS_AS(validate(PriorityWeights{1.0, 3.0, PriorityMode::manipulation}), ContractViolation);
  CHECK_THROWS_AS(validate(PriorityWeights{5.0, 1.0, PriorityMode::locomotion}), ContractViolation);
  CHECK_THROWS_AS(validate(PriorityWeights{-1.0, 1.0, PriorityMode::locomotion}), ContractViolation);
}

TEST_CASE("weighted inertia reduces to the square-Jacobian form") {
  const KinematicChain chain = square_chain();
  std::mt19937_64 rng(3);
  int checked = 0;
  while (checked < 50) {
    const JointState s = oracle::random_state(rng, chain);
    const Eigen::MatrixXd j = jacobian_ee(chain, s);
    if (min_sv(j) < 0.05) continue;
    const Eigen::MatrixXd m = mass_matrix(chain, s);
    const PriorityWeights weights = PriorityWeights::locomotion();
    const Eigen::MatrixXd w = weight_matrix(weights, m);
    const Eigen::MatrixXd j_inv = j.inverse();
    const Eigen::MatrixXd expected = j_inv.transpose() * m * w * m * j_inv;
    const TaskInertias t = task_inertias(j, m, weights);
    CHECK(!t.damped);
    CHECK((t.lambda_w - expected).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + expected.norm()));
    ++checked;
  }
}

TEST_CASE("weighted inertia equals the Cartesian inertia when H = I") {
  std::mt19937_64 rng(4);
  const KinematicChain chain = default_chain();
  for (int trial = 0; trial < 50; ++trial) {
    const JointState s = well_conditioned_state(rng, chain);
    const TaskInertias t = task_inertias(jacobian_ee(chain, s), mass_matrix(chain, s),
                                         {1.0, 1.0, PriorityMode::manipulation});
    CHECK((t.lambda_w - t.lambda).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + t.lambda.norm()));
  }
}

TEST_CASE("task inertias are symmetric positive definite") {
  std::mt19937_64 rng(5);
  const KinematicChain chain = default_chain();
  for (int trial = 0; trial < 200; ++trial) {
    const JointState s = well_conditioned_state(rng, chain);
    const TaskInertias t = task_inertias(jacobian_ee(chain, s), mass_matrix(chain, s),
                                         PriorityWeights::manipulation());
    for (const Matrix6d* a : {&t.lambda, &t.lambda_w}) {
      CHECK((*a - a->transpose()).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + a->norm()));
      CHECK(a->llt().info() == Eigen::Success);
    }
  }
}

TEST_CASE("rank-deficient Jacobian reports its smallest singular value") {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(6, 10);
  for (int i = 0; i < 5; ++i) j(i, i) = 1.0;
  try {
    task_inertias(j, Eigen::MatrixXd::Identity(10, 10), PriorityWeights::manipulation());
    FAIL("expected a singularity error");
  } catch (const SingularityError& e) {
    CHECK(e.min_singular_value() < kRankTolerance);
    CHECK(std::string(e.what()).find("singular value") != std::string::npos);
  }
}

TEST_CASE("near-singular tasks are damped and flagged") {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(6, 10);
  for (int i = 0; i < 6; ++i) j(i, i) = 1.0;
  j(5, 5) = 1e-5;
  const TaskInertias t = task_inertias(j, Eigen::MatrixXd::Identity(10, 10),
                                       {1.0, 1.0, PriorityMode::manipulation});
  CHECK(t.damped);
  CHECK(t.lambda_w.allFinite());
  CHECK(t.lambda_w(5, 5) <= 1.0 / kDampingLambda);
}

TEST_CASE("cartesian impedance force") {
  ImpedanceGains gains;
  gains.k_cart.setConstant(100.0);
  gains.d_cart.setConstant(20.0);
  SpatialState x;
  Pose x_d;
  CHECK(cartesian_impedance_force(x, x_d, gains).norm() == 0.0);

  x.pose.position.x() = 0.1;  // ahead of the target: pulled back
  CHECK(cartesian_impedance_force(x, x_d, gains)[0] == doctest::Approx(-10.0));
  x.pose.position.x() = 0.0;
  x_d.position.x() = 0.1;  // target ahead: pulled forward
  CHECK(cartesian_impedance_force(x, x_d, gains)[0] == doctest::Approx(10.0));

  x_d = Pose{};
  x.twist[0] = 1.0;
  const Vector6d f = cartesian_impedance_force(x, x_d, gains);
  CHECK(f[0] == doctest::Approx(-20.0));
  CHECK(f.tail<5>().norm() == 0.0);

  // Small rotation about z: restoring moment −K·angle.
  x = SpatialState{};
  x.pose.orientation = Eigen::AngleAxisd(1e-4, Eigen::Vector3d::UnitZ());
  CHECK(cartesian_impedance_force(x, x_d, gains)[5] == doctest::Approx(-100.0 * 1e-4).epsilon(1e-6));
  // q and −q describe the same orientation.
  x.pose.orientation.coeffs() *= -1.0;
  CHECK(cartesian_impedance_force(x, x_d, gains)[5] == doctest::Approx(-100.0 * 1e-4).epsilon(1e-6));
}

TEST_CASE("null-space joint impedance") {
  ImpedanceGains gains;
  gains.q_0 = Eigen::VectorXd::Zero(10);
  gains.k_joint = Eigen::VectorXd::Constant(10, 10.0);
  gains.d_joint = Eigen::VectorXd::Constant(10, 2.0);
  JointState s = JointState::zero(10);
  CHECK(nullspace_torque(s, gains).norm() == 0.0);
  s.q[4] = 0.5;
  CHECK((nullspace_torque(s, gains) + 5.0 * Eigen::VectorXd::Unit(10, 4)).norm() < 1e-15);
  s.q.setZero();
  s.qd[6] = 1.0;
  CHECK((nullspace_torque(s, gains) + 2.0 * Eigen::VectorXd::Unit(10, 6)).norm() < 1e-15);
}

TEST_CASE("zero task and posture leave only the compensation terms") {
  const KinematicChain chain = default_chain();
  std::mt19937_64 rng(6);
  const JointState s = well_conditioned_state(rng, chain);
  ImpedanceGains gains = default_gains(chain, s.q);
  gains.d_cart.setZero();
  gains.d_joint.setZero();
  const Pose x_d = forward_kinematics(chain, s).pose;
  const ControlOutput out =
      compute_torques(chain, s, x_d, gains, PriorityWeights::manipulation());
  CHECK(out.f_cartesian.norm() == 0.0);
  CHECK(out.tau_task.norm() == 0.0);
  CHECK(out.tau_null.norm() == 0.0);
  Eigen::VectorXd expected = gravity_vector(chain, s) + bias_forces(chain, s);
  expected.head<3>().setZero();
  CHECK((out.tau - expected).norm() < 1e-12);
}

TEST_CASE("task torque realizes F through the dynamically consistent Jacobian") {
  const KinematicChain chain = default_chain();
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const JointState s = well_conditioned_state(rng, chain);
    const Eigen::MatrixXd j = jacobian_ee(chain, s);
    const Eigen::MatrixXd m = mass_matrix(chain, s);
    const Vector6d f = oracle::random_state_vector(rng, 6, 50.0);
    const Eigen::VectorXd tau0 = oracle::random_state_vector(rng, 10, 20.0);
    const PriorityWeights weights =
        trial % 2 ? PriorityWeights::manipulation() : PriorityWeights::locomotion();
    const TorqueSplit split = weighted_torque(j, m, weights, f, tau0);
    const Matrix6d lambda = task_inertias(j, m, weights).lambda;
    const Eigen::MatrixXd j_bar = m.llt().solve(j.transpose()) * lambda;
    CHECK((j_bar.transpose() * split.task - f).norm() <= 1e-9 * f.norm());
    CHECK((j_bar.transpose() * split.null).norm() <= 1e-9 * (1.0 + tau0.norm()));
  }
}

TEST_CASE("with H = I the posture projector is the dynamically consistent one") {
  const KinematicChain chain = default_chain();
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const JointState s = well_conditioned_state(rng, chain);
    const Eigen::MatrixXd j = jacobian_ee(chain, s);
    const Eigen::MatrixXd m = mass_matrix(chain, s);
    const PriorityWeights unit{1.0, 1.0, PriorityMode::manipulation};
    const Matrix6d lambda = task_inertias(j, m, unit).lambda;
    const Eigen::MatrixXd j_bar = m.llt().solve(j.transpose()) * lambda;
    const Eigen::MatrixXd classical =
        Eigen::MatrixXd::Identity(10, 10) - j.transpose() * j_bar.transpose();
    CHECK((nullspace_projector(j, m, unit) - classical).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("scaling both priorities leaves the task torque unchanged") {
  const KinematicChain chain = default_chain();
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const JointState s = well_conditioned_state(rng, chain);
    const Eigen::MatrixXd j = jacobian_ee(chain, s);
    const Eigen::MatrixXd m = mass_matrix(chain, s);
    const Vector6d f = oracle::random_state_vector(rng, 6, 30.0);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(10);
    const auto a = weighted_torque(j, m, {1.0, 3.0, PriorityMode::locomotion}, f, zero);
    const auto b = weighted_torque(j, m, {7.0, 21.0, PriorityMode::locomotion}, f, zero);
    CHECK((a.task - b.task).norm() <= 1e-9 * (1.0 + a.task.norm()));
  }
}

TEST_CASE("manipulation weights move the platform less than locomotion weights") {
  const KinematicChain chain = default_chain();
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const JointState s = well_conditioned_state(rng, chain);
    const Eigen::MatrixXd j = jacobian_ee(chain, s);
    const Eigen::MatrixXd m = mass_matrix(chain, s);
    const Vector6d f = oracle::random_state_vector(rng, 6, 30.0);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(10);
    const Eigen::VectorXd acc_manip =
        m.llt().solve(weighted_torque(j, m, PriorityWeights::manipulation(), f, zero).task);
    const Eigen::VectorXd acc_loco =
        m.llt().solve(weighted_torque(j, m, PriorityWeights::locomotion(), f, zero).task);
    // Ordering holds in the inertia-weighted norms of each block.
    const auto base_norm = [&](const Eigen::VectorXd& a) {
      return a.head<3>().dot(m.topLeftCorner<3, 3>() * a.head<3>());
    };
    const auto arm_norm = [&](const Eigen::VectorXd& a) {
      return a.tail<7>().dot(m.bottomRightCorner<7, 7>() * a.tail<7>());
    };
    CHECK(base_norm(acc_manip) < base_norm(acc_loco));
    CHECK(acc_manip.head<3>().norm() < acc_loco.head<3>().norm());
    CHECK(arm_norm(acc_manip) > arm_norm(acc_loco));
  }
}

TEST_CASE("default gains") {
  const KinematicChain chain = default_chain();
  const ImpedanceGains g = default_gains(chain, default_posture(chain));
  CHECK_NOTHROW(validate(g, chain.dofs()));
  CHECK(g.k_cart[0] == 500.0);
  CHECK(g.k_cart[5] == 50.0);
  CHECK((g.d_cart.array() > 0.0).all());
  CHECK(g.k_joint.head<3>().norm() == 0.0);
  CHECK(g.k_joint[5] == 10.0);
  CHECK(g.d_joint[9] == 2.0);
}

}  // TEST_SUITE
