#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wbc/admittance_interface.hpp"
#include "wbc/base_velocity_admittance.hpp"
#include "wbc/hmi_state_machine.hpp"
#include "wbc/rigid_body_model.hpp"
#include "wbc/wholebody_controller.hpp"

namespace wbc {

/// Human wrench sample: world-aligned force/torque applied at the
/// end-effector origin.
struct WrenchSample {
  double t{0.0};
  Vector6d wrench{Vector6d::Zero()};
};

struct Waypoint {
  double t{0.0};
  Eigen::Vector3d position{Eigen::Vector3d::Zero()};
};

/// Tool picked up by the gripper; attaches as a point mass at the
/// end-effector when the gripper closes.
struct Payload {
  double mass{0.0};
};

struct Rates {
  double control{1000.0};
  double base{50.0};
  double hmi{200.0};
};

struct Scenario {
  std::string name{"scenario"};
  KinematicChain chain{default_chain()};
  JointState initial;
  ImpedanceGains gains;
  PriorityWeights manipulation{PriorityWeights::manipulation()};
  PriorityWeights locomotion{PriorityWeights::locomotion()};
  AdmittancePresets presets{default_admittance_presets()};
  InterfaceState initial_interface;
  FrameOffset ft_offset;
  std::vector<WrenchSample> human_wrench;  // piecewise linear, zero outside
  std::vector<PressEvent> presses;
  double debounce_window{hmi::kDebounceWindow};
  Payload payload;
  std::vector<Waypoint> path;
  double duration{1.0};
  std::uint64_t seed{0};
  double wrench_noise_std{0.0};  // N and N·m, drawn per control tick
  bool coriolis_compensation{true};
  Rates rates;
};

/// Scenario on `chain` at its default posture with default gains.
Scenario make_scenario(const KinematicChain& chain = default_chain());

/// Throws ContractViolation describing the first broken invariant.
void validate(const Scenario& scenario);

struct SimRecord {
  double t{0.0};
  Eigen::VectorXd q;
  Eigen::VectorXd qd;
  Pose ee_pose;
  Vector6d ee_twist{Vector6d::Zero()};
  Eigen::VectorXd tau;
  Vector6d f_m{Vector6d::Zero()};
  Vector6d f_cartesian{Vector6d::Zero()};
  Pose x_d;
  Eigen::Vector3d base_command{Eigen::Vector3d::Zero()};
  InterfaceState interface;
};

struct SimEvent {
  double t{0.0};
  std::string kind;  // button, admittance, level, gripper, payload, mode, damped, singularity
  int button{0};
  std::string detail;
};

struct SimTrace {
  std::vector<SimRecord> records;
  std::vector<SimEvent> events;
  bool truncated{false};
  std::string termination;
  double total_mass_final{0.0};

  std::vector<int> button_sequence() const;
};

namespace sim {

/// Fixed-step closed loop. Every control tick: deliver due HMI messages
/// (every hmi period), advance the admittance reference, evaluate the
/// controller, update the held platform velocity (every base period),
/// record, then integrate the arm with semi-implicit Euler and the platform
/// with its held velocity.
SimTrace run(const Scenario& scenario);

/// Piecewise-linear interpolation of the wrench profile; zero outside it.
Vector6d wrench_at(const std::vector<WrenchSample>& profile, double t);
/// Piecewise-linear interpolation of the path; clamped at the ends.
Eigen::Vector3d path_at(const std::vector<Waypoint>& path, double t);

/// RMS end-effector distance to the time-parameterized path over its span;
/// zero when the scenario has no path.
double path_rms_error(const Scenario& scenario, const SimTrace& trace);

/// Grasp and carry: activate, close the gripper on the 1.5 kg tool,
/// switch to locomotion, then a scripted push carries the robot forward.
Scenario scripted_phase1(double push_force = 15.0, double payload_mass = 1.5);

/// Painting: starts holding the tool in locomotion, switches to
/// manipulation, then is guided along two wall paths, each back and forth.
Scenario scripted_phase2(double path_length = 0.3, double payload_mass = 1.5);

}  // namespace sim
}  // namespace wbc
