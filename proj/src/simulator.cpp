#include "wbc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Cholesky>

namespace wbc {
namespace {

constexpr int kB = KinematicChain::kBaseDofs;

long long ratio(double fast, double slow, const char* what) {
  const double r = fast / slow;
  const long long n = std::llround(r);
  if (n < 1 || std::abs(r - static_cast<double>(n)) > 1e-9) {
    throw ContractViolation(std::string("rates: ") + what +
                            " must divide the control rate by an integer");
  }
  return n;
}

// Button that turns `before` into `after`; 0 if nothing changed.
int changed_button(const InterfaceState& before, const InterfaceState& after) {
  if (before.admittance_active != after.admittance_active) return 1;
  if (before.admittance_level != after.admittance_level) return 2;
  if (before.gripper_closed != after.gripper_closed) return 3;
  if (before.priority_mode != after.priority_mode) return 4;
  return 0;
}

double total_arm_mass(const KinematicChain& chain) {
  double mass = 0.0;
  for (const auto& link : chain.links) mass += link.mass;
  return mass;
}

WrenchReading rotate(const Eigen::Matrix3d& r, const WrenchReading& w, WrenchFrame frame) {
  return {r * w.force, r * w.torque, frame};
}

}  // namespace

std::vector<int> SimTrace::button_sequence() const {
  std::vector<int> out;
  for (const auto& e : events) {
    if (e.kind == "button") out.push_back(e.button);
  }
  return out;
}

Scenario make_scenario(const KinematicChain& chain) {
  Scenario s;
  s.chain = chain;
  s.initial = JointState::zero(chain.dofs());
  s.initial.q = default_posture(chain);
  s.gains = default_gains(chain, s.initial.q);
  return s;
}

void validate(const Scenario& s) {
  validate(s.chain);
  if (s.initial.q.size() != s.chain.dofs() || s.initial.qd.size() != s.chain.dofs() ||
      !s.initial.q.allFinite() || !s.initial.qd.allFinite()) {
    throw ContractViolation("scenario: initial state must have " +
                            std::to_string(s.chain.dofs()) + " finite entries");
  }
  validate(s.gains, s.chain.dofs());
  if (s.manipulation.mode != PriorityMode::manipulation ||
      s.locomotion.mode != PriorityMode::locomotion) {
    throw ContractViolation("scenario: priority presets carry the wrong mode");
  }
  validate(s.manipulation);
  validate(s.locomotion);
  validate(s.presets);
  validate(s.ft_offset);
  if (s.initial_interface.admittance_level < 0 || s.initial_interface.admittance_level > 2) {
    throw ContractViolation("scenario: initial admittance level must be 0..2");
  }
  if (!(s.duration > 0.0)) {
    throw ContractViolation("scenario: duration must be > 0");
  }
  if (!(s.payload.mass >= 0.0)) {
    throw ContractViolation("scenario: payload mass must be >= 0");
  }
  if (!(s.wrench_noise_std >= 0.0)) {
    throw ContractViolation("scenario: wrench noise must be >= 0");
  }
  for (std::size_t i = 1; i < s.human_wrench.size(); ++i) {
    if (s.human_wrench[i].t < s.human_wrench[i - 1].t) {
      throw ContractViolation("scenario: wrench profile times must be sorted");
    }
  }
  for (std::size_t i = 1; i < s.path.size(); ++i) {
    if (s.path[i].t < s.path[i - 1].t) {
      throw ContractViolation("scenario: path times must be sorted");
    }
  }
  for (std::size_t i = 0; i < s.presses.size(); ++i) {
    if (s.presses[i].button < 1 || s.presses[i].button > 4) {
      throw ContractViolation("scenario: button ids must be 1..4");
    }
    if (i > 0 && s.presses[i].time < s.presses[i - 1].time) {
      throw ContractViolation("scenario: button presses must be sorted");
    }
  }
  ratio(s.rates.control, s.rates.base, "base rate");
  ratio(s.rates.control, s.rates.hmi, "hmi rate");
}

namespace sim {

Vector6d wrench_at(const std::vector<WrenchSample>& profile, double t) {
  if (profile.empty() || t < profile.front().t || t > profile.back().t) {
    return Vector6d::Zero();
  }
  auto hi = std::upper_bound(profile.begin(), profile.end(), t,
                             [](double v, const WrenchSample& s) { return v < s.t; });
  if (hi == profile.end()) return profile.back().wrench;
  auto lo = std::prev(hi);
  const double span = hi->t - lo->t;
  if (span <= 0.0) return hi->wrench;
  const double a = (t - lo->t) / span;
  return (1.0 - a) * lo->wrench + a * hi->wrench;
}

Eigen::Vector3d path_at(const std::vector<Waypoint>& path, double t) {
  if (path.empty()) return Eigen::Vector3d::Zero();
  if (t <= path.front().t) return path.front().position;
  if (t >= path.back().t) return path.back().position;
  auto hi = std::upper_bound(path.begin(), path.end(), t,
                             [](double v, const Waypoint& w) { return v < w.t; });
  auto lo = std::prev(hi);
  const double span = hi->t - lo->t;
  if (span <= 0.0) return hi->position;
  const double a = (t - lo->t) / span;
  return (1.0 - a) * lo->position + a * hi->position;
}

SimTrace run(const Scenario& scenario) {
  validate(scenario);
  const Rates& rates = scenario.rates;
  const double dt = 1.0 / rates.control;
  const long long base_div = ratio(rates.control, rates.base, "base rate");
  const long long hmi_div = ratio(rates.control, rates.hmi, "hmi rate");
  const double base_dt = 1.0 / rates.base;
  const long long steps = std::llround(scenario.duration * rates.control);
  const int n = scenario.chain.arm_dofs();

  const KinematicChain& bare = scenario.chain;
  const KinematicChain loaded = with_payload(bare, scenario.payload.mass);

  const auto messages = hmi::poll_loop(hmi::debounce(scenario.presses, scenario.debounce_window),
                                       rates.hmi, scenario.initial_interface);
  std::size_t next_message = 0;
  BoundedQueue<ButtonMessage> wire(64);

  InterfaceState iface = scenario.initial_interface;
  const KinematicChain* chain = iface.gripper_closed ? &loaded : &bare;

  JointState s = scenario.initial;
  BaseVelocityCommand base_cmd{s.qd.head<kB>(), 0.0};
  AdmittanceState adm = admittance::hold(forward_kinematics(*chain, s).pose);
  Vector6d f_a = Vector6d::Zero();

  std::mt19937_64 rng(scenario.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  SimTrace trace;
  trace.records.reserve(static_cast<std::size_t>(steps) + 1);
  bool was_damped = false;

  for (long long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;

    if (k % hmi_div == 0) {
      while (next_message < messages.size() &&
             std::llround(messages[next_message].stamp * rates.control) <= k) {
        if (!wire.push(messages[next_message])) break;
        ++next_message;
      }
      while (auto msg = wire.pop()) {
        const InterfaceState before = iface;
        iface = hmi::decode(*msg);
        const int button = changed_button(before, iface);
        trace.events.push_back({t, "button", button, ""});
        const Pose current = forward_kinematics(*chain, s).pose;
        if (before.admittance_active != iface.admittance_active) {
          adm = admittance::hold(current);
          trace.events.push_back({t, "admittance", 1, iface.admittance_active ? "on" : "off"});
        }
        if (before.admittance_level != iface.admittance_level) {
          trace.events.push_back({t, "level", 2, std::to_string(iface.admittance_level)});
        }
        if (before.gripper_closed != iface.gripper_closed) {
          chain = iface.gripper_closed ? &loaded : &bare;
          trace.events.push_back({t, "gripper", 3, iface.gripper_closed ? "closed" : "open"});
          if (scenario.payload.mass > 0.0) {
            trace.events.push_back({t, "payload", 3, iface.gripper_closed ? "attach" : "detach"});
          }
        }
        if (before.priority_mode != iface.priority_mode) {
          trace.events.push_back({t, "mode", 4, to_string(iface.priority_mode)});
        }
      }
    }

    const SpatialState x = forward_kinematics(*chain, s);
    const Eigen::Matrix3d r_ee = x.pose.orientation.toRotationMatrix();

    Vector6d f_h = wrench_at(scenario.human_wrench, t);
    if (scenario.wrench_noise_std > 0.0) {
      for (int i = 0; i < 6; ++i) f_h[i] += scenario.wrench_noise_std * noise(rng);
    }

    // Sensor round trip: world → end-effector axes → sensor frame and back.
    const WrenchReading f_h_local = rotate(
        r_ee.transpose(), WrenchReading::from(f_h, WrenchFrame::end_effector),
        WrenchFrame::end_effector);
    const WrenchReading sensed = admittance::to_sensor_frame(f_h_local, scenario.ft_offset);
    const WrenchReading f_h_ee =
        rotate(r_ee, admittance::transform_wrench(sensed, scenario.ft_offset),
               WrenchFrame::end_effector);
    const WrenchReading f_m = admittance::measured_force(
        f_h_ee, WrenchReading::from(f_a, WrenchFrame::end_effector));

    if (iface.admittance_active) {
      adm = admittance::step(adm, scenario.presets[iface.admittance_level], f_m, dt);
    }

    const PriorityWeights& weights = iface.priority_mode == PriorityMode::manipulation
                                         ? scenario.manipulation
                                         : scenario.locomotion;
    ControlOutput ctrl;
    try {
      ctrl = controller::compute_torques(*chain, s, adm.x_d, scenario.gains, weights,
                                         scenario.coriolis_compensation);
    } catch (const SingularityError& e) {
      trace.truncated = true;
      trace.termination = e.what();
      trace.events.push_back({t, "singularity", 0, e.what()});
      break;
    }
    if (ctrl.damped != was_damped) {
      trace.events.push_back({t, "damped", 0, ctrl.damped ? "on" : "off"});
      was_damped = ctrl.damped;
    }
    f_a = ctrl.f_cartesian;

    if (k % base_div == 0) {
      base_cmd = base_admittance::step(base_cmd, bare.base, ctrl.tau_vir(), base_dt);
      base_cmd.stamp = t;
    }
    s.qd.head<kB>() = base_cmd.qd_m;

    SimRecord rec;
    rec.t = t;
    rec.q = s.q;
    rec.qd = s.qd;
    rec.ee_pose = x.pose;
    rec.ee_twist = jacobian_ee(*chain, s) * s.qd;
    rec.tau = ctrl.tau;
    rec.f_m = f_m.stacked();
    rec.f_cartesian = ctrl.f_cartesian;
    rec.x_d = adm.x_d;
    rec.base_command = base_cmd.qd_m;
    rec.interface = iface;
    trace.records.push_back(std::move(rec));

    if (k == steps) break;

    // Arm plant: M_a q̈_a = τ_a + τ_ext − C_a q̇_a − g_a, with τ_ext = Jᵀ f_h.
    const Eigen::MatrixXd jac = jacobian_ee(*chain, s);
    const Eigen::VectorXd tau_ext = jac.transpose() * f_h;
    const Eigen::VectorXd h = inverse_dynamics(*chain, s, Eigen::VectorXd::Zero(chain->dofs()));
    const Eigen::MatrixXd m_arm = mass_matrix(*chain, s).bottomRightCorner(n, n);
    const Eigen::VectorXd qdd =
        m_arm.llt().solve(ctrl.tau.tail(n) + tau_ext.tail(n) - h.tail(n));

    s.qd.tail(n) += dt * qdd;
    s.q.tail(n) += dt * s.qd.tail(n);
    s.q.head<kB>() += dt * s.qd.head<kB>();

    if (!s.q.allFinite() || !s.qd.allFinite()) {
      trace.truncated = true;
      trace.termination = "non-finite state";
      trace.events.push_back({t + dt, "singularity", 0, "non-finite state"});
      break;
    }
  }
  trace.total_mass_final = total_arm_mass(*chain);
  return trace;
}

double path_rms_error(const Scenario& scenario, const SimTrace& trace) {
  if (scenario.path.empty()) return 0.0;
  const double t0 = scenario.path.front().t;
  const double t1 = scenario.path.back().t;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& rec : trace.records) {
    if (rec.t < t0 || rec.t > t1) continue;
    sum += (rec.ee_pose.position - path_at(scenario.path, rec.t)).squaredNorm();
    ++count;
  }
  return count == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(count));
}

Scenario scripted_phase1(double push_force, double payload_mass) {
  Scenario s = make_scenario();
  s.name = "phase1";
  s.duration = 9.0;
  s.payload.mass = payload_mass;
  s.presses = {{0.5, 1}, {1.0, 3}, {1.5, 4}};

  auto push = [&](double t, double fx) {
    WrenchSample w;
    w.t = t;
    w.wrench[0] = fx;
    s.human_wrench.push_back(w);
  };
  push(2.0, 0.0);
  push(2.3, push_force);
  push(6.5, push_force);
  push(6.8, 0.0);
  return s;
}

Scenario scripted_phase2(double path_length, double payload_mass) {
  Scenario s = make_scenario();
  s.name = "phase2";
  s.duration = 12.5;
  s.payload.mass = payload_mass;
  s.initial_interface.admittance_active = true;
  s.initial_interface.gripper_closed = true;
  s.initial_interface.priority_mode = PriorityMode::locomotion;
  s.presses = {{0.3, 4}};

  const Eigen::Vector3d p0 =
      forward_kinematics(with_payload(s.chain, payload_mass), s.initial).pose.position;
  const double half = 0.5 * path_length;
  auto at = [&](double t, double dy, double dz) {
    s.path.push_back({t, p0 + Eigen::Vector3d(0.0, dy, dz)});
  };
  // Upper stripe, back and forth, then the lower stripe.
  at(1.0, 0.0, 0.0);
  at(2.0, -half, 0.1);
  at(4.0, half, 0.1);
  at(6.0, -half, 0.1);
  at(7.0, -half, -0.1);
  at(9.0, half, -0.1);
  at(11.0, -half, -0.1);
  at(12.0, -half, -0.1);

  // The guide pushes with the force the active preset turns into each
  // segment's velocity, leading by the preset's time constant.
  const AdmittanceParams& preset = s.presets[s.initial_interface.admittance_level];
  const double lead = admittance::time_constant(preset);
  constexpr double kRamp = 0.1;
  for (std::size_t i = 0; i + 1 < s.path.size(); ++i) {
    const Waypoint& a = s.path[i];
    const Waypoint& b = s.path[i + 1];
    const Eigen::Vector3d v = (b.position - a.position) / (b.t - a.t);
    Vector6d w = Vector6d::Zero();
    w.head<3>() = preset.d_d.head<3>().cwiseProduct(v);
    s.human_wrench.push_back({a.t - lead + kRamp, w});
    s.human_wrench.push_back({b.t - lead - kRamp, w});
  }
  s.human_wrench.insert(s.human_wrench.begin(), {s.path.front().t - lead, Vector6d::Zero()});
  s.human_wrench.push_back({s.path.back().t - lead, Vector6d::Zero()});
  return s;
}

}  // namespace sim
}  // namespace wbc
