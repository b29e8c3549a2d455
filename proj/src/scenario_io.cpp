#include "wbc/scenario_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace wbc::io {
namespace {

template <typename Derived>
json vec_to_json(const Eigen::MatrixBase<Derived>& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vec_from_json(const json& j, const std::string& what, Eigen::Index expected = -1) {
  if (!j.is_array()) throw ConfigError(what + ": expected an array of numbers");
  if (expected >= 0 && static_cast<Eigen::Index>(j.size()) != expected) {
    throw ConfigError(what + ": expected " + std::to_string(expected) + " entries, got " +
                      std::to_string(j.size()));
  }
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(what + ": entry " + std::to_string(i) + " not a number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Eigen::Vector3d vec3(const json& j, const std::string& what) { return vec_from_json(j, what, 3); }
Vector6d vec6(const json& j, const std::string& what) { return vec_from_json(j, what, 6); }

double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + ": expected a number");
  return j.get<double>();
}

Eigen::Matrix3d rpy_matrix(const Eigen::Vector3d& rpy) {
  return (Eigen::AngleAxisd(rpy[2], Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(rpy[1], Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(rpy[0], Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

Eigen::Vector3d matrix_rpy(const Eigen::Matrix3d& r) {
  if (r.isIdentity(0.0)) return Eigen::Vector3d::Zero();
  const Eigen::Vector3d ypr = r.eulerAngles(2, 1, 0);
  return {ypr[2], ypr[1], ypr[0]};
}

json transform_to_json(const Eigen::Isometry3d& t) {
  return {{"translation", vec_to_json(t.translation())},
          {"rpy", vec_to_json(matrix_rpy(t.linear()))}};
}

Eigen::Isometry3d transform_from_json(const json& j, const std::string& what) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  if (!j.is_object()) throw ConfigError(what + ": expected an object");
  if (j.contains("translation")) t.translation() = vec3(j["translation"], what + ".translation");
  if (j.contains("rpy")) t.linear() = rpy_matrix(vec3(j["rpy"], what + ".rpy"));
  return t;
}

json inertia_to_json(const Eigen::Matrix3d& m) {
  json out = json::array();
  for (int r = 0; r < 3; ++r) out.push_back(vec_to_json(m.row(r).transpose()));
  return out;
}

Eigen::Matrix3d inertia_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + ": expected a 3×3 array or [ixx, iyy, izz]");
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  if (j.size() == 3 && j[0].is_number()) {
    m.diagonal() = vec3(j, what);
    return m;
  }
  if (j.size() != 3) throw ConfigError(what + ": expected 3 rows");
  for (int r = 0; r < 3; ++r) m.row(r) = vec3(j[r], what + " row").transpose();
  return m;
}

json gains_to_json(const ImpedanceGains& g) {
  return {{"k_cart", vec_to_json(g.k_cart)},   {"d_cart", vec_to_json(g.d_cart)},
          {"k_joint", vec_to_json(g.k_joint)}, {"d_joint", vec_to_json(g.d_joint)},
          {"q_0", vec_to_json(g.q_0)}};
}

json weights_to_json(const PriorityWeights& w) { return {{"eta_b", w.eta_b}, {"eta_a", w.eta_a}}; }

PriorityWeights weights_from_json(const json& j, PriorityWeights w, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + ": expected an object");
  if (j.contains("eta_b")) w.eta_b = number(j["eta_b"], what + ".eta_b");
  if (j.contains("eta_a")) w.eta_a = number(j["eta_a"], what + ".eta_a");
  return w;
}

PriorityMode mode_from_json(const json& j) {
  if (j == "manipulation") return PriorityMode::manipulation;
  if (j == "locomotion") return PriorityMode::locomotion;
  throw ConfigError("interface.priority_mode: expected \"manipulation\" or \"locomotion\"");
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

json chain_to_json(const KinematicChain& chain) {
  json links = json::array();
  for (const auto& l : chain.links) {
    links.push_back({{"axis", vec_to_json(l.axis)},
                     {"origin", transform_to_json(l.origin)},
                     {"mass", l.mass},
                     {"com", vec_to_json(l.com)},
                     {"inertia", inertia_to_json(l.inertia)}});
  }
  return {{"base_mount", transform_to_json(chain.base_mount)},
          {"gravity", vec_to_json(chain.gravity)},
          {"ee_offset", transform_to_json(chain.ee_offset)},
          {"base", {{"m_adm", vec_to_json(chain.base.m_adm)}, {"d_adm", vec_to_json(chain.base.d_adm)}}},
          {"links", links}};
}

KinematicChain chain_from_json(const json& j) {
  if (j.is_string()) {
    if (j == "default") return default_chain();
    if (j == "planar2") return planar_two_link_chain();
    throw ConfigError("chain: unknown bundled chain '" + j.get<std::string>() + "'");
  }
  if (!j.is_object()) throw ConfigError("chain: expected an object or a bundled chain name");
  KinematicChain chain;
  if (j.contains("base_mount")) chain.base_mount = transform_from_json(j["base_mount"], "chain.base_mount");
  if (j.contains("gravity")) chain.gravity = vec3(j["gravity"], "chain.gravity");
  if (j.contains("ee_offset")) chain.ee_offset = transform_from_json(j["ee_offset"], "chain.ee_offset");
  if (j.contains("base")) {
    const json& b = j["base"];
    if (b.contains("m_adm")) chain.base.m_adm = vec3(b["m_adm"], "chain.base.m_adm");
    if (b.contains("d_adm")) chain.base.d_adm = vec3(b["d_adm"], "chain.base.d_adm");
  }
  if (!j.contains("links") || !j["links"].is_array()) {
    throw ConfigError("chain: 'links' array is required");
  }
  for (std::size_t i = 0; i < j["links"].size(); ++i) {
    const json& lj = j["links"][i];
    const std::string tag = "chain.links[" + std::to_string(i) + "]";
    Link link;
    if (lj.contains("axis")) link.axis = vec3(lj["axis"], tag + ".axis");
    if (lj.contains("origin")) link.origin = transform_from_json(lj["origin"], tag + ".origin");
    if (lj.contains("mass")) link.mass = number(lj["mass"], tag + ".mass");
    if (lj.contains("com")) link.com = vec3(lj["com"], tag + ".com");
    if (lj.contains("inertia")) link.inertia = inertia_from_json(lj["inertia"], tag + ".inertia");
    chain.links.push_back(link);
  }
  return chain;
}

json scenario_to_json(const Scenario& s) {
  json presets = json::array();
  for (const auto& p : s.presets) {
    presets.push_back({{"lambda_d", vec_to_json(p.lambda_d)}, {"d_d", vec_to_json(p.d_d)}});
  }
  json wrench = json::array();
  for (const auto& w : s.human_wrench) wrench.push_back({{"t", w.t}, {"wrench", vec_to_json(w.wrench)}});
  json presses = json::array();
  for (const auto& p : s.presses) presses.push_back({{"t", p.time}, {"button", p.button}});
  json path = json::array();
  for (const auto& w : s.path) path.push_back({{"t", w.t}, {"position", vec_to_json(w.position)}});

  Eigen::Isometry3d ft = Eigen::Isometry3d::Identity();
  ft.linear() = s.ft_offset.rotation;
  ft.translation() = s.ft_offset.translation;

  return {
      {"name", s.name},
      {"chain", chain_to_json(s.chain)},
      {"initial", {{"q", vec_to_json(s.initial.q)}, {"qd", vec_to_json(s.initial.qd)}}},
      {"gains", gains_to_json(s.gains)},
      {"priority",
       {{"manipulation", weights_to_json(s.manipulation)},
        {"locomotion", weights_to_json(s.locomotion)}}},
      {"admittance", {{"presets", presets}, {"ft_offset", transform_to_json(ft)}}},
      {"interface",
       {{"admittance_active", s.initial_interface.admittance_active},
        {"admittance_level", s.initial_interface.admittance_level},
        {"gripper_closed", s.initial_interface.gripper_closed},
        {"priority_mode", to_string(s.initial_interface.priority_mode)}}},
      {"human_wrench", wrench},
      {"presses", presses},
      {"debounce_window", s.debounce_window},
      {"payload", {{"mass", s.payload.mass}}},
      {"path", path},
      {"duration", s.duration},
      {"seed", s.seed},
      {"wrench_noise_std", s.wrench_noise_std},
      {"coriolis_compensation", s.coriolis_compensation},
      {"rates", {{"control", s.rates.control}, {"base", s.rates.base}, {"hmi", s.rates.hmi}}},
  };
}

Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("scenario: expected a JSON object");
  const KinematicChain chain = j.contains("chain") ? chain_from_json(j["chain"]) : default_chain();
  try {
    validate(chain);
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  Scenario s = make_scenario(chain);
  const int dofs = chain.dofs();

  if (j.contains("name")) s.name = j["name"].get<std::string>();
  if (j.contains("initial")) {
    const json& ij = j["initial"];
    if (ij.contains("q")) s.initial.q = vec_from_json(ij["q"], "initial.q", dofs);
    if (ij.contains("qd")) s.initial.qd = vec_from_json(ij["qd"], "initial.qd", dofs);
    if (ij.contains("q") && !(j.contains("gains") && j["gains"].contains("q_0"))) {
      s.gains = default_gains(chain, s.initial.q);
    }
  }
  if (j.contains("gains")) {
    const json& g = j["gains"];
    if (g.contains("q_0")) s.gains = default_gains(chain, vec_from_json(g["q_0"], "gains.q_0", dofs));
    if (g.contains("k_cart")) s.gains.k_cart = vec6(g["k_cart"], "gains.k_cart");
    if (g.contains("d_cart")) s.gains.d_cart = vec6(g["d_cart"], "gains.d_cart");
    if (g.contains("k_joint")) s.gains.k_joint = vec_from_json(g["k_joint"], "gains.k_joint", dofs);
    if (g.contains("d_joint")) s.gains.d_joint = vec_from_json(g["d_joint"], "gains.d_joint", dofs);
  }
  if (j.contains("priority")) {
    const json& p = j["priority"];
    if (p.contains("manipulation")) {
      s.manipulation = weights_from_json(p["manipulation"], s.manipulation, "priority.manipulation");
    }
    if (p.contains("locomotion")) {
      s.locomotion = weights_from_json(p["locomotion"], s.locomotion, "priority.locomotion");
    }
  }
  if (j.contains("admittance")) {
    const json& a = j["admittance"];
    if (a.contains("presets")) {
      if (!a["presets"].is_array() || a["presets"].size() != 3) {
        throw ConfigError("admittance.presets: expected exactly three presets");
      }
      for (int i = 0; i < 3; ++i) {
        const std::string tag = "admittance.presets[" + std::to_string(i) + "]";
        s.presets[i].lambda_d = vec6(a["presets"][i].at("lambda_d"), tag + ".lambda_d");
        s.presets[i].d_d = vec6(a["presets"][i].at("d_d"), tag + ".d_d");
      }
    }
    if (a.contains("ft_offset")) {
      const Eigen::Isometry3d t = transform_from_json(a["ft_offset"], "admittance.ft_offset");
      s.ft_offset.rotation = t.linear();
      s.ft_offset.translation = t.translation();
    }
  }
  if (j.contains("interface")) {
    const json& i = j["interface"];
    if (i.contains("admittance_active")) s.initial_interface.admittance_active = i["admittance_active"].get<bool>();
    if (i.contains("admittance_level")) s.initial_interface.admittance_level = i["admittance_level"].get<int>();
    if (i.contains("gripper_closed")) s.initial_interface.gripper_closed = i["gripper_closed"].get<bool>();
    if (i.contains("priority_mode")) s.initial_interface.priority_mode = mode_from_json(i["priority_mode"]);
  }
  if (j.contains("human_wrench")) {
    for (const auto& w : j["human_wrench"]) {
      s.human_wrench.push_back({number(w.at("t"), "human_wrench.t"), vec6(w.at("wrench"), "human_wrench.wrench")});
    }
  }
  if (j.contains("presses")) {
    for (const auto& p : j["presses"]) {
      s.presses.push_back({number(p.at("t"), "presses.t"), p.at("button").get<int>()});
    }
  }
  if (j.contains("press_script")) {
    const std::filesystem::path script = base_dir / j["press_script"].get<std::string>();
    std::ifstream in(script);
    if (!in) throw ConfigError("cannot open press script " + script.string());
    try {
      const auto extra = hmi::parse_press_script(in);
      s.presses.insert(s.presses.end(), extra.begin(), extra.end());
      std::stable_sort(s.presses.begin(), s.presses.end(),
                       [](const PressEvent& a, const PressEvent& b) { return a.time < b.time; });
    } catch (const ContractViolation& e) {
      throw ConfigError(script.string() + ": " + e.what());
    }
  }
  if (j.contains("debounce_window")) s.debounce_window = number(j["debounce_window"], "debounce_window");
  if (j.contains("payload")) s.payload.mass = number(j["payload"].at("mass"), "payload.mass");
  if (j.contains("path")) {
    for (const auto& w : j["path"]) {
      s.path.push_back({number(w.at("t"), "path.t"), vec3(w.at("position"), "path.position")});
    }
  }
  if (j.contains("duration")) s.duration = number(j["duration"], "duration");
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("wrench_noise_std")) s.wrench_noise_std = number(j["wrench_noise_std"], "wrench_noise_std");
  if (j.contains("coriolis_compensation")) s.coriolis_compensation = j["coriolis_compensation"].get<bool>();
  if (j.contains("rates")) {
    const json& r = j["rates"];
    if (r.contains("control")) s.rates.control = number(r["control"], "rates.control");
    if (r.contains("base")) s.rates.base = number(r["base"], "rates.base");
    if (r.contains("hmi")) s.rates.hmi = number(r["hmi"], "rates.hmi");
  }

  try {
    validate(s);
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  return s;
}

json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    // The library message already carries "line L, column C".
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  const json j = parse_json_file(path);
  try {
    return scenario_from_json(j, path.parent_path());
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void apply_override(json& scenario, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' must look like key=value");
  }
  std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  if (key == "eta_b" || key == "eta_a") key = "priority.manipulation." + key;

  json* node = &scenario;
  std::stringstream parts(key);
  std::string part;
  while (std::getline(parts, part, '.')) {
    if (node->is_object() && node->contains(part)) {
      node = &(*node)[part];
    } else if (node->is_array() && !part.empty() &&
               part.find_first_not_of("0123456789") == std::string::npos &&
               std::stoul(part) < node->size()) {
      node = &(*node)[std::stoul(part)];
    } else {
      throw ConfigError("override: unknown key '" + key + "'");
    }
  }
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  if (node->is_number() && !value.is_number()) {
    throw ConfigError("override: '" + key + "' expects a number");
  }
  *node = value;
}

std::vector<std::string> trace_columns(int dofs) {
  std::vector<std::string> cols{"t"};
  for (int i = 0; i < dofs; ++i) cols.push_back("q" + std::to_string(i));
  for (int i = 0; i < dofs; ++i) cols.push_back("qd" + std::to_string(i));
  for (const char* c : {"ee_x", "ee_y", "ee_z", "ee_qw", "ee_qx", "ee_qy", "ee_qz", "ee_vx",
                        "ee_vy", "ee_vz", "ee_wx", "ee_wy", "ee_wz"}) {
    cols.push_back(c);
  }
  for (int i = 0; i < dofs; ++i) cols.push_back("tau" + std::to_string(i));
  for (const char* prefix : {"fm_", "F_"}) {
    for (const char* c : {"fx", "fy", "fz", "tx", "ty", "tz"}) cols.push_back(std::string(prefix) + c);
  }
  for (const char* c : {"xd_x", "xd_y", "xd_z", "base_cmd_x", "base_cmd_y", "base_cmd_yaw",
                        "admittance_active", "admittance_level", "gripper_closed", "priority_mode"}) {
    cols.push_back(c);
  }
  return cols;
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  const int dofs = trace.records.empty() ? 0 : static_cast<int>(trace.records.front().q.size());
  const auto cols = trace_columns(dofs);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  std::string row;
  auto put = [&row](double v) {
    row += format_double(v);
    row += ',';
  };
  for (const auto& r : trace.records) {
    row.clear();
    put(r.t);
    for (Eigen::Index i = 0; i < r.q.size(); ++i) put(r.q[i]);
    for (Eigen::Index i = 0; i < r.qd.size(); ++i) put(r.qd[i]);
    for (int i = 0; i < 3; ++i) put(r.ee_pose.position[i]);
    put(r.ee_pose.orientation.w());
    put(r.ee_pose.orientation.x());
    put(r.ee_pose.orientation.y());
    put(r.ee_pose.orientation.z());
    for (int i = 0; i < 6; ++i) put(r.ee_twist[i]);
    for (Eigen::Index i = 0; i < r.tau.size(); ++i) put(r.tau[i]);
    for (int i = 0; i < 6; ++i) put(r.f_m[i]);
    for (int i = 0; i < 6; ++i) put(r.f_cartesian[i]);
    for (int i = 0; i < 3; ++i) put(r.x_d.position[i]);
    for (int i = 0; i < 3; ++i) put(r.base_command[i]);
    put(r.interface.admittance_active ? 1.0 : 0.0);
    put(r.interface.admittance_level);
    put(r.interface.gripper_closed ? 1.0 : 0.0);
    put(static_cast<double>(r.interface.priority_mode));
    row.back() = '\n';
    out << row;
  }
}

json summary_json(const Scenario& scenario, const SimTrace& trace) {
  json events = json::array();
  for (const auto& e : trace.events) {
    events.push_back({{"t", e.t}, {"kind", e.kind}, {"button", e.button}, {"detail", e.detail}});
  }
  json out = {
      {"scenario", scenario.name},
      {"records", trace.records.size()},
      {"truncated", trace.truncated},
      {"termination", trace.termination},
      {"button_sequence", trace.button_sequence()},
      {"events", events},
      {"path_rms_error", sim::path_rms_error(scenario, trace)},
      {"effective_config", scenario_to_json(scenario)},
  };
  if (!trace.records.empty()) {
    const SimRecord& last = trace.records.back();
    const auto& q = last.ee_pose.orientation;
    out["final_time"] = last.t;
    out["final_pose"] = {{"position", vec_to_json(last.ee_pose.position)},
                         {"orientation_wxyz", {q.w(), q.x(), q.y(), q.z()}}};
    out["final_base"] = vec_to_json(last.q.head<KinematicChain::kBaseDofs>());
  }
  return out;
}

}  // namespace wbc::io
