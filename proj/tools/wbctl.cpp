// wbctl: run scenarios, analyze recordings, check controller invariants.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "wbc/analysis.hpp"
#include "wbc/scenario_io.hpp"
#include "wbc/simulator.hpp"

namespace fs = std::filesystem;
using wbc::io::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInput = 2, kNumerical = 3 };

// Thrown for bad files or arguments the parser cannot catch.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int log_level() {
  const char* env = std::getenv("WBCTL_LOG");
  if (env == nullptr) return 1;
  const std::string v = env;
  if (v == "quiet" || v == "0") return 0;
  if (v == "debug" || v == "2") return 2;
  return 1;
}

void log(int level, const std::string& msg) {
  if (level <= log_level()) std::cerr << "wbctl: " << msg << '\n';
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

wbc::Scenario resolve(json doc, const std::vector<std::string>& overrides,
                      std::optional<std::uint64_t> seed, const fs::path& base_dir) {
  for (const auto& o : overrides) wbc::io::apply_override(doc, o);
  if (seed) doc["seed"] = *seed;
  return wbc::io::scenario_from_json(doc, base_dir);
}

int run_scenario(const wbc::Scenario& scenario, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw InputError("cannot create " + out_dir.string() + ": " + ec.message());

  log(1, "running '" + scenario.name + "' for " + std::to_string(scenario.duration) + " s");
  const wbc::SimTrace trace = wbc::sim::run(scenario);
  for (const auto& e : trace.events) {
    log(2, "t=" + std::to_string(e.t) + " " + e.kind + " " + e.detail);
  }

  {
    auto csv = open_out(out_dir / "trace.csv");
    wbc::io::write_trace_csv(csv, trace);
  }
  write_json(out_dir / "summary.json", wbc::io::summary_json(scenario, trace));
  write_json(out_dir / "scenario.json", wbc::io::scenario_to_json(scenario));
  log(1, "wrote " + std::to_string(trace.records.size()) + " rows to " + out_dir.string());

  if (trace.truncated) {
    std::cerr << "wbctl: simulation truncated: " << trace.termination << '\n';
    return kNumerical;
  }
  return kOk;
}

// ---------------------------------------------------------------- analyze

wbc::analysis::CsvTable load_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return wbc::analysis::read_csv(in);
  } catch (const wbc::ContractViolation& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::vector<std::pair<std::string, std::string>> column_pairs(const std::string& spec,
                                                              const wbc::analysis::CsvTable& a) {
  std::vector<std::pair<std::string, std::string>> out;
  if (spec.empty()) {
    for (std::size_t i = 1; i < a.header.size(); ++i) out.emplace_back(a.header[i], a.header[i]);
    return out;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      out.emplace_back(item, item);
    } else {
      out.emplace_back(item.substr(0, colon), item.substr(colon + 1));
    }
  }
  return out;
}

json analyze(const fs::path& with_path, const fs::path& without_path, const std::string& columns,
             std::optional<double> mvc) {
  const auto with_t = load_csv(with_path);
  const auto without_t = load_csv(without_path);
  const double rw = with_t.rate();
  const double rwo = without_t.rate();
  if (std::abs(rw - rwo) > 1e-6 * std::max(rw, rwo)) {
    throw InputError("sampling rates differ: " + std::to_string(rw) + " Hz vs " +
                     std::to_string(rwo) + " Hz");
  }

  json report = {{"with", with_path.string()}, {"without", without_path.string()},
                 {"rate", rw}, {"columns", json::array()}};
  for (const auto& [a, b] : column_pairs(columns, with_t)) {
    if (with_t.column_index(a) < 0) throw InputError(with_path.string() + ": unknown column '" + a + "'");
    if (without_t.column_index(b) < 0) throw InputError(without_path.string() + ": unknown column '" + b + "'");
    wbc::SignalSeries x = with_t.series(a);
    wbc::SignalSeries y = without_t.series(b);
    if (mvc) {
      x = wbc::analysis::emg_envelope(x, *mvc);
      y = wbc::analysis::emg_envelope(y, *mvc);
    }
    json entry = {{"with_column", a}, {"without_column", b}};
    try {
      const auto r = wbc::analysis::cross_correlation(x, y);
      entry["correlation"] = {{"r_peak", r.r_peak}, {"tau_peak", r.tau_peak}, {"lag_peak", r.lag_peak}};
    } catch (const wbc::NumericalError& e) {
      entry["correlation"] = nullptr;
      entry["correlation_note"] = e.what();
    }
    const auto s = wbc::analysis::reduction_stats(x, y);
    entry["reduction"] = {{"mean_with", s.mean_with},       {"max_with", s.max_with},
                          {"mean_without", s.mean_without}, {"max_without", s.max_without},
                          {"delta_mean", s.delta_mean},     {"delta_max", s.delta_max}};
    report["columns"].push_back(entry);
  }
  return report;
}

// ---------------------------------------------------------------- selftest

struct Check {
  std::string name;
  bool ok;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

std::vector<Check> invariant_suite(const wbc::KinematicChain& chain, int samples) {
  using namespace wbc;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = chain.dofs();
  const PriorityWeights weights = PriorityWeights::locomotion();

  auto random_state = [&] {
    JointState s = JointState::zero(n);
    for (int i = 0; i < n; ++i) {
      s.q[i] = (i < KinematicChain::kBaseDofs ? 0.5 : 2.0) * u(rng);
      s.qd[i] = u(rng);
    }
    return s;
  };
  auto full_rank = [&]() -> std::optional<JointState> {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      JointState s = random_state();
      const Eigen::MatrixXd j = jacobian_ee(chain, s);
      if (Eigen::JacobiSVD<Eigen::MatrixXd>(j).singularValues().minCoeff() > 1e-2) return s;
    }
    return std::nullopt;
  };

  double consistency = 0.0, decoupling = 0.0, symmetry = 0.0, crba = 0.0;
  bool pd = true;
  for (int k = 0; k < samples; ++k) {
    const JointState s = random_state();
    const Eigen::MatrixXd m = mass_matrix(chain, s);
    symmetry = std::max(symmetry, (m - m.transpose()).cwiseAbs().maxCoeff());
    pd = pd && m.llt().info() == Eigen::Success;
    const Eigen::VectorXd h = inverse_dynamics(chain, s, Eigen::VectorXd::Zero(n));
    for (int c = 0; c < n; ++c) {
      const Eigen::VectorXd col = inverse_dynamics(chain, s, Eigen::VectorXd::Unit(n, c)) - h;
      crba = std::max(crba, (col - m.col(c)).cwiseAbs().maxCoeff());
    }
  }
  bool redundant = chain.dofs() >= 6;
  if (redundant) {
    for (int k = 0; k < samples; ++k) {
      const auto drawn = full_rank();
      if (!drawn) {
        redundant = false;
        break;
      }
      const JointState& s = *drawn;
      const Eigen::MatrixXd j = jacobian_ee(chain, s);
      const Eigen::MatrixXd m = mass_matrix(chain, s);
      Vector6d f;
      for (int i = 0; i < 6; ++i) f[i] = 50.0 * u(rng);
      Eigen::VectorXd tau0(n);
      for (int i = 0; i < n; ++i) tau0[i] = 20.0 * u(rng);
      const TorqueSplit t = controller::weighted_torque(j, m, weights, f, tau0);
      const TaskInertias ti = controller::task_inertias(j, m, weights);
      const Eigen::MatrixXd minv_jt = m.llt().solve(j.transpose());
      const Eigen::MatrixXd jbar_t = ti.lambda * minv_jt.transpose();  // J̄ᵀ = Λ J M⁻¹
      consistency = std::max(consistency, (jbar_t * t.task - f).norm() / f.norm());
      decoupling = std::max(decoupling, (jbar_t * t.null).norm());
    }
  }
  std::vector<Check> out{
      {"mass matrix symmetric", symmetry <= 1e-12, "max asymmetry " + fmt(symmetry)},
      {"mass matrix positive definite", pd, pd ? "cholesky ok" : "cholesky failed"},
      {"CRBA matches inverse dynamics", crba <= 1e-9, "max deviation " + fmt(crba)},
  };
  if (chain.dofs() >= 6 && !redundant) {
    out.push_back({"full-rank task Jacobian", false, "no full-rank state in 10000 draws"});
  } else if (redundant) {
    out.push_back({"cartesian consistency", consistency <= 1e-9, "max relative error " + fmt(consistency)});
    out.push_back({"null-space decoupling", decoupling <= 1e-9, "max task force " + fmt(decoupling)});
  }
  return out;
}

int selftest(const std::string& scenario_path, int samples) {
  wbc::KinematicChain chain = wbc::default_chain();
  if (!scenario_path.empty()) {
    try {
      chain = wbc::io::load_scenario(scenario_path).chain;
    } catch (const wbc::ConfigError& e) {
      std::cout << "FAIL config: " << e.what() << '\n';
      return kInput;
    }
  }
  int failed = 0;
  for (const auto& c : invariant_suite(chain, samples)) {
    std::cout << (c.ok ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    failed += !c.ok;
  }
  std::cout << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed") << '\n';
  return failed == 0 ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Whole-body controller, admittance interface and analysis toolkit"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", columns, with_path, without_path, report_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<double> mvc;
  int samples = 200;

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    sub->add_option("--set", overrides, "Override a scenario field, e.g. eta_b=5 (repeatable)");
    sub->add_option("--seed", seed, "Seed for the wrench noise");
  };

  auto* simulate = app.add_subcommand("simulate", "Run a scenario file");
  simulate->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  add_run_flags(simulate);

  auto* phase1 = app.add_subcommand("phase1", "Run the scripted grasp-and-carry scenario");
  add_run_flags(phase1);
  auto* phase2 = app.add_subcommand("phase2", "Run the scripted painting scenario");
  add_run_flags(phase2);

  auto* an = app.add_subcommand("analyze", "Compare recordings with and without assistance");
  an->add_option("--with", with_path, "CSV recorded with assistance")->required();
  an->add_option("--without", without_path, "CSV recorded without assistance")->required();
  an->add_option("--columns", columns, "Columns to compare: a,b or a:b pairs (default: all)");
  an->add_option("--mvc", mvc, "Treat columns as raw EMG normalized by this MVC")
      ->check(CLI::PositiveNumber);
  an->add_option("--out", report_path, "Write the JSON report here instead of stdout");

  auto* st = app.add_subcommand("selftest", "Check controller and dynamics invariants");
  st->add_option("--scenario", scenario_path, "Check the chain of this scenario");
  st->add_option("--samples", samples, "Random states per check")->check(CLI::PositiveNumber);

  if (argc <= 1) {
    std::cout << app.help();
    return kUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*simulate) {
      const fs::path path = scenario_path;
      wbc::Scenario scenario;
      try {
        scenario = resolve(wbc::io::parse_json_file(path), overrides, seed, path.parent_path());
      } catch (const wbc::ConfigError& e) {
        const std::string msg = e.what();
        throw wbc::ConfigError(msg.rfind(path.string(), 0) == 0 ? msg : path.string() + ": " + msg);
      } catch (const json::exception& e) {
        throw wbc::ConfigError(path.string() + ": " + e.what());
      }
      return run_scenario(scenario, out_dir);
    }
    if (*phase1 || *phase2) {
      const wbc::Scenario base = *phase1 ? wbc::sim::scripted_phase1() : wbc::sim::scripted_phase2();
      return run_scenario(resolve(wbc::io::scenario_to_json(base), overrides, seed, {}), out_dir);
    }
    if (*an) {
      const json report = analyze(with_path, without_path, columns, mvc);
      if (report_path.empty()) {
        std::cout << report.dump(2) << '\n';
      } else {
        write_json(report_path, report);
      }
      return kOk;
    }
    if (*st) return selftest(scenario_path, samples);
  } catch (const wbc::ConfigError& e) {
    std::cerr << "wbctl: " << e.what() << '\n';
    return kInput;
  } catch (const InputError& e) {
    std::cerr << "wbctl: " << e.what() << '\n';
    return kInput;
  } catch (const wbc::ContractViolation& e) {
    std::cerr << "wbctl: " << e.what() << '\n';
    return kInput;
  } catch (const json::exception& e) {
    std::cerr << "wbctl: " << e.what() << '\n';
    return kInput;
  } catch (const wbc::NumericalError& e) {
    std::cerr << "wbctl: numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
