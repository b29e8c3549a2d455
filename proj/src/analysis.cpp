#include "wbc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <numeric>
#include <sstream>

namespace wbc {
namespace {

std::vector<double> demeaned(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [mean](double s) { return s - mean; });
  return out;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct Biquad {
  double b0, b1, b2, a1, a2;

  static Biquad butterworth_lowpass(double rate, double cutoff) {
    const double k = std::tan(std::numbers::pi * cutoff / rate);
    const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k * k);
    Biquad f;
    f.b0 = k * k * norm;
    f.b1 = 2.0 * f.b0;
    f.b2 = f.b0;
    f.a1 = 2.0 * (k * k - 1.0) * norm;
    f.a2 = (1.0 - std::numbers::sqrt2 * k + k * k) * norm;
    return f;
  }

  // Direct form II transposed, started at the steady state of the first sample.
  void run(std::vector<double>& v) const {
    if (v.empty()) return;
    const double u = v.front();
    double z1 = u - b0 * u;
    double z2 = b2 * u - a2 * u;
    for (double& x : v) {
      const double y = b0 * x + z1;
      z1 = b1 * x - a1 * y + z2;
      z2 = b2 * x - a2 * y;
      x = y;
    }
  }
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

void validate(const SignalSeries& series) {
  if (series.samples.size() < 2) {
    throw ContractViolation("series '" + series.label + "' needs at least two samples");
  }
  if (!(series.rate > 0.0)) {
    throw ContractViolation("series '" + series.label + "' needs a positive rate");
  }
  for (double s : series.samples) {
    if (!std::isfinite(s)) {
      throw ContractViolation("series '" + series.label + "' has a non-finite sample");
    }
  }
}

namespace analysis {

CorrelationResult cross_correlation(const SignalSeries& x, const SignalSeries& y) {
  validate(x);
  validate(y);
  const std::vector<double> a = demeaned(x.samples);
  const std::vector<double> b = demeaned(y.samples);
  const double ea = std::inner_product(a.begin(), a.end(), a.begin(), 0.0);
  const double eb = std::inner_product(b.begin(), b.end(), b.begin(), 0.0);
  if (!(ea > 0.0) || !(eb > 0.0)) {
    throw NumericalError("cross-correlation is undefined for a constant series");
  }
  const double norm = std::sqrt(ea * eb);
  const int na = static_cast<int>(a.size());
  const int nb = static_cast<int>(b.size());
  const int shorter = std::min(na, nb);

  CorrelationResult out;
  const std::size_t count = static_cast<std::size_t>(2 * shorter - 1);
  out.r_curve.reserve(count);
  out.tau.reserve(count);
  out.lags.reserve(count);
  for (int lag = -(shorter - 1); lag <= shorter - 1; ++lag) {
    const int lo = std::max(0, -lag);
    const int hi = std::min(na, nb - lag);
    double sum = 0.0;
    for (int i = lo; i < hi; ++i) sum += a[i] * b[i + lag];
    const double r = std::clamp(std::abs(sum) / norm, 0.0, 1.0);
    out.r_curve.push_back(r);
    out.lags.push_back(lag);
    out.tau.push_back(static_cast<double>(lag) / shorter);
    // Ties resolve to the lag closest to zero.
    if (r > out.r_peak || (r == out.r_peak && std::abs(lag) < std::abs(out.lag_peak))) {
      out.r_peak = r;
      out.lag_peak = lag;
      out.tau_peak = static_cast<double>(lag) / shorter;
    }
  }
  return out;
}

std::vector<double> zero_phase_lowpass(const std::vector<double>& samples, double rate,
                                       double cutoff_hz) {
  if (!(rate > 0.0) || !(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * rate)) {
    throw ContractViolation("low-pass cutoff must lie in (0, rate/2)");
  }
  const Biquad filter = Biquad::butterworth_lowpass(rate, cutoff_hz);
  std::vector<double> v = samples;
  filter.run(v);
  std::reverse(v.begin(), v.end());
  filter.run(v);
  std::reverse(v.begin(), v.end());
  return v;
}

SignalSeries emg_envelope(const SignalSeries& raw, double mvc, double cutoff_hz) {
  if (!(mvc > 0.0)) {
    throw ContractViolation("MVC must be positive");
  }
  validate(raw);
  std::vector<double> rectified(raw.samples.size());
  std::transform(raw.samples.begin(), raw.samples.end(), rectified.begin(),
                 [](double s) { return std::abs(s); });
  SignalSeries out;
  out.samples = zero_phase_lowpass(rectified, raw.rate, cutoff_hz);
  for (double& s : out.samples) s = std::clamp(100.0 * s / mvc, 0.0, 100.0);
  out.rate = raw.rate;
  out.label = raw.label.empty() ? "envelope" : raw.label + "_envelope";
  return out;
}

double reduction(double with_value, double without_value) {
  if (without_value == 0.0) {
    throw NumericalError("reduction is undefined when the reference value is zero");
  }
  return 100.0 * (without_value - with_value) / without_value;
}

ReductionStats reduction_stats(const SignalSeries& with_r, const SignalSeries& without_r) {
  if (with_r.samples.empty() || without_r.samples.empty()) {
    throw ContractViolation("reduction_stats needs nonempty series");
  }
  ReductionStats s;
  s.mean_with = mean_of(with_r.samples);
  s.max_with = *std::max_element(with_r.samples.begin(), with_r.samples.end());
  s.mean_without = mean_of(without_r.samples);
  s.max_without = *std::max_element(without_r.samples.begin(), without_r.samples.end());
  s.delta_mean = reduction(s.mean_with, s.mean_without);
  s.delta_max = reduction(s.max_with, s.max_without);
  return s;
}

ReductionStats reduction_stats(double mean_with, double max_with, double mean_without,
                               double max_without) {
  ReductionStats s{mean_with, max_with, mean_without, max_without, 0.0, 0.0};
  s.delta_mean = reduction(mean_with, mean_without);
  s.delta_max = reduction(max_with, max_without);
  return s;
}

ColumnSummary summarize(const std::vector<double>& values) {
  if (values.empty()) {
    throw ContractViolation("summary needs at least one value");
  }
  ColumnSummary out;
  out.mean = mean_of(values);
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

std::map<std::string, ColumnSummary> subject_summary(const std::vector<ReductionStats>& subjects) {
  if (subjects.empty()) {
    throw ContractViolation("subject_summary needs at least one subject");
  }
  auto column = [&](double ReductionStats::*field) {
    std::vector<double> v;
    v.reserve(subjects.size());
    for (const auto& s : subjects) v.push_back(s.*field);
    return summarize(v);
  };
  return {
      {"mean_with", column(&ReductionStats::mean_with)},
      {"max_with", column(&ReductionStats::max_with)},
      {"mean_without", column(&ReductionStats::mean_without)},
      {"max_without", column(&ReductionStats::max_without)},
      {"delta_mean", column(&ReductionStats::delta_mean)},
      {"delta_max", column(&ReductionStats::delta_max)},
  };
}

int CsvTable::column_index(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

double CsvTable::rate() const {
  if (columns.empty() || columns.front().size() < 2) {
    throw ContractViolation("CSV needs at least two rows to infer a rate");
  }
  const auto& t = columns.front();
  const double span = t.back() - t.front();
  if (!(span > 0.0)) {
    throw ContractViolation("CSV time column must increase");
  }
  return static_cast<double>(t.size() - 1) / span;
}

SignalSeries CsvTable::series(const std::string& name) const {
  const int idx = column_index(name);
  if (idx < 0) {
    throw ContractViolation("unknown column '" + name + "'");
  }
  return {columns[idx], rate(), name};
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    table.header = split_row(line);
    break;
  }
  if (table.header.empty()) {
    throw ContractViolation("CSV is empty (missing header row)");
  }
  table.columns.assign(table.header.size(), {});
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_row(line);
    if (cells.size() != table.header.size()) {
      throw ContractViolation("CSV row " + std::to_string(line_no) + ": expected " +
                              std::to_string(table.header.size()) + " fields, got " +
                              std::to_string(cells.size()));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      char* end = nullptr;
      const double v = std::strtod(cells[i].c_str(), &end);
      if (cells[i].empty() || end != cells[i].c_str() + cells[i].size() || !std::isfinite(v)) {
        throw ContractViolation("CSV row " + std::to_string(line_no) + ": field '" +
                                table.header[i] + "' is not a number");
      }
      table.columns[i].push_back(v);
    }
  }
  return table;
}

}  // namespace analysis
}  // namespace wbc
