#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "wbc/common.hpp"

namespace wbc {

struct SignalSeries {
  std::vector<double> samples;
  double rate{1.0};
  std::string label;
};

void validate(const SignalSeries& series);

/// Normalized cross-correlation over lags. `lags[i]` is the integer lag of
/// `r_curve[i]`; `tau[i]` is that lag divided by the shorter length. A
/// positive lag means `y` trails `x`.
struct CorrelationResult {
  std::vector<double> r_curve;
  std::vector<double> tau;
  std::vector<int> lags;
  double r_peak{0.0};
  double tau_peak{0.0};
  int lag_peak{0};
};

struct ReductionStats {
  double mean_with{0.0};
  double max_with{0.0};
  double mean_without{0.0};
  double max_without{0.0};
  double delta_mean{0.0};  // %
  double delta_max{0.0};   // %
};

/// Per-column mean and standard deviation across subjects.
struct ColumnSummary {
  double mean{0.0};
  double std{0.0};
};

namespace analysis {

/// R(lag) = |Σ_i x̃_i ỹ_{i+lag}| / sqrt(Σ x̃² Σ ỹ²) on mean-removed,
/// zero-padded series, for |lag| < min(N_x, N_y). Values are clamped to
/// [0, 1]. Throws NumericalError for a constant series.
CorrelationResult cross_correlation(const SignalSeries& x, const SignalSeries& y);

/// Second-order Butterworth low-pass run forward and backward. Both passes
/// start from the steady state of their first sample, so a constant input
/// passes through unchanged.
std::vector<double> zero_phase_lowpass(const std::vector<double>& samples, double rate,
                                       double cutoff_hz);

/// Full-wave rectify, 2 Hz zero-phase low-pass, divide by MVC, ×100, clip
/// to [0, 100]. Throws ContractViolation for mvc <= 0.
SignalSeries emg_envelope(const SignalSeries& raw, double mvc, double cutoff_hz = 2.0);

/// Percentage reduction 100 (without − with) / without.
/// Throws NumericalError when `without` is zero.
double reduction(double with_value, double without_value);

ReductionStats reduction_stats(const SignalSeries& with_r, const SignalSeries& without_r);
/// Same, from already-reduced per-subject means and maxima.
ReductionStats reduction_stats(double mean_with, double max_with, double mean_without,
                               double max_without);

/// Mean and sample (N − 1) standard deviation; a single value has std 0.
ColumnSummary summarize(const std::vector<double>& values);

/// Column-wise summary of per-subject statistics.
std::map<std::string, ColumnSummary> subject_summary(const std::vector<ReductionStats>& subjects);

/// A header row, then numeric rows. The first column is time.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  int column_index(const std::string& name) const;
  /// Sampling rate from the time column's mean spacing.
  double rate() const;
  SignalSeries series(const std::string& name) const;
};

/// Errors name the 1-based line number of the offending row.
CsvTable read_csv(std::istream& in);

}  // namespace analysis
}  // namespace wbc
