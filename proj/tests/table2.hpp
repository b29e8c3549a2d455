#pragma once

#include <array>

// Per-subject EMG statistics as printed in the evaluation table (percent of
// MVC). "with" rows used the interface, "without" rows did not.
namespace table2 {

struct Muscle {
  double mean_with, max_with, mean_without, max_without;
  double delta_mean, delta_max;  // printed reductions
};

struct Subject {
  Muscle ad;  // anterior deltoid
  Muscle bc;  // biceps
};

inline constexpr std::array<Subject, 6> kSubjects{{
    {{7.17, 30.42, 20.37, 35.92, 64.80, 15.31}, {7.48, 22.59, 19.72, 26.60, 62.07, 15.07}},
    {{19.68, 42.83, 31.84, 57.34, 38.19, 25.30}, {10.78, 21.10, 23.62, 48.44, 54.36, 35.80}},
    {{29.89, 62.87, 37.87, 96.38, 21.07, 34.77}, {9.53, 24.78, 17.60, 66.39, 45.85, 62.67}},
    {{33.48, 65.46, 67.5, 100.0, 50.40, 34.54}, {3.75, 21.20, 10.62, 30.00, 64.67, 29.33}},
    {{12.96, 33.57, 26.3, 55.82, 50.72, 39.86}, {2.48, 9.67, 22.98, 45.89, 89.21, 78.93}},
    {{18.63, 38.98, 44.41, 100.0, 58.05, 61.02}, {3.10, 16.10, 15.04, 40.36, 79.39, 60.11}},
}};

// Printed mean (std) of the Δ columns: ΔAD, ΔAD*, ΔBC, ΔBC*.
struct Printed {
  double mean, std;
};
inline constexpr Printed kDeltaAdMean{47.21, 15.58};
inline constexpr Printed kDeltaAdMax{35.13, 15.38};
inline constexpr Printed kDeltaBcMean{65.93, 15.98};
inline constexpr Printed kDeltaBcMax{46.99, 24.06};

// Printed mean (std) of the raw columns.
inline constexpr Printed kAdMeanWith{20.30, 9.95};
inline constexpr Printed kAdMaxWith{45.69, 14.96};
inline constexpr Printed kAdMeanWithout{38.05, 16.72};
inline constexpr Printed kAdMaxWithout{74.24, 27.97};
inline constexpr Printed kBcMeanWith{6.19, 3.55};
inline constexpr Printed kBcMaxWith{20.91, 7.36};
inline constexpr Printed kBcMeanWithout{18.26, 4.95};
inline constexpr Printed kBcMaxWithout{42.95, 14.35};

}  // namespace table2
