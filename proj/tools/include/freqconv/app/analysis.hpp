#pragma once

#include <optional>
#include <vector>

namespace freqconv::app {

/// Late-time average of a series.
struct Plateau {
  double value;        ///< mean over the final 5% of the run
  double previous;     ///< mean over the 5% before that
  double drift;        ///< |value - previous|
  double allowed;      ///< drift allowed by the stationarity check
  bool stationary;
  int samples;         ///< samples in the final window
};

/// Mean over the final 5% of [t0, t_end] (at least two samples). The
/// check passes when the mean moved by no more than max(rel_tol·|value|,
/// 3·mean SEM of the window) between the last two 5% windows.
Plateau plateau(const std::vector<double>& times, const std::vector<double>& values,
                const std::vector<double>* sem = nullptr, double rel_tol = 0.01);

struct Minimum {
  double time;
  double value;
  int index;  ///< discrete minimum sample
};

/// First interior local minimum, refined by the parabola through the three
/// samples around it. Empty when the series has none.
std::optional<Minimum> first_minimum(const std::vector<double>& times,
                                     const std::vector<double>& values);

/// Slowest exponential decay rate of a positive deviation series, from a
/// least-squares fit of log(deviation) over the tail where it lies between
/// e^-3 and 1e-7 of its initial value. Empty when fewer than 5 samples
/// qualify.
std::optional<double> tail_decay_rate(const std::vector<double>& times,
                                      const std::vector<double>& deviation);

}  // namespace freqconv::app
