#include "freqconv/app/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace freqconv::app {

namespace {

double window_mean(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  double sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) sum += v[i];
  return sum / static_cast<double>(end - begin);
}

}  // namespace

Plateau plateau(const std::vector<double>& times, const std::vector<double>& values,
                const std::vector<double>* sem, double rel_tol) {
  if (times.size() != values.size() || times.size() < 4) {
    throw std::invalid_argument("plateau: need at least 4 samples of equal-length series");
  }
  const double t0 = times.front();
  const double span = times.back() - t0;
  const std::size_t n = times.size();
  auto first_after = [&](double t) {
    return static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t) -
                                    times.begin());
  };
  std::size_t last_begin = std::min(first_after(t0 + 0.95 * span), n - 2);
  std::size_t prev_begin = std::min(first_after(t0 + 0.90 * span), last_begin - 1);
  if (prev_begin >= last_begin) prev_begin = last_begin - 1;

  Plateau p{};
  p.value = window_mean(values, last_begin, n);
  p.previous = window_mean(values, prev_begin, last_begin);
  p.drift = std::abs(p.value - p.previous);
  p.samples = static_cast<int>(n - last_begin);
  double noise = 0.0;
  if (sem != nullptr && sem->size() == n) {
    noise = 3.0 * window_mean(*sem, prev_begin, n);
  }
  p.allowed = std::max(rel_tol * std::abs(p.value), noise);
  p.stationary = p.drift <= p.allowed;
  return p;
}

std::optional<Minimum> first_minimum(const std::vector<double>& times,
                                     const std::vector<double>& values) {
  if (times.size() != values.size()) {
    throw std::invalid_argument("first_minimum: series lengths differ");
  }
  for (std::size_t k = 1; k + 1 < values.size(); ++k) {
    if (!(values[k] <= values[k - 1] && values[k] < values[k + 1])) continue;
    // Parabola through (t_{k-1}, v_{k-1}), (t_k, v_k), (t_{k+1}, v_{k+1}).
    const double x0 = times[k - 1] - times[k];
    const double x2 = times[k + 1] - times[k];
    const double y0 = values[k - 1] - values[k];
    const double y2 = values[k + 1] - values[k];
    // y = a x^2 + b x through (0, 0), (x0, y0), (x2, y2)
    const double det = x0 * x2 * (x0 - x2);
    const double a = (y0 * x2 - y2 * x0) / det;
    const double b = (y2 * x0 * x0 - y0 * x2 * x2) / det;
    Minimum m{times[k], values[k], static_cast<int>(k)};
    if (a > 0.0) {
      const double x = std::clamp(-b / (2.0 * a), x0, x2);
      m.time = times[k] + x;
      m.value = values[k] + a * x * x + b * x;
    }
    return m;
  }
  return std::nullopt;
}

std::optional<double> tail_decay_rate(const std::vector<double>& times,
                                      const std::vector<double>& deviation) {
  if (times.size() != deviation.size() || times.empty()) return std::nullopt;
  const double start = deviation.front();
  if (!(start > 0.0)) return std::nullopt;
  const double upper = std::exp(-3.0) * start;
  const double lower = 1e-7 * start;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  bool entered = false;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double d = deviation[i];
    if (!entered && d <= upper) entered = true;
    if (!entered) continue;
    if (!(d > lower)) break;
    const double y = std::log(d);
    sx += times[i];
    sy += y;
    sxx += times[i] * times[i];
    sxy += times[i] * y;
    ++count;
  }
  if (count < 5) return std::nullopt;
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return -slope;
}

}  // namespace freqconv::app
