#include <algorithm>
#include <numeric>

#include "metaphor/analysis.hpp"
#include "metaphor/errors.hpp"
#include "metaphor/text.hpp"

namespace metaphor {
namespace {

void check_inputs(std::span<const double> p, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1), got " + format_double(alpha));
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("p-value outside [0, 1]: " + format_double(v));
  }
}

}  // namespace

MultipleTestResult holm_bonferroni(std::span<const double> p, double alpha) {
  check_inputs(p, alpha);
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

  MultipleTestResult r{std::vector<double>(m, 1.0), std::vector<bool>(m, false)};
  double running = 0.0;
  bool stopped = false;
  for (std::size_t i = 0; i < m; ++i) {
    const auto k = order[i];
    const double factor = static_cast<double>(m - i);
    running = std::max(running, std::min(1.0, factor * p[k]));
    r.adjusted[k] = running;
    if (!stopped && p[k] <= alpha / factor) {
      r.reject[k] = true;
    } else {
      stopped = true;
    }
  }
  return r;
}

MultipleTestResult bonferroni(std::span<const double> p, double alpha) {
  check_inputs(p, alpha);
  const auto m = static_cast<double>(p.size());
  MultipleTestResult r;
  for (double v : p) {
    r.adjusted.push_back(std::min(1.0, m * v));
    r.reject.push_back(v <= alpha / m);
  }
  return r;
}

}  // namespace metaphor
