#include "pinchlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pinchlab {

namespace {

double simpson(const std::function<double(double)>& g, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double odd = 0.0, even = 0.0;
  for (int i = 1; i < panels; ++i) {
    const double v = g(a + i * h);
    (i % 2 ? odd : even) += v;
  }
  return h / 3.0 * (g(a) + g(b) + 4.0 * odd + 2.0 * even);
}

}  // namespace

std::vector<double> forced_mesh(double a, double b, const std::vector<double>& breakpoints,
                                int min_elements) {
  std::vector<double> knots{a};
  for (double x : breakpoints) {
    if (x > a && x < b) knots.push_back(x);
  }
  knots.push_back(b);
  std::sort(knots.begin(), knots.end());
  const double span = b - a;
  const double tiny = 1e-13 * std::max(1.0, std::abs(b));
  knots.erase(std::unique(knots.begin(), knots.end(),
                          [&](double x, double y) { return y - x <= tiny; }),
              knots.end());
  knots.back() = b;
  const double hmax = span / std::max(1, min_elements);
  std::vector<double> mesh{a};
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double lo = knots[i], hi = knots[i + 1];
    const int pieces = std::max(1, static_cast<int>(std::ceil((hi - lo) / hmax - 1e-9)));
    for (int k = 1; k <= pieces; ++k) {
      mesh.push_back(k == pieces ? hi : lo + (hi - lo) * k / pieces);
    }
  }
  return mesh;
}

double integrate_piecewise(const std::function<double(double)>& g, double a, double b,
                           const std::vector<double>& breakpoints,
                           const QuadratureOptions& opts) {
  if (b <= a) return 0.0;
  const std::vector<double> knots = forced_mesh(a, b, breakpoints, 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double lo = knots[i], hi = knots[i + 1];
    const double share = (hi - lo) / (b - a);
    int panels = 2 * std::max(1, static_cast<int>(std::ceil(0.5 * opts.min_nodes * share)));
    double prev = simpson(g, lo, hi, panels);
    double value = prev;
    for (int d = 0; d < opts.max_doublings; ++d) {
      panels *= 2;
      const double next = simpson(g, lo, hi, panels);
      const double diff = next - prev;
      value = next + diff / 15.0;
      prev = next;
      if (std::abs(diff) <= opts.tolerance * std::max(share, 1e-3)) break;
    }
    total += value;
  }
  return total;
}

int count_negative_eigenvalues(const std::vector<double>& diag, const std::vector<double>& off) {
  // Pivot recurrence d_i = a_i - b_{i-1}^2 / d_{i-1}.  An exact zero pivot
  // (a zero eigenvalue) is nudged positive so it is not counted.
  int negatives = 0;
  double pivot = 0.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    double next = diag[i];
    if (i > 0) next -= off[i - 1] * off[i - 1] / pivot;
    if (next == 0.0) next = std::numeric_limits<double>::epsilon() * (std::abs(diag[i]) + 1.0);
    if (next < 0.0) ++negatives;
    pivot = next;
  }
  return negatives;
}

}  // namespace pinchlab
