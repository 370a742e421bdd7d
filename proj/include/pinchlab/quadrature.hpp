#pragma once

// Numerical building blocks for integrands that are only piecewise smooth.

#include <functional>
#include <vector>

namespace pinchlab {

struct QuadratureOptions {
  int min_nodes = 1024;      // over the whole interval, before refinement
  double tolerance = 1e-9;   // successive-refinement difference, absolute
  int max_doublings = 14;
};

// Composite Simpson on every piece between consecutive forced breakpoints,
// doubled until successive values agree, with a Richardson correction.
double integrate_piecewise(const std::function<double(double)>& g, double a, double b,
                           const std::vector<double>& breakpoints,
                           const QuadratureOptions& opts = {});

// Sorted, deduplicated mesh of [a, b] containing every breakpoint inside it
// and with spacing at most (b - a) / min_elements.
std::vector<double> forced_mesh(double a, double b, const std::vector<double>& breakpoints,
                                int min_elements);

// Number of negative eigenvalues of the symmetric tridiagonal matrix
// (diag, off) by Sylvester's law of inertia on its LDL^T factorization.
int count_negative_eigenvalues(const std::vector<double>& diag, const std::vector<double>& off);

}  // namespace pinchlab
