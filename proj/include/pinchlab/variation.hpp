#pragma once

// Second variation along a geodesic, the sin/plateau/-sin test field, curvature
// line integrals, conjugate points and the index of a geodesic.
//
// Perpendicular parallel fields along a geodesic of the slice split into the
// in-slice normal (plane = the slice, curvature sec_rad) and n - 2 directions
// normal to the slice (plane weight rdot^2 toward sec_rad).  Along meridians
// both classes see sec_rad.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinchlab/geodesics.hpp"
#include "pinchlab/profiles.hpp"
#include "pinchlab/report_io.hpp"

namespace pinchlab {

class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// psi = sin t on [0, pi/2], 1 on [pi/2, r - pi/2], -sin(t - r) on [r - pi/2, r].
struct TestField {
  double total_length = 0.0;

  double value(double t) const;
  double derivative(double t) const;
  std::vector<double> breakpoints() const;
};

TestField berger_test_field(double r);

// Arbitrary field psi with psi(0) = psi(length) = 0.
struct VariationField {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::vector<double> breakpoints;
};

VariationField as_variation_field(const TestField& psi);

// Curvature seen by one class of perpendicular fields, as a function of
// arclength, with the arclengths where it is not smooth.
struct CurvatureLine {
  double length = 0.0;
  std::function<double(double)> K;
  std::vector<double> breakpoints;
};

CurvatureLine constant_curvature(double K, double length);

enum class PerpClass { InSlice, Fiber };

std::string_view to_string(PerpClass c);

// sec(gamma', E) for the class; weighted adds s Hess f(gamma', gamma') with
// the manifold's potential scale, i.e. sec_X(gamma', E).
CurvatureLine curvature_along(const ManifoldWithDensity& m, const GeodesicPath& path,
                              PerpClass cls, bool weighted = false);

// Ric(gamma', gamma') = rdot^2 ric_rr + (1 - rdot^2) ric_tt.
CurvatureLine ricci_along(const ManifoldWithDensity& m, const GeodesicPath& path);

// Integral of (psi')^2 - K psi^2 over [0, K.length].
double second_variation(const CurvatureLine& K, const VariationField& psi);
double second_variation(const CurvatureLine& K, const TestField& psi);

enum class LineIntegrand { Ricci, SecPerp, WeightedSecPerp };

double line_integral(const ManifoldWithDensity& m, const GeodesicPath& path,
                     LineIntegrand integrand, PerpClass cls = PerpClass::InSlice);
double line_integral(const CurvatureLine& K);

inline constexpr double kJacobiTol = 1e-12;
// Zeros closer than this to the far end count as endpoint conjugacy.
inline constexpr double kEndpointSlack = 1e-6;

struct JacobiSolution {
  std::vector<double> zeros;  // every sign change in (0, length]
  double end_value = 0.0;     // psi(length)
  double end_slope = 0.0;
};

// psi'' + K psi = 0, psi(0) = 0, psi'(0) = 1; sign changes bisected to 1e-10.
JacobiSolution solve_jacobi(const CurvatureLine& K, double tol = kJacobiTol);

// Interior conjugate points (endpoint zeros excluded).
std::vector<double> jacobi_conjugate_points(const CurvatureLine& K, double tol = kJacobiTol);

inline constexpr int kEigenElements = 2048;

// Negative eigenvalues of the Dirichlet form (psi')^2 - K psi^2 restricted to
// piecewise-linear fields on a mesh through every breakpoint.
int eigen_count(const CurvatureLine& K, int elements = kEigenElements);

enum class IndexMethod { JacobiZeros, EigenCount };
std::string_view to_string(IndexMethod m);

struct ClassIndex {
  PerpClass cls = PerpClass::InSlice;
  int multiplicity = 1;
  std::vector<double> conjugate_points;
  int jacobi_index = 0;  // multiplicity * interior zeros
  int eigen_index = 0;   // multiplicity * negative eigenvalues
};

struct IndexResult {
  double length = 0.0;
  std::vector<double> conjugate_points;
  int multiplicity = 0;  // n - 1 along meridians, 1 when classes differ
  int index = 0;
  IndexMethod method = IndexMethod::JacobiZeros;
  int eigen_index = 0;
  bool cross_check_agree = false;
  std::vector<ClassIndex> classes;
};

IndexResult geodesic_index(const ManifoldWithDensity& m, const GeodesicPath& path);

// {"length", "multiplicity", "conjugate_points", "index", "method",
//  "cross_check_agree"} plus the per-class breakdown.
Json index_to_json(const IndexResult& r);

// Berger's argument along a geodesic of length >= pi: if the perpendicular
// curvature integrates past pi and stays <= 1 on the two end segments of
// length pi/2, the sin/plateau/-sin field has negative second variation.
struct BergerCheck {
  PerpClass cls = PerpClass::InSlice;
  double integral = 0.0;
  double second_variation = 0.0;
  double end_max = 0.0;  // sampled max of K on [0, pi/2] and [length - pi/2, length]
  bool hypothesis_met = false;
  bool holds = true;     // hypothesis_met implies second_variation < 0
};

inline constexpr double kEndBallSecTol = 1e-12;

// One entry per perpendicular class (one along meridians); empty when the
// path is shorter than pi.
std::vector<BergerCheck> berger_checks(const ManifoldWithDensity& m, const GeodesicPath& path);

enum class LoopStatus { Satisfied, Violated, NotApplicable };
std::string_view to_string(LoopStatus s);

struct LoopReport {
  double length = 0.0;
  double threshold = 0.0;  // pi / eps
  double weighted_integral_in_slice = 0.0;
  double weighted_integral_fiber = 0.0;
  IndexResult index;
  LoopStatus status = LoopStatus::NotApplicable;
  bool lemma_satisfied = true;
};

// Loops based at the pole: if length > pi/eps the index must be >= n - 1.
// eps comes from the model metadata.
LoopReport loop_index_check(const ManifoldWithDensity& m, const GeodesicPath& loop);

Json loop_to_json(const LoopReport& r);

}  // namespace pinchlab
