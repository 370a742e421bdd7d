#pragma once

// Verification suites: pinching on a radial grid, non-criticality
// certificates, diameter and injectivity gaps, quadratic growth of the
// potential, and the admissible-delta search for loops at the pole.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pinchlab/geodesics.hpp"
#include "pinchlab/profiles.hpp"
#include "pinchlab/report_io.hpp"

namespace pinchlab {

inline constexpr int kDefaultGrid = 10000;
inline constexpr double kTolLower = 1e-6;
inline constexpr double kDefaultTolUpper = 1e-6;
inline constexpr int kBandRefinement = 8;

struct Violation {
  double r = 0.0;
  std::string quantity;
  double value = 0.0;
  double bound = 0.0;
};

struct PinchReport {
  FieldMode mode = FieldMode::Ricci;
  double eps_target = 0.0;
  double upper_target = 0.0;    // (n-1) upper in Ricci mode, upper in sec mode
  double lower_required = 0.0;  // (n-1) eps in Ricci mode, eps in sec mode
  int grid_size = 0;
  int grid_points = 0;          // after band refinement
  double domain_lo = 0.0;
  double domain_hi = 0.0;
  double achieved_lower = 0.0;
  double achieved_upper = 0.0;
  double achieved_lower_r = 0.0;
  double achieved_upper_r = 0.0;
  std::string achieved_lower_quantity;
  std::string achieved_upper_quantity;
  double tol_lower = kTolLower;
  double tol_upper = kDefaultTolUpper;
  // Worst point of every contiguous run of violating grid points.
  std::vector<Violation> violations;
  int violating_points = 0;
  bool pass = false;
};

// Uniform grid over the radial domain, refined inside smoothing bands.
std::vector<double> pinch_grid(const ManifoldWithDensity& m, int grid_size);

// upper defaults to 1 (per-direction normalisation).
PinchReport verify_pinch(const ManifoldWithDensity& m, FieldMode mode, double eps,
                         double upper = 1.0, int grid_size = kDefaultGrid);

// ((n-1) pi + |X(p)|) / ((n-1) eps); eps from the metadata when absent.
double critical_radius(const ManifoldWithDensity& m, Point p,
                       std::optional<double> eps = std::nullopt,
                       FieldMode mode = FieldMode::Ricci);

struct CriticalityCertificate {
  Point p;
  Point q;
  double distance = 0.0;
  double min_inner = 0.0;
  double threshold = 0.0;
  bool noncritical = false;
  double xnorm_lower = 0.0;  // -(n-1) pi - |X(p)| + (n-1) eps d
  int minimizers = 0;
  int launch_angles = 0;
};

// g(X(q), gamma'(d)) over every minimal geodesic found from p to q.
double inner_with_field(const ManifoldWithDensity& m, const GeodesicPath& path,
                        FieldMode mode = FieldMode::Ricci);

CriticalityCertificate criticality_certificate(const ManifoldWithDensity& m, Point p, Point q,
                                               std::optional<double> eps = std::nullopt,
                                               FieldMode mode = FieldMode::Ricci,
                                               const DistanceOptions& opts = {});

struct GapReport {
  Point base;
  FarthestPoint farthest;
  double bound = 0.0;                   // ((n-1) pi + |X(p)|) / ((n-1) eps)
  std::optional<double> zero_bound;     // 2 pi / eps when X(p) = 0
  double inj = 0.0;
  double rigidity_threshold = 0.0;
  double berger_inner = 0.0;            // g(X(q), gamma') at the farthest point
  bool berger_ok = false;               // berger_inner <= 0
  bool within_bound = false;
};

// Base point must be a pole of a doubled sphere.
GapReport diameter_gap(const ManifoldWithDensity& m, Point p,
                       std::optional<double> eps = std::nullopt);

struct InjGap {
  double inj = 0.0;
  double threshold = 0.0;
  bool hypothesis_met = false;
  bool boundary = false;  // |inj - threshold| <= 1e-6
};

InjGap inj_gap_hypothesis(const ManifoldWithDensity& m, Point p,
                          std::optional<double> eps = std::nullopt);

struct GrowthReport {
  double max_violation = 0.0;  // max over the grid of bound - f
  double worst_t = 0.0;
  int grid_points = 0;
  double max_t = 0.0;
  bool pass = false;
};

// Along the meridian from the pole p, f(t) >= f(p) - ((n-1) pi + |X(p)|) t
// + (n-1) eps t^2 / 2 on a uniform grid of [0, max_t].
GrowthReport verify_quadratic_growth(const ManifoldWithDensity& m, Point p, double max_t,
                                     int grid = kDefaultGrid,
                                     std::optional<double> eps = std::nullopt);

enum class DeltaStatus { Ok, Infeasible, NonConjugacyFailed };
std::string_view to_string(DeltaStatus s);

struct DeltaCondition {
  std::string name;
  double cap = 0.0;     // supremum of admissible delta for this condition
  double margin = 0.0;  // slack at the chosen delta
};

struct DeltaSearch {
  DeltaStatus status = DeltaStatus::Infeasible;
  std::string reason;
  double delta_max = 0.0;
  double delta = 0.0;  // chosen
  std::string binding;
  std::vector<DeltaCondition> conditions;
  double jacobi_value = 0.0;  // tangential Jacobi field at l - delta
  int halvings = 0;
  std::vector<std::string> assumptions;
};

// Loop of length l at the pole p (a zero of X, Ricci-mode field).
DeltaSearch klingenberg_delta_search(const ManifoldWithDensity& m, double eps, double loop_length);

// Tolerance on the upper pinching bound for the model and mode.
double upper_tolerance(const ManifoldWithDensity& m, FieldMode mode);

Json pinch_to_json(const PinchReport& r);
Json certificate_to_json(const CriticalityCertificate& c);
Json gap_to_json(const GapReport& g);
Json delta_search_to_json(const DeltaSearch& d);

// {"suite", "model", "params", "pass", "margins", "violations", "resolution",
//  "tolerances"}; resolution and tolerances always carry the run defaults.
Json suite_report(const std::string& suite, const ManifoldWithDensity& m, const Json& params,
                  bool pass, const Json& margins, const std::vector<Violation>& violations,
                  Json resolution = Json::object(), Json tolerances = Json::object());

}  // namespace pinchlab
