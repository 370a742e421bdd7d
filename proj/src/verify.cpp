#include "pinchlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pinchlab/curvature.hpp"
#include "pinchlab/profile_json.hpp"
#include "pinchlab/variation.hpp"

namespace pinchlab {

namespace {

constexpr double kPi = std::numbers::pi;

double resolve_eps(const ManifoldWithDensity& m, std::optional<double> eps) {
  const std::optional<double> e = eps ? eps : m.meta().eps;
  if (!e) throw DomainError("eps not supplied and not recorded in the model");
  if (!(*e > 0.0)) throw DomainError("eps must be positive, got " + format_double(*e));
  return *e;
}

void require_pole(const ManifoldWithDensity& m, Point p, const char* what) {
  if (!is_pole(m, p.r)) {
    throw DomainError(std::string(what) + " is implemented for pole base points only");
  }
}

struct Quantity {
  const char* name;
  double value;
};

}  // namespace

// ---------------------------------------------------------------------------
// Pinching

double upper_tolerance(const ManifoldWithDensity& m, FieldMode mode) {
  if (m.meta().kind == ModelKind::Family && m.meta().delta) {
    const double d = *m.meta().delta;
    const double per_direction = 5.0 * d * d;
    return mode == FieldMode::Ricci ? (m.n() - 1) * per_direction : per_direction;
  }
  return kDefaultTolUpper;
}

std::vector<double> pinch_grid(const ManifoldWithDensity& m, int grid_size) {
  const double hi = m.domain_max();
  const double h = hi / grid_size;
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(grid_size) + 1);
  for (int i = 0; i <= grid_size; ++i) grid.push_back(i == grid_size ? hi : i * h);
  for (const auto& [a, b] : m.band_intervals()) {
    const int count = std::max(kBandRefinement, static_cast<int>(std::ceil((b - a) / h)) * kBandRefinement);
    for (int i = 0; i <= count; ++i) grid.push_back(a + (b - a) * i / count);
  }
  for (double x : m.breakpoints()) {
    if (x >= 0.0 && x <= hi) grid.push_back(x);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

PinchReport verify_pinch(const ManifoldWithDensity& m, FieldMode mode, double eps, double upper,
                         int grid_size) {
  if (grid_size < 100) throw DomainError("pinch grid needs at least 100 intervals");
  PinchReport rep;
  rep.mode = mode;
  rep.eps_target = eps;
  rep.grid_size = grid_size;
  const double nm1 = m.n() - 1.0;
  rep.lower_required = mode == FieldMode::Ricci ? nm1 * eps : eps;
  rep.upper_target = mode == FieldMode::Ricci ? nm1 * upper : upper;
  rep.tol_lower = kTolLower;
  rep.tol_upper = upper_tolerance(m, mode);

  const std::vector<double> grid = pinch_grid(m, grid_size);
  rep.grid_points = static_cast<int>(grid.size());
  rep.domain_lo = grid.front();
  rep.domain_hi = grid.back();
  rep.achieved_lower = std::numeric_limits<double>::infinity();
  rep.achieved_upper = -std::numeric_limits<double>::infinity();

  // Open run of violations per quantity name, keyed by index in the list.
  std::map<std::string, std::optional<std::size_t>> open_run;
  auto note = [&](double r, const char* name, double value, double bound, bool bad, bool lower) {
    std::optional<std::size_t>& run = open_run[name];
    if (!bad) {
      run.reset();
      return;
    }
    ++rep.violating_points;
    if (!run) {
      rep.violations.push_back({r, name, value, bound});
      run = rep.violations.size() - 1;
      return;
    }
    Violation& v = rep.violations[*run];
    if (lower ? value < v.value : value > v.value) v = {r, name, value, bound};
  };

  for (double r : grid) {
    const CurvatureSample c = curvature_sample(m, r);
    std::vector<Quantity> lows, highs;
    if (mode == FieldMode::Ricci) {
      lows = {{"bakry_rr", c.bakry_rr}, {"bakry_tt", c.bakry_tt}};
      highs = {{"ric_rr", c.ric_rr}, {"ric_tt", c.ric_tt}};
    } else {
      lows = {{"wsec_rT", c.wsec_rT}, {"wsec_Tr", c.wsec_Tr}, {"wsec_TT", c.wsec_TT}};
      highs = {{"sec_rad", c.sec_rad}, {"sec_tan", c.sec_tan}};
    }
    for (const Quantity& q : lows) {
      if (q.value < rep.achieved_lower) {
        rep.achieved_lower = q.value;
        rep.achieved_lower_r = r;
        rep.achieved_lower_quantity = q.name;
      }
      note(r, q.name, q.value, rep.lower_required,
           q.value < rep.lower_required - rep.tol_lower, true);
    }
    for (const Quantity& q : highs) {
      if (q.value > rep.achieved_upper) {
        rep.achieved_upper = q.value;
        rep.achieved_upper_r = r;
        rep.achieved_upper_quantity = q.name;
      }
      note(r, q.name, q.value, rep.upper_target, q.value > rep.upper_target + rep.tol_upper,
           false);
    }
  }
  std::stable_sort(rep.violations.begin(), rep.violations.end(),
                   [](const Violation& a, const Violation& b) { return a.r < b.r; });
  rep.pass = rep.violations.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// Criticality

double critical_radius(const ManifoldWithDensity& m, Point p, std::optional<double> eps,
                       FieldMode mode) {
  const double e = resolve_eps(m, eps);
  const double nm1 = m.n() - 1.0;
  return (nm1 * kPi + x_field_norm(m, p.r, mode)) / (nm1 * e);
}

double inner_with_field(const ManifoldWithDensity& m, const GeodesicPath& path, FieldMode mode) {
  const PathState end = path.state_at(path.length());
  const double r = std::clamp(end.r, 0.0, m.domain_max());
  return m.scale_for(mode) * m.f_at(r, 1) * end.rdot;
}

CriticalityCertificate criticality_certificate(const ManifoldWithDensity& m, Point p, Point q,
                                               std::optional<double> eps, FieldMode mode,
                                               const DistanceOptions& opts) {
  const double e = resolve_eps(m, eps);
  const double nm1 = m.n() - 1.0;
  const DistanceResult d = distance(m, p, q, opts);
  CriticalityCertificate cert;
  cert.p = p;
  cert.q = q;
  cert.distance = d.distance;
  cert.threshold = critical_radius(m, p, e, mode);
  cert.launch_angles = d.launch_angles;
  cert.minimizers = static_cast<int>(d.minimizers.size());
  cert.min_inner = std::numeric_limits<double>::infinity();
  for (const GeodesicPath& g : d.minimizers) {
    cert.min_inner = std::min(cert.min_inner, inner_with_field(m, g, mode));
  }
  if (d.minimizers.empty()) cert.min_inner = 0.0;
  cert.noncritical = cert.min_inner > 0.0;
  cert.xnorm_lower = -nm1 * kPi - x_field_norm(m, p.r, mode) + nm1 * e * d.distance;
  return cert;
}

// ---------------------------------------------------------------------------
// Gaps

GapReport diameter_gap(const ManifoldWithDensity& m, Point p, std::optional<double> eps) {
  if (!m.is_compact()) throw DomainError("diameter gap needs a doubled sphere");
  require_pole(m, p, "diameter gap");
  const double e = resolve_eps(m, eps);
  GapReport g;
  g.base = p;
  g.farthest = farthest_from_pole(m);
  if (p.r > 0.5 * m.domain_max()) {
    // Measured from the far pole: mirror the farthest point.
    g.farthest.point.r = m.domain_max() - g.farthest.point.r;
  }
  g.bound = critical_radius(m, p, e);
  if (x_field_norm(m, p.r, FieldMode::Ricci) <= 1e-12) g.zero_bound = 2.0 * kPi / e;
  g.inj = inj_at_pole(m);
  g.rigidity_threshold = g.bound;
  const DistanceResult d = distance(m, p, g.farthest.point);
  g.berger_inner = std::numeric_limits<double>::infinity();
  for (const GeodesicPath& path : d.minimizers) {
    g.berger_inner = std::min(g.berger_inner, inner_with_field(m, path));
  }
  g.berger_ok = g.berger_inner <= 0.0;
  g.within_bound = g.farthest.length <= g.bound + 1e-6;
  return g;
}

InjGap inj_gap_hypothesis(const ManifoldWithDensity& m, Point p, std::optional<double> eps) {
  require_pole(m, p, "injectivity gap");
  InjGap out;
  out.inj = inj_at_pole(m);
  out.threshold = critical_radius(m, p, eps);
  out.boundary = std::abs(out.inj - out.threshold) <= 1e-6;
  out.hypothesis_met = out.inj >= out.threshold - 1e-6;
  return out;
}

GrowthReport verify_quadratic_growth(const ManifoldWithDensity& m, Point p, double max_t,
                                     int grid, std::optional<double> eps) {
  require_pole(m, p, "quadratic growth");
  const double e = resolve_eps(m, eps);
  if (!(max_t > 0.0 && max_t <= m.domain_max())) {
    throw DomainError("growth range must lie in (0, " + format_double(m.domain_max()) + "]");
  }
  if (grid < 1) throw DomainError("growth grid must be positive");
  const double nm1 = m.n() - 1.0;
  const bool from_far = p.r > 0.5 * m.domain_max();
  const double f0 = m.f_at(p.r, 0);
  const double lin = nm1 * kPi + x_field_norm(m, p.r, FieldMode::Ricci);
  GrowthReport rep;
  rep.grid_points = grid + 1;
  rep.max_t = max_t;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double t = max_t * i / grid;
    const double r = from_far ? m.domain_max() - t : t;
    const double bound = f0 - lin * t + 0.5 * nm1 * e * t * t;
    const double gap = bound - m.f_at(r, 0);
    if (gap > rep.max_violation) {
      rep.max_violation = gap;
      rep.worst_t = t;
    }
  }
  rep.pass = rep.max_violation <= 1e-8;
  return rep;
}

// ---------------------------------------------------------------------------
// Admissible delta for loops at the pole

std::string_view to_string(DeltaStatus s) {
  switch (s) {
    case DeltaStatus::Ok:
      return "OK";
    case DeltaStatus::Infeasible:
      return "INFEASIBLE";
    case DeltaStatus::NonConjugacyFailed:
      return "NON_CONJUGACY_FAILED";
  }
  return "";
}

DeltaSearch klingenberg_delta_search(const ManifoldWithDensity& m, double eps,
                                     double loop_length) {
  DeltaSearch out;
  out.assumptions = {
      "genericity of the loop family (regular values) is assumed, not checked",
      "X measured with the unscaled potential (Ricci-mode field)"};
  if (!(eps > 0.5)) {
    out.status = DeltaStatus::Infeasible;
    out.reason = "eps <= 1/2 leaves no room in 3 eps delta + N(delta) < pi (2 eps - 1)";
    return out;
  }
  if (!(loop_length > 0.0)) throw DomainError("loop length must be positive");
  if (x_field_norm(m, 0.0, FieldMode::Ricci) > 1e-12) {
    throw PreconditionError("the pole is not a zero of X");
  }
  const double rhs = kPi * (2.0 * eps - 1.0);
  const double reach = 0.5 * m.domain_max();  // keep B(p, 2 delta) inside the range

  auto N = [&](double delta) {
    const int samples = 512;
    double best = 0.0;
    for (int i = 0; i <= samples; ++i) {
      best = std::max(best, x_field_norm(m, 2.0 * delta * i / samples, FieldMode::Ricci));
    }
    for (double b : m.breakpoints()) {
      if (b <= 2.0 * delta) best = std::max(best, x_field_norm(m, b, FieldMode::Ricci));
    }
    return best;
  };
  auto lhs3 = [&](double delta) { return 3.0 * eps * delta + N(delta); };

  double cap3 = reach;
  if (lhs3(reach) >= rhs) {
    double lo = 0.0, hi = reach;
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
      const double mid = 0.5 * (lo + hi);
      (lhs3(mid) < rhs ? lo : hi) = mid;
    }
    cap3 = 0.5 * (lo + hi);
  }
  const double inj = inj_at_pole(m);
  out.conditions = {{"3: 3 eps delta + N(delta) < pi (2 eps - 1)", cap3, 0.0},
                    {"4: 3 delta < 2 pi - l", (2.0 * kPi - loop_length) / 3.0, 0.0},
                    {"5: 5 delta < 2 pi", 2.0 * kPi / 5.0, 0.0},
                    {"2: 2 delta < inj_p", 0.5 * inj, 0.0}};
  const auto binding = std::min_element(
      out.conditions.begin(), out.conditions.end(),
      [](const DeltaCondition& a, const DeltaCondition& b) { return a.cap < b.cap; });
  out.delta_max = binding->cap;
  out.binding = binding->name;
  if (!(out.delta_max > 0.0)) {
    out.status = DeltaStatus::Infeasible;
    out.reason = "no positive delta satisfies condition " + out.binding;
    return out;
  }

  // Condition 1: gamma(l - delta) not conjugate to p along the meridian loop.
  double delta = 0.5 * out.delta_max;
  out.status = DeltaStatus::NonConjugacyFailed;
  out.reason = "gamma(l - delta) conjugate to p for every tried delta";
  while (delta > 1e-12) {
    const double span = loop_length - delta;
    if (span <= 0.0) break;
    const GeodesicPath g = shoot(m, 0.0, 0.0, span);
    const JacobiSolution j = solve_jacobi(curvature_along(m, g, PerpClass::InSlice));
    out.jacobi_value = j.end_value;
    if (std::abs(j.end_value) > 1e-8) {
      out.status = DeltaStatus::Ok;
      out.reason.clear();
      break;
    }
    delta *= 0.5;
    ++out.halvings;
  }
  out.delta = delta;
  for (DeltaCondition& c : out.conditions) c.margin = c.cap - delta;
  out.conditions.front().margin = rhs - lhs3(delta);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

Json violations_json(const std::vector<Violation>& vs) {
  Json arr = Json::array();
  for (const Violation& v : vs) {
    arr.push_back({{"r", v.r}, {"quantity", v.quantity}, {"value", v.value}, {"bound", v.bound}});
  }
  return arr;
}

std::string mode_name(FieldMode m) { return m == FieldMode::Ricci ? "ricci" : "sec"; }

}  // namespace

Json pinch_to_json(const PinchReport& r) {
  return {{"mode", mode_name(r.mode)},
          {"eps_target", r.eps_target},
          {"lower_required", r.lower_required},
          {"upper_target", r.upper_target},
          {"achieved_lower", {{"value", r.achieved_lower},
                              {"r", r.achieved_lower_r},
                              {"quantity", r.achieved_lower_quantity}}},
          {"achieved_upper", {{"value", r.achieved_upper},
                              {"r", r.achieved_upper_r},
                              {"quantity", r.achieved_upper_quantity}}},
          {"lower_margin", r.achieved_lower - r.lower_required},
          {"upper_margin", r.upper_target - r.achieved_upper},
          {"grid", {{"size", r.grid_size},
                    {"points", r.grid_points},
                    {"domain", {r.domain_lo, r.domain_hi}},
                    {"band_refinement", kBandRefinement}}},
          {"tol_lower", r.tol_lower},
          {"tol_upper", r.tol_upper},
          {"violating_points", r.violating_points},
          {"violations", violations_json(r.violations)},
          {"pass", r.pass}};
}

Json certificate_to_json(const CriticalityCertificate& c) {
  return {{"p", {{"r", c.p.r}, {"theta", c.p.theta}}},
          {"q", {{"r", c.q.r}, {"theta", c.q.theta}}},
          {"distance", c.distance},
          {"min_inner", c.min_inner},
          {"threshold", c.threshold},
          {"noncritical", c.noncritical},
          {"xnorm_lower", c.xnorm_lower},
          {"minimizers", c.minimizers},
          {"launch_angles", c.launch_angles}};
}

Json gap_to_json(const GapReport& g) {
  Json out = {{"base", {{"r", g.base.r}, {"theta", g.base.theta}}},
              {"farthest", {{"r", g.farthest.point.r},
                            {"theta", g.farthest.point.theta},
                            {"distance", g.farthest.length}}},
              {"bound", g.bound},
              {"zero_bound", nullptr},
              {"inj", g.inj},
              {"rigidity_threshold", g.rigidity_threshold},
              {"rigidity_hypothesis_met", g.inj >= g.rigidity_threshold - 1e-6},
              {"berger_inner", g.berger_inner},
              {"berger_ok", g.berger_ok},
              {"within_bound", g.within_bound},
              {"gap_ratio", g.zero_bound ? Json(g.farthest.length / *g.zero_bound) : Json()}};
  if (g.zero_bound) out["zero_bound"] = *g.zero_bound;
  return out;
}

Json delta_search_to_json(const DeltaSearch& d) {
  Json conds = Json::array();
  for (const DeltaCondition& c : d.conditions) {
    conds.push_back({{"condition", c.name}, {"cap", c.cap}, {"margin", c.margin}});
  }
  return {{"status", std::string(to_string(d.status))},
          {"reason", d.reason},
          {"delta_max", d.delta_max},
          {"delta", d.delta},
          {"binding", d.binding},
          {"conditions", conds},
          {"non_conjugacy", {{"jacobi_value", d.jacobi_value}, {"halvings", d.halvings}}},
          {"assumptions", d.assumptions}};
}

Json suite_report(const std::string& suite, const ManifoldWithDensity& m, const Json& params,
                  bool pass, const Json& margins, const std::vector<Violation>& violations,
                  Json resolution, Json tolerances) {
  if (!resolution.contains("grid")) resolution["grid"] = kDefaultGrid;
  if (!resolution.contains("launch_angles")) resolution["launch_angles"] = 256;
  if (!tolerances.contains("integrator")) tolerances["integrator"] = kDefaultIntegratorTol;
  if (!tolerances.contains("distance")) tolerances["distance"] = 1e-6;
  return {{"suite", suite},
          {"model", manifold_to_json(m)},
          {"params", params},
          {"pass", pass},
          {"margins", margins},
          {"violations", violations_json(violations)},
          {"resolution", resolution},
          {"tolerances", tolerances}};
}

}  // namespace pinchlab
