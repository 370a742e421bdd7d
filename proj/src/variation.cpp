#include "pinchlab/variation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/numeric/odeint.hpp>

#include "pinchlab/curvature.hpp"
#include "pinchlab/quadrature.hpp"

namespace pinchlab {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> merged(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

}  // namespace

// ---------------------------------------------------------------------------
// Test fields

double TestField::value(double t) const {
  const double r = total_length;
  t = std::clamp(t, 0.0, r);
  if (t <= 0.5 * kPi) return std::sin(t);
  if (t <= r - 0.5 * kPi) return 1.0;
  return std::sin(r - t);
}

double TestField::derivative(double t) const {
  const double r = total_length;
  t = std::clamp(t, 0.0, r);
  if (t < 0.5 * kPi) return std::cos(t);
  if (t < r - 0.5 * kPi) return 0.0;
  if (t == 0.5 * kPi && r == kPi) return 0.0;
  return -std::cos(r - t);
}

std::vector<double> TestField::breakpoints() const {
  return {0.5 * kPi, total_length - 0.5 * kPi};
}

TestField berger_test_field(double r) {
  if (!(r >= kPi)) {
    throw DomainError("test field needs length >= pi, got " + format_double(r));
  }
  return TestField{r};
}

VariationField as_variation_field(const TestField& psi) {
  return {[psi](double t) { return psi.value(t); },
          [psi](double t) { return psi.derivative(t); }, psi.breakpoints()};
}

CurvatureLine constant_curvature(double K, double length) {
  return {length, [K](double) { return K; }, {}};
}

// ---------------------------------------------------------------------------
// Curvature along a path

std::string_view to_string(PerpClass c) { return c == PerpClass::InSlice ? "in_slice" : "fiber"; }

namespace {

struct PathView {
  const ManifoldWithDensity* m;
  std::shared_ptr<const GeodesicPath> path;

  // Radius clamped to the domain plus the squared radial speed.
  std::pair<double, double> at(double t) const {
    const PathState st = path->state_at(t);
    const double r = std::clamp(st.r, 0.0, m->domain_max());
    return {r, std::min(1.0, st.rdot * st.rdot)};
  }
};

PathView view(const ManifoldWithDensity& m, const GeodesicPath& path) {
  return {&m, std::make_shared<const GeodesicPath>(path)};
}

}  // namespace

CurvatureLine curvature_along(const ManifoldWithDensity& m, const GeodesicPath& path,
                              PerpClass cls, bool weighted) {
  const PathView v = view(m, path);
  const double s = m.potential_scale();
  CurvatureLine line;
  line.length = path.length();
  line.breakpoints = path.radial_crossings(m.breakpoints());
  line.K = [v, s, cls, weighted](double t) {
    const auto [r, a2] = v.at(t);
    const CurvatureSample c = curvature_sample(*v.m, r);
    double k = cls == PerpClass::InSlice ? c.sec_rad : a2 * c.sec_rad + (1.0 - a2) * c.sec_tan;
    if (weighted) {
      k += s * (a2 * v.m->f_at(r, 2) + (1.0 - a2) * tangential_hessian(*v.m, r));
    }
    return k;
  };
  return line;
}

CurvatureLine ricci_along(const ManifoldWithDensity& m, const GeodesicPath& path) {
  const PathView v = view(m, path);
  CurvatureLine line;
  line.length = path.length();
  line.breakpoints = path.radial_crossings(m.breakpoints());
  line.K = [v](double t) {
    const auto [r, a2] = v.at(t);
    const CurvatureSample c = curvature_sample(*v.m, r);
    return a2 * c.ric_rr + (1.0 - a2) * c.ric_tt;
  };
  return line;
}

// ---------------------------------------------------------------------------
// Integrals

double second_variation(const CurvatureLine& K, const VariationField& psi) {
  auto g = [&](double t) {
    const double p = psi.value(t);
    const double dp = psi.derivative(t);
    return dp * dp - K.K(t) * p * p;
  };
  return integrate_piecewise(g, 0.0, K.length, merged(K.breakpoints, psi.breakpoints));
}

double second_variation(const CurvatureLine& K, const TestField& psi) {
  return second_variation(K, as_variation_field(psi));
}

double line_integral(const CurvatureLine& K) {
  return integrate_piecewise(K.K, 0.0, K.length, K.breakpoints);
}

double line_integral(const ManifoldWithDensity& m, const GeodesicPath& path,
                     LineIntegrand integrand, PerpClass cls) {
  switch (integrand) {
    case LineIntegrand::Ricci:
      return line_integral(ricci_along(m, path));
    case LineIntegrand::SecPerp:
      return line_integral(curvature_along(m, path, cls, false));
    case LineIntegrand::WeightedSecPerp:
      return line_integral(curvature_along(m, path, cls, true));
  }
  return 0.0;
}

namespace {

double sampled_max(const CurvatureLine& K, double a, double b) {
  constexpr int kSamples = 4096;
  double best = K.K(a);
  for (int i = 1; i <= kSamples; ++i) best = std::max(best, K.K(a + (b - a) * i / kSamples));
  for (double t : K.breakpoints) {
    if (t > a && t < b) best = std::max(best, K.K(t));
  }
  return best;
}

}  // namespace

std::vector<BergerCheck> berger_checks(const ManifoldWithDensity& m, const GeodesicPath& path) {
  std::vector<BergerCheck> out;
  const double len = path.length();
  if (len < kPi) return out;
  const TestField psi = berger_test_field(len);
  std::vector<PerpClass> classes{PerpClass::InSlice};
  if (!path.is_meridian() && m.n() > 2) classes.push_back(PerpClass::Fiber);
  for (PerpClass cls : classes) {
    const CurvatureLine K = curvature_along(m, path, cls);
    BergerCheck b;
    b.cls = cls;
    b.integral = line_integral(K);
    b.second_variation = second_variation(K, psi);
    b.end_max = std::max(sampled_max(K, 0.0, 0.5 * kPi), sampled_max(K, len - 0.5 * kPi, len));
    b.hypothesis_met = b.integral > kPi && b.end_max <= 1.0 + kEndBallSecTol;
    b.holds = !b.hypothesis_met || b.second_variation < 0.0;
    out.push_back(b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Jacobi fields

JacobiSolution solve_jacobi(const CurvatureLine& K, double tol) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 2>;
  JacobiSolution sol;
  const double L = K.length;
  if (!(L > 0.0)) return sol;
  auto rhs = [&](const State& y, State& dy, double t) {
    dy[0] = y[1];
    dy[1] = -K.K(t) * y[0];
  };
  auto ctl = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>());
  odeint::runge_kutta_dopri5<State> rk;
  // Steps end exactly on every knot so that no step straddles a kink of K.
  const std::vector<double> knots = forced_mesh(0.0, L, K.breakpoints, 1);
  State y{0.0, 1.0}, dy{};
  double t = 0.0, dt = 1e-3;
  rhs(y, dy, t);
  for (std::size_t i = 1; i < knots.size(); ++i) {
    const double hi = knots[i];
    while (hi - t > 1e-15 * std::max(1.0, hi)) {
      double h = std::min({dt, 0.05, hi - t});
      const bool last = h == hi - t;
      State y1 = y, d1 = dy;
      double t1 = t;
      if (ctl.try_step(rhs, y1, d1, t1, h) == odeint::fail) {
        dt = h;
        continue;
      }
      dt = h;
      if (last) t1 = hi;
      if (y1[0] == 0.0) {
        sol.zeros.push_back(t1);
      } else if (y[0] != 0.0 && (y[0] < 0.0) != (y1[0] < 0.0)) {
        // Bisect on re-steps of the same length scale from the step start.
        double a = 0.0, b = t1 - t;
        const bool neg_a = y[0] < 0.0;
        State ym{}, dm{};
        while (b - a > 1e-12) {
          const double mid = 0.5 * (a + b);
          rk.do_step(rhs, y, dy, t, ym, dm, mid);
          ((ym[0] < 0.0) == neg_a ? a : b) = mid;
        }
        sol.zeros.push_back(t + 0.5 * (a + b));
      }
      t = t1;
      y = y1;
      dy = d1;
    }
    t = hi;
  }
  sol.end_value = y[0];
  sol.end_slope = y[1];
  return sol;
}

std::vector<double> jacobi_conjugate_points(const CurvatureLine& K, double tol) {
  std::vector<double> out;
  for (double z : solve_jacobi(K, tol).zeros) {
    if (z > 0.0 && z < K.length - kEndpointSlack) out.push_back(z);
  }
  return out;
}

int eigen_count(const CurvatureLine& K, int elements) {
  using GL = boost::math::quadrature::gauss<double, 7>;
  const std::vector<double> mesh = forced_mesh(0.0, K.length, K.breakpoints, elements);
  const std::size_t N = mesh.size();  // nodes 0 .. N-1, interior 1 .. N-2
  if (N < 3) return 0;
  std::vector<double> diag(N, 0.0), off(N - 1, 0.0);
  const auto& xs = GL::abscissa();
  const auto& ws = GL::weights();
  for (std::size_t e = 0; e + 1 < N; ++e) {
    const double a = mesh[e], b = mesh[e + 1];
    const double h = b - a;
    const double mid = 0.5 * (a + b);
    double pll = 0.0, prr = 0.0, plr = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      for (int sgn : {1, -1}) {
        if (k == 0 && sgn < 0 && xs[0] == 0.0) continue;
        const double x = mid + sgn * xs[k] * 0.5 * h;
        const double w = ws[k] * 0.5 * h;
        const double kv = K.K(x);
        const double l = (b - x) / h, r = (x - a) / h;
        pll += w * kv * l * l;
        prr += w * kv * r * r;
        plr += w * kv * l * r;
      }
    }
    diag[e] += 1.0 / h - pll;
    diag[e + 1] += 1.0 / h - prr;
    off[e] += -1.0 / h - plr;
  }
  const std::vector<double> d(diag.begin() + 1, diag.end() - 1);
  const std::vector<double> o(off.begin() + 1, off.end() - 1);
  return count_negative_eigenvalues(d, o);
}

// ---------------------------------------------------------------------------
// Index

std::string_view to_string(IndexMethod m) {
  return m == IndexMethod::JacobiZeros ? "JACOBI_ZEROS" : "EIGEN_COUNT";
}

IndexResult geodesic_index(const ManifoldWithDensity& m, const GeodesicPath& path) {
  IndexResult res;
  res.length = path.length();
  std::vector<std::pair<PerpClass, int>> classes;
  if (path.is_meridian() || m.n() == 2) {
    classes.push_back({PerpClass::InSlice, m.n() - 1});
  } else {
    classes.push_back({PerpClass::InSlice, 1});
    classes.push_back({PerpClass::Fiber, m.n() - 2});
  }
  for (const auto& [cls, mult] : classes) {
    const CurvatureLine line = curvature_along(m, path, cls);
    ClassIndex ci;
    ci.cls = cls;
    ci.multiplicity = mult;
    ci.conjugate_points = jacobi_conjugate_points(line);
    ci.jacobi_index = mult * static_cast<int>(ci.conjugate_points.size());
    ci.eigen_index = mult * eigen_count(line);
    res.index += ci.jacobi_index;
    res.eigen_index += ci.eigen_index;
    res.classes.push_back(ci);
  }
  auto same_points = [](const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::abs(a[i] - b[i]) > 1e-8) return false;
    }
    return true;
  };
  const bool uniform = std::all_of(res.classes.begin(), res.classes.end(), [&](const ClassIndex& c) {
    return same_points(c.conjugate_points, res.classes.front().conjugate_points);
  });
  if (uniform) {
    res.multiplicity = m.n() - 1;
    res.conjugate_points = res.classes.front().conjugate_points;
  } else {
    res.multiplicity = 1;
    for (const ClassIndex& c : res.classes) {
      for (double z : c.conjugate_points) {
        res.conjugate_points.insert(res.conjugate_points.end(), c.multiplicity, z);
      }
    }
    std::sort(res.conjugate_points.begin(), res.conjugate_points.end());
  }
  res.method = IndexMethod::JacobiZeros;
  res.cross_check_agree = res.index == res.eigen_index;
  return res;
}

Json index_to_json(const IndexResult& r) {
  Json classes = Json::array();
  for (const ClassIndex& c : r.classes) {
    classes.push_back({{"class", std::string(to_string(c.cls))},
                       {"multiplicity", c.multiplicity},
                       {"conjugate_points", c.conjugate_points},
                       {"jacobi_index", c.jacobi_index},
                       {"eigen_index", c.eigen_index}});
  }
  return {{"length", r.length},
          {"multiplicity", r.multiplicity},
          {"conjugate_points", r.conjugate_points},
          {"index", r.index},
          {"method", std::string(to_string(r.method))},
          {"eigen_count_index", r.eigen_index},
          {"cross_check_agree", r.cross_check_agree},
          {"classes", classes}};
}

// ---------------------------------------------------------------------------
// Loops at the pole

std::string_view to_string(LoopStatus s) {
  switch (s) {
    case LoopStatus::Satisfied:
      return "SATISFIED";
    case LoopStatus::Violated:
      return "VIOLATED";
    case LoopStatus::NotApplicable:
      return "NOT_APPLICABLE";
  }
  return "";
}

LoopReport loop_index_check(const ManifoldWithDensity& m, const GeodesicPath& loop) {
  if (!m.meta().eps || !(*m.meta().eps > 0.0)) {
    throw PreconditionError("loop check needs a positive eps in the model metadata");
  }
  const double start = loop.state_at(0.0).r;
  const double end = loop.state_at(loop.length()).r;
  auto near_pole = [&](double r) {
    return r <= 1e-8 || (m.is_compact() && r >= m.domain_max() - 1e-8);
  };
  if (!near_pole(start) || !near_pole(end)) {
    throw PreconditionError("loop must start and end at a pole");
  }
  const double xn = x_field_norm(m, start <= 1e-8 ? 0.0 : m.domain_max());
  if (xn > 1e-12) {
    throw PreconditionError("base point is not a zero of X (|X| = " + format_double(xn) + ")");
  }
  LoopReport rep;
  rep.length = loop.length();
  rep.threshold = kPi / *m.meta().eps;
  rep.weighted_integral_in_slice =
      line_integral(m, loop, LineIntegrand::WeightedSecPerp, PerpClass::InSlice);
  rep.weighted_integral_fiber =
      line_integral(m, loop, LineIntegrand::WeightedSecPerp, PerpClass::Fiber);
  rep.index = geodesic_index(m, loop);
  if (rep.length <= rep.threshold) {
    rep.status = LoopStatus::NotApplicable;
    rep.lemma_satisfied = true;
  } else {
    rep.lemma_satisfied = rep.index.index >= m.n() - 1;
    rep.status = rep.lemma_satisfied ? LoopStatus::Satisfied : LoopStatus::Violated;
  }
  return rep;
}

Json loop_to_json(const LoopReport& r) {
  return {{"length", r.length},
          {"threshold", r.threshold},
          {"weighted_sec_integral", {{"in_slice", r.weighted_integral_in_slice},
                                     {"fiber", r.weighted_integral_fiber}}},
          {"index", index_to_json(r.index)},
          {"status", std::string(to_string(r.status))},
          {"lemma_satisfied", r.lemma_satisfied}};
}

}  // namespace pinchlab
