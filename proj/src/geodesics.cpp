#include "pinchlab/geodesics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>

#include "pinchlab/report_io.hpp"

namespace pinchlab {

namespace {

namespace odeint = boost::numeric::odeint;

constexpr double kPi = std::numbers::pi;
constexpr double kMaxStep = 0.05;

using State = std::array<double, 4>;  // r, rdot, theta, thetadot

// Geodesic equations of dr^2 + phi^2 dtheta^2.  Trial stages may overshoot a
// pole; there phi is continued oddly, which is the same surface seen through
// the pole, and the controller rejects or accepts the step on its merits.
struct SliceSystem {
  const ManifoldWithDensity* m;

  // Odd continuation through the poles (periodic with period 2 top on a
  // doubled sphere), so trial stages of an oversized step stay evaluable.
  std::pair<double, double> warp(double r) const {
    const double top = m->domain_max();
    if (m->is_compact() && (r < 0.0 || r > top)) {
      r = std::remainder(r, 2.0 * top);
    }
    if (r < 0.0) {
      const auto [v, d] = m->phi01(-r);
      return {-v, d};
    }
    return m->phi01(r);
  }

  void operator()(const State& y, State& dy, double /*t*/) const {
    const auto [phi, dphi] = warp(y[0]);
    dy[0] = y[1];
    dy[1] = phi * dphi * y[3] * y[3];
    dy[2] = y[3];
    dy[3] = -2.0 * dphi * y[1] * y[3] / phi;
  }
};

// Controlled dopri5 that never steps across a junction radius of the
// profiles: a step that would is shortened to land on it, so every step sees
// a smooth right-hand side.
class SliceIntegrator {
 public:
  SliceIntegrator(const ManifoldWithDensity& m, const State& y0, double tol, double max_step)
      : sys_{&m},
        ctl_(odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>())),
        max_step_(max_step),
        compact_(m.is_compact()),
        top_(m.domain_max()),
        radii_(m.breakpoints()),
        y_(y0) {
    sys_(y_, dy_, 0.0);
    prev_y_ = y_;
    prev_dy_ = dy_;
  }

  double t() const { return t_; }
  const State& y() const { return y_; }
  const State& dydt() const { return dy_; }
  double prev_t() const { return prev_t_; }
  const State& prev_y() const { return prev_y_; }

  // One accepted step, not beyond t_end.
  void step(double t_end) {
    for (;;) {
      double h = std::min({dt_, max_step_, t_end - t_});
      State y1 = y_, d1 = dy_;
      double t1 = t_;
      const bool ok = ctl_.try_step(sys_, y1, d1, t1, h) == odeint::success;
      if (!ok || !std::all_of(y1.begin(), y1.end(), [](double v) { return std::isfinite(v); })) {
        if (ok) h *= 0.25;
        dt_ = h;
        if (dt_ < 1e-14) {
          throw IntegrationError("step size underflow near r = " + format_double(y_[0]), t_);
        }
        continue;
      }
      // A geodesic with c != 0 never reaches a pole; an accepted step that
      // lands on or past one has jumped the centrifugal barrier.
      if (y_[3] != 0.0 && (y1[0] <= 0.0 || (compact_ && y1[0] >= top_))) {
        dt_ = 0.25 * h;
        if (dt_ < 1e-14) {
          throw IntegrationError("step size underflow near r = " + format_double(y_[0]), t_);
        }
        continue;
      }
      dt_ = h;  // suggestion for the next step
      prev_t_ = t_;
      prev_y_ = y_;
      prev_dy_ = dy_;
      if (const auto rho = crossed_radius(y_[0], y1[0])) {
        land([&](const State& s) { return s[0] - *rho; }, t1 - t_, y1[0] - *rho);
        return;
      }
      t_ = t1;
      y_ = y1;
      dy_ = d1;
      return;
    }
  }

  // Replaces the last step by one ending where g(state) = 0; g changes sign
  // over that step and ends at g_end.
  template <class G>
  void land(G g, double h_full, double g_end) {
    double ha = 0.0, ga = g(prev_y_);
    double hb = h_full, gb = g_end;
    double hc = h_full;
    State yc{}, dc{};
    int side = 0;
    for (int it = 0; it < 40; ++it) {
      hc = hb - gb * (hb - ha) / (gb - ga);
      if (!(hc > ha && hc < hb)) hc = 0.5 * (ha + hb);
      rk_.do_step(sys_, prev_y_, prev_dy_, prev_t_, yc, dc, hc);
      const double gc = g(yc);
      if (gc == 0.0 || std::abs(gc) <= 1e-14 || hb - ha <= 1e-15) break;
      if ((gc < 0.0) == (ga < 0.0)) {
        ha = hc;
        ga = gc;
        if (side == -1) gb *= 0.5;  // Illinois
        side = -1;
      } else {
        hb = hc;
        gb = gc;
        if (side == 1) ga *= 0.5;
        side = 1;
      }
    }
    t_ = prev_t_ + hc;
    y_ = yc;
    dy_ = dc;
  }

 private:
  std::optional<double> crossed_radius(double r0, double r1) const {
    const double lo = std::min(r0, r1), hi = std::max(r0, r1);
    const double pad = 1e-12;
    auto it = std::upper_bound(radii_.begin(), radii_.end(), lo + pad);
    if (it == radii_.end() || *it >= hi - pad) return std::nullopt;
    if (r1 > r0) return *it;
    // Moving inward: the first radius met is the largest one below r0.
    auto jt = std::lower_bound(radii_.begin(), radii_.end(), hi - pad);
    return *std::prev(jt);
  }

  SliceSystem sys_;
  decltype(odeint::make_controlled(1.0, 1.0, odeint::runge_kutta_dopri5<State>())) ctl_;
  odeint::runge_kutta_dopri5<State> rk_;
  double max_step_;
  bool compact_;
  double top_;
  std::vector<double> radii_;
  double t_ = 0.0;
  double dt_ = 1e-3;
  State y_;
  State dy_{};
  double prev_t_ = 0.0;
  State prev_y_{};
  State prev_dy_{};
};

struct Hermite5 {
  double h0, h1, h2, h3, h4, h5;
};

Hermite5 hermite_basis(double s) {
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  return {1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
          s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
          0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5),
          10.0 * s3 - 15.0 * s4 + 6.0 * s5,
          -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
          0.5 * (s3 - 2.0 * s4 + s5)};
}

Hermite5 hermite_basis_derivative(double s) {
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
  return {-30.0 * s2 + 60.0 * s3 - 30.0 * s4,
          1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4,
          0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4),
          30.0 * s2 - 60.0 * s3 + 30.0 * s4,
          -12.0 * s2 + 28.0 * s3 - 15.0 * s4,
          0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4)};
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);  // (-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

std::string fmt(double x) { return format_double(x); }

}  // namespace

bool is_pole(const ManifoldWithDensity& m, double r) {
  if (r <= 1e-12) return true;
  return m.topology() == Topology::DoubledSphere && r >= m.domain_max() - 1e-12;
}

// ---------------------------------------------------------------------------
// GeodesicPath

PathState GeodesicPath::state_at(double t) const {
  if (!(t >= -1e-12 && t <= length_ + 1e-12)) {
    throw DomainError("arclength " + fmt(t) + " outside path [0, " + fmt(length_) + "]");
  }
  t = std::clamp(t, 0.0, length_);
  if (meridian_) {
    const double u = u0_ + sigma_ * t;
    if (period_ > 0.0) {
      double v = std::fmod(u, period_);
      if (v < 0.0) v += period_;
      if (v <= 0.5 * period_) return {t, v, theta0_, sigma_};
      return {t, period_ - v, theta0_ + kPi, -sigma_};
    }
    if (u >= 0.0) return {t, u, theta0_, sigma_};
    return {t, -u, theta0_ + kPi, -sigma_};
  }
  if (samples_.size() == 1) return samples_.front();
  auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                             [](double v, const PathState& s) { return v < s.t; });
  std::size_t i = static_cast<std::size_t>(std::distance(samples_.begin(), it));
  i = std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, samples_.size() - 2);
  const PathState& a = samples_[i];
  const PathState& b = samples_[i + 1];
  const Derivs& da = derivs_[i];
  const Derivs& db = derivs_[i + 1];
  const double h = b.t - a.t;
  const double s = (t - a.t) / h;
  const Hermite5 H = hermite_basis(s);
  const Hermite5 D = hermite_basis_derivative(s);
  PathState out;
  out.t = t;
  out.r = H.h0 * a.r + H.h1 * h * a.rdot + H.h2 * h * h * da.rddot + H.h3 * b.r +
          H.h4 * h * b.rdot + H.h5 * h * h * db.rddot;
  out.rdot = (D.h0 * a.r + D.h1 * h * a.rdot + D.h2 * h * h * da.rddot + D.h3 * b.r +
              D.h4 * h * b.rdot + D.h5 * h * h * db.rddot) /
             h;
  out.theta = H.h0 * a.theta + H.h1 * h * da.thetadot + H.h2 * h * h * da.thetaddot +
              H.h3 * b.theta + H.h4 * h * db.thetadot + H.h5 * h * h * db.thetaddot;
  return out;
}

std::vector<double> GeodesicPath::radial_crossings(const std::vector<double>& radii) const {
  std::vector<double> out;
  auto keep = [&](double t) {
    if (t > 1e-12 && t < length_ - 1e-12) out.push_back(t);
  };
  if (meridian_) {
    const double ua = std::min(u0_, u0_ + sigma_ * length_);
    const double ub = std::max(u0_, u0_ + sigma_ * length_);
    for (double rho : radii) {
      if (period_ > 0.0) {
        const long kmin = static_cast<long>(std::floor(ua / period_)) - 1;
        const long kmax = static_cast<long>(std::ceil(ub / period_)) + 1;
        for (long k = kmin; k <= kmax; ++k) {
          keep((rho + k * period_ - u0_) / sigma_);
          keep((period_ - rho + k * period_ - u0_) / sigma_);
        }
      } else {
        keep((rho - u0_) / sigma_);
        keep((-rho - u0_) / sigma_);
      }
    }
  } else {
    for (std::size_t i = 0; i + 1 < samples_.size(); ++i) {
      for (double rho : radii) {
        double fa = samples_[i].r - rho;
        const double fb = samples_[i + 1].r - rho;
        if (fa == 0.0) {
          keep(samples_[i].t);
          continue;
        }
        if ((fa < 0.0) == (fb < 0.0) || fb == 0.0) continue;
        double ta = samples_[i].t, tb = samples_[i + 1].t;
        for (int it = 0; it < 80 && tb - ta > 1e-15; ++it) {
          const double tm = 0.5 * (ta + tb);
          const double fm = state_at(tm).r - rho;
          if ((fm < 0.0) == (fa < 0.0)) {
            ta = tm;
            fa = fm;
          } else {
            tb = tm;
          }
        }
        keep(0.5 * (ta + tb));
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) <= 1e-12; }),
            out.end());
  return out;
}

void GeodesicPath::write_csv(std::ostream& os) const {
  write_csv_header(os, {"t", "r", "theta", "rdot", "clairaut_residual", "speed_residual"});
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const PathState& s = samples_[i];
    const double cr = derivs_.empty() ? 0.0 : derivs_[i].clairaut_residual;
    const double sr = derivs_.empty() ? 0.0 : derivs_[i].speed_residual;
    write_csv_row(os, {s.t, s.r, s.theta, s.rdot, cr, sr});
  }
}

// ---------------------------------------------------------------------------
// Shooting

GeodesicPath shoot(const ManifoldWithDensity& m, double r0, double alpha, double length,
                   double theta0, double tol) {
  if (!(length > 0.0)) throw DomainError("geodesic length must be positive");
  if (!(r0 >= 0.0 && r0 <= m.domain_max())) {
    throw DomainError("launch radius " + fmt(r0) + " outside the manifold");
  }
  const double ca = std::cos(alpha);
  const double sa = std::sin(alpha);
  const bool radial = std::abs(sa) <= 1e-15;
  if (is_pole(m, r0) && !radial) {
    throw DomainError("launches from a pole must be radial (alpha = 0 or pi)");
  }

  GeodesicPath path;
  path.length_ = length;
  if (radial) {
    path.meridian_ = true;
    path.clairaut_c_ = 0.0;
    path.u0_ = r0;
    path.sigma_ = ca > 0.0 ? 1.0 : -1.0;
    path.theta0_ = theta0;
    path.period_ = m.is_compact() ? m.domain_max() * 2.0 : 0.0;
    if (!m.is_compact()) {
      const double far = std::max(std::abs(r0 + path.sigma_ * length), r0);
      if (far > m.domain_max() + 1e-12) {
        throw IntegrationError("meridian leaves the cap's evaluation range",
                               std::max(0.0, (m.domain_max() - r0) * path.sigma_));
      }
    }
    const int count = std::max(2, static_cast<int>(std::ceil(length / 0.01)) + 1);
    for (int i = 0; i < count; ++i) {
      path.samples_.push_back(path.state_at(length * i / (count - 1)));
    }
    return path;
  }

  const double phi0 = m.phi_at(r0, 0);
  path.clairaut_c_ = phi0 * sa;
  const double c = path.clairaut_c_;
  const SliceSystem sys{&m};

  auto record = [&](double t, const State& y) {
    State dy{};
    sys(y, dy, t);
    const double phi = m.phi_at(y[0], 0);
    GeodesicPath::Derivs d;
    d.rddot = dy[1];
    d.thetadot = y[3];
    d.thetaddot = dy[3];
    d.clairaut_residual = std::abs(phi * phi * y[3] - c);
    d.speed_residual = std::abs(y[1] * y[1] + phi * phi * y[3] * y[3] - 1.0);
    path.samples_.push_back({t, y[0], y[2], y[1]});
    path.derivs_.push_back(d);
    path.clairaut_residual_ = std::max(path.clairaut_residual_, d.clairaut_residual);
    path.speed_residual_ = std::max(path.speed_residual_, d.speed_residual);
  };

  SliceIntegrator integ(m, State{r0, ca, theta0, sa / phi0}, tol, kMaxStep);
  record(0.0, integ.y());
  const double close = 1e-13 * std::max(1.0, length);
  try {
    while (length - integ.t() > close) {
      integ.step(length);
      record(length - integ.t() > close ? integ.t() : length, integ.y());
    }
  } catch (const DomainError& e) {
    throw IntegrationError(std::string("geodesic left the domain: ") + e.what(), integ.t());
  }
  return path;
}

// ---------------------------------------------------------------------------
// Distance

namespace {

struct Arrival {
  bool reached = false;
  double t = 0.0;
  double r = 0.0;
  double rdot = 0.0;
};

// Integrates from (r0, 0) with theta increasing and reports the first
// arrival at each angular target.  Stops at max_length or if the geodesic
// leaves the evaluation range.
std::vector<Arrival> arrivals(const ManifoldWithDensity& m, double r0, double alpha,
                              const std::vector<double>& targets, double max_length,
                              double tol) {
  std::vector<Arrival> out(targets.size());
  const double phi0 = m.phi_at(r0, 0);
  SliceIntegrator integ(m, State{r0, std::cos(alpha), 0.0, std::sin(alpha) / phi0}, tol,
                        std::numeric_limits<double>::infinity());
  std::size_t pending = targets.size();
  try {
    while (pending > 0 && integ.t() < max_length) {
      integ.step(max_length);
      for (std::size_t k = 0; k < targets.size(); ++k) {
        if (out[k].reached || integ.y()[2] < targets[k]) continue;
        SliceIntegrator at = integ;
        const double target = targets[k];
        at.land([target](const State& s) { return s[2] - target; }, integ.t() - integ.prev_t(),
                integ.y()[2] - target);
        out[k] = {true, at.t(), at.y()[0], at.y()[1]};
        --pending;
      }
      if (integ.y()[0] <= 0.0 || integ.y()[0] >= m.domain_max()) break;
    }
  } catch (const DomainError&) {
  } catch (const IntegrationError&) {
  }
  return out;
}

struct Candidate {
  double length;
  double alpha;  // signed launch angle in the caller's frame
};

GeodesicPath radial_path(const ManifoldWithDensity& m, double r0, double alpha, double length,
                         double theta0) {
  if (length <= 0.0) length = 1e-300;
  return shoot(m, r0, alpha, length, theta0);
}

}  // namespace

DistanceResult distance(const ManifoldWithDensity& m, Point p, Point q,
                        const DistanceOptions& opts) {
  const double top = m.domain_max();
  for (const Point& x : {p, q}) {
    if (!(x.r >= 0.0 && x.r <= top)) {
      throw DomainError("point radius " + fmt(x.r) + " outside the manifold");
    }
  }
  DistanceResult res;
  res.launch_angles = opts.launch_angles;

  // Geodesics from a rotational pole are meridians.
  if (is_pole(m, p.r) || is_pole(m, q.r)) {
    res.exact_meridian = true;
    const bool p_pole = is_pole(m, p.r);
    const Point& base = p_pole ? p : q;
    const Point& other = p_pole ? q : p;
    const bool near_pole = base.r <= 1e-12;
    const double d = near_pole ? other.r : top - other.r;
    res.distance = d;
    if (p_pole) {
      res.minimizers.push_back(radial_path(m, near_pole ? 0.0 : top, near_pole ? 0.0 : kPi, d,
                                           q.theta));
    } else {
      res.minimizers.push_back(radial_path(m, p.r, near_pole ? kPi : 0.0, d, p.theta));
    }
    return res;
  }

  const double dtheta = wrap_angle(q.theta - p.theta);
  const double sigma = dtheta < 0.0 ? -1.0 : 1.0;
  const double gap = std::abs(dtheta);
  const double r1 = p.r, r2 = q.r;

  std::vector<Candidate> cands;
  if (gap <= 1e-15) cands.push_back({std::abs(r2 - r1), r2 >= r1 ? 0.0 : kPi});
  if (std::abs(gap - kPi) <= 1e-15) {
    cands.push_back({r1 + r2, kPi});
    if (m.is_compact()) cands.push_back({2.0 * top - r1 - r2, 0.0});
  }

  double upper = r1 + r2;
  if (m.is_compact()) upper = std::min(upper, 2.0 * top - r1 - r2);
  upper = std::min(upper, std::abs(r1 - r2) + gap * std::min(m.phi_at(r1, 0), m.phi_at(r2, 0)));
  std::vector<double> targets;
  std::vector<double> target_sign;  // +1: theta increases toward q; -1: mirrored
  if (gap > 1e-15) {
    targets.push_back(gap);
    target_sign.push_back(1.0);
  }
  if (std::abs(gap - kPi) > 1e-15) {
    targets.push_back(2.0 * kPi - gap);
    target_sign.push_back(-1.0);
  }

  const int N = std::max(8, opts.launch_angles);
  // The scan only needs the sign of the radial miss; brackets are re-solved
  // at full accuracy.
  const double scan_tol = std::max(opts.integrator_tol, 1e-6);
  // Interior grid plus the two radial launches, whose limits are known: a
  // geodesic launched at nearly 0 or pi passes a pole and its angle jumps by
  // pi there.  Minimizers toward points close to p's meridian lie between
  // the radial launch and the first grid angle.
  const int M = N + 2;
  std::vector<double> angles(static_cast<std::size_t>(M));
  for (int k = 0; k < N; ++k) angles[k + 1] = kPi * (k + 0.5) / N;
  angles[0] = 0.0;
  angles[M - 1] = kPi;
  auto radial_limit = [&](double alpha, double target, double max_len) {
    Arrival a;
    const bool inward = alpha > 0.5 * kPi;
    const bool first_pass = target < kPi;
    if (!inward && !m.is_compact()) return a;
    if (inward) {
      a = first_pass ? Arrival{true, r1, 0.0, -1.0} : Arrival{true, r1 + top, top, 1.0};
      if (!first_pass && !m.is_compact()) a.reached = false;
    } else {
      a = first_pass ? Arrival{true, top - r1, top, 1.0} : Arrival{true, 2.0 * top - r1, 0.0, -1.0};
    }
    if (a.t > max_len) a.reached = false;
    return a;
  };

  auto search = [&](double max_len) {
    std::size_t found = 0;
    std::vector<std::vector<Arrival>> scan(static_cast<std::size_t>(M));
    for (int k = 1; k + 1 < M; ++k) {
      scan[k] = arrivals(m, r1, angles[k], targets, max_len, scan_tol);
    }
    for (int k : {0, M - 1}) {
      for (double target : targets) scan[k].push_back(radial_limit(angles[k], target, max_len));
    }
    for (std::size_t j = 0; j < targets.size(); ++j) {
      struct Unreached {};
      auto miss = [&](double alpha) {
        const Arrival arr =
            alpha <= 0.0 || alpha >= kPi
                ? radial_limit(alpha, targets[j], max_len)
                : arrivals(m, r1, alpha, {targets[j]}, max_len, opts.integrator_tol).front();
        if (!arr.reached) throw Unreached{};
        return arr;
      };
      // q lies on the target meridian a radial offset dr from the arrival.
      // Only the part of that offset normal to the geodesic is a miss; a
      // geodesic nearly tangent to the meridian has an ill-conditioned
      // arrival radius but still passes through q.  The tangential part
      // shifts the length to first order.
      auto accept = [&](const Arrival& arr, double alpha) {
        const double dr = r2 - arr.r;
        const double normal = std::sqrt(std::max(0.0, 1.0 - arr.rdot * arr.rdot));
        if (std::abs(dr) > 1e-4 || std::abs(dr) * normal > 1e-7) return;
        cands.push_back({arr.t + dr * arr.rdot, target_sign[j] * sigma * alpha});
        ++found;
      };
      for (int k = 0; k + 1 < M; ++k) {
        const Arrival& a = scan[k][j];
        const Arrival& b = scan[k + 1][j];
        double lo = angles[k], hi = angles[k + 1];
        if (a.reached != b.reached) {
          // One end runs past the horizon or never meets the target: the
          // root, if any, hugs the reach boundary.  Walk toward it until the
          // reached side changes sign.
          const bool left = a.reached;
          const double side = (left ? a.r : b.r) - r2;
          double in = left ? lo : hi, out = left ? hi : lo;
          bool bracketed = false;
          for (int it = 0; it < 60 && std::abs(out - in) > 1e-15; ++it) {
            const double mid = 0.5 * (in + out);
            const Arrival c = arrivals(m, r1, mid, {targets[j]}, max_len, scan_tol).front();
            if (!c.reached) {
              out = mid;
            } else if ((c.r - r2 < 0.0) == (side < 0.0)) {
              in = mid;
            } else {
              out = mid;
              bracketed = true;
              break;
            }
          }
          if (!bracketed) continue;
          lo = std::min(in, out);
          hi = std::max(in, out);
        } else if (!a.reached) {
          continue;
        } else {
          if ((a.r - r2 < 0.0) == (b.r - r2 < 0.0)) continue;
          // Arrival length varies smoothly across a bracket; one whose ends
          // are both well beyond the bound cannot hold a minimizer.
          if (std::min(a.t, b.t) > upper + std::abs(a.t - b.t) + 1e-3) continue;
        }
        try {
          const Arrival fa = miss(lo);
          const Arrival fb = miss(hi);
          if ((fa.r - r2 < 0.0) == (fb.r - r2 < 0.0)) {
            // The coarse scan misplaced a root lying at a grid angle.
            const bool left = std::abs(fa.r - r2) < std::abs(fb.r - r2);
            accept(left ? fa : fb, left ? lo : hi);
            continue;
          }
          std::uintmax_t iters = 100;
          const auto root = boost::math::tools::toms748_solve(
              [&](double alpha) { return miss(alpha).r - r2; }, lo, hi,
              fa.r - r2, fb.r - r2, [](double x, double y) { return std::abs(x - y) <= 1e-14; },
              iters);
          const double alpha = 0.5 * (root.first + root.second);
          accept(miss(alpha), alpha);
        } catch (const Unreached&) {
        } catch (const boost::math::evaluation_error&) {
        }
      }
    }
    return found;
  };

  // Shots run a little past the bound.  Near a pole the arrival length
  // changes fast with the launch angle, so neighbours of a minimizer can
  // overshoot it; such queries use a longer horizon, as does a rescan when
  // the short one found nothing.
  const double pole_band = 0.1;
  auto near_a_pole = [&](double r) {
    return r < pole_band || (m.is_compact() && top - r < pole_band);
  };
  const double long_horizon = 2.0 * upper + 0.5;
  if (near_a_pole(r1) || near_a_pole(r2)) {
    search(long_horizon);
  } else if (search(1.1 * upper + 0.05) == 0) {
    search(long_horizon);
  }

  if (cands.empty()) {
    throw SearchError("no geodesic from p reached q within the launch grid", upper);
  }
  std::sort(cands.begin(), cands.end(),
            [](const Candidate& a, const Candidate& b) { return a.length < b.length; });
  res.distance = cands.front().length;
  std::vector<double> used;
  for (const Candidate& c : cands) {
    if (c.length > res.distance + opts.target_accuracy) break;
    if (std::any_of(used.begin(), used.end(),
                    [&](double a) { return std::abs(wrap_angle(a - c.alpha)) < 1e-9; })) {
      continue;
    }
    used.push_back(c.alpha);
    res.minimizers.push_back(radial_path(m, r1, c.alpha, c.length, p.theta));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Pole quantities

double inj_at_pole(const ManifoldWithDensity& m) {
  if (!m.is_compact()) return std::numeric_limits<double>::infinity();
  const double top = m.domain_max();
  // Tangential Jacobi field along the meridian, continued through the far pole.
  auto jacobi = [&](double r) { return r <= top ? m.phi_at(r, 0) : -m.phi_at(2.0 * top - r, 0); };
  const int N = 4096;
  const double h = 2.0 * top / N;
  double prev = h;
  for (int i = 2; i <= N; ++i) {
    const double r = i * h;
    if (jacobi(r) > 0.0) {
      prev = r;
      continue;
    }
    double lo = prev, hi = r;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
      const double mid = 0.5 * (lo + hi);
      (jacobi(mid) > 0.0 ? lo : hi) = mid;
    }
    return hi;
  }
  throw SearchError("warping function has no zero on the doubled domain", top);
}

FarthestPoint farthest_from_pole(const ManifoldWithDensity& m) {
  if (!m.is_compact()) {
    throw DomainError("a complete cap has no farthest point from its pole");
  }
  const double top = m.domain_max();
  const int N = 2048;
  FarthestPoint best;
  for (int i = 0; i <= N; ++i) {
    const double r = top * i / N;
    const double d = distance(m, {0.0, 0.0}, {r, 0.0}).distance;
    if (d >= best.length) best = {{r, 0.0}, d};
  }
  return best;
}

}  // namespace pinchlab
