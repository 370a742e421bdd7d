#include "pinchlab/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pinchlab {

namespace {

constexpr double kPi = std::numbers::pi;

void check_order(int order) {
  if (order < 0 || order > 2) {
    throw DomainError("derivative order must be 0, 1 or 2");
  }
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// BandShape

BandShape::BandShape(double left_value, double left_slope, std::vector<BandNode> nodes)
    : left_value_(left_value), left_slope_(left_slope) {
  if (nodes.size() < 2) {
    throw ConstructionError("band needs at least two nodes");
  }
  if (nodes.front().offset != 0.0) {
    throw ConstructionError("band's first node must sit at offset 0");
  }
  nodes_.push_back(nodes.front());
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const BandNode& nd = nodes[i];
    if (nd.offset < nodes_.back().offset) {
      throw ConstructionError("band node offsets must be nondecreasing");
    }
    if (nd.offset == nodes_.back().offset) {
      if (nd.second != nodes_.back().second) {
        throw ConstructionError("band second derivative jumps at offset " + fmt(nd.offset));
      }
      continue;
    }
    nodes_.push_back(nd);
  }
  if (nodes_.size() < 2) {
    throw ConstructionError("band has zero width");
  }

  slope_at_node_.assign(nodes_.size(), left_slope_);
  value_at_node_.assign(nodes_.size(), left_value_);
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    const double h = nodes_[i + 1].offset - nodes_[i].offset;
    const double s0 = nodes_[i].second;
    const double k = (nodes_[i + 1].second - s0) / h;
    slope_at_node_[i + 1] = slope_at_node_[i] + s0 * h + 0.5 * k * h * h;
    value_at_node_[i + 1] =
        value_at_node_[i] + slope_at_node_[i] * h + 0.5 * s0 * h * h + k * h * h * h / 6.0;
  }
}

double BandShape::eval(double x, int order) const {
  x = std::clamp(x, 0.0, width());
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x,
                             [](double v, const BandNode& nd) { return v < nd.offset; });
  std::size_t i = static_cast<std::size_t>(std::distance(nodes_.begin(), it));
  i = (i == 0) ? 0 : i - 1;
  if (i + 1 >= nodes_.size()) i = nodes_.size() - 2;

  const double h = nodes_[i + 1].offset - nodes_[i].offset;
  const double s0 = nodes_[i].second;
  const double k = (nodes_[i + 1].second - s0) / h;
  const double dx = x - nodes_[i].offset;
  switch (order) {
    case 0:
      return value_at_node_[i] + slope_at_node_[i] * dx + 0.5 * s0 * dx * dx +
             k * dx * dx * dx / 6.0;
    case 1:
      return slope_at_node_[i] + s0 * dx + 0.5 * k * dx * dx;
    default:
      return s0 + k * dx;
  }
}

// ---------------------------------------------------------------------------
// SegmentSpec

double SegmentSpec::eval(double r, int order) const {
  check_order(order);
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SineShape>) {
          switch (order) {
            case 0: return std::sin(r);
            case 1: return std::cos(r);
            default: return -std::sin(r);
          }
        } else if constexpr (std::is_same_v<T, LinearShape>) {
          return order == 0 ? r : (order == 1 ? 1.0 : 0.0);
        } else if constexpr (std::is_same_v<T, ConstantShape>) {
          return order == 0 ? s.value : 0.0;
        } else if constexpr (std::is_same_v<T, ParabolaShape>) {
          const double x = r - s.origin;
          switch (order) {
            case 0: return s.c0 + x * (s.c1 + x * s.c2);
            case 1: return s.c1 + 2.0 * s.c2 * x;
            default: return 2.0 * s.c2;
          }
        } else {
          return s.eval(r - r_lo, order);
        }
      },
      shape);
}

std::pair<double, double> SegmentSpec::eval01(double r) const {
  if (std::holds_alternative<SineShape>(shape)) return {std::sin(r), std::cos(r)};
  return {eval(r, 0), eval(r, 1)};
}

std::string_view SegmentSpec::kind() const {
  switch (shape.index()) {
    case 0: return "sine";
    case 1: return "linear";
    case 2: return "constant";
    case 3: return "parabola";
    default: return "pl2_band";
  }
}

bool SegmentSpec::is_analytic_cap() const {
  return std::holds_alternative<SineShape>(shape) || std::holds_alternative<LinearShape>(shape);
}

double JunctionResidual::max_jump() const {
  return std::max({std::abs(value_jump), std::abs(slope_jump), std::abs(curvature_jump)});
}

// ---------------------------------------------------------------------------
// RadialProfile

RadialProfile::RadialProfile(std::vector<SegmentSpec> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) {
    throw ConstructionError("profile needs at least one segment");
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const SegmentSpec& s = segments_[i];
    if (!(s.r_hi > s.r_lo)) {
      throw ConstructionError("segment " + std::to_string(i) + " has an empty domain");
    }
    if (i + 1 < segments_.size() && s.r_hi != segments_[i + 1].r_lo) {
      throw ConstructionError("segments " + std::to_string(i) + " and " + std::to_string(i + 1) +
                              " do not abut");
    }
    if (const auto* band = std::get_if<BandShape>(&s.shape)) {
      const double w = s.r_hi - s.r_lo;
      if (std::abs(band->width() - w) > 1e-12 * std::max(1.0, w)) {
        throw ConstructionError("band node span " + fmt(band->width()) +
                                " does not match its domain width " + fmt(w));
      }
    }
  }
}

const SegmentSpec& RadialProfile::segment_at(double r) const {
  const double tol = 1e-12 * std::max(1.0, r_max());
  if (!(r >= r_min() - tol && r <= r_max() + tol)) {
    throw DomainError("r = " + fmt(r) + " outside profile domain [" + fmt(r_min()) + ", " +
                      fmt(r_max()) + "]");
  }
  auto it = std::upper_bound(segments_.begin(), segments_.end(), r,
                             [](double v, const SegmentSpec& s) { return v < s.r_lo; });
  if (it == segments_.begin()) return segments_.front();
  return *std::prev(it);
}

double RadialProfile::eval(double r, int order) const {
  check_order(order);
  const SegmentSpec& s = segment_at(r);
  return s.eval(std::clamp(r, r_min(), r_max()), order);
}

std::vector<double> RadialProfile::breakpoints() const {
  std::vector<double> out;
  out.push_back(r_min());
  for (const SegmentSpec& s : segments_) {
    if (const auto* band = std::get_if<BandShape>(&s.shape)) {
      for (const BandNode& nd : band->nodes()) out.push_back(s.r_lo + nd.offset);
    }
    out.push_back(s.r_hi);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) <= 1e-14; }),
            out.end());
  return out;
}

double eval_profile(const RadialProfile& profile, double r, int order) {
  return profile.eval(r, order);
}

std::vector<JunctionResidual> check_c2(const RadialProfile& profile) {
  std::vector<JunctionResidual> out;
  const auto& segs = profile.segments();
  for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
    const double r = segs[i].r_hi;
    JunctionResidual j;
    j.r = r;
    j.value_jump = segs[i + 1].eval(r, 0) - segs[i].eval(r, 0);
    j.slope_jump = segs[i + 1].eval(r, 1) - segs[i].eval(r, 1);
    j.curvature_jump = segs[i + 1].eval(r, 2) - segs[i].eval(r, 2);
    out.push_back(j);
  }
  return out;
}

bool c2_ok(const std::vector<JunctionResidual>& residuals, double tol) {
  return std::all_of(residuals.begin(), residuals.end(),
                     [tol](const JunctionResidual& j) { return j.max_jump() <= tol; });
}

// ---------------------------------------------------------------------------
// Smoothing bands

std::vector<BandNode> solve_smoothing_band(double a, double b, double width, double target) {
  if (!(width > 0.0)) {
    throw DomainError("smoothing band width must be positive");
  }
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);

  // Monotone nondecreasing: one plateau, one linear ramp.
  if (a <= b && target >= a * width && target <= b * width) {
    if (a == b) return {{0.0, a}, {width, b}};
    const double mid = 0.5 * (a + b) * width;
    if (target <= mid) {
      const double u = 2.0 * (target - a * width) / (b - a);
      return {{0.0, a}, {width - u, a}, {width, b}};
    }
    const double u = 2.0 * (b * width - target) / (b - a);
    return {{0.0, a}, {u, b}, {width, b}};
  }

  // Boundary-layer shape: short ramps at both ends around a plateau that
  // overshoots the band mean by twice its gap to the nearer endpoint.
  const double mean = target / width;
  double h = 0.0;
  if (mean < lo) {
    h = mean - 2.0 * (lo - mean);
  } else if (mean > hi) {
    h = mean + 2.0 * (mean - hi);
  } else {
    throw ConstructionError("smoothing band: monotone shape required but a > b with mean " +
                            fmt(mean) + " between the endpoints");
  }
  auto residual = [&](double w) { return h * (width - w) + 0.5 * (a + b) * w - target; };
  double wl = 0.0;
  double wr = 0.5 * width;
  double rl = residual(wl);
  const double rr = residual(wr);
  if (rl == 0.0) return {{0.0, h}, {width, h}};
  if ((rl < 0.0) == (rr < 0.0)) {
    throw ConstructionError(
        "smoothing band: boundary-layer plateau " + fmt(h) +
        " cannot meet the integral target " + fmt(target) + " within half the band width");
  }
  for (int it = 0; it < 200 && wr - wl > 0.0; ++it) {
    const double wm = 0.5 * (wl + wr);
    if (wm == wl || wm == wr) break;
    const double rm = residual(wm);
    if ((rm < 0.0) == (rl < 0.0)) {
      wl = wm;
      rl = rm;
    } else {
      wr = wm;
    }
  }
  const double w = 0.5 * (wl + wr);
  return {{0.0, a}, {w, h}, {width - w, h}, {width, b}};
}

// ---------------------------------------------------------------------------
// ManifoldWithDensity

std::string_view to_string(Topology t) {
  return t == Topology::Cap ? "cap" : "doubled_sphere";
}

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Gaussian: return "gaussian";
    case ModelKind::RoundSphere: return "sphere";
    case ModelKind::Family: return "family";
    default: return "custom";
  }
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "gaussian") return ModelKind::Gaussian;
  if (s == "sphere" || s == "round_sphere") return ModelKind::RoundSphere;
  if (s == "family") return ModelKind::Family;
  if (s == "custom") return ModelKind::Custom;
  throw DomainError("unknown model kind '" + std::string(s) + "'");
}

ManifoldWithDensity::ManifoldWithDensity(int n, RadialProfile phi, RadialProfile f,
                                         Topology topology, double potential_scale,
                                         ModelMeta meta)
    : n_(n),
      phi_(std::move(phi)),
      f_(std::move(f)),
      topology_(topology),
      potential_scale_(potential_scale),
      meta_(std::move(meta)),
      half_length_(phi_.r_max()) {
  if (n_ < 2) throw ConstructionError("dimension must be at least 2");
  const double sec_scale = 1.0 / (n_ - 1);
  if (std::abs(potential_scale_ - 1.0) > 1e-15 &&
      std::abs(potential_scale_ - sec_scale) > 1e-15) {
    throw ConstructionError("potential_scale must be 1 or 1/(n-1)");
  }
  if (phi_.r_min() != 0.0 || f_.r_min() != 0.0) {
    throw ConstructionError("profiles must start at the pole r = 0");
  }
  if (std::abs(f_.r_max() - phi_.r_max()) > 1e-12 * std::max(1.0, phi_.r_max())) {
    throw ConstructionError("warping and potential profiles have different domains");
  }
  if (std::abs(phi_.eval(0.0, 0)) > kC2Tolerance || std::abs(phi_.eval(0.0, 1) - 1.0) > kC2Tolerance) {
    throw ConstructionError("warping profile must satisfy phi(0) = 0 and phi'(0) = 1");
  }
  for (int i = 1; i <= 512; ++i) {
    const double r = half_length_ * i / 512.0;
    if (!(phi_.eval(r, 0) > 0.0)) {
      throw ConstructionError("warping profile must be positive away from the pole (r = " +
                              fmt(r) + ")");
    }
  }
  if (topology_ == Topology::DoubledSphere) {
    const double dphi = phi_.eval(half_length_, 1);
    const double df = f_.eval(half_length_, 1);
    if (std::abs(dphi) > kC2Tolerance) {
      throw ConstructionError("doubling requires phi'(L) = 0, got " + fmt(dphi));
    }
    if (std::abs(df) > kC2Tolerance) {
      throw ConstructionError("doubling requires f'(L) = 0, got " + fmt(df));
    }
  }
}

double ManifoldWithDensity::domain_max() const {
  return topology_ == Topology::DoubledSphere ? 2.0 * half_length_ : half_length_;
}

double ManifoldWithDensity::reduce(double r, double* odd_sign) const {
  const double top = domain_max();
  const double tol = 1e-12 * std::max(1.0, top);
  if (!(r >= -tol && r <= top + tol)) {
    throw DomainError("r = " + fmt(r) + " outside manifold domain [0, " + fmt(top) + "]");
  }
  r = std::clamp(r, 0.0, top);
  if (odd_sign) *odd_sign = 1.0;
  if (topology_ == Topology::DoubledSphere && r > half_length_) {
    if (odd_sign) *odd_sign = -1.0;
    return std::max(0.0, 2.0 * half_length_ - r);
  }
  return r;
}

double ManifoldWithDensity::phi_at(double r, int order) const {
  double sign = 1.0;
  const double x = reduce(r, &sign);
  const double v = phi_.eval(x, order);
  return order == 1 ? sign * v : v;
}

std::pair<double, double> ManifoldWithDensity::phi01(double r) const {
  double sign = 1.0;
  const double x = std::clamp(reduce(r, &sign), phi_.r_min(), phi_.r_max());
  const auto [v, d] = phi_.segment_at(x).eval01(x);
  return {v, sign * d};
}

double ManifoldWithDensity::f_at(double r, int order) const {
  double sign = 1.0;
  const double x = reduce(r, &sign);
  const double v = f_.eval(x, order);
  return order == 1 ? sign * v : v;
}

std::vector<double> ManifoldWithDensity::breakpoints() const {
  std::vector<double> out = phi_.breakpoints();
  const auto fb = f_.breakpoints();
  out.insert(out.end(), fb.begin(), fb.end());
  if (topology_ == Topology::DoubledSphere) {
    const std::size_t half = out.size();
    for (std::size_t i = 0; i < half; ++i) out.push_back(2.0 * half_length_ - out[i]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) <= 1e-14; }),
            out.end());
  return out;
}

std::vector<std::pair<double, double>> ManifoldWithDensity::band_intervals() const {
  std::vector<std::pair<double, double>> out;
  for (const RadialProfile* p : {&phi_, &f_}) {
    for (const SegmentSpec& s : p->segments()) {
      if (!std::holds_alternative<BandShape>(s.shape)) continue;
      out.emplace_back(s.r_lo, s.r_hi);
      if (topology_ == Topology::DoubledSphere) {
        out.emplace_back(2.0 * half_length_ - s.r_hi, 2.0 * half_length_ - s.r_lo);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

ReflectionResiduals ManifoldWithDensity::reflection_residuals(int samples) const {
  ReflectionResiduals out;
  if (topology_ != Topology::DoubledSphere) return out;
  const double L = half_length_;
  for (int i = 0; i < samples; ++i) {
    const double s = L * i / (samples - 1);
    for (int order = 0; order <= 2; ++order) {
      const double sign = order == 1 ? -1.0 : 1.0;
      out.max_asymmetry = std::max(
          {out.max_asymmetry, std::abs(phi_at(L + s, order) - sign * phi_at(L - s, order)),
           std::abs(f_at(L + s, order) - sign * f_at(L - s, order))});
    }
  }
  out.phi_slope_at_L = phi_.eval(L, 1);
  out.f_slope_at_L = f_.eval(L, 1);
  return out;
}

// ---------------------------------------------------------------------------
// Builders

double doubling_point(int n, double eps, double delta) {
  if (n < 2) throw DomainError("dimension must be at least 2");
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  return kPi / 2.0 - delta + (1.0 - eps) * (kPi / 2.0 - 2.0 * delta) / eps;
}

namespace {

double scale_value(int n, FieldMode mode) {
  return mode == FieldMode::Ricci ? 1.0 : 1.0 / (n - 1);
}

ManifoldWithDensity build_family(const ModelParams& p) {
  const int n = p.n;
  const double eps = p.eps;
  const double delta = p.delta;
  if (n < 3) throw ConstructionError("family requires n >= 3");
  if (!(eps > 0.0)) throw ConstructionError("family requires eps > 0");
  if (!(delta > 0.0)) throw ConstructionError("family requires delta > 0");
  const double r1 = kPi / 2.0 - 2.0 * delta;  // potential band start
  const double r2 = kPi / 2.0 - delta;        // warping band start
  const double r3 = kPi / 2.0;                // cylinder start
  if (!(r1 > 0.0)) {
    throw ConstructionError("family requires delta < pi/4 so the potential band fits");
  }
  const double L = doubling_point(n, eps, delta);
  if (!(L > r3)) {
    throw ConstructionError("doubling point L = " + fmt(L) +
                            " does not lie beyond pi/2 (cylinder would be empty)");
  }

  // Warping function: sine cap, boundary-layer band, cylinder of radius A.
  const auto phi_nodes = solve_smoothing_band(-std::sin(r2), 0.0, delta, -std::cos(r2));
  BandShape phi_band(std::sin(r2), std::cos(r2), phi_nodes);
  const double A = phi_band.eval(delta, 0);
  RadialProfile phi({
      {SineShape{}, 0.0, r2},
      {phi_band, r2, r3},
      {ConstantShape{A}, r3, L},
  });

  // Potential: downward parabola, monotone band, upward parabola whose
  // vertex is the doubling point.  Constants follow from integrating f''.
  const double nm1 = n - 1.0;
  const ParabolaShape cap_parabola{0.0, 0.0, -0.5 * nm1 * (1.0 - eps), 0.0};
  const SegmentSpec cap_seg{cap_parabola, 0.0, r1};
  const auto f_nodes = solve_smoothing_band(-nm1 * (1.0 - eps), nm1 * eps, delta, 0.0);
  BandShape f_band(cap_seg.eval(r1, 0), cap_seg.eval(r1, 1), f_nodes);
  const ParabolaShape tail{f_band.eval(delta, 0), f_band.eval(delta, 1), 0.5 * nm1 * eps, r2};
  RadialProfile f({cap_seg, {f_band, r1, r2}, {tail, r2, L}});

  const double df_at_L = f.eval(L, 1);
  if (std::abs(df_at_L) > 1e-12 * std::max(1.0, nm1)) {
    throw ConstructionError("f'(L) = " + fmt(df_at_L) + " is not zero at the doubling point");
  }
  for (const RadialProfile* prof : {&phi, &f}) {
    for (const auto& j : check_c2(*prof)) {
      if (j.max_jump() > kC2Tolerance) {
        throw ConstructionError("junction at r = " + fmt(j.r) + " is not C2 (jump " +
                                fmt(j.max_jump()) + ")");
      }
    }
  }

  ModelMeta meta;
  meta.kind = ModelKind::Family;
  meta.eps = eps;
  meta.delta = delta;
  if ((n - 2.0) / (A * A) < nm1 * eps) {
    meta.warnings.push_back("cylinder pinch: (n-2)/A^2 = " + fmt((n - 2.0) / (A * A)) +
                            " < (n-1)eps = " + fmt(nm1 * eps));
  }
  return ManifoldWithDensity(n, std::move(phi), std::move(f), Topology::DoubledSphere,
                             scale_value(n, p.scale), std::move(meta));
}

}  // namespace

ManifoldWithDensity build_model(ModelKind kind, const ModelParams& p) {
  if (p.n < 2) throw ConstructionError("dimension must be at least 2");
  ModelMeta meta;
  meta.kind = kind;
  switch (kind) {
    case ModelKind::Gaussian: {
      if (!(p.r_max > 0.0)) throw ConstructionError("r_max must be positive");
      meta.eps = p.eps;
      RadialProfile phi({{LinearShape{}, 0.0, p.r_max}});
      RadialProfile f({{ParabolaShape{0.0, 0.0, 0.5, 0.0}, 0.0, p.r_max}});
      return ManifoldWithDensity(p.n, std::move(phi), std::move(f), Topology::Cap,
                                 scale_value(p.n, p.scale), std::move(meta));
    }
    case ModelKind::RoundSphere: {
      meta.eps = p.eps;
      RadialProfile phi({{SineShape{}, 0.0, kPi / 2.0}});
      RadialProfile f({{ConstantShape{0.0}, 0.0, kPi / 2.0}});
      return ManifoldWithDensity(p.n, std::move(phi), std::move(f), Topology::DoubledSphere,
                                 scale_value(p.n, p.scale), std::move(meta));
    }
    case ModelKind::Family:
      return build_family(p);
    default:
      throw ConstructionError("custom models are loaded from profile JSON, not built");
  }
}

}  // namespace pinchlab
