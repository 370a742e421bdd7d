#pragma once

// Piecewise-C2 radial profiles (warping function and potential) and the
// rotationally symmetric manifolds with density assembled from them.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace pinchlab {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// phi = sin r
struct SineShape {};
// phi = r
struct LinearShape {};
struct ConstantShape {
  double value = 0.0;
};
// c0 + c1 x + c2 x^2 with x = r - origin
struct ParabolaShape {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double origin = 0.0;
};

struct BandNode {
  double offset = 0.0;  // from the band's left end
  double second = 0.0;  // prescribed second derivative at the node
};

// Segment whose second derivative is continuous piecewise linear over the
// node list; value and slope are obtained by exact double integration from
// the left end.
class BandShape {
 public:
  BandShape() = default;
  BandShape(double left_value, double left_slope, std::vector<BandNode> nodes);

  double left_value() const { return left_value_; }
  double left_slope() const { return left_slope_; }
  const std::vector<BandNode>& nodes() const { return nodes_; }
  double width() const { return nodes_.empty() ? 0.0 : nodes_.back().offset; }

  double eval(double x, int order) const;
  double integral_of_second() const { return slope_at_node_.back() - left_slope_; }

 private:
  double left_value_ = 0.0;
  double left_slope_ = 0.0;
  std::vector<BandNode> nodes_;
  std::vector<double> slope_at_node_;
  std::vector<double> value_at_node_;
};

using SegmentShape =
    std::variant<SineShape, LinearShape, ConstantShape, ParabolaShape, BandShape>;

struct SegmentSpec {
  SegmentShape shape;
  double r_lo = 0.0;
  double r_hi = 0.0;

  double eval(double r, int order) const;
  // Value and first derivative together.
  std::pair<double, double> eval01(double r) const;
  std::string_view kind() const;
  // SINE and LINEAR segments vanish at r = 0 with unit slope.
  bool is_analytic_cap() const;
};

struct JunctionResidual {
  double r = 0.0;
  double value_jump = 0.0;
  double slope_jump = 0.0;
  double curvature_jump = 0.0;

  double max_jump() const;
};

inline constexpr double kC2Tolerance = 1e-9;

class RadialProfile {
 public:
  RadialProfile() = default;
  explicit RadialProfile(std::vector<SegmentSpec> segments);

  // order in {0, 1, 2}; throws DomainError outside [r_min, r_max].
  double eval(double r, int order) const;
  const SegmentSpec& segment_at(double r) const;

  const std::vector<SegmentSpec>& segments() const { return segments_; }
  double r_min() const { return segments_.front().r_lo; }
  double r_max() const { return segments_.back().r_hi; }

  // Segment junctions and interior band nodes, sorted.
  std::vector<double> breakpoints() const;

 private:
  std::vector<SegmentSpec> segments_;
};

double eval_profile(const RadialProfile& profile, double r, int order);

// Independent re-measurement of the jumps at every segment junction.
std::vector<JunctionResidual> check_c2(const RadialProfile& profile);
bool c2_ok(const std::vector<JunctionResidual>& residuals,
           double tol = kC2Tolerance);

std::vector<BandNode> solve_smoothing_band(double left_second, double right_second,
                                           double width, double target_integral);

enum class Topology { Cap, DoubledSphere };
enum class ModelKind { Gaussian, RoundSphere, Family, Custom };
enum class FieldMode { Ricci, Sec };

std::string_view to_string(Topology t);
std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

struct ModelMeta {
  ModelKind kind = ModelKind::Custom;
  std::optional<double> eps;
  std::optional<double> delta;
  std::vector<std::string> warnings;
};

struct ReflectionResiduals {
  double max_asymmetry = 0.0;  // over a sample grid, phi and f
  double phi_slope_at_L = 0.0;
  double f_slope_at_L = 0.0;
};

// dr^2 + phi(r)^2 g_{S^{n-1}} with radial potential f.  Doubled spheres store
// the half profiles on [0, L] and evaluate [L, 2L] by reflection.
class ManifoldWithDensity {
 public:
  ManifoldWithDensity(int n, RadialProfile phi, RadialProfile f, Topology topology,
                      double potential_scale, ModelMeta meta);

  int n() const { return n_; }
  Topology topology() const { return topology_; }
  const RadialProfile& phi() const { return phi_; }
  const RadialProfile& f() const { return f_; }
  double potential_scale() const { return potential_scale_; }
  const ModelMeta& meta() const { return meta_; }
  ModelMeta& meta() { return meta_; }

  // Doubling point for DoubledSphere, r_max for Cap.
  double half_length() const { return half_length_; }
  double domain_max() const;
  bool is_compact() const { return topology_ == Topology::DoubledSphere; }
  double scale_for(FieldMode mode) const {
    return mode == FieldMode::Ricci ? 1.0 : potential_scale_;
  }

  // Maps r onto the stored half profile; odd_sign is the factor applied to
  // first derivatives (-1 on the reflected half).
  double reduce(double r, double* odd_sign = nullptr) const;

  double phi_at(double r, int order) const;
  double f_at(double r, int order) const;
  // (phi, phi') with a single segment lookup; the geodesic right-hand side.
  std::pair<double, double> phi01(double r) const;

  // Breakpoints over the full domain (reflected copies included).
  std::vector<double> breakpoints() const;
  // Radial intervals occupied by smoothing bands over the full domain.
  std::vector<std::pair<double, double>> band_intervals() const;

  ReflectionResiduals reflection_residuals(int samples = 2001) const;

 private:
  int n_;
  RadialProfile phi_;
  RadialProfile f_;
  Topology topology_;
  double potential_scale_;
  ModelMeta meta_;
  double half_length_;
};

struct ModelParams {
  int n = 3;
  double eps = 1.0;
  double delta = 0.02;
  FieldMode scale = FieldMode::Ricci;
  double r_max = 50.0;  // Cap evaluation range
};

ManifoldWithDensity build_model(ModelKind kind, const ModelParams& params);

// Unique zero of f' on the third potential branch (closed form).
double doubling_point(int n, double eps, double delta);

}  // namespace pinchlab
