#pragma once

// Geodesics of a rotationally symmetric manifold.  Every geodesic lies in a
// totally geodesic two-dimensional slice dr^2 + phi(r)^2 dtheta^2, so a single
// fibre angle theta describes it in any dimension.

#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "pinchlab/profiles.hpp"

namespace pinchlab {

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double reached)
      : std::runtime_error(what), reached_(reached) {}
  double reached() const { return reached_; }

 private:
  double reached_;
};

class SearchError : public std::runtime_error {
 public:
  SearchError(const std::string& what, double best)
      : std::runtime_error(what), best_(best) {}
  double best_candidate() const { return best_; }

 private:
  double best_;
};

struct Point {
  double r = 0.0;
  double theta = 0.0;
};

struct PathState {
  double t = 0.0;
  double r = 0.0;
  double theta = 0.0;
  double rdot = 0.0;
};

inline constexpr double kDefaultIntegratorTol = 1e-10;

class GeodesicPath {
 public:
  double clairaut_c() const { return clairaut_c_; }
  const std::vector<PathState>& samples() const { return samples_; }
  double length() const { return length_; }
  double clairaut_residual() const { return clairaut_residual_; }
  double speed_residual() const { return speed_residual_; }
  bool is_meridian() const { return meridian_; }

  // Interpolated state at arclength t in [0, length].
  PathState state_at(double t) const;

  // Arclengths in (0, length) where r(t) crosses one of the radii.
  std::vector<double> radial_crossings(const std::vector<double>& radii) const;

  // t, r, theta, rdot, clairaut_residual, speed_residual
  void write_csv(std::ostream& os) const;

 private:
  friend GeodesicPath shoot(const ManifoldWithDensity&, double, double, double, double,
                            double);

  struct Derivs {
    double rddot = 0.0;
    double thetadot = 0.0;
    double thetaddot = 0.0;
    double clairaut_residual = 0.0;
    double speed_residual = 0.0;
  };

  double clairaut_c_ = 0.0;
  std::vector<PathState> samples_;
  std::vector<Derivs> derivs_;
  double length_ = 0.0;
  double clairaut_residual_ = 0.0;
  double speed_residual_ = 0.0;

  bool meridian_ = false;
  double u0_ = 0.0;      // unfolded radial coordinate at t = 0
  double sigma_ = 1.0;   // direction of travel along the unfolded meridian
  double theta0_ = 0.0;
  double period_ = 0.0;  // 4L on a doubled sphere, 0 on a cap
};

// Unit-speed geodesic from (r0, theta0) launched at angle alpha from the
// outward radial direction (positive alpha moves toward increasing theta).
// Launches from a pole must be radial (alpha in {0, pi}).
GeodesicPath shoot(const ManifoldWithDensity& m, double r0, double alpha, double length,
                   double theta0 = 0.0, double tol = kDefaultIntegratorTol);

struct DistanceOptions {
  int launch_angles = 256;
  double target_accuracy = 1e-6;
  double integrator_tol = kDefaultIntegratorTol;
};

struct DistanceResult {
  double distance = 0.0;
  std::vector<GeodesicPath> minimizers;
  int launch_angles = 0;
  bool exact_meridian = false;
};

DistanceResult distance(const ManifoldWithDensity& m, Point p, Point q,
                        const DistanceOptions& opts = {});

// First conjugate distance along a meridian from the pole, i.e. the first
// zero of the (oddly continued) warping function.  +inf on a cap.
double inj_at_pole(const ManifoldWithDensity& m);

struct FarthestPoint {
  Point point;
  double length = 0.0;
};

FarthestPoint farthest_from_pole(const ManifoldWithDensity& m);

bool is_pole(const ManifoldWithDensity& m, double r);

}  // namespace pinchlab
