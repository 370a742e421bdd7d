#pragma once

// Closed-form curvatures of dr^2 + phi(r)^2 g_{S^{n-1}} with potential f(r).
//
// sec_rad : planes containing the radial direction, -phi''/phi
// sec_tan : planes tangent to the distance spheres, (1 - phi'^2)/phi^2
// bakry_* : Ric + Hess f with the unscaled potential (Ricci mode)
// wsec_UV : sec(U, V) + s Hess f(U, U) with the manifold's potential scale s
//           (sec mode); r = radial, T = tangential.  Not symmetric in U, V.

#include <ostream>
#include <vector>

#include "pinchlab/profiles.hpp"

namespace pinchlab {

struct CurvatureSample {
  double r = 0.0;
  double sec_rad = 0.0;
  double sec_tan = 0.0;
  double ric_rr = 0.0;
  double ric_tt = 0.0;
  double bakry_rr = 0.0;
  double bakry_tt = 0.0;
  double wsec_rT = 0.0;
  double wsec_Tr = 0.0;
  double wsec_TT = 0.0;
  double xnorm = 0.0;
};

// Poles closer than this use the cap's closed form instead of 0/0 ratios.
inline constexpr double kPoleRadius = 1e-6;

CurvatureSample curvature_sample(const ManifoldWithDensity& m, double r);

// Plane with radial-wedge weight w: w sec_rad + (1 - w) sec_tan.
double sec_plane(const ManifoldWithDensity& m, double r, double w);

// |X| = s |f'(r)| with the manifold's potential scale, or with the scale of
// an explicit mode.
double x_field_norm(const ManifoldWithDensity& m, double r);
double x_field_norm(const ManifoldWithDensity& m, double r, FieldMode mode);

// Hess f(T, T) = f' phi' / phi, finite at an analytic pole.
double tangential_hessian(const ManifoldWithDensity& m, double r);

// r, phi, dphi, ddphi, f, df, ddf, then the curvature fields: 17 columns.
void write_curvature_csv(std::ostream& os, const ManifoldWithDensity& m,
                         const std::vector<double>& grid);

}  // namespace pinchlab
