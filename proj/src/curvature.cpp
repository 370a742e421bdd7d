#include "pinchlab/curvature.hpp"

#include <cmath>

#include "pinchlab/report_io.hpp"

namespace pinchlab {

namespace {

struct PoleForms {
  bool at_pole = false;
  double sec_rad = 0.0;
  double sec_tan = 0.0;
};

PoleForms pole_forms(const ManifoldWithDensity& m, double r) {
  PoleForms out;
  const double x = m.reduce(r);
  if (x >= kPoleRadius) return out;
  const SegmentSpec& cap = m.phi().segment_at(x);
  if (std::holds_alternative<SineShape>(cap.shape)) {
    out = {true, 1.0, 1.0};
  } else if (std::holds_alternative<LinearShape>(cap.shape)) {
    out = {true, 0.0, 0.0};
  } else {
    throw DomainError("curvature requested at a pole whose cap segment is not analytic");
  }
  return out;
}

}  // namespace

double tangential_hessian(const ManifoldWithDensity& m, double r) {
  const PoleForms pole = pole_forms(m, r);
  if (pole.at_pole) {
    // f' phi'/phi -> f''(0) since f'(0) = 0 and phi ~ r.
    return m.f_at(r, 2);
  }
  return m.f_at(r, 1) * m.phi_at(r, 1) / m.phi_at(r, 0);
}

CurvatureSample curvature_sample(const ManifoldWithDensity& m, double r) {
  const PoleForms pole = pole_forms(m, r);
  const double phi = m.phi_at(r, 0);
  const double dphi = m.phi_at(r, 1);
  const double ddphi = m.phi_at(r, 2);
  const double ddf = m.f_at(r, 2);
  const double nm1 = m.n() - 1.0;
  const double s = m.potential_scale();

  CurvatureSample c;
  c.r = r;
  c.sec_rad = pole.at_pole ? pole.sec_rad : -ddphi / phi;
  // On a sine segment 1 - phi'^2 = phi^2 exactly; the ratio would lose digits
  // to cancellation near the poles.
  const bool sine = std::holds_alternative<SineShape>(m.phi().segment_at(m.reduce(r)).shape);
  c.sec_tan = pole.at_pole ? pole.sec_tan
              : sine       ? 1.0
                           : (1.0 - dphi * dphi) / (phi * phi);
  c.ric_rr = nm1 * c.sec_rad;
  c.ric_tt = c.sec_rad + (m.n() - 2.0) * c.sec_tan;
  const double hess_tt = tangential_hessian(m, r);
  c.bakry_rr = c.ric_rr + ddf;
  c.bakry_tt = c.ric_tt + hess_tt;
  c.wsec_rT = c.sec_rad + s * ddf;
  c.wsec_Tr = c.sec_rad + s * hess_tt;
  c.wsec_TT = c.sec_tan + s * hess_tt;
  c.xnorm = s * std::abs(m.f_at(r, 1));
  return c;
}

double sec_plane(const ManifoldWithDensity& m, double r, double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw DomainError("plane weight must lie in [0, 1]");
  const CurvatureSample c = curvature_sample(m, r);
  return w * c.sec_rad + (1.0 - w) * c.sec_tan;
}

double x_field_norm(const ManifoldWithDensity& m, double r) {
  return m.potential_scale() * std::abs(m.f_at(r, 1));
}

double x_field_norm(const ManifoldWithDensity& m, double r, FieldMode mode) {
  return m.scale_for(mode) * std::abs(m.f_at(r, 1));
}

void write_curvature_csv(std::ostream& os, const ManifoldWithDensity& m,
                         const std::vector<double>& grid) {
  write_csv_header(os, {"r", "phi", "dphi", "ddphi", "f", "df", "ddf", "sec_rad", "sec_tan",
                        "ric_rr", "ric_tt", "bakry_rr", "bakry_tt", "wsec_rT", "wsec_Tr",
                        "wsec_TT", "xnorm"});
  for (double r : grid) {
    const CurvatureSample c = curvature_sample(m, r);
    write_csv_row(os, {r, m.phi_at(r, 0), m.phi_at(r, 1), m.phi_at(r, 2), m.f_at(r, 0),
                       m.f_at(r, 1), m.f_at(r, 2), c.sec_rad, c.sec_tan, c.ric_rr, c.ric_tt,
                       c.bakry_rr, c.bakry_tt, c.wsec_rT, c.wsec_Tr, c.wsec_TT, c.xnorm});
  }
}

}  // namespace pinchlab
