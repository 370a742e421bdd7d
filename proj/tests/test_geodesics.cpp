#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "pinchlab/geodesics.hpp"

using namespace pinchlab;

namespace {

ManifoldWithDensity model(ModelKind k, int n, double eps = 0.8, double delta = 0.02) {
  ModelParams p;
  p.n = n;
  p.eps = eps;
  p.delta = delta;
  return build_model(k, p);
}

// Great-circle distance between (r1, 0) and (r2, dtheta) on the unit sphere.
double sphere_oracle(double r1, double r2, double dtheta) {
  const double c = std::cos(r1) * std::cos(r2) + std::sin(r1) * std::sin(r2) * std::cos(dtheta);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

// Euclidean distance between polar points.
double plane_oracle(double r1, double r2, double dtheta) {
  return std::sqrt(std::max(0.0, r1 * r1 + r2 * r2 - 2 * r1 * r2 * std::cos(dtheta)));
}

}  // namespace

TEST_CASE("equator is a geodesic with c = 1") {
  const auto s = model(ModelKind::RoundSphere, 3);
  const auto g = shoot(s, M_PI / 2, M_PI / 2, 1.0);
  CHECK(g.clairaut_c() == doctest::Approx(1.0).epsilon(1e-15));
  for (const auto& st : g.samples()) CHECK(std::abs(st.r - M_PI / 2) <= 1e-12);
  CHECK(g.state_at(1.0).theta == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("Gaussian straight line") {
  const auto g = model(ModelKind::Gaussian, 3);
  const auto path = shoot(g, 1.0, M_PI / 2, 2.0);
  CHECK(path.state_at(2.0).r == doctest::Approx(std::sqrt(5.0)).epsilon(1e-9));
  for (double t : {0.3, 0.77, 1.5}) {
    CHECK(path.state_at(t).r == doctest::Approx(std::sqrt(1 + t * t)).epsilon(1e-9));
    CHECK(path.state_at(t).theta == doctest::Approx(std::atan(t)).epsilon(1e-9));
  }
}

TEST_CASE("meridians from the pole") {
  for (auto k : {ModelKind::Gaussian, ModelKind::RoundSphere, ModelKind::Family}) {
    const auto m = model(k, 4);
    const auto path = shoot(m, 0.0, 0.0, 1.0);
    CHECK(path.is_meridian());
    CHECK(path.clairaut_c() == 0.0);
    for (double t : {0.0, 0.25, 0.5, 1.0}) CHECK(path.state_at(t).r == doctest::Approx(t));
  }
  // through the far pole and back on the other side of the slice
  const auto s = model(ModelKind::RoundSphere, 3);
  const auto loop = shoot(s, 0.0, 0.0, 2 * M_PI);
  CHECK(loop.state_at(M_PI + 0.5).r == doctest::Approx(M_PI - 0.5));
  CHECK(std::abs(loop.state_at(2 * M_PI).r) <= 1e-12);
  CHECK_THROWS_AS(shoot(s, 0.0, 0.4, 1.0), DomainError);
  CHECK_THROWS_AS(shoot(s, 1.0, 0.4, -1.0), DomainError);
}

TEST_CASE("state interpolation reproduces the integrated samples") {
  const auto m = model(ModelKind::Family, 10);
  const auto path = shoot(m, 1.0, 1.1, 6.0);
  // sample midpoints against a separate shoot that stops there
  for (double t : {0.4, 1.7, 3.3, 5.2}) {
    const auto direct = shoot(m, 1.0, 1.1, t);
    const auto end = direct.samples().back();
    const auto st = path.state_at(t);
    CHECK(st.r == doctest::Approx(end.r).epsilon(1e-8));
    CHECK(st.theta == doctest::Approx(end.theta).epsilon(1e-8));
    CHECK(st.rdot == doctest::Approx(end.rdot).epsilon(1e-7));
  }
}

TEST_CASE("conservation residuals over random launches on every builtin") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (auto k : {ModelKind::Gaussian, ModelKind::RoundSphere, ModelKind::Family}) {
    const auto m = model(k, 10);
    const double rmax = m.is_compact() ? m.domain_max() : 8.0;
    for (int i = 0; i < 60; ++i) {
      const double r0 = (0.02 + 0.96 * U(rng)) * rmax;
      const double alpha = -M_PI + 2 * M_PI * U(rng);
      const double len = k == ModelKind::Gaussian ? 4.0 : 8.0;
      const auto path = shoot(m, r0, alpha, len);
      CHECK(path.clairaut_residual() <= 1e-8);
      CHECK(path.speed_residual() <= 1e-8);
      CHECK(path.length() == doctest::Approx(len));
    }
  }
}

TEST_CASE("round sphere distances match the closed form") {
  const auto s = model(ModelKind::RoundSphere, 3);
  CHECK(distance(s, {M_PI / 2, 0.0}, {M_PI / 2, 1.0}).distance == doctest::Approx(1.0).epsilon(1e-9));
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    const double r1 = M_PI * U(rng), r2 = M_PI * U(rng), th = 2 * M_PI * U(rng);
    const auto d = distance(s, {r1, 0.0}, {r2, th});
    CHECK(std::abs(d.distance - sphere_oracle(r1, r2, th)) <= 1e-6);
    CHECK(!d.minimizers.empty());
  }
}

TEST_CASE("Gaussian distances match the plane") {
  const auto g = model(ModelKind::Gaussian, 3);
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double r1 = 8 * U(rng), r2 = 8 * U(rng), th = 2 * M_PI * U(rng);
    CHECK(std::abs(distance(g, {r1, 0.0}, {r2, th}).distance - plane_oracle(r1, r2, th)) <= 1e-6);
  }
}

TEST_CASE("pole queries are exact meridians") {
  const auto m = model(ModelKind::Family, 10);
  const auto d = distance(m, {0.0, 0.0}, {1.2, 2.0});
  CHECK(d.exact_meridian);
  CHECK(d.distance == 1.2);
  const auto far = distance(m, {0.0, 0.0}, {m.domain_max(), 0.0});
  CHECK(far.distance == doctest::Approx(3.866990817).epsilon(1e-9));
  const auto back = distance(m, {m.domain_max(), 0.3}, {1.0, 0.0});
  CHECK(back.distance == doctest::Approx(m.domain_max() - 1.0).epsilon(1e-14));
}

TEST_CASE("distance is symmetric on the family") {
  const auto m = model(ModelKind::Family, 10);
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const Point p{m.domain_max() * U(rng), 0.0}, q{m.domain_max() * U(rng), 2 * M_PI * U(rng)};
    CHECK(std::abs(distance(m, p, q).distance - distance(m, q, p).distance) <= 1e-6);
  }
}

TEST_CASE("injectivity radius at the pole equals the farthest distance") {
  const auto s = model(ModelKind::RoundSphere, 3);
  CHECK(inj_at_pole(s) == doctest::Approx(M_PI).epsilon(1e-9));
  CHECK(farthest_from_pole(s).length == doctest::Approx(M_PI).epsilon(1e-9));

  const auto m = model(ModelKind::Family, 10);
  CHECK(inj_at_pole(m) == doctest::Approx(3.866990817).epsilon(1e-9));
  const auto far = farthest_from_pole(m);
  CHECK(std::abs(far.length - inj_at_pole(m)) <= 1e-6);
  CHECK(far.point.r == doctest::Approx(m.domain_max()));

  const auto m3 = model(ModelKind::Family, 3, 0.4, 0.01);
  CHECK(farthest_from_pole(m3).length == doctest::Approx(2 * doubling_point(3, 0.4, 0.01)));
  CHECK(farthest_from_pole(m3).length == doctest::Approx(7.774).epsilon(1e-3));

  const auto g = model(ModelKind::Gaussian, 3);
  CHECK(std::isinf(inj_at_pole(g)));
  CHECK_THROWS(farthest_from_pole(g));
}

TEST_CASE("injectivity radius converges to pi/eps over the delta sweep") {
  for (double d : {0.08, 0.04, 0.02, 0.01}) {
    const auto m = model(ModelKind::Family, 10, 0.8, d);
    const double inj = inj_at_pole(m);
    CHECK(std::abs(inj - m.domain_max()) <= 1e-8);
    CHECK(std::abs(inj - M_PI / 0.8) <= 7 * d);
  }
}

TEST_CASE("radial crossings land on junction radii") {
  const auto m = model(ModelKind::Family, 10);
  const auto path = shoot(m, 0.0, 0.0, m.domain_max());
  const auto xs = path.radial_crossings({M_PI / 2, m.half_length()});
  REQUIRE(xs.size() == 2);
  CHECK(xs[0] == doctest::Approx(M_PI / 2));
  CHECK(xs[1] == doctest::Approx(m.half_length()));
  const auto back = path.radial_crossings({m.domain_max() - M_PI / 2});
  REQUIRE(back.size() == 1);
  CHECK(back[0] == doctest::Approx(m.domain_max() - M_PI / 2));

  const auto s = model(ModelKind::RoundSphere, 3);
  const auto tilted = shoot(s, 1.0, 0.9, 2 * M_PI);
  // a great circle crosses the equator twice per turn
  CHECK(tilted.radial_crossings({M_PI / 2}).size() == 2);
}

TEST_CASE("path CSV") {
  const auto s = model(ModelKind::RoundSphere, 3);
  std::ostringstream os;
  shoot(s, 1.0, 0.7, 2.0).write_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,r,theta,rdot,clairaut_residual,speed_residual");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  CHECK(rows >= 2);
}
