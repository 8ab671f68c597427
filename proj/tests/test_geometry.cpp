#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "activeuwb/errors.hpp"
#include "activeuwb/geometry.hpp"

using namespace activeuwb;

namespace {

// General-purpose inverse instead of the closed form under test.
double gdop_oracle(const Vec2& tag, const AnchorLayout& layout) {
  Eigen::Matrix<double, 3, 2> h;
  for (int i = 0; i < 3; ++i) {
    const Vec2 d = tag - layout[i];
    h.row(i) = d.transpose() / d.norm();
  }
  const Eigen::Matrix2d g = (h.transpose() * h).fullPivLu().inverse();
  return std::sqrt(g.trace());
}

}  // namespace

TEST_CASE("geometry matrix rows point from anchors to the tag") {
  const auto is = AnchorLayout::isosceles();
  const auto h = build_geometry_matrix(Vec2(10.0, 0.0), is);
  for (int i = 0; i < 3; ++i) {
    CHECK(h.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h(i, 0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(h(i, 1)) < 0.02);
  }
  // (10 - 0.14, -0.175) / norm, by hand
  const double n0 = std::hypot(9.86, -0.175);
  CHECK(h(0, 0) == doctest::Approx(9.86 / n0));
  CHECK(h(0, 1) == doctest::Approx(-0.175 / n0));
}

TEST_CASE("tag on an anchor is degenerate") {
  const auto is = AnchorLayout::isosceles();
  CHECK_THROWS_AS(build_geometry_matrix(is[0], is), DegenerateGeometry);
  CHECK_THROWS_AS(gdop_analytical(is[2], is), DegenerateGeometry);
}

TEST_CASE("mirror layout gives mirrored rows") {
  const auto is = AnchorLayout::isosceles();
  REQUIRE(is.symmetric_about_x());
  const auto h = build_geometry_matrix(Vec2(1.0, 0.0), is);
  CHECK(h(0, 0) == doctest::Approx(h(1, 0)));
  CHECK(h(0, 1) == doctest::Approx(-h(1, 1)));
}

TEST_CASE("equilateral centroid GDOP is 2/sqrt(3)") {
  const auto eq = AnchorLayout::equilateral(1.0);
  CHECK(eq.centroid().norm() < 1e-12);
  CHECK(gdop_analytical(eq.centroid(), eq) == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("closed form matches a general inverse") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> r(0.4, 3.0), a(-M_PI, M_PI);
  for (const auto& lay : {AnchorLayout::isosceles(), AnchorLayout::equilateral(), AnchorLayout::equilateral(1.0)}) {
    for (int k = 0; k < 500; ++k) {
      const double rr = r(rng), aa = a(rng);
      const Vec2 p(rr * std::cos(aa), rr * std::sin(aa));
      CHECK(gdop_analytical(p, lay) == doctest::Approx(gdop_oracle(p, lay)).epsilon(1e-9));
    }
  }
}

TEST_CASE("mirror symmetry and scale invariance") {
  const auto is = AnchorLayout::isosceles();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> c(-3.0, 3.0);
  for (int k = 0; k < 1000; ++k) {
    const Vec2 p(c(rng), c(rng));
    if (p.norm() < 0.3) continue;
    CHECK(std::abs(gdop_analytical(p, is) - gdop_analytical(Vec2(p.x(), -p.y()), is)) < 1e-9);
    for (double s : {0.1, 2.0, 7.5}) {
      CHECK(std::abs(gdop_analytical(p * s, is.scaled(s)) - gdop_analytical(p, is)) < 1e-9);
    }
  }
}

TEST_CASE("collinear tag is singular") {
  // nearly collinear anchors seen from far along their line: rows parallel
  const AnchorLayout thin({Vec2(0, 0), Vec2(1, 0), Vec2(0.5, 1e-7)});
  CHECK_THROWS_AS(gdop_analytical(Vec2(1e3, 0.0), thin), SingularGeometry);
  const AnchorLayout tri({Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)});
  CHECK(gdop_analytical(Vec2(2.0, 2.0), tri) > 0.0);
}

TEST_CASE("layout invariants") {
  CHECK_THROWS_AS(AnchorLayout({Vec2(0, 0), Vec2(1, 0), Vec2(2, 0)}), std::invalid_argument);
  CHECK_THROWS_AS(AnchorLayout({Vec2(0, 0), Vec2(1, 0), Vec2(NAN, 1)}), std::invalid_argument);
  const auto eq = AnchorLayout::equilateral(0.35);
  for (int i = 0; i < 3; ++i) {
    CHECK((eq[i] - eq[(i + 1) % 3]).norm() == doctest::Approx(0.35));
  }
  CHECK(eq[2].x() < 0.0);  // apex backward
  CHECK(AnchorLayout::from_name("is").name() == "is");
  CHECK_THROWS(AnchorLayout::from_name("square"));
}

TEST_CASE("ring minima outside the footprint") {
  // IS front region well below 2; EQ ring at 0.70 m near 2.5
  double is_min = 1e9, eq_min = 1e9;
  const auto is = AnchorLayout::isosceles();
  const auto eq = AnchorLayout::equilateral();
  for (int k = 0; k < 720; ++k) {
    const double a = k * M_PI / 360.0;
    const Vec2 u(std::cos(a), std::sin(a));
    if (std::abs(std::remainder(a, 2 * M_PI)) < M_PI / 4) is_min = std::min(is_min, gdop_analytical(0.5 * u, is));
    eq_min = std::min(eq_min, gdop_analytical(0.70 * u, eq));
  }
  CHECK(is_min < 2.0);
  CHECK(eq_min == doctest::Approx(2.5).epsilon(0.08));
}
