#include "doctest.h"

#include <cmath>

#include "activeuwb/errors.hpp"
#include "activeuwb/loss.hpp"

using namespace activeuwb;

namespace {
// Eq-free restatement: GDOP plus the weighted short-range term
double loss_oracle(const Vec2& p, const LossConfig& c) {
  double extra = 0.0;
  for (const auto& a : c.layout.anchors()) extra += 0.51 * std::exp(-3.152 * (p - a).norm());
  return gdop_analytical(p, c.layout) + c.alpha * extra;
}
}  // namespace

TEST_CASE("loss terms") {
  LossConfig c;
  const Vec2 p(0.9, -0.3);
  CHECK(localization_loss(p, c) == doctest::Approx(loss_oracle(p, c)).epsilon(1e-12));
  c.alpha = 0.0;
  CHECK(localization_loss(p, c) == gdop_analytical(p, c.layout));
  c.alpha = 10.0;
  const Vec2 far(50.0, 0.0);
  CHECK(localization_loss(far, c) - gdop_analytical(far, c.layout) < 1e-6);
}

TEST_CASE("mirror symmetry of the loss") {
  LossConfig c;
  for (double x = -2.0; x <= 2.0; x += 0.13) {
    for (double y = 0.05; y <= 2.0; y += 0.17) {
      if (std::hypot(x, y) < 0.3) continue;
      CHECK(std::abs(localization_loss(Vec2(x, y), c) - localization_loss(Vec2(x, -y), c)) < 1e-9);
    }
  }
}

TEST_CASE("extrema of the isosceles loss") {
  LossConfig c;
  const AnnulusDomain dom;
  const auto e = find_loss_extrema(c, dom);
  CHECK(e.l_min < e.l_max);
  CHECK(e.argmin.x() > 0.35);
  CHECK(std::abs(e.argmin.y()) < dom.radial_step);
  CHECK(dom.contains(e.argmin));
  // brute-force oracle on a finer Cartesian grid around the front axis
  double best = 1e9;
  for (double x = 0.6; x <= 1.1; x += 0.001) best = std::min(best, loss_oracle(Vec2(x, 0.0), c));
  CHECK(e.l_min <= best + 1e-9);
  CHECK(e.l_min == doctest::Approx(best).epsilon(1e-6));

  LossModel model(c, e);
  CHECK(model.scaled(e.argmin) == 0.0);
  CHECK(model.scaled(e.argmax) == 1.0);
  const Vec2 q(1.2, 0.4);
  CHECK(model.scaled(q) == doctest::Approx((loss_oracle(q, c) - e.l_min) / (e.l_max - e.l_min)).epsilon(1e-12));

  // strictly increasing along +x beyond the minimum
  double prev = model.loss(Vec2(e.argmin.x() + 0.01, 0.0));
  for (double x = e.argmin.x() + 0.02; x <= dom.r_outer; x += 0.01) {
    const double v = model.loss(Vec2(x, 0.0));
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("GDOP alone is minimal on the inner boundary") {
  LossConfig c;
  c.alpha = 0.0;
  const AnnulusDomain dom;
  const auto e = find_loss_extrema(c, dom);
  CHECK(e.argmin.norm() == doctest::Approx(dom.r_inner).epsilon(1e-9));
}

TEST_CASE("grid refinement barely moves the minimum") {
  LossConfig c;
  AnnulusDomain coarse, fine;
  fine.radial_step = 0.005;
  fine.angular_step_deg = 0.25;
  CHECK(std::abs(find_loss_extrema(c, coarse).l_min - find_loss_extrema(c, fine).l_min) < 1e-3);
}

TEST_CASE("domain checks") {
  LossConfig c;
  AnnulusDomain bad;
  bad.r_inner = 0.1;  // inside the anchor footprint
  CHECK_THROWS(find_loss_extrema(c, bad));
  LossExtrema flat;
  flat.l_min = flat.l_max = 3.0;
  CHECK_THROWS_AS(scaled_loss(Vec2(1.0, 0.0), c, flat), DegenerateDomain);
}
