#include "activeuwb/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "activeuwb/errors.hpp"

namespace activeuwb {

AnchorLayout::AnchorLayout(const std::array<Vec2, 3>& anchors, std::string name)
    : anchors_(anchors), name_(std::move(name)) {
  for (const auto& a : anchors_) {
    if (!a.allFinite()) throw std::invalid_argument("AnchorLayout: non-finite anchor coordinate");
  }
  const Vec2 e1 = anchors_[1] - anchors_[0];
  const Vec2 e2 = anchors_[2] - anchors_[0];
  const double cross = e1.x() * e2.y() - e1.y() * e2.x();
  const double scale = std::max({e1.squaredNorm(), e2.squaredNorm(), 1e-300});
  if (std::abs(cross) <= 1e-9 * scale) {
    throw std::invalid_argument("AnchorLayout: anchors are collinear");
  }
}

AnchorLayout AnchorLayout::isosceles() {
  return AnchorLayout({Vec2(0.14, 0.175), Vec2(0.14, -0.175), Vec2(-0.14, 0.0)}, "is");
}

AnchorLayout AnchorLayout::equilateral(double side) {
  if (!(side > 0.0)) throw std::invalid_argument("AnchorLayout::equilateral: side must be positive");
  const double r = side / std::sqrt(3.0);
  const double half = 0.5 * side;
  return AnchorLayout({Vec2(0.5 * r, half), Vec2(0.5 * r, -half), Vec2(-r, 0.0)}, "eq");
}

AnchorLayout AnchorLayout::from_name(const std::string& name) {
  if (name == "is" || name == "isosceles" || name == "IS") return isosceles();
  if (name == "eq" || name == "equilateral" || name == "EQ") return equilateral();
  throw std::invalid_argument("unknown anchor layout '" + name + "' (expected eq|is)");
}

double AnchorLayout::max_radius() const {
  double r = 0.0;
  for (const auto& a : anchors_) r = std::max(r, a.norm());
  return r;
}

Vec2 AnchorLayout::centroid() const { return (anchors_[0] + anchors_[1] + anchors_[2]) / 3.0; }

bool AnchorLayout::symmetric_about_x(double tol) const {
  for (const auto& a : anchors_) {
    const Vec2 m(a.x(), -a.y());
    bool found = false;
    for (const auto& b : anchors_) found = found || (m - b).norm() <= tol;
    if (!found) return false;
  }
  return true;
}

AnchorLayout AnchorLayout::scaled(double s) const {
  return AnchorLayout({s * anchors_[0], s * anchors_[1], s * anchors_[2]}, name_);
}

GeometryMatrix build_geometry_matrix(const RelPosition& tag, const AnchorLayout& layout) {
  GeometryMatrix h;
  for (int i = 0; i < 3; ++i) {
    const Vec2 diff = tag - layout[i];
    const double dist = diff.norm();
    if (!(dist > kCoincidenceEps)) {
      throw DegenerateGeometry("tag coincides with anchor " + std::to_string(i + 1));
    }
    h.row(i) = (diff / dist).transpose();
  }
  return h;
}

double gdop_analytical(const RelPosition& tag, const AnchorLayout& layout) {
  const GeometryMatrix h = build_geometry_matrix(tag, layout);
  // H^T H = [a b; b c], inverse = [c -b; -b a] / det
  const double a = h.col(0).squaredNorm();
  const double b = h.col(0).dot(h.col(1));
  const double c = h.col(1).squaredNorm();
  const double det = a * c - b * b;
  if (!(det >= kSingularDetEps)) throw SingularGeometry("H^T H is singular at the requested tag position");
  return std::sqrt((a + c) / det);
}

}  // namespace activeuwb
