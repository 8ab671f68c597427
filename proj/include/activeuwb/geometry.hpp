#pragma once

#include <array>
#include <cmath>
#include <string>

#include <Eigen/Core>

namespace activeuwb {

/// Planar position in meters. Used for anchor positions and for the tag
/// position (true or estimated) expressed in the AnchorBot body frame.
using Vec2 = Eigen::Vector2d;
using RelPosition = Vec2;

/// Rows are unit direction vectors from each anchor to the tag.
using GeometryMatrix = Eigen::Matrix<double, 3, 2>;

inline constexpr double kCoincidenceEps = 1e-9;   // m
inline constexpr double kSingularDetEps = 1e-12;  // det(H^T H)

/// Three anchors rigidly mounted on the AnchorBot, body-frame coordinates.
class AnchorLayout {
 public:
  /// Throws std::invalid_argument on non-finite or collinear anchors.
  explicit AnchorLayout(const std::array<Vec2, 3>& anchors, std::string name = "custom");

  /// Anchors on an isosceles triangle with the GDOP minimum in front of
  /// the robot: (0.14, 0.175), (0.14, -0.175), (-0.14, 0).
  static AnchorLayout isosceles();

  /// Equilateral triangle centred on the body origin with one vertex pointing
  /// backward (-x) and the opposite edge facing forward.
  static AnchorLayout equilateral(double side = 0.35);

  /// Resolves "eq" / "is" (also "equilateral" / "isosceles").
  static AnchorLayout from_name(const std::string& name);

  const Vec2& operator[](std::size_t i) const { return anchors_[i]; }
  const std::array<Vec2, 3>& anchors() const { return anchors_; }
  const std::string& name() const { return name_; }

  /// Largest distance of an anchor from the body origin.
  double max_radius() const;
  Vec2 centroid() const;
  /// True when the anchor set maps onto itself under y -> -y.
  bool symmetric_about_x(double tol = 1e-12) const;

  AnchorLayout scaled(double s) const;

 private:
  std::array<Vec2, 3> anchors_;
  std::string name_;
};

/// Row i = (p_t - p_ai) / ||p_t - p_ai||. Throws DegenerateGeometry when the
/// tag is within kCoincidenceEps of an anchor.
GeometryMatrix build_geometry_matrix(const RelPosition& tag, const AnchorLayout& layout);

/// sqrt(G11 + G22) with G = (H^T H)^-1, inverted in closed form.
/// Throws SingularGeometry when det(H^T H) < kSingularDetEps.
double gdop_analytical(const RelPosition& tag, const AnchorLayout& layout);

/// Bearing of a body-frame point, atan2(y, x).
inline double bearing(const Vec2& p) { return std::atan2(p.y(), p.x()); }

}  // namespace activeuwb
