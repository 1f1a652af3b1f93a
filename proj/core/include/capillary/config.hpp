#pragma once

#include <span>
#include <string>
#include <vector>

#include "capillary/surface.hpp"

namespace capillary {

class Window {
 public:
  enum class Shape { box, cylinder };

  static Window box(const Vec3& lo, const Vec3& hi);
  /// Solid cylinder {|radial| <= radius, |axial| <= half_length} around center along axis.
  static Window cylinder(const Vec3& center, const Vec3& axis, double radius, double half_length);

  Shape shape() const { return shape_; }
  /// Distance to the window boundary, negative outside.
  double depth(const Vec3& x) const;
  bool contains(const Vec3& x, double tol = 1e-9) const { return depth(x) >= -tol * scale(); }
  double scale() const;
  std::string describe() const;

 private:
  Shape shape_ = Shape::box;
  Vec3 lo_ = Vec3::Zero();
  Vec3 hi_ = Vec3::Zero();
  Vec3 center_ = Vec3::Zero();
  Vec3 axis_ = Vec3::UnitZ();
  double radius_ = 0.0;
  double half_length_ = 0.0;
};

/// Sheets are parts of the liquid-vapour interface; caps are flat pieces on the window boundary
/// that close a region for flux integrals but carry no perimeter.
enum class PieceRole { sheet, cap };

struct Piece {
  std::string name;
  SurfacePatch patch;
  int component = 1;
  PieceRole role = PieceRole::sheet;
};

/// closed: volume from (1/3) x.nu; vertical: volume from z e3 . nu, which tolerates omitted
/// window faces whose normals are horizontal.
enum class VolumeMethod { closed, vertical };

struct PieceConfig {
  std::vector<Piece> pieces;
  Window window = Window::box(Vec3::Constant(-1.0), Vec3::Constant(1.0));
  VolumeMethod volume_method = VolumeMethod::closed;
  /// Normals point out of the liquid on every piece; recorded in reports.
  std::string side_convention = "normals point out of the liquid region";

  std::vector<int> components() const;
  /// Sampled containment and label checks.
  void validate(int level = 1) const;
};

QuadratureGrid piece_grid(const Piece& piece, int level);

std::string to_string(VolumeMethod m);

}  // namespace capillary
