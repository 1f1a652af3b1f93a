#include "capillary/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "capillary/error.hpp"

namespace capillary {

Window Window::box(const Vec3& lo, const Vec3& hi) {
  if (!((hi - lo).minCoeff() > 0.0)) throw DomainError("window box must have positive extent");
  Window w;
  w.shape_ = Shape::box;
  w.lo_ = lo;
  w.hi_ = hi;
  return w;
}

Window Window::cylinder(const Vec3& center, const Vec3& axis, double radius, double half_length) {
  if (!(radius > 0.0) || !(half_length > 0.0)) throw DomainError("window cylinder must have positive size");
  Window w;
  w.shape_ = Shape::cylinder;
  w.center_ = center;
  w.axis_ = axis.normalized();
  w.radius_ = radius;
  w.half_length_ = half_length;
  return w;
}

double Window::depth(const Vec3& x) const {
  if (shape_ == Shape::box) return std::min((x - lo_).minCoeff(), (hi_ - x).minCoeff());
  Vec3 d = x - center_;
  double axial = d.dot(axis_);
  double radial = (d - axial * axis_).norm();
  return std::min(radius_ - radial, half_length_ - std::abs(axial));
}

double Window::scale() const {
  if (shape_ == Shape::box) return (hi_ - lo_).maxCoeff();
  return std::max(radius_, half_length_);
}

std::string Window::describe() const {
  std::ostringstream os;
  os.precision(12);
  if (shape_ == Shape::box) {
    os << "box[(" << lo_.x() << "," << lo_.y() << "," << lo_.z() << "),(" << hi_.x() << "," << hi_.y() << ","
       << hi_.z() << ")]";
  } else {
    os << "cylinder[center=(" << center_.x() << "," << center_.y() << "," << center_.z() << "),axis=(" << axis_.x()
       << "," << axis_.y() << "," << axis_.z() << "),radius=" << radius_ << ",half_length=" << half_length_ << "]";
  }
  return os.str();
}

std::vector<int> PieceConfig::components() const {
  std::vector<int> ids;
  for (const Piece& p : pieces) ids.push_back(p.component);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

void PieceConfig::validate(int level) const {
  for (const Piece& p : pieces) {
    if (p.component < 0) throw DomainError("piece '" + p.name + "' has a negative component label");
    QuadratureGrid grid = piece_grid(p, level);
    for (const Vec2& q : grid.nodes) {
      Vec3 x = p.patch.jet1(q).x;
      if (!window.contains(x, 1e-9)) {
        std::ostringstream os;
        os << "piece '" << p.name << "' leaves the window at (" << x.x() << ", " << x.y() << ", " << x.z() << ")";
        throw DomainError(os.str());
      }
    }
  }
}

QuadratureGrid piece_grid(const Piece& piece, int level) { return make_grid(piece.patch.domain(), level); }

std::string to_string(VolumeMethod m) { return m == VolumeMethod::closed ? "closed" : "vertical"; }

}  // namespace capillary
