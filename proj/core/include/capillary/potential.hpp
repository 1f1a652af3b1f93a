#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "capillary/types.hpp"

namespace capillary {

/// c * x^i * y^j * z^k
struct Monomial {
  double c = 0.0;
  int i = 0;
  int j = 0;
  int k = 0;
};

class Potential {
 public:
  enum class Kind { zero, constant, linear_gravity, polynomial, custom };

  static Potential zero();
  static Potential constant(double c);
  /// g = g0 * rho * x_axis, axis in {0, 1, 2}.
  static Potential linear_gravity(double g0, double rho, int axis = 2);
  static Potential polynomial(std::vector<Monomial> terms);
  /// A potential known only through its value and gradient; it has no primitive.
  static Potential custom(std::function<double(const Vec3&)> value, std::function<Vec3(const Vec3&)> gradient);

  Kind kind() const { return kind_; }
  double value(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;
  bool has_primitive() const { return kind_ != Kind::custom; }
  /// Integral of g along the vertical segment from (x1, x2, 0) to x; its e3 multiple has divergence g.
  double primitive(const Vec3& x) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::zero;
  std::vector<Monomial> terms_;
  std::function<double(const Vec3&)> value_;
  std::function<Vec3(const Vec3&)> gradient_;
  std::string label_;
};

std::pair<double, Vec3> potential_eval(const Potential& g, const Vec3& x);

}  // namespace capillary
