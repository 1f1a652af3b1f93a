#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "capillary/config.hpp"
#include "capillary/surface.hpp"

namespace capillary {

struct FieldJet {
  Vec3 value = Vec3::Zero();
  Mat3 jac = Mat3::Zero();  // jac(i, j) = d X_i / d x_j
};

/// Ball, annular shell around an axis, or an arbitrary window shape.
struct Region {
  enum class Kind { ball, annulus, window };
  Kind kind = Kind::ball;
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  Vec3 axis = Vec3::UnitZ();
  double inner_radius = 0.0;
  double half_height = 0.0;
  Window window = Window::box(Vec3::Constant(-1.0), Vec3::Constant(1.0));

  static Region ball(const Vec3& c, double r);
  /// {r_inner < radial distance < r_outer, |axial offset| < half_height}
  static Region annulus(const Vec3& c, const Vec3& axis, double r_inner, double r_outer, double half_height);
  static Region of(const Window& w);
  bool contains(const Vec3& x) const;
  bool inside(const Window& w) const;
};

/// Union of regions; an empty union means the field may be nonzero everywhere.
struct Support {
  std::vector<Region> regions;

  bool everywhere() const { return regions.empty(); }
  bool contains(const Vec3& x) const;
  bool inside(const Window& w) const;
};

class AmbientField {
 public:
  AmbientField();
  AmbientField(std::function<FieldJet(const Vec3&)> f, Support support, std::string label);

  FieldJet jet(const Vec3& x) const;
  Vec3 value(const Vec3& x) const { return jet(x).value; }
  const Support& support() const { return support_; }
  const std::string& label() const { return label_; }

  struct Certificate {
    double max_value = 0.0;
    double max_jacobian = 0.0;
  };
  /// Sampled sup norms over the support's bounding region.
  Certificate certificate(int samples_per_axis = 12) const;

 private:
  std::function<FieldJet(const Vec3&)> f_;
  Support support_;
  std::string label_;
};

AmbientField zero_field();
AmbientField linear_combination(const std::vector<std::pair<double, AmbientField>>& terms);

/// C-infinity step: 0 for s <= 0, 1 for s >= 1.
double smooth_step(double s, double* ds = nullptr, double* dds = nullptr);

/// psi(|x - c|) * (b + A (x - c)) with psi = 1 inside r_inner and 0 outside r_outer.
AmbientField cutoff_affine_field(const Vec3& center, const Vec3& b, const Mat3& A, double r_inner, double r_outer,
                                 std::string label);
AmbientField translation_field(const Vec3& v, const Vec3& center, double r_inner, double r_outer);
AmbientField dilation_field(const Vec3& center, double r_inner, double r_outer);
AmbientField rotation_field(const Vec3& omega, const Vec3& center, double r_inner, double r_outer);
/// Uncut fields, for closed-form checks on bounded pieces.
AmbientField global_affine_field(const Vec3& b, const Mat3& A, const Vec3& center, std::string label);

/// beta(|x - c| / rho) * (a0 + M (x - c)) with the bump beta(s) = exp(1 - 1/(1 - s^2)).
AmbientField bump_field(const Vec3& center, double rho, const Vec3& a0, const Mat3& M);

/// Where random fields may be placed: centres uniform in a box, radii uniform in a range.
struct SamplingRegion {
  Vec3 center_lo = Vec3::Zero();
  Vec3 center_hi = Vec3::Zero();
  double radius_lo = 0.1;
  double radius_hi = 0.2;
  int component = 1;
};

class RandomFieldGenerator {
 public:
  explicit RandomFieldGenerator(std::uint64_t seed) : engine_(seed) {}
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  AmbientField next(const SamplingRegion& region);

 private:
  std::mt19937_64 engine_;
};

}  // namespace capillary
