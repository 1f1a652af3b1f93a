#include "capillary/fields.hpp"

#include <cmath>
#include <sstream>

#include "capillary/error.hpp"

namespace capillary {

Region Region::ball(const Vec3& c, double r) {
  Region g;
  g.kind = Kind::ball;
  g.center = c;
  g.radius = r;
  return g;
}

Region Region::annulus(const Vec3& c, const Vec3& axis, double r_inner, double r_outer, double half_height) {
  if (!(r_inner >= 0.0) || !(r_outer > r_inner) || !(half_height > 0.0)) {
    throw DomainError("annulus needs 0 <= r_inner < r_outer and a positive half height");
  }
  Region g;
  g.kind = Kind::annulus;
  g.center = c;
  g.axis = axis.normalized();
  g.inner_radius = r_inner;
  g.radius = r_outer;
  g.half_height = half_height;
  return g;
}

Region Region::of(const Window& w) {
  Region g;
  g.kind = Kind::window;
  g.window = w;
  return g;
}

bool Region::contains(const Vec3& x) const {
  if (kind == Kind::ball) return (x - center).squaredNorm() < radius * radius;
  if (kind == Kind::annulus) {
    Vec3 d = x - center;
    double a = d.dot(axis);
    double r = (d - a * axis).norm();
    return std::abs(a) < half_height && r > inner_radius && r < radius;
  }
  return window.depth(x) > 0.0;
}

bool Region::inside(const Window& w) const {
  if (kind == Kind::ball) return w.depth(center) > radius;
  if (kind == Kind::annulus) {
    // windows are convex, so the rim circles of the enclosing solid cylinder decide
    Vec3 e1 = axis.unitOrthogonal(), e2 = axis.cross(e1);
    const int n = 256;
    for (int i = 0; i < n; ++i) {
      double th = 2.0 * kPi * i / n;
      Vec3 rim = radius * (std::cos(th) * e1 + std::sin(th) * e2);
      for (double s : {-1.0, 1.0}) {
        if (!(w.depth(center + rim + s * half_height * axis) > 1e-4 * radius)) return false;
      }
    }
    return true;
  }
  return false;
}

bool Support::contains(const Vec3& x) const {
  if (regions.empty()) return true;
  for (const Region& r : regions) {
    if (r.contains(x)) return true;
  }
  return false;
}

bool Support::inside(const Window& w) const {
  if (regions.empty()) return false;
  for (const Region& r : regions) {
    if (!r.inside(w)) return false;
  }
  return true;
}

AmbientField::AmbientField()
    : f_([](const Vec3&) { return FieldJet{}; }), support_{{Region::ball(Vec3::Zero(), 0.0)}}, label_("zero") {}

AmbientField::AmbientField(std::function<FieldJet(const Vec3&)> f, Support support, std::string label)
    : f_(std::move(f)), support_(std::move(support)), label_(std::move(label)) {}

FieldJet AmbientField::jet(const Vec3& x) const {
  if (!support_.contains(x)) return FieldJet{};
  return f_(x);
}

AmbientField::Certificate AmbientField::certificate(int n) const {
  Certificate c;
  for (const Region& r : support_.regions) {
    if (r.kind != Region::Kind::ball) continue;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          Vec3 q = r.center + r.radius * Vec3(-1.0 + 2.0 * (i + 0.5) / n, -1.0 + 2.0 * (j + 0.5) / n,
                                              -1.0 + 2.0 * (k + 0.5) / n);
          FieldJet fj = jet(q);
          c.max_value = std::max(c.max_value, fj.value.norm());
          c.max_jacobian = std::max(c.max_jacobian, fj.jac.norm());
        }
      }
    }
  }
  return c;
}

AmbientField zero_field() { return AmbientField(); }

AmbientField linear_combination(const std::vector<std::pair<double, AmbientField>>& terms) {
  Support s;
  std::string label;
  bool everywhere = false;
  for (const auto& [c, f] : terms) {
    if (f.support().everywhere()) everywhere = true;
    for (const Region& r : f.support().regions) s.regions.push_back(r);
    std::ostringstream os;
    os.precision(6);
    os << (label.empty() ? "" : " + ") << c << "*" << f.label();
    label += os.str();
  }
  if (everywhere) s.regions.clear();
  return AmbientField(
      [terms](const Vec3& x) {
        FieldJet out;
        for (const auto& [c, f] : terms) {
          if (c == 0.0) continue;
          FieldJet fj = f.jet(x);
          out.value += c * fj.value;
          out.jac += c * fj.jac;
        }
        return out;
      },
      s, label);
}

double smooth_step(double s, double* ds, double* dds) {
  if (s <= 0.0 || s >= 1.0) {
    if (ds) *ds = 0.0;
    if (dds) *dds = 0.0;
    return s <= 0.0 ? 0.0 : 1.0;
  }
  double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
  double da = a / (s * s), db = -b / ((1.0 - s) * (1.0 - s));
  double q = a + b;
  double S = a / q;
  double dS = (da * q - a * (da + db)) / (q * q);
  if (ds) *ds = dS;
  if (dds) {
    double dda = a * (1.0 - 2.0 * s) / (s * s * s * s);
    double t = 1.0 - s;
    double ddb = b * (1.0 - 2.0 * t) / (t * t * t * t);
    double dq = da + db, ddq = dda + ddb;
    *dds = (dda * q - a * ddq) / (q * q) - 2.0 * dq * dS / q;
  }
  return S;
}

AmbientField cutoff_affine_field(const Vec3& center, const Vec3& b, const Mat3& A, double r_inner, double r_outer,
                                 std::string label) {
  if (!(r_outer > r_inner) || r_inner < 0.0) throw DomainError("cutoff radii must satisfy 0 <= inner < outer");
  return AmbientField(
      [=](const Vec3& x) {
        Vec3 d = x - center;
        double r = d.norm();
        double dS = 0.0;
        double psi = 1.0 - smooth_step((r - r_inner) / (r_outer - r_inner), &dS);
        Vec3 grad = Vec3::Zero();
        if (r > 0.0) grad = -dS / (r_outer - r_inner) * d / r;
        Vec3 core = b + A * d;
        return FieldJet{psi * core, psi * A + core * grad.transpose()};
      },
      Support{{Region::ball(center, r_outer)}}, std::move(label));
}

AmbientField translation_field(const Vec3& v, const Vec3& center, double r_inner, double r_outer) {
  return cutoff_affine_field(center, v, Mat3::Zero(), r_inner, r_outer, "translation");
}

AmbientField dilation_field(const Vec3& center, double r_inner, double r_outer) {
  return cutoff_affine_field(center, Vec3::Zero(), Mat3::Identity(), r_inner, r_outer, "dilation");
}

AmbientField rotation_field(const Vec3& omega, const Vec3& center, double r_inner, double r_outer) {
  Mat3 W;
  W << 0.0, -omega.z(), omega.y(), omega.z(), 0.0, -omega.x(), -omega.y(), omega.x(), 0.0;
  return cutoff_affine_field(center, Vec3::Zero(), W, r_inner, r_outer, "rotation");
}

AmbientField global_affine_field(const Vec3& b, const Mat3& A, const Vec3& center, std::string label) {
  return AmbientField([=](const Vec3& x) { return FieldJet{b + A * (x - center), A}; }, Support{}, std::move(label));
}

AmbientField bump_field(const Vec3& center, double rho, const Vec3& a0, const Mat3& M) {
  if (!(rho > 0.0)) throw DomainError("bump radius must be positive");
  std::ostringstream os;
  os.precision(6);
  os << "bump(c=(" << center.x() << "," << center.y() << "," << center.z() << "),rho=" << rho << ")";
  return AmbientField(
      [=](const Vec3& x) {
        Vec3 d = x - center;
        double s2 = d.squaredNorm() / (rho * rho);
        if (s2 >= 1.0) return FieldJet{};
        double w = 1.0 - s2;
        double beta = std::exp(1.0 - 1.0 / w);
        // d beta / d x = beta * (-1 / w^2) * d(s^2)/dx
        Vec3 grad = beta * (-1.0 / (w * w)) * (2.0 * d / (rho * rho));
        Vec3 core = a0 + M * d;
        return FieldJet{beta * core, beta * M + core * grad.transpose()};
      },
      Support{{Region::ball(center, rho)}}, os.str());
}

double RandomFieldGenerator::uniform() {
  return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
}

AmbientField RandomFieldGenerator::next(const SamplingRegion& region) {
  Vec3 c;
  for (int i = 0; i < 3; ++i) c[i] = uniform(region.center_lo[i], region.center_hi[i]);
  double rho = uniform(region.radius_lo, region.radius_hi);
  Vec3 a0;
  for (int i = 0; i < 3; ++i) a0[i] = uniform(-1.0, 1.0);
  Mat3 M;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) M(i, j) = uniform(-1.0, 1.0) / rho;
  }
  return bump_field(c, rho, a0, M);
}

}  // namespace capillary
