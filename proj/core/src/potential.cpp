#include "capillary/potential.hpp"

#include <cmath>
#include <sstream>

#include "capillary/error.hpp"

namespace capillary {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

Potential Potential::zero() {
  Potential p;
  p.kind_ = Kind::zero;
  p.label_ = "zero";
  return p;
}

Potential Potential::constant(double c) {
  Potential p = polynomial({Monomial{c, 0, 0, 0}});
  p.kind_ = Kind::constant;
  std::ostringstream os;
  os.precision(17);
  os << "constant(" << c << ")";
  p.label_ = os.str();
  return p;
}

Potential Potential::linear_gravity(double g0, double rho, int axis) {
  if (axis < 0 || axis > 2) throw DomainError("gravity axis must be 0, 1 or 2");
  Monomial m{g0 * rho, axis == 0, axis == 1, axis == 2};
  Potential p = polynomial({m});
  p.kind_ = Kind::linear_gravity;
  std::ostringstream os;
  os.precision(17);
  os << "linear_gravity(g0=" << g0 << ", rho=" << rho << ", axis=" << axis << ")";
  p.label_ = os.str();
  return p;
}

Potential Potential::polynomial(std::vector<Monomial> terms) {
  for (const Monomial& m : terms) {
    if (m.i < 0 || m.j < 0 || m.k < 0) throw DomainError("polynomial exponents must be non-negative");
  }
  Potential p;
  p.kind_ = Kind::polynomial;
  p.terms_ = std::move(terms);
  std::ostringstream os;
  os.precision(17);
  os << "polynomial(";
  for (std::size_t n = 0; n < p.terms_.size(); ++n) {
    const Monomial& m = p.terms_[n];
    os << (n ? " + " : "") << m.c << "*x^" << m.i << "*y^" << m.j << "*z^" << m.k;
  }
  os << ")";
  p.label_ = os.str();
  return p;
}

Potential Potential::custom(std::function<double(const Vec3&)> value, std::function<Vec3(const Vec3&)> gradient) {
  Potential p;
  p.kind_ = Kind::custom;
  p.value_ = std::move(value);
  p.gradient_ = std::move(gradient);
  p.label_ = "custom";
  return p;
}

double Potential::value(const Vec3& x) const {
  if (kind_ == Kind::zero) return 0.0;
  if (kind_ == Kind::custom) return value_(x);
  double s = 0.0;
  for (const Monomial& m : terms_) s += m.c * ipow(x.x(), m.i) * ipow(x.y(), m.j) * ipow(x.z(), m.k);
  return s;
}

Vec3 Potential::gradient(const Vec3& x) const {
  if (kind_ == Kind::zero) return Vec3::Zero();
  if (kind_ == Kind::custom) return gradient_(x);
  Vec3 g = Vec3::Zero();
  for (const Monomial& m : terms_) {
    double px = ipow(x.x(), m.i), py = ipow(x.y(), m.j), pz = ipow(x.z(), m.k);
    if (m.i > 0) g.x() += m.c * m.i * ipow(x.x(), m.i - 1) * py * pz;
    if (m.j > 0) g.y() += m.c * m.j * px * ipow(x.y(), m.j - 1) * pz;
    if (m.k > 0) g.z() += m.c * m.k * px * py * ipow(x.z(), m.k - 1);
  }
  return g;
}

double Potential::primitive(const Vec3& x) const {
  if (kind_ == Kind::zero) return 0.0;
  if (kind_ == Kind::custom) throw UnsupportedError("potential '" + label_ + "' has no primitive");
  double s = 0.0;
  for (const Monomial& m : terms_) {
    s += m.c * ipow(x.x(), m.i) * ipow(x.y(), m.j) * ipow(x.z(), m.k + 1) / (m.k + 1);
  }
  return s;
}

std::string Potential::describe() const { return label_; }

std::pair<double, Vec3> potential_eval(const Potential& g, const Vec3& x) { return {g.value(x), g.gradient(x)}; }

}  // namespace capillary
