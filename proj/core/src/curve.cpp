#include "capillary/curve.hpp"

#include <cmath>
#include <vector>

#include "capillary/error.hpp"

namespace capillary {

namespace {

Vec3 any_orthogonal(const Vec3& a) {
  Vec3 t = std::abs(a.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return (t - a * a.dot(t)).normalized();
}

}  // namespace

BoundaryCurve circle_curve(const Vec3& center, double radius, const Vec3& axis, ConormalDirection direction,
                           int multiplicity, std::string name) {
  if (!(radius > 0.0)) throw DomainError("circle radius must be positive");
  Vec3 k = axis.normalized();
  Vec3 e1 = any_orthogonal(k);
  Vec3 e2 = k.cross(e1);
  double sign = direction == ConormalDirection::into_sheet ? 1.0 : -1.0;
  BoundaryCurve c;
  c.name = std::move(name);
  c.s0 = 0.0;
  c.s1 = 2.0 * kPi;
  c.closed = true;
  c.direction = direction;
  c.multiplicity = multiplicity;
  c.eval = [=](double s) {
    Vec3 rhat = std::cos(s) * e1 + std::sin(s) * e2;
    Vec3 that = -std::sin(s) * e1 + std::cos(s) * e2;
    return CurvePoint{center + radius * rhat, radius * that, sign * rhat};
  };
  return c;
}

BoundaryCurve segment_curve(const Vec3& a, const Vec3& b, const Vec3& conormal, ConormalDirection direction,
                            int multiplicity, std::string name) {
  BoundaryCurve c;
  c.name = std::move(name);
  c.s0 = 0.0;
  c.s1 = 1.0;
  c.direction = direction;
  c.multiplicity = multiplicity;
  c.eval = [=](double s) { return CurvePoint{a + s * (b - a), b - a, conormal}; };
  return c;
}

BoundaryCurve patch_edge_curve(const SurfacePatch& patch, int multiplicity, std::string name) {
  const ParamDomain& dom = patch.domain();
  auto chart = patch.chart_ptr();
  double u0 = dom.u.lo;
  BoundaryCurve c;
  c.name = std::move(name);
  c.s0 = dom.v.lo;
  c.s1 = dom.v.hi;
  c.closed = dom.v.periodic;
  c.direction = ConormalDirection::into_sheet;
  c.multiplicity = multiplicity;
  c.eval = [chart, u0](double s) {
    ChartJet j = chart->jet1(Vec2(u0, s));
    Vec3 tau = j.xv.normalized();
    Vec3 n = (j.xu - tau * tau.dot(j.xu)).normalized();
    return CurvePoint{j.x, j.xv, n};
  };
  return c;
}

double curve_integral(const BoundaryCurve& curve, int level, const std::function<double(const CurvePoint&)>& f) {
  ParamInterval iv;
  iv.lo = curve.s0;
  iv.hi = curve.s1;
  iv.periodic = curve.closed;
  iv.base_panels = curve.base_panels;
  LineRule rule = make_line_rule(iv, level);
  std::vector<double> terms(rule.nodes.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    CurvePoint p = curve.eval(rule.nodes[i]);
    terms[i] = rule.weights[i] * p.tangent.norm() * f(p);
  }
  return pairwise_sum(terms);
}

double curve_length(const BoundaryCurve& curve, int level) {
  return curve_integral(curve, level, [](const CurvePoint&) { return 1.0; });
}

ConormalTerm boundary_conormal_term(const BoundaryCurve& curve, const AmbientField& X, int level) {
  if (!curve.has_conormal || !curve.eval) throw DomainError("curve '" + curve.name + "' carries no conormal");
  double into_sign = curve.direction == ConormalDirection::into_sheet ? 1.0 : -1.0;
  ConormalTerm out;
  out.multiplicity = curve.multiplicity;
  out.per_sheet = curve_integral(curve, level, [&](const CurvePoint& p) {
    Vec3 t = p.tangent.normalized();
    if (std::abs(p.conormal.norm() - 1.0) > 1e-10 || std::abs(p.conormal.dot(t)) > 1e-10) {
      throw DomainError("curve '" + curve.name + "': conormal is not a unit vector orthogonal to the curve");
    }
    return p.conormal.dot(X.value(p.x));
  });
  out.term = -curve.multiplicity * into_sign * out.per_sheet;
  out.convention = std::string("stored conormal points ") +
                   (curve.direction == ConormalDirection::into_sheet ? "into" : "away from") +
                   " the sheets; term = -m * integral of the into-sheet conormal dotted with X";
  return out;
}

}  // namespace capillary
