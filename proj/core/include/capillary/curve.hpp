#pragma once

#include <functional>
#include <string>

#include "capillary/fields.hpp"
#include "capillary/surface.hpp"

namespace capillary {

struct CurvePoint {
  Vec3 x = Vec3::Zero();
  Vec3 tangent = Vec3::Zero();  // derivative with respect to the curve parameter
  Vec3 conormal = Vec3::Zero();
};

enum class ConormalDirection { into_sheet, away_from_sheet };

struct BoundaryCurve {
  std::string name;
  std::function<CurvePoint(double)> eval;
  double s0 = 0.0;
  double s1 = 1.0;
  bool closed = false;
  bool has_conormal = true;
  ConormalDirection direction = ConormalDirection::into_sheet;
  int multiplicity = 1;
  int base_panels = 8;
};

/// Circle around center in the plane orthogonal to axis; conormal +/- radial according to direction,
/// for sheets lying radially outside the circle.
BoundaryCurve circle_curve(const Vec3& center, double radius, const Vec3& axis, ConormalDirection direction,
                           int multiplicity, std::string name = "circle");

/// Straight segment with a constant conormal (given in the declared direction).
BoundaryCurve segment_curve(const Vec3& a, const Vec3& b, const Vec3& conormal, ConormalDirection direction,
                            int multiplicity, std::string name = "segment");

/// The edge u = domain.u.lo of a patch, with the into-sheet conormal derived from the chart.
BoundaryCurve patch_edge_curve(const SurfacePatch& patch, int multiplicity, std::string name = "edge");

struct ConormalTerm {
  double per_sheet = 0.0;  // integral of the stored conormal against X
  double term = 0.0;       // -m times the integral of the into-sheet conormal against X
  int multiplicity = 1;
  std::string convention;
};

ConormalTerm boundary_conormal_term(const BoundaryCurve& curve, const AmbientField& X, int level = 3);

/// Integral over the curve of f(point) dH^1.
double curve_integral(const BoundaryCurve& curve, int level, const std::function<double(const CurvePoint&)>& f);

double curve_length(const BoundaryCurve& curve, int level = 3);

}  // namespace capillary
