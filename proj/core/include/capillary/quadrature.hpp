#pragma once

#include <span>
#include <string>
#include <vector>

#include "capillary/types.hpp"

namespace capillary {

/// One parameter direction of a patch domain.
struct ParamInterval {
  double lo = 0.0;
  double hi = 1.0;
  bool periodic = false;
  std::vector<double> breaks;  // interior points where the integrand may lose smoothness
  int base_panels = 4;         // panels (or trapezoid nodes / 8) at level 1
};

struct ParamDomain {
  ParamInterval u;
  ParamInterval v;
  double exclusion_radius = 0.0;  // informational; the u interval already starts there

  double measure() const { return (u.hi - u.lo) * (v.hi - v.lo); }
  bool contains(const Vec2& p, double tol = 1e-12) const;
};

struct QuadratureGrid {
  std::vector<Vec2> nodes;
  std::vector<double> weights;
  std::string scheme;
  int level = 0;
};

struct LineRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Composite Gauss-Legendre on panels honouring the breakpoints, trapezoid when periodic.
LineRule make_line_rule(const ParamInterval& iv, int level);

QuadratureGrid make_grid(const ParamDomain& dom, int level);

/// Deterministic fixed-order pairwise reduction.
double pairwise_sum(std::span<const double> values);

inline constexpr int kGaussPoints = 8;
inline constexpr int kDefaultResolution = 3;

}  // namespace capillary
