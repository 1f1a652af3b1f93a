#pragma once

#include <vector>

#include "capillary/quadrature.hpp"

namespace capillary {

template <class F>
double integrate_patch(const SurfacePatch& patch, const QuadratureGrid& grid, bool second_order, F&& f) {
  std::vector<double> terms(grid.nodes.size());
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    const Vec2& p = grid.nodes[i];
    ChartJet jet = second_order ? patch.jet2(p) : patch.jet1(p);
    SurfaceFrame fr = surface_frame(jet, patch.orientation());
    terms[i] = grid.weights[i] * fr.J * f(jet, fr, p);
  }
  return pairwise_sum(terms);
}

}  // namespace capillary
