#pragma once

#include <map>
#include <span>

#include "capillary/config.hpp"
#include "capillary/potential.hpp"

namespace capillary {

struct EnergyBreakdown {
  double perimeter = 0.0;
  double potential_term = 0.0;
  double total = 0.0;
  std::map<int, double> volumes;
};

/// Volumes are filled only when with_volumes is set; partial configurations (restricted to a
/// sub-window) are not closed and must skip them.
EnergyBreakdown free_energy(const PieceConfig& cfg, const Potential& g, int level = kDefaultResolution,
                            bool with_volumes = true);

/// Area of the sheets only.
double perimeter(const PieceConfig& cfg, int level = kDefaultResolution);

/// Volume bounded by the given pieces (sheets and caps), by the divergence theorem.
double enclosed_volume(std::span<const Piece> pieces, VolumeMethod method, int level = kDefaultResolution);

std::map<int, double> component_volumes(const PieceConfig& cfg, int level = kDefaultResolution);

/// Integral over a piece of f(x, nu) dA.
template <class F>
double piece_integral(const Piece& piece, int level, F&& f) {
  return integrate_patch(piece.patch, piece_grid(piece, level), false,
                         [&f](const ChartJet&, const SurfaceFrame& fr, const Vec2&) { return f(fr.x, fr.nu); });
}

}  // namespace capillary
