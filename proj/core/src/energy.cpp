#include "capillary/energy.hpp"

#include <cmath>
#include <vector>

#include "capillary/error.hpp"

namespace capillary {

namespace {

double volume_flux(const Piece& p, VolumeMethod method, int level) {
  if (method == VolumeMethod::closed) {
    return piece_integral(p, level, [](const Vec3& x, const Vec3& nu) { return x.dot(nu) / 3.0; });
  }
  return piece_integral(p, level, [](const Vec3& x, const Vec3& nu) { return x.z() * nu.z(); });
}

}  // namespace

double perimeter(const PieceConfig& cfg, int level) {
  std::vector<double> parts;
  for (const Piece& p : cfg.pieces) {
    if (p.role == PieceRole::sheet) parts.push_back(patch_area(p.patch, piece_grid(p, level)));
  }
  return pairwise_sum(parts);
}

double enclosed_volume(std::span<const Piece> pieces, VolumeMethod method, int level) {
  std::vector<double> parts;
  std::vector<double> areas;
  for (const Piece& p : pieces) {
    parts.push_back(volume_flux(p, method, level));
    areas.push_back(patch_area(p.patch, piece_grid(p, level)));
  }
  double vol = pairwise_sum(parts);
  double area = pairwise_sum(areas);
  if (vol < -1e-10 * std::pow(area, 1.5)) throw OrientationError("negative enclosed volume: inconsistent orientation");
  return vol;
}

std::map<int, double> component_volumes(const PieceConfig& cfg, int level) {
  std::map<int, double> out;
  for (int c : cfg.components()) {
    std::vector<Piece> mine;
    for (const Piece& p : cfg.pieces) {
      if (p.component == c) mine.push_back(p);
    }
    std::vector<double> flux, areas;
    for (const Piece& p : mine) {
      flux.push_back(piece_integral(p, level, [](const Vec3&, const Vec3& nu) { return nu.z(); }));
      areas.push_back(patch_area(p.patch, piece_grid(p, level)));
    }
    double area = pairwise_sum(areas);
    if (std::abs(pairwise_sum(flux)) > 1e-8 * area) {
      throw DomainError("component " + std::to_string(c) + " is not bounded by its declared pieces");
    }
    out[c] = enclosed_volume(mine, cfg.volume_method, level);
  }
  return out;
}

EnergyBreakdown free_energy(const PieceConfig& cfg, const Potential& g, int level, bool with_volumes) {
  EnergyBreakdown e;
  std::vector<double> area_parts, pot_parts;
  for (const Piece& p : cfg.pieces) {
    if (p.role == PieceRole::sheet) area_parts.push_back(patch_area(p.patch, piece_grid(p, level)));
    if (g.kind() != Potential::Kind::zero) {
      if (!g.has_primitive()) throw UnsupportedError("potential '" + g.describe() + "' has no primitive");
      pot_parts.push_back(
          piece_integral(p, level, [&g](const Vec3& x, const Vec3& nu) { return g.primitive(x) * nu.z(); }));
    }
  }
  e.perimeter = pairwise_sum(area_parts);
  e.potential_term = pairwise_sum(pot_parts);
  e.total = e.perimeter + e.potential_term;
  if (with_volumes) e.volumes = component_volumes(cfg, level);
  return e;
}

}  // namespace capillary
