#pragma once

#include <mutex>
#include <unordered_map>
#include <vector>

#include "capillary/surface.hpp"

namespace capillary {

/// Arclength profile of the unduloid with neck radius a and mean curvature H, starting at the neck.
class UnduloidProfile {
 public:
  UnduloidProfile(double neck, double H);

  ProfileJet operator()(double s) const;
  /// Arclength at which the profile reaches height z > 0.
  double arclength_at_height(double z) const;
  double neck() const { return a_; }
  double curvature() const { return H_; }
  double bulge_radius() const { return 2.0 / H_ - a_; }

 private:
  struct State {
    double rho, z, psi;
  };
  State integrate(double s) const;
  void extend_to(double s) const;

  double a_;
  double H_;
  double step_;
  mutable std::mutex mutex_;
  mutable std::vector<State> checkpoints_;
  mutable std::unordered_map<double, ProfileJet> memo_;  // quadrature revisits the same nodes
};

inline double unduloid_min_neck(double H) { return 1e-3 / H; }

/// Unduloid patch centred on the neck, symmetric in z over the given extent.
/// a = 1/H returns a cylinder; a below unduloid_min_neck(H) is rejected.
SurfacePatch delaunay_unduloid(double neck, double H, double extent, bool outward = true);

}  // namespace capillary
