#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "capillary/curve.hpp"
#include "capillary/energy.hpp"
#include "capillary/fd.hpp"
#include "capillary/flow.hpp"
#include "capillary/variation.hpp"

namespace capillary {

enum class DeformationKind { ambient, coalescence, break_up };

std::string to_string(DeformationKind k);

class DeformationPath {
 public:
  virtual ~DeformationPath() = default;
  /// config_at(0) returns the base configuration unchanged.
  virtual PieceConfig config_at(double t) const = 0;
  virtual DeformationKind kind() const = 0;
  virtual std::string descriptor() const = 0;

  const PieceConfig& base() const { return base_; }
  double t_max() const { return t_max_; }

 protected:
  DeformationPath(PieceConfig base, double t_max) : base_(std::move(base)), t_max_(t_max) {}
  void check_t(double t) const;

  PieceConfig base_;
  double t_max_;
};

/// Bump b(r) = exp(1 - 1/(1 - s^2)), s = (r - center) / half_width, in the distance r from the z-axis.
struct RadialBump {
  double center = 2.5;
  double half_width = 0.4;
  double value(double r, double* dr = nullptr) const;
};

/// scale * b(r) * eta((z - u(x, y)) / delta) * sign * N_u(x, y), with N_u the upward unit normal of graph(u) and
/// eta = 1 near 0, 0 outside [-1, 1]. On graph(u) it equals scale * b * nu for the piece orientation sign.
AmbientField graph_normal_field(HeightFunction u, int sign, RadialBump bump, double scale, double delta,
                                std::string label);

/// Solved amplitudes s of Id + tX + sum_c s_c Y_c keeping each constrained component volume fixed.
class VolumePreservingPath final : public DeformationPath {
 public:
  VolumePreservingPath(PieceConfig cfg, AmbientField X, std::map<int, AmbientField> Y, int level, double t_max);

  PieceConfig config_at(double t) const override;
  DeformationKind kind() const override { return DeformationKind::ambient; }
  std::string descriptor() const override;

  std::map<int, double> s_at(double t) const;
  /// -integral X.nu / integral Y.nu per component (the Jacobian is diagonal when supports are separate).
  std::map<int, double> s_prime_formula() const;
  std::map<int, double> volume_drift(double t) const;
  double volume_scale() const { return vol_scale_; }
  double volume_tolerance() const { return 1e-10 * vol_scale_; }

 private:
  PieceConfig displaced(double t, const std::map<int, double>& s) const;
  std::map<int, double> solve(double t) const;

  AmbientField X_;
  std::map<int, AmbientField> Y_;
  int level_;
  std::map<int, double> vol0_;
  Eigen::MatrixXd jac0_;
  std::vector<int> comps_;
  double vol_scale_ = 1.0;
  mutable std::mutex mutex_;
  mutable std::map<double, std::map<int, double>> cache_;
};

std::shared_ptr<VolumePreservingPath> make_volume_preserving(const PieceConfig& cfg, const AmbientField& X,
                                                             const std::map<int, AmbientField>& Y,
                                                             int level = kDefaultResolution, double t_max = 0.1);

enum class SideConvention { liquid_outside, liquid_between };

/// Two graphs u <= v over B_{3R} touching at the origin, in the window B_{3R} x (-h, h).
struct CuspPairConfig {
  HeightFunction lower;
  HeightFunction upper;
  double R = 1.0;
  double half_height = 1.0;
  SideConvention side = SideConvention::liquid_outside;
  std::optional<double> lambda;  // multiplier when the pair is stationary
  std::string label = "cusp pair";

  static CuspPairConfig paraboloids(double alpha, double R, SideConvention side);
  /// Two balls of radius cap_radius touching at the origin; liquid inside the balls.
  static CuspPairConfig spherical_caps(double cap_radius, double R);

  Window window() const;
  void validate() const;
};

/// Pieces split at r = R; names carry "inner"/"outer".
PieceConfig cusp_base_config(const CuspPairConfig& cusp, const std::vector<double>& inner_breaks = {},
                             const std::vector<double>& outer_breaks = {});

struct CorrectionLayout {
  RadialBump zeta{2.5, 0.4};
  RadialBump y{2.5, 0.25};
};

struct CoalescenceFirstVariation {
  double curvature_M = 0.0;
  double boundary_M = 0.0;
  double potential_M = 0.0;
  double curvature_N = 0.0;
  double boundary_N = 0.0;
  double potential_N = 0.0;
  double outer = 0.0;  // derivative of the energy in U2
  double inner_total = 0.0;
  double total = 0.0;
  double extrapolation_error = 0.0;  // t = 0 only
};

struct CoalescenceSecondVariation {
  double inner = 0.0;  // U1 contribution, FD second derivative of E restricted to U1
  double inner_error = 0.0;
  double boundary_rate_M = 0.0;  // t-derivatives of the boundary terms
  double boundary_rate_N = 0.0;
  double quadratic_form = 0.0;  // Q(zeta) on U2
  double volume_correction = 0.0;
  double outer = 0.0;  // U2 contribution
  double total = 0.0;
  double lambda = 0.0;
  double s_second = 0.0;     // -(V1'' + second-order U2 volume of W) / integral of Y.nu
  double s_second_fd = 0.0;  // FD of the solver's s'(t)
  double inner_volume_second = 0.0;     // integral of div X (X.nu) over the U1 sheets
  double inner_volume_second_fd = 0.0;  // FD of V'(t)
  double outer_volume_second = 0.0;
  double fd_total = 0.0;  // FD second derivative of the whole energy along the path
  double fd_total_error = 0.0;
  std::vector<double> steps;
};

/// The radial coalescence (or break-up) path with its far-field volume correction.
class CoalescencePath final : public DeformationPath {
 public:
  CoalescencePath(CuspPairConfig cusp, CutoffChi chi, Potential g, int level, CorrectionLayout layout = {});

  PieceConfig config_at(double t) const override;
  DeformationKind kind() const override;
  std::string descriptor() const override;

  /// Pieces in U1 at time t; rho > 0 (t = 0 only) removes the disk r < rho.
  PieceConfig inner_config(double t, double rho = 0.0) const;
  /// Pieces in U2 displaced by t W + s Y.
  PieceConfig outer_config(double t, double s) const;

  double inner_energy(double t) const;
  double outer_energy(double t) const;
  double energy(double t) const { return inner_energy(t) + outer_energy(t); }
  double volume(double t) const;
  double inner_volume(double t) const;
  double uncorrected_volume(double t) const;
  double s_at(double t) const;

  /// V'(t): flux of chi d_r through the U1 sheets (rho-extrapolated at t = 0).
  double volume_rate(double t) const;
  /// V''(0+) for the U1 region: the flux of (div X) X through the U1 sheets, rho-extrapolated.
  double volume_second_derivative() const;
  CoalescenceFirstVariation first_variation(double t) const;
  CoalescenceSecondVariation second_variation(const std::vector<double>& steps) const;

  const CuspPairConfig& cusp() const { return cusp_; }
  const CutoffChi& chi() const { return chi_; }
  const AmbientField& W() const { return W_; }
  const AmbientField& Y() const { return Y_; }
  double zeta_scale() const { return zeta_scale_; }
  double lambda() const { return lambda_; }
  double volume_scale() const { return vol_scale_; }
  /// Exclusion radii for the t = 0 limit.
  std::vector<double> rho_stencil() const;

 private:
  struct OuterRates {
    double area = 0.0;
    double potential = 0.0;
    double volume = 0.0;
  };
  OuterRates outer_rates(double t, double s, const AmbientField& D) const;
  double s_prime(double t) const;
  double inner_flux(double t, double rho) const;
  std::vector<double> inner_breaks(double t) const;
  Piece inner_sheet(const Piece& base, double t, double rho) const;

  CuspPairConfig cusp_;
  CutoffChi chi_;
  RadialFlow flow_;
  Potential g_;
  int level_;
  CorrectionLayout layout_;
  AmbientField W_;
  AmbientField Y_;
  double zeta_scale_ = 0.0;
  double lambda_ = 0.0;
  double vol0_ = 0.0;
  double vol_scale_ = 1.0;
  double dvol_ds_ = 0.0;
  mutable std::mutex mutex_;
  mutable std::map<double, double> cache_;
};

std::shared_ptr<CoalescencePath> coalescence_path(const CuspPairConfig& cusp, const CutoffChi& chi,
                                                  const Potential& g, int level = kDefaultResolution,
                                                  CorrectionLayout layout = {});

/// A domain bounded by some pieces with a wedge edge along the junction T.
struct Wedge {
  std::string name;
  std::vector<std::size_t> pieces;
  std::vector<int> sign;                // +1 where the piece normal points out of the wedge domain
  std::vector<BoundaryCurve> junction;  // T seen from each adjacent sheet, into-sheet conormals
  AmbientField push;                    // bump times the direction into the wedge, supported near T
  AmbientField correction;              // far-field volume correction
  bool liquid = true;
};

/// Opening angle at the midpoint of T from the two into-sheet conormals.
double wedge_angle(const Wedge& w);

struct WedgeFirstVariation {
  double analytic = 0.0;    // divergence form along the path at 0+
  double curvature = 0.0;   // -H V.nu + g V.nu part
  double boundary = 0.0;    // -sum m * integral of the into-sheet conormal against the push
  double fd = 0.0;          // Richardson one-sided FD of the energy
  double fd_finest = 0.0;   // raw quotient at the finest step
  double fd_error = 0.0;
  std::vector<double> angles;
};

class WedgePath final : public DeformationPath {
 public:
  WedgePath(PieceConfig cfg, Potential g, std::vector<Wedge> wedges, int level, double t_max);

  PieceConfig config_at(double t) const override;
  DeformationKind kind() const override { return kind_; }
  std::string descriptor() const override;

  std::vector<double> s_at(double t) const;
  std::vector<double> volume_drift(double t) const;
  double volume_scale() const { return vol_scale_; }
  WedgeFirstVariation first_variation(const std::vector<double>& steps) const;
  const std::vector<Wedge>& wedges() const { return wedges_; }

 private:
  PieceConfig deformed(double t, const std::vector<double>& s) const;
  double wedge_volume(const PieceConfig& cfg, const Wedge& w) const;
  std::vector<double> solve(double t) const;

  Potential g_;
  std::vector<Wedge> wedges_;
  int level_;
  DeformationKind kind_;
  std::vector<double> vol0_;
  std::vector<double> dvol_ds_;
  std::vector<double> s_prime0_;
  double vol_scale_ = 1.0;
  mutable std::mutex mutex_;
  mutable std::map<double, std::vector<double>> cache_;
};

std::shared_ptr<WedgePath> wedge_breakup_path(const PieceConfig& cfg, const Potential& g, std::vector<Wedge> wedges,
                                              int level = kDefaultResolution, double t_max = 0.05);

}  // namespace capillary
