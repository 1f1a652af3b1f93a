#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "capillary/energy.hpp"
#include "capillary/fields.hpp"

namespace capillary {

struct ScalarJet {
  double value = 0.0;
  double du = 0.0;
  double dv = 0.0;
};

/// Scalar normal speed zeta on the sheets, evaluated from the full chart jet of a node.
struct NormalPerturbation {
  std::function<ScalarJet(std::size_t piece, const ChartJet& jet, int orientation)> zeta;
  std::string label;
};

/// zeta = f restricted to the surface.
NormalPerturbation ambient_scalar(std::function<std::pair<double, Vec3>(const Vec3&)> f, std::string label);
/// zeta = W . nu.
NormalPerturbation normal_component(const AmbientField& W);

/// Parameter derivatives of the oriented unit normal.
std::pair<Vec3, Vec3> normal_derivatives(const ChartJet& jet, int orientation);

/// Integral of div_S X over the sheets plus g X.nu over all pieces.
double first_variation_ambient(const PieceConfig& cfg, const Potential& g, const AmbientField& X,
                               int level = kDefaultResolution);
/// Same quantity with -H X.nu in place of div_S X (differs by boundary terms on open sheets).
double first_variation_curvature_form(const PieceConfig& cfg, const Potential& g, const AmbientField& X,
                                      int level = kDefaultResolution);
/// Integral of X.nu, per component.
std::map<int, double> first_variation_volume(const PieceConfig& cfg, const AmbientField& X,
                                             int level = kDefaultResolution);
double total(const std::map<int, double>& per_component);

/// Per-component integrals of one test field: energy rate, volume rate and the L1 size of X.
struct FieldRates {
  std::map<int, double> energy;
  std::map<int, double> volume;
  std::map<int, double> magnitude;
};

struct MultiplierEstimate {
  std::map<int, double> lambda;
  std::map<int, double> residual;
  std::map<int, std::vector<double>> ratios;
  std::map<int, int> skipped;
  std::vector<FieldRates> rates;  // one entry per field, in input order
  std::map<int, double> area;
};

MultiplierEstimate lagrange_multiplier(const PieceConfig& cfg, const Potential& g,
                                       const std::vector<AmbientField>& fields, int level = kDefaultResolution);

/// First-order speed X and second-order term Z of a deformation x + tX + t^2/2 Z + o(t^2).
struct SecondOrderData {
  AmbientField X;
  AmbientField Z;
};

struct SecondVariation {
  double value = 0.0;
  double quadratic_form = 0.0;
  double volume_correction = 0.0;
  std::map<int, double> second_order_volume;
  double stationarity_defect = 0.0;  // max |H - g + lambda| where zeta is nonzero
  bool stationarity_warning = false;
};

SecondVariation second_variation_ambient(const PieceConfig& cfg, const Potential& g, const NormalPerturbation& zeta,
                                         const std::map<int, double>& lambda, int level = kDefaultResolution,
                                         const std::optional<SecondOrderData>& second_order = std::nullopt);
SecondVariation second_variation_ambient(const PieceConfig& cfg, const Potential& g, const NormalPerturbation& zeta,
                                         double lambda, int level = kDefaultResolution,
                                         const std::optional<SecondOrderData>& second_order = std::nullopt);

/// Jacobi form and L2 product of the normal components W_i . nu, for every pair of fields, over the sheets.
struct JacobiGram {
  Eigen::MatrixXd jacobi;
  Eigen::MatrixXd l2;
};

JacobiGram jacobi_gram(const PieceConfig& cfg, const Potential& g, const std::vector<AmbientField>& fields,
                       int level = kDefaultResolution);

/// Polarised bilinear form of the quadratic part, assembled directly.
double jacobi_bilinear(const PieceConfig& cfg, const Potential& g, const NormalPerturbation& a,
                       const NormalPerturbation& b, int level = kDefaultResolution);

/// V''(0) per component: integral of Z.nu plus the bulk terms (div X)^2 - tr(DX^2), which are reduced
/// to the boundary integral of (X div X - DX X).nu.
std::map<int, double> second_order_volume(const PieceConfig& cfg, const AmbientField& X, const AmbientField& Z,
                                          int level = kDefaultResolution);

enum class PathKind { linear, flow };

/// Second derivative of the energy along x + tX (linear) or along the flow of X, in closed form.
double second_variation_general(const PieceConfig& cfg, const Potential& g, const AmbientField& X, PathKind kind,
                                int level = kDefaultResolution);

/// The field DX X, the acceleration of flow lines of X.
AmbientField flow_acceleration(const AmbientField& X);

void require_support(const PieceConfig& cfg, const AmbientField& X);

}  // namespace capillary
