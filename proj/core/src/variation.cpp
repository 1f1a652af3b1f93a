#include "capillary/variation.hpp"

#include <cmath>
#include <sstream>

#include "capillary/error.hpp"

namespace capillary {

namespace {

/// Fields whose volume variation is below this fraction of their L1 size give unusable ratios.
constexpr double kRatioFloor = 1e-2;
/// Fields whose overlap with the surface is this small relative to its area are too poorly resolved to use.
constexpr double kGrazingFloor = 1e-6;

/// Sum over the selected pieces of the integral of f(jet, frame).
template <class Select, class F>
double sum_pieces(const PieceConfig& cfg, int level, bool second_order, Select&& select, F&& f) {
  std::vector<double> parts;
  for (std::size_t i = 0; i < cfg.pieces.size(); ++i) {
    const Piece& p = cfg.pieces[i];
    if (!select(p)) continue;
    parts.push_back(integrate_patch(p.patch, piece_grid(p, level), second_order,
                                    [&](const ChartJet& jet, const SurfaceFrame& fr, const Vec2&) {
                                      return f(i, p, jet, fr);
                                    }));
  }
  return pairwise_sum(parts);
}

double div_surface(const Mat3& DX, const Vec3& nu) { return DX.trace() - nu.dot(DX * nu); }

double mean_curvature(const ChartJet& jet, const SurfaceFrame& fr) {
  Mat2 II;
  II << jet.xuu.dot(fr.nu), jet.xuv.dot(fr.nu), jet.xuv.dot(fr.nu), jet.xvv.dot(fr.nu);
  return (fr.ginv * II).trace();
}

double curvature_norm2(const ChartJet& jet, const SurfaceFrame& fr) {
  Mat2 II;
  II << jet.xuu.dot(fr.nu), jet.xuv.dot(fr.nu), jet.xuv.dot(fr.nu), jet.xvv.dot(fr.nu);
  Mat2 S = fr.ginv * II;
  return (S * S).trace();
}

double grad_norm2(const ScalarJet& z, const SurfaceFrame& fr) {
  Vec2 d(z.du, z.dv);
  return d.dot(fr.ginv * d);
}

double grad_dot(const ScalarJet& a, const ScalarJet& b, const SurfaceFrame& fr) {
  return Vec2(a.du, a.dv).dot(fr.ginv * Vec2(b.du, b.dv));
}

/// Neumaier summation, for running totals too long to buffer.
struct CompensatedSum {
  double sum = 0.0, carry = 0.0;
  void add(double x) {
    double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

bool is_sheet(const Piece& p) { return p.role == PieceRole::sheet; }
bool any_piece(const Piece&) { return true; }

}  // namespace

std::pair<Vec3, Vec3> normal_derivatives(const ChartJet& jet, int orientation) {
  Vec3 n = jet.xu.cross(jet.xv);
  double len = n.norm();
  Vec3 nh = n / len;
  Vec3 nu_ = jet.xuu.cross(jet.xv) + jet.xu.cross(jet.xuv);
  Vec3 nv_ = jet.xuv.cross(jet.xv) + jet.xu.cross(jet.xvv);
  double s = orientation < 0 ? -1.0 : 1.0;
  return {s * (nu_ - nh * nh.dot(nu_)) / len, s * (nv_ - nh * nh.dot(nv_)) / len};
}

NormalPerturbation ambient_scalar(std::function<std::pair<double, Vec3>(const Vec3&)> f, std::string label) {
  NormalPerturbation z;
  z.label = std::move(label);
  z.zeta = [f](std::size_t, const ChartJet& jet, int) {
    auto [v, grad] = f(jet.x);
    return ScalarJet{v, grad.dot(jet.xu), grad.dot(jet.xv)};
  };
  return z;
}

NormalPerturbation normal_component(const AmbientField& W) {
  NormalPerturbation z;
  z.label = "normal(" + W.label() + ")";
  z.zeta = [W](std::size_t, const ChartJet& jet, int orientation) {
    FieldJet fj = W.jet(jet.x);
    if (fj.value.squaredNorm() == 0.0 && fj.jac.squaredNorm() == 0.0) return ScalarJet{};
    SurfaceFrame fr = surface_frame(jet, orientation);
    auto [nu_u, nu_v] = normal_derivatives(jet, orientation);
    return ScalarJet{fj.value.dot(fr.nu), (fj.jac * jet.xu).dot(fr.nu) + fj.value.dot(nu_u),
                     (fj.jac * jet.xv).dot(fr.nu) + fj.value.dot(nu_v)};
  };
  return z;
}

void require_support(const PieceConfig& cfg, const AmbientField& X) {
  if (!X.support().inside(cfg.window)) {
    throw SupportError("field '" + X.label() + "' is not supported inside the window " + cfg.window.describe());
  }
}

double first_variation_ambient(const PieceConfig& cfg, const Potential& g, const AmbientField& X, int level) {
  require_support(cfg, X);
  double area = sum_pieces(cfg, level, false, is_sheet, [&](std::size_t, const Piece&, const ChartJet& jet,
                                                             const SurfaceFrame& fr) {
    FieldJet fj = X.jet(jet.x);
    return div_surface(fj.jac, fr.nu);
  });
  double pot = 0.0;
  if (g.kind() != Potential::Kind::zero) {
    pot = sum_pieces(cfg, level, false, any_piece, [&](std::size_t, const Piece&, const ChartJet& jet,
                                                       const SurfaceFrame& fr) {
      return g.value(jet.x) * X.value(jet.x).dot(fr.nu);
    });
  }
  return area + pot;
}

double first_variation_curvature_form(const PieceConfig& cfg, const Potential& g, const AmbientField& X, int level) {
  require_support(cfg, X);
  double area = sum_pieces(cfg, level, true, is_sheet, [&](std::size_t, const Piece&, const ChartJet& jet,
                                                            const SurfaceFrame& fr) {
    return -mean_curvature(jet, fr) * X.value(jet.x).dot(fr.nu);
  });
  double pot = sum_pieces(cfg, level, false, any_piece, [&](std::size_t, const Piece&, const ChartJet& jet,
                                                            const SurfaceFrame& fr) {
    return g.value(jet.x) * X.value(jet.x).dot(fr.nu);
  });
  return area + pot;
}

std::map<int, double> first_variation_volume(const PieceConfig& cfg, const AmbientField& X, int level) {
  require_support(cfg, X);
  std::map<int, double> out;
  for (int c : cfg.components()) {
    out[c] = sum_pieces(cfg, level, false, [c](const Piece& p) { return p.component == c; },
                        [&](std::size_t, const Piece&, const ChartJet& jet, const SurfaceFrame& fr) {
                          return X.value(jet.x).dot(fr.nu);
                        });
  }
  return out;
}

double total(const std::map<int, double>& per_component) {
  std::vector<double> v;
  for (const auto& [k, x] : per_component) v.push_back(x);
  return pairwise_sum(v);
}

MultiplierEstimate lagrange_multiplier(const PieceConfig& cfg, const Potential& g,
                                       const std::vector<AmbientField>& fields, int level) {
  MultiplierEstimate est;
  for (const AmbientField& X : fields) require_support(cfg, X);
  const bool with_g = g.kind() != Potential::Kind::zero;
  est.rates.resize(fields.size());
  for (int c : cfg.components()) {
    // one pass over the nodes per piece serves every field
    std::vector<std::vector<double>> dE(fields.size()), dV(fields.size()), mag(fields.size());
    std::vector<double> areas;
    for (const Piece& p : cfg.pieces) {
      if (p.component != c) continue;
      const bool sheet = is_sheet(p);
      QuadratureGrid grid = piece_grid(p, level);
      CompensatedSum a;
      std::vector<CompensatedSum> e(fields.size()), v(fields.size()), m(fields.size());
      for (std::size_t n = 0; n < grid.nodes.size(); ++n) {
        ChartJet jet = p.patch.jet1(grid.nodes[n]);
        SurfaceFrame fr = surface_frame(jet, p.patch.orientation());
        double w = grid.weights[n] * fr.J;
        a.add(w);
        for (std::size_t k = 0; k < fields.size(); ++k) {
          FieldJet fj = fields[k].jet(jet.x);
          double flux = fj.value.dot(fr.nu);
          double rate = sheet ? div_surface(fj.jac, fr.nu) : 0.0;
          if (with_g) rate += g.value(jet.x) * flux;
          e[k].add(w * rate);
          v[k].add(w * flux);
          m[k].add(w * fj.value.norm());
        }
      }
      if (sheet) areas.push_back(a.value());
      for (std::size_t k = 0; k < fields.size(); ++k) {
        dE[k].push_back(e[k].value());
        dV[k].push_back(v[k].value());
        mag[k].push_back(m[k].value());
      }
    }
    est.area[c] = pairwise_sum(areas);
    for (std::size_t k = 0; k < fields.size(); ++k) {
      est.rates[k].energy[c] = pairwise_sum(dE[k]);
      est.rates[k].volume[c] = pairwise_sum(dV[k]);
      est.rates[k].magnitude[c] = pairwise_sum(mag[k]);
    }
  }
  bool any = false;
  for (int c : cfg.components()) {
    std::vector<double>& ratios = est.ratios[c];
    est.skipped[c] = 0;
    for (const FieldRates& r : est.rates) {
      double dV = r.volume.at(c), mag = r.magnitude.at(c);
      if (!(std::abs(dV) > kRatioFloor * mag) || !(mag > kGrazingFloor * est.area.at(c))) {
        ++est.skipped[c];
        continue;
      }
      ratios.push_back(r.energy.at(c) / dV);
    }
    if (ratios.empty()) continue;
    any = true;
    double mean = pairwise_sum(ratios) / static_cast<double>(ratios.size());
    double dev = 0.0;
    for (double a : ratios) {
      for (double b : ratios) dev = std::max(dev, std::abs(a - b));
    }
    est.lambda[c] = mean;
    est.residual[c] = dev;
  }
  if (!any) throw IllPosedError("every field has a vanishing volume variation; the multiplier is undetermined");
  for (int c : cfg.components()) {
    if (!est.lambda.count(c)) {
      throw IllPosedError("no field moves the volume of component " + std::to_string(c));
    }
  }
  return est;
}

std::map<int, double> second_order_volume(const PieceConfig& cfg, const AmbientField& X, const AmbientField& Z,
                                          int level) {
  require_support(cfg, X);
  require_support(cfg, Z);
  std::map<int, double> out;
  for (int c : cfg.components()) {
    out[c] = sum_pieces(cfg, level, false, [c](const Piece& p) { return p.component == c; },
                        [&](std::size_t, const Piece&, const ChartJet& jet, const SurfaceFrame& fr) {
                          FieldJet fj = X.jet(jet.x);
                          Vec3 bulk = fj.value * fj.jac.trace() - fj.jac * fj.value;
                          return (Z.value(jet.x) + bulk).dot(fr.nu);
                        });
  }
  return out;
}

SecondVariation second_variation_ambient(const PieceConfig& cfg, const Potential& g, const NormalPerturbation& zeta,
                                         const std::map<int, double>& lambda, int level,
                                         const std::optional<SecondOrderData>& second_order) {
  SecondVariation out;
  std::vector<double> defects;
  out.quadratic_form = sum_pieces(cfg, level, true, is_sheet, [&](std::size_t i, const Piece& p, const ChartJet& jet,
                                                                   const SurfaceFrame& fr) {
    ScalarJet z = zeta.zeta(i, jet, p.patch.orientation());
    if (z.value == 0.0 && z.du == 0.0 && z.dv == 0.0) return 0.0;
    double A2 = curvature_norm2(jet, fr);
    double dnu_g = g.gradient(jet.x).dot(fr.nu);
    auto it = lambda.find(p.component);
    if (it != lambda.end()) {
      defects.push_back(std::abs(mean_curvature(jet, fr) - g.value(jet.x) + it->second));
    }
    return (dnu_g - A2) * z.value * z.value + grad_norm2(z, fr);
  });
  for (double d : defects) out.stationarity_defect = std::max(out.stationarity_defect, d);
  double lam_scale = 1.0;
  for (const auto& [c, l] : lambda) lam_scale = std::max(lam_scale, std::abs(l));
  out.stationarity_warning = out.stationarity_defect > 1e-6 * lam_scale;
  if (second_order) {
    out.second_order_volume = second_order_volume(cfg, second_order->X, second_order->Z, level);
    std::vector<double> parts;
    for (const auto& [c, v] : out.second_order_volume) {
      auto it = lambda.find(c);
      if (it != lambda.end()) parts.push_back(it->second * v);
    }
    out.volume_correction = pairwise_sum(parts);
  }
  out.value = out.quadratic_form + out.volume_correction;
  return out;
}

SecondVariation second_variation_ambient(const PieceConfig& cfg, const Potential& g, const NormalPerturbation& zeta,
                                         double lambda, int level,
                                         const std::optional<SecondOrderData>& second_order) {
  std::map<int, double> lam;
  for (int c : cfg.components()) lam[c] = lambda;
  return second_variation_ambient(cfg, g, zeta, lam, level, second_order);
}

double jacobi_bilinear(const PieceConfig& cfg, const Potential& g, const NormalPerturbation& a,
                       const NormalPerturbation& b, int level) {
  return sum_pieces(cfg, level, true, is_sheet, [&](std::size_t i, const Piece& p, const ChartJet& jet,
                                                    const SurfaceFrame& fr) {
    ScalarJet za = a.zeta(i, jet, p.patch.orientation());
    ScalarJet zb = b.zeta(i, jet, p.patch.orientation());
    double A2 = curvature_norm2(jet, fr);
    double dnu_g = g.gradient(jet.x).dot(fr.nu);
    return (dnu_g - A2) * za.value * zb.value + grad_dot(za, zb, fr);
  });
}

JacobiGram jacobi_gram(const PieceConfig& cfg, const Potential& g, const std::vector<AmbientField>& fields,
                       int level) {
  for (const AmbientField& X : fields) require_support(cfg, X);
  const std::size_t n = fields.size();
  std::vector<CompensatedSum> jac(n * n), l2(n * n);
  std::vector<ScalarJet> z(n);
  std::vector<std::size_t> live;
  for (const Piece& p : cfg.pieces) {
    if (!is_sheet(p)) continue;
    QuadratureGrid grid = piece_grid(p, level);
    for (std::size_t q = 0; q < grid.nodes.size(); ++q) {
      ChartJet jet = p.patch.jet2(grid.nodes[q]);
      live.clear();
      for (std::size_t k = 0; k < n; ++k) {
        if (fields[k].support().contains(jet.x)) live.push_back(k);
      }
      if (live.empty()) continue;
      SurfaceFrame fr = surface_frame(jet, p.patch.orientation());
      auto [nu_u, nu_v] = normal_derivatives(jet, p.patch.orientation());
      const double w = grid.weights[q] * fr.J;
      const double potential = g.gradient(jet.x).dot(fr.nu) - curvature_norm2(jet, fr);
      for (std::size_t k : live) {
        FieldJet fj = fields[k].jet(jet.x);
        z[k] = ScalarJet{fj.value.dot(fr.nu), (fj.jac * jet.xu).dot(fr.nu) + fj.value.dot(nu_u),
                         (fj.jac * jet.xv).dot(fr.nu) + fj.value.dot(nu_v)};
      }
      for (std::size_t a : live) {
        for (std::size_t b : live) {
          if (b < a) continue;
          double zz = z[a].value * z[b].value;
          jac[a * n + b].add(w * (potential * zz + grad_dot(z[a], z[b], fr)));
          l2[a * n + b].add(w * zz);
        }
      }
    }
  }
  JacobiGram out{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      out.jacobi(a, b) = out.jacobi(b, a) = jac[a * n + b].value();
      out.l2(a, b) = out.l2(b, a) = l2[a * n + b].value();
    }
  }
  return out;
}

AmbientField flow_acceleration(const AmbientField& X) {
  return AmbientField(
      [X](const Vec3& x) {
        FieldJet fj = X.jet(x);
        return FieldJet{fj.jac * fj.value, Mat3::Zero()};
      },
      X.support(), "acceleration(" + X.label() + ")");
}

double second_variation_general(const PieceConfig& cfg, const Potential& g, const AmbientField& X, PathKind kind,
                                int level) {
  require_support(cfg, X);
  const bool flow = kind == PathKind::flow;
  double area = sum_pieces(cfg, level, true, is_sheet, [&](std::size_t, const Piece&, const ChartJet& jet,
                                                            const SurfaceFrame& fr) {
    FieldJet fj = X.jet(jet.x);
    const Mat3& D = fj.jac;
    if (D.squaredNorm() == 0.0 && fj.value.squaredNorm() == 0.0) return 0.0;
    const Vec3& nu = fr.nu;
    Mat3 P = Mat3::Identity() - nu * nu.transpose();
    double divs = D.trace() - nu.dot(D * nu);
    Vec3 perp = P * (D.transpose() * nu);
    double trB2 = (P * D * P * D).trace();
    double acc = 0.0;
    if (flow) acc = -mean_curvature(jet, fr) * (D * fj.value).dot(nu);
    return divs * divs + perp.squaredNorm() - trB2 + acc;
  });
  double pot = 0.0;
  if (g.kind() != Potential::Kind::zero) {
    pot = sum_pieces(cfg, level, false, any_piece, [&](std::size_t, const Piece&, const ChartJet& jet,
                                                       const SurfaceFrame& fr) {
      FieldJet fj = X.jet(jet.x);
      double gv = g.value(jet.x);
      Vec3 Xv = fj.value;
      Vec3 w = gv * (Xv * fj.jac.trace() - fj.jac * Xv) + g.gradient(jet.x).dot(Xv) * Xv;
      if (flow) w += gv * (fj.jac * Xv);
      return w.dot(fr.nu);
    });
  }
  return area + pot;
}

}  // namespace capillary
