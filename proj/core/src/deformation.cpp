#include "capillary/deformation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "capillary/error.hpp"

namespace capillary {

std::string to_string(DeformationKind k) {
  switch (k) {
    case DeformationKind::ambient:
      return "ambient";
    case DeformationKind::coalescence:
      return "coalescence";
    case DeformationKind::break_up:
      return "break-up";
  }
  return "unknown";
}

void DeformationPath::check_t(double t) const {
  bool two_sided = kind() == DeformationKind::ambient;
  bool ok = two_sided ? std::abs(t) <= t_max_ : (t >= 0.0 && t <= t_max_);
  if (!ok) {
    std::ostringstream os;
    os << "t = " << t << " is outside the path range " << (two_sided ? "[-t0, t0]" : "[0, t0]") << " with t0 = "
       << t_max_;
    throw DomainError(os.str());
  }
}

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

bool is_sheet(const Piece& p) { return p.role == PieceRole::sheet; }

std::vector<double> clip_breaks(std::vector<double> b, double lo, double hi) {
  std::sort(b.begin(), b.end());
  std::vector<double> out;
  for (double x : b) {
    if (x > lo + 1e-12 * (hi - lo) && x < hi - 1e-12 * (hi - lo) &&
        (out.empty() || x - out.back() > 1e-12 * (hi - lo))) {
      out.push_back(x);
    }
  }
  return out;
}

double sum_over(const PieceConfig& cfg, int level, bool second_order, const std::function<bool(const Piece&)>& select,
                const std::function<double(const Piece&, const ChartJet&, const SurfaceFrame&, const Vec2&)>& f) {
  std::vector<double> parts;
  for (const Piece& p : cfg.pieces) {
    if (!select(p)) continue;
    parts.push_back(integrate_patch(p.patch, piece_grid(p, level), second_order,
                                    [&](const ChartJet& jet, const SurfaceFrame& fr, const Vec2& q) {
                                      return f(p, jet, fr, q);
                                    }));
  }
  return pairwise_sum(parts);
}

/// eta(w) = 1 for |w| <= 1/2, 0 for |w| >= 1.
double plateau(double w, double* dw) {
  double a = std::abs(w);
  double ds = 0.0;
  double s = smooth_step(2.0 * a - 1.0, &ds);
  if (dw) *dw = -2.0 * ds * (w < 0.0 ? -1.0 : 1.0);
  return 1.0 - s;
}

double newton_scalar(const std::function<double(double)>& f, double slope, double guess, double target, double tol,
                     const std::string& what) {
  double s = guess;
  double r = f(s);
  double J = slope;
  for (int it = 0; it < 40 && std::abs(r) > target; ++it) {
    double step = -r / J;
    double s_new = s + step;
    double r_new = f(s_new);
    int halvings = 0;
    while (std::abs(r_new) > std::abs(r) && halvings < 12) {
      step *= 0.5;
      s_new = s + step;
      r_new = f(s_new);
      ++halvings;
    }
    if (s_new != s && r_new != r) J = (r_new - r) / (s_new - s);
    bool stalled = std::abs(s_new - s) <= 1e-16 * (1.0 + std::abs(s));
    s = s_new;
    r = r_new;
    if (stalled) break;
  }
  if (!(std::abs(r) <= tol)) {
    throw SolverError(what + ": volume constraint not met (residual " + fmt(r) + ", tolerance " + fmt(tol) + ")");
  }
  return s;
}

}  // namespace

double RadialBump::value(double r, double* dr) const {
  double s = (r - center) / half_width;
  if (dr) *dr = 0.0;
  if (std::abs(s) >= 1.0) return 0.0;
  double w = 1.0 - s * s;
  double b = std::exp(1.0 - 1.0 / w);
  if (dr) *dr = b * (-2.0 * s / (w * w)) / half_width;
  return b;
}

AmbientField graph_normal_field(HeightFunction u, int sign, RadialBump bump, double scale, double delta,
                                std::string label) {
  // support: the annulus of the bump, thick enough to hold the graph plus the delta band
  double zmax = 0.0;
  for (int i = 0; i <= 64; ++i) {
    double r = bump.center - bump.half_width + 2.0 * bump.half_width * i / 64.0;
    for (int k = 0; k < 32; ++k) {
      double th = 2.0 * kPi * k / 32.0;
      zmax = std::max(zmax, std::abs(u(Vec2(r * std::cos(th), r * std::sin(th))).value));
    }
  }
  Region support = Region::annulus(Vec3::Zero(), Vec3::UnitZ(), bump.center - bump.half_width,
                                   bump.center + bump.half_width, zmax + 1.05 * delta);
  return AmbientField(
      [u, sign, bump, scale, delta](const Vec3& x) {
        FieldJet fj;
        double r = std::hypot(x.x(), x.y());
        double db = 0.0;
        double b = bump.value(r, &db);
        if (b == 0.0 && db == 0.0) return fj;
        HeightJet hj = u(Vec2(x.x(), x.y()));
        double w = (x.z() - hj.value) / delta;
        double deta = 0.0;
        double eta = plateau(w, &deta);
        if (eta == 0.0 && deta == 0.0) return fj;
        Vec3 n(-hj.grad.x(), -hj.grad.y(), 1.0);
        double nn = n.norm();
        Vec3 N = n / nn;
        Mat3 Dn = Mat3::Zero();
        Dn.topLeftCorner<2, 2>() = -hj.hess;
        Mat3 DN = (Mat3::Identity() - N * N.transpose()) * Dn / nn;
        Vec3 er = r > 0.0 ? Vec3(x.x() / r, x.y() / r, 0.0) : Vec3::Zero();
        Vec3 dw = (Vec3::UnitZ() - Vec3(hj.grad.x(), hj.grad.y(), 0.0)) / delta;
        double f = scale * sign * b * eta;
        Vec3 grad_f = scale * sign * (db * eta * er + b * deta * dw);
        fj.value = f * N;
        fj.jac = N * grad_f.transpose() + f * DN;
        return fj;
      },
      Support{{support}}, std::move(label));
}

// ----- volume-preserving ambient paths -----

VolumePreservingPath::VolumePreservingPath(PieceConfig cfg, AmbientField X, std::map<int, AmbientField> Y, int level,
                                           double t_max)
    : DeformationPath(std::move(cfg), t_max), X_(std::move(X)), Y_(std::move(Y)), level_(level) {
  require_support(base_, X_);
  for (const auto& [c, y] : Y_) {
    require_support(base_, y);
    comps_.push_back(c);
  }
  if (comps_.empty()) throw DomainError("a volume-preserving path needs at least one constrained component");
  vol0_ = component_volumes(base_, level_);
  vol_scale_ = 0.0;
  for (int c : comps_) {
    if (!vol0_.count(c)) throw DomainError("constrained component " + std::to_string(c) + " has no pieces");
    vol_scale_ = std::max(vol_scale_, std::abs(vol0_.at(c)));
  }
  auto n = static_cast<Eigen::Index>(comps_.size());
  jac0_.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    std::map<int, double> dv = first_variation_volume(base_, Y_.at(comps_[k]), level_);
    for (Eigen::Index c = 0; c < n; ++c) jac0_(c, k) = dv.count(comps_[c]) ? dv.at(comps_[c]) : 0.0;
  }
  for (Eigen::Index c = 0; c < n; ++c) {
    if (!(std::abs(jac0_(c, c)) > 1e-8 * vol_scale_)) {
      throw IllPosedError("correction field for component " + std::to_string(comps_[c]) +
                          " does not change its volume");
    }
  }
  if (std::abs(jac0_.determinant()) <= 1e-12 * std::pow(jac0_.cwiseAbs().maxCoeff(), static_cast<double>(n))) {
    throw IllPosedError("correction fields are linearly dependent on the constrained volumes");
  }
  cache_[0.0] = {};
  for (int c : comps_) cache_[0.0][c] = 0.0;
}

PieceConfig VolumePreservingPath::displaced(double t, const std::map<int, double>& s) const {
  PieceConfig out = base_;
  std::vector<std::pair<double, AmbientField>> terms{{t, X_}};
  for (const auto& [c, y] : Y_) terms.emplace_back(s.at(c), y);
  for (Piece& p : out.pieces) {
    auto chart = std::make_shared<DisplacedChart>(p.patch.chart_ptr(), terms, p.patch.fd_step());
    p.patch = p.patch.with_chart(chart);
  }
  return out;
}

std::map<int, double> VolumePreservingPath::solve(double t) const {
  auto n = static_cast<Eigen::Index>(comps_.size());
  std::map<int, double> s;
  std::map<int, double> sp = s_prime_formula();
  for (int c : comps_) s[c] = sp.at(c) * t;
  auto residual = [&](const std::map<int, double>& sv) {
    std::map<int, double> v = component_volumes(displaced(t, sv), level_);
    Eigen::VectorXd r(n);
    for (Eigen::Index c = 0; c < n; ++c) r(c) = v.at(comps_[c]) - vol0_.at(comps_[c]);
    return r;
  };
  auto to_vec = [&](const std::map<int, double>& m) {
    Eigen::VectorXd v(n);
    for (Eigen::Index c = 0; c < n; ++c) v(c) = m.at(comps_[c]);
    return v;
  };
  auto to_map = [&](const Eigen::VectorXd& v) {
    std::map<int, double> m;
    for (Eigen::Index c = 0; c < n; ++c) m[comps_[c]] = v(c);
    return m;
  };
  Eigen::MatrixXd J = jac0_;
  Eigen::VectorXd x = to_vec(s);
  Eigen::VectorXd r = residual(s);
  const double target = 1e-13 * vol_scale_;
  for (int it = 0; it < 40 && r.lpNorm<Eigen::Infinity>() > target; ++it) {
    Eigen::VectorXd step = -J.fullPivLu().solve(r);
    Eigen::VectorXd x_new = x + step;
    Eigen::VectorXd r_new = residual(to_map(x_new));
    int halvings = 0;
    while (r_new.norm() > r.norm() && halvings < 12) {
      step *= 0.5;
      x_new = x + step;
      r_new = residual(to_map(x_new));
      ++halvings;
    }
    Eigen::VectorXd dx = x_new - x;
    if (dx.squaredNorm() > 0.0) J += ((r_new - r) - J * dx) * dx.transpose() / dx.squaredNorm();
    bool stalled = dx.lpNorm<Eigen::Infinity>() <= 1e-16 * (1.0 + x.lpNorm<Eigen::Infinity>());
    x = x_new;
    r = r_new;
    if (stalled) break;
  }
  if (!(r.lpNorm<Eigen::Infinity>() <= volume_tolerance())) {
    throw SolverError("volume-preserving correction failed at t = " + fmt(t) + " (residual " +
                      fmt(r.lpNorm<Eigen::Infinity>()) + ")");
  }
  return to_map(x);
}

std::map<int, double> VolumePreservingPath::s_at(double t) const {
  check_t(t);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(t);
    if (it != cache_.end()) return it->second;
  }
  std::map<int, double> s = solve(t);
  std::lock_guard<std::mutex> lock(mutex_);
  cache_[t] = s;
  return s;
}

std::map<int, double> VolumePreservingPath::s_prime_formula() const {
  std::map<int, double> dx = first_variation_volume(base_, X_, level_);
  auto n = static_cast<Eigen::Index>(comps_.size());
  Eigen::VectorXd b(n);
  for (Eigen::Index c = 0; c < n; ++c) b(c) = dx.count(comps_[c]) ? dx.at(comps_[c]) : 0.0;
  Eigen::VectorXd sp = -jac0_.fullPivLu().solve(b);
  std::map<int, double> out;
  for (Eigen::Index c = 0; c < n; ++c) out[comps_[c]] = sp(c);
  return out;
}

PieceConfig VolumePreservingPath::config_at(double t) const {
  check_t(t);
  if (t == 0.0) return base_;
  return displaced(t, s_at(t));
}

std::map<int, double> VolumePreservingPath::volume_drift(double t) const {
  std::map<int, double> v = component_volumes(config_at(t), level_);
  std::map<int, double> out;
  for (int c : comps_) out[c] = std::abs(v.at(c) - vol0_.at(c));
  return out;
}

std::string VolumePreservingPath::descriptor() const {
  std::ostringstream os;
  os << "x + t X + sum_c s_c(t) Y_c (linear family, not a flow composition); X = " << X_.label();
  for (const auto& [c, y] : Y_) os << "; Y_" << c << " = " << y.label();
  return os.str();
}

std::shared_ptr<VolumePreservingPath> make_volume_preserving(const PieceConfig& cfg, const AmbientField& X,
                                                             const std::map<int, AmbientField>& Y, int level,
                                                             double t_max) {
  return std::make_shared<VolumePreservingPath>(cfg, X, Y, level, t_max);
}

// ----- cusp pairs -----

CuspPairConfig CuspPairConfig::paraboloids(double alpha, double R, SideConvention side) {
  if (!(alpha > 0.0) || !(R > 0.0)) throw DomainError("paraboloid pair needs alpha > 0 and R > 0");
  CuspPairConfig c;
  c.lower = paraboloid_height(-alpha);
  c.upper = paraboloid_height(alpha);
  c.R = R;
  c.half_height = 9.0 * alpha * R * R + R;
  c.side = side;
  c.label = "paraboloid pair alpha=" + fmt(alpha);
  return c;
}

CuspPairConfig CuspPairConfig::spherical_caps(double cap_radius, double R) {
  if (!(R > 0.0)) throw DomainError("window radius R must be positive");
  double a = cap_radius;
  if (!(a > 5.0 * R)) {
    throw DomainError("spherical caps of radius " + fmt(a) + " leave the window B_3R x (-R, R); need radius > 5R");
  }
  CuspPairConfig c;
  c.lower = sphere_cap_height(a, -1);
  c.upper = sphere_cap_height(a, 1);
  c.R = R;
  c.half_height = R;
  c.side = SideConvention::liquid_outside;
  c.lambda = 2.0 / a;
  c.label = "spherical caps a=" + fmt(a);
  return c;
}

Window CuspPairConfig::window() const { return Window::cylinder(Vec3::Zero(), Vec3::UnitZ(), 3.0 * R, half_height); }

void CuspPairConfig::validate() const {
  if (!(R > 0.0) || !(half_height > 0.0)) throw DomainError("cusp pair needs positive R and half height");
  if (!lower || !upper) throw DomainError("cusp pair needs both graphs");
  HeightJet l0 = lower(Vec2::Zero()), u0 = upper(Vec2::Zero());
  if (std::abs(l0.value) > 1e-14 || std::abs(u0.value) > 1e-14 || l0.grad.norm() > 1e-14 ||
      u0.grad.norm() > 1e-14) {
    throw DomainError("cusp graphs must vanish to first order at the origin");
  }
  for (int i = 1; i <= 48; ++i) {
    double r = 3.0 * R * i / 48.0;
    for (int k = 0; k < 24; ++k) {
      double th = 2.0 * kPi * k / 24.0;
      Vec2 p(r * std::cos(th), r * std::sin(th));
      double lv = lower(p).value, uv = upper(p).value;
      if (lv > uv) throw DomainError("cusp graphs cross: u > v at r = " + fmt(r));
      if (std::abs(lv) >= half_height || std::abs(uv) >= half_height) {
        throw DomainError("cusp graphs leave the window height at r = " + fmt(r));
      }
    }
  }
}

PieceConfig cusp_base_config(const CuspPairConfig& cusp, const std::vector<double>& inner_breaks,
                             const std::vector<double>& outer_breaks) {
  cusp.validate();
  const double R = cusp.R, h = cusp.half_height;
  const bool outside = cusp.side == SideConvention::liquid_outside;
  const int sM = outside ? 1 : -1;
  const int cM = 1, cN = outside ? 2 : 1;
  std::vector<double> ib = clip_breaks(inner_breaks, 0.0, R);
  std::vector<double> ob = clip_breaks(outer_breaks, R, 3.0 * R);
  PieceConfig cfg;
  cfg.pieces.push_back(Piece{"M_inner", make_graph_disk(cusp.lower, 0.0, R, sM, ib), cM, PieceRole::sheet});
  cfg.pieces.push_back(Piece{"N_inner", make_graph_disk(cusp.upper, 0.0, R, -sM, ib), cN, PieceRole::sheet});
  cfg.pieces.push_back(Piece{"M_outer", make_graph_disk(cusp.lower, R, 3.0 * R, sM, ob), cM, PieceRole::sheet});
  cfg.pieces.push_back(Piece{"N_outer", make_graph_disk(cusp.upper, R, 3.0 * R, -sM, ob), cN, PieceRole::sheet});
  if (outside) {
    cfg.pieces.push_back(
        Piece{"bottom_inner", make_graph_disk(constant_height(-h), 0.0, R, -1, ib), cM, PieceRole::cap});
    cfg.pieces.push_back(
        Piece{"bottom_outer", make_graph_disk(constant_height(-h), R, 3.0 * R, -1, ob), cM, PieceRole::cap});
    cfg.pieces.push_back(Piece{"top_inner", make_graph_disk(constant_height(h), 0.0, R, 1, ib), cN, PieceRole::cap});
    cfg.pieces.push_back(
        Piece{"top_outer", make_graph_disk(constant_height(h), R, 3.0 * R, 1, ob), cN, PieceRole::cap});
  }
  cfg.window = cusp.window();
  cfg.volume_method = VolumeMethod::vertical;
  cfg.side_convention = outside ? "liquid below graph(u) and above graph(v); normals point out of the liquid"
                                : "liquid between graph(u) and graph(v); normals point out of the liquid";
  return cfg;
}

// ----- coalescence path -----

CoalescencePath::CoalescencePath(CuspPairConfig cusp, CutoffChi chi, Potential g, int level, CorrectionLayout layout)
    : DeformationPath(PieceConfig{}, chi.R0()),
      cusp_(std::move(cusp)),
      chi_(chi),
      flow_(chi),
      g_(std::move(g)),
      level_(level),
      layout_(layout) {
  cusp_.validate();
  const double R = cusp_.R, R0 = chi_.R0();
  if (R0 > R / 6.0 * (1.0 + 1e-12)) throw DomainError("cutoff radius R0 must not exceed R/6");
  if (!g_.has_primitive()) throw UnsupportedError("potential '" + g_.describe() + "' has no primitive");
  for (const RadialBump* b : {&layout_.zeta, &layout_.y}) {
    if (!(b->center - b->half_width > R) || !(b->center + b->half_width < 3.0 * R)) {
      throw SupportError("correction support must lie in the annulus R < r < 3R, away from U1");
    }
  }
  std::vector<double> ob{layout_.zeta.center - layout_.zeta.half_width, layout_.zeta.center,
                         layout_.zeta.center + layout_.zeta.half_width, layout_.y.center - layout_.y.half_width,
                         layout_.y.center + layout_.y.half_width};
  base_ = cusp_base_config(cusp_, {R0, 2.0 * R0}, ob);

  // band thickness: keep the correction away from graph(v) and inside the window height
  double umax = 0.0, gap = INFINITY;
  double lo = std::min(layout_.zeta.center - layout_.zeta.half_width, layout_.y.center - layout_.y.half_width);
  double hi = std::max(layout_.zeta.center + layout_.zeta.half_width, layout_.y.center + layout_.y.half_width);
  for (int i = 0; i <= 64; ++i) {
    double r = lo + (hi - lo) * i / 64.0;
    for (int k = 0; k < 32; ++k) {
      double th = 2.0 * kPi * k / 32.0;
      Vec2 p(r * std::cos(th), r * std::sin(th));
      double lv = cusp_.lower(p).value, uv = cusp_.upper(p).value;
      umax = std::max(umax, std::abs(lv));
      gap = std::min(gap, uv - lv);
    }
  }
  double delta = std::min({0.2 * R, 0.25 * gap, 0.45 * (cusp_.half_height - umax)});
  if (!(delta > 0.0)) throw SupportError("no room for the correction band between the graphs");
  const int sM = cusp_.side == SideConvention::liquid_outside ? 1 : -1;
  Y_ = graph_normal_field(cusp_.lower, sM, layout_.y, 1.0, delta, "Y");
  AmbientField zeta0 = graph_normal_field(cusp_.lower, sM, layout_.zeta, 1.0, delta, "zeta0 nu");
  for (const AmbientField* f : {&Y_, &zeta0}) {
    if (!f->support().inside(base_.window)) throw SupportError("correction field leaves the window");
  }

  const Piece& m_outer = base_.pieces[2];
  double int_zeta0 = piece_integral(m_outer, level_, [&](const Vec3& x, const Vec3& nu) {
    return zeta0.value(x).dot(nu);
  });
  dvol_ds_ = piece_integral(m_outer, level_, [&](const Vec3& x, const Vec3& nu) { return Y_.value(x).dot(nu); });
  if (!(std::abs(dvol_ds_) > 0.0) || !(std::abs(int_zeta0) > 0.0)) {
    throw IllPosedError("correction bumps do not move the volume");
  }
  double v1 = volume_rate(0.0);
  zeta_scale_ = -v1 / int_zeta0;
  W_ = graph_normal_field(cusp_.lower, sM, layout_.zeta, zeta_scale_, delta, "W = zeta nu");

  if (cusp_.lambda) {
    lambda_ = *cusp_.lambda;
  } else {
    OuterRates r = outer_rates(0.0, 0.0, Y_);
    lambda_ = (r.area + r.potential) / r.volume;
  }
  vol0_ = enclosed_volume(base_.pieces, VolumeMethod::vertical, level_);
  vol_scale_ = std::abs(vol0_);
  cache_[0.0] = 0.0;
}

DeformationKind CoalescencePath::kind() const {
  return cusp_.side == SideConvention::liquid_outside ? DeformationKind::coalescence : DeformationKind::break_up;
}

std::string CoalescencePath::descriptor() const {
  std::ostringstream os;
  os.precision(12);
  os << "radial flow of chi(r) d_r on U1 (R0 = " << chi_.R0() << ", R = " << cusp_.R << ") on " << cusp_.label
     << "; U2 correction x + t W + s(t) Y with W = " << zeta_scale_ << " * zeta0 nu";
  return os.str();
}

std::vector<double> CoalescencePath::rho_stencil() const {
  double R0 = chi_.R0();
  return {R0 / 8.0, R0 / 16.0, R0 / 32.0};
}

std::vector<double> CoalescencePath::inner_breaks(double t) const {
  double R0 = chi_.R0();
  return clip_breaks({R0 - t, R0, 2.0 * R0}, 0.0, cusp_.R);
}

Piece CoalescencePath::inner_sheet(const Piece& base, double t, double rho) const {
  if (t == 0.0 && rho == 0.0) return base;
  Piece p = base;
  ParamDomain dom = base.patch.domain();
  dom.u.lo = rho;
  dom.u.breaks = clip_breaks(inner_breaks(t), rho, dom.u.hi);
  dom.exclusion_radius = rho;
  if (t == 0.0) {
    p.patch = base.patch.with_domain(dom);
    return p;
  }
  const HeightFunction& h = starts_with(base.name, "M_") ? cusp_.lower : cusp_.upper;
  auto chart = std::make_shared<RadialFlowChart>(h, flow_, t);
  p.patch = SurfacePatch(PatchKind::deformed, dom, chart, base.patch.orientation());
  return p;
}

PieceConfig CoalescencePath::inner_config(double t, double rho) const {
  check_t(t);
  if (rho > 0.0 && t != 0.0) throw DomainError("exclusion radii are only used at t = 0");
  PieceConfig cfg = base_;
  cfg.pieces.clear();
  for (const Piece& p : base_.pieces) {
    if (p.name.find("inner") == std::string::npos) continue;
    Piece q = p.role == PieceRole::sheet ? inner_sheet(p, t, rho) : p;
    if (rho > 0.0 && q.role == PieceRole::cap) {
      ParamDomain dom = q.patch.domain();
      dom.u.lo = rho;
      dom.u.breaks = clip_breaks(dom.u.breaks, rho, dom.u.hi);
      q.patch = q.patch.with_domain(dom);
    }
    if (t > 0.0) q.component = 1;
    cfg.pieces.push_back(q);
  }
  return cfg;
}

PieceConfig CoalescencePath::outer_config(double t, double s) const {
  PieceConfig cfg = base_;
  cfg.pieces.clear();
  for (const Piece& p : base_.pieces) {
    if (p.name.find("outer") == std::string::npos) continue;
    Piece q = p;
    if ((t != 0.0 || s != 0.0) && p.name == "M_outer") {
      std::vector<std::pair<double, AmbientField>> terms{{t, W_}, {s, Y_}};
      q.patch = p.patch.with_chart(std::make_shared<DisplacedChart>(p.patch.chart_ptr(), terms, p.patch.fd_step()));
    }
    if (t > 0.0) q.component = 1;
    cfg.pieces.push_back(q);
  }
  return cfg;
}

PieceConfig CoalescencePath::config_at(double t) const {
  check_t(t);
  if (t == 0.0) return base_;
  PieceConfig cfg = inner_config(t);
  PieceConfig out = outer_config(t, s_at(t));
  for (const Piece& p : out.pieces) cfg.pieces.push_back(p);
  return cfg;
}

double CoalescencePath::inner_energy(double t) const { return free_energy(inner_config(t), g_, level_, false).total; }

double CoalescencePath::outer_energy(double t) const {
  return free_energy(outer_config(t, s_at(t)), g_, level_, false).total;
}

double CoalescencePath::inner_volume(double t) const {
  return enclosed_volume(inner_config(t).pieces, VolumeMethod::vertical, level_);
}

double CoalescencePath::uncorrected_volume(double t) const {
  return inner_volume(t) + enclosed_volume(outer_config(0.0, 0.0).pieces, VolumeMethod::vertical, level_);
}

double CoalescencePath::volume(double t) const {
  return enclosed_volume(config_at(t).pieces, VolumeMethod::vertical, level_);
}

CoalescencePath::OuterRates CoalescencePath::outer_rates(double t, double s, const AmbientField& D) const {
  PieceConfig cur = outer_config(t, s);
  OuterRates out;
  std::vector<double> area, pot, vol;
  for (std::size_t i = 0; i < cur.pieces.size(); ++i) {
    const Piece& p = cur.pieces[i];
    const Piece& p0 = std::find_if(base_.pieces.begin(), base_.pieces.end(),
                                   [&](const Piece& b) { return b.name == p.name; })[0];
    QuadratureGrid grid = piece_grid(p, level_);
    const int o = p.patch.orientation();
    if (is_sheet(p)) {
      area.push_back(integrate_patch(p.patch, grid, false, [&](const ChartJet&, const SurfaceFrame& fr, const Vec2& q) {
        ChartJet j0 = p0.patch.jet1(q);
        FieldJet dj = D.jet(j0.x);
        Vec3 ndot = (dj.jac * j0.xu).cross(fr.xv) + fr.xu.cross(dj.jac * j0.xv);
        return o * fr.nu.dot(ndot) / fr.J;
      }));
    }
    vol.push_back(integrate_patch(p.patch, grid, false, [&](const ChartJet&, const SurfaceFrame& fr, const Vec2& q) {
      return D.value(p0.patch.jet1(q).x).dot(fr.nu);
    }));
    if (g_.kind() != Potential::Kind::zero) {
      pot.push_back(integrate_patch(p.patch, grid, false, [&](const ChartJet& jet, const SurfaceFrame& fr,
                                                              const Vec2& q) {
        return g_.value(jet.x) * D.value(p0.patch.jet1(q).x).dot(fr.nu);
      }));
    }
  }
  out.area = pairwise_sum(area);
  out.potential = pairwise_sum(pot);
  out.volume = pairwise_sum(vol);
  return out;
}

double CoalescencePath::s_at(double t) const {
  check_t(t);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(t);
    if (it != cache_.end()) return it->second;
  }
  double inner = inner_volume(t);
  auto f = [&](double s) {
    return inner + enclosed_volume(outer_config(t, s).pieces, VolumeMethod::vertical, level_) - vol0_;
  };
  double s = newton_scalar(f, dvol_ds_, 0.0, 1e-14 * vol_scale_, 1e-10 * vol_scale_,
                           "coalescence correction at t = " + fmt(t));
  std::lock_guard<std::mutex> lock(mutex_);
  cache_[t] = s;
  return s;
}

double CoalescencePath::inner_flux(double t, double rho) const {
  PieceConfig cfg = inner_config(t, rho);
  return sum_over(cfg, level_, false, is_sheet, [&](const Piece&, const ChartJet&, const SurfaceFrame& fr,
                                                    const Vec2&) {
    double r = std::hypot(fr.x.x(), fr.x.y());
    if (r == 0.0) return 0.0;
    return chi_.value(r) * (fr.x.x() * fr.nu.x() + fr.x.y() * fr.nu.y()) / r;
  });
}

double CoalescencePath::volume_rate(double t) const {
  check_t(t);
  if (t > 0.0) return inner_flux(t, 0.0);
  std::vector<double> rho = rho_stencil(), vals;
  for (double r : rho) vals.push_back(inner_flux(0.0, r));
  const std::vector<double> powers{3.0, 4.0};
  return extrapolate_powers(rho, vals, powers).value;
}

double CoalescencePath::volume_second_derivative() const {
  AmbientField X = radial_field(chi_);
  std::vector<double> rho = rho_stencil(), vals;
  for (double r : rho) {
    vals.push_back(sum_over(inner_config(0.0, r), level_, false, is_sheet,
                            [&](const Piece&, const ChartJet&, const SurfaceFrame& fr, const Vec2&) {
                              FieldJet fj = X.jet(fr.x);
                              return fj.jac.trace() * fj.value.dot(fr.nu);
                            }));
  }
  const std::vector<double> powers{2.0, 3.0};
  return extrapolate_powers(rho, vals, powers).value;
}

double CoalescencePath::s_prime(double t) const {
  double s = s_at(t);
  OuterRates w = outer_rates(t, s, W_);
  OuterRates y = outer_rates(t, s, Y_);
  return -(volume_rate(t) + w.volume) / y.volume;
}

CoalescenceFirstVariation CoalescencePath::first_variation(double t) const {
  check_t(t);
  CoalescenceFirstVariation out;
  AmbientField X = radial_field(chi_);
  auto terms = [&](double tt, double rho, const std::string& prefix, double* curv, double* pot) {
    PieceConfig cfg = inner_config(tt, rho);
    auto mine = [&](const Piece& p) { return is_sheet(p) && starts_with(p.name, prefix.c_str()); };
    auto speed = [&](const Vec3& x, const Vec3& nu) {
      double r = std::hypot(x.x(), x.y());
      return r == 0.0 ? 0.0 : chi_.value(r) * (x.x() * nu.x() + x.y() * nu.y()) / r;
    };
    *curv = sum_over(cfg, level_, true, mine, [&](const Piece& p, const ChartJet& jet, const SurfaceFrame& fr,
                                                  const Vec2&) {
      return -geometry_from_jet(jet, p.patch.orientation()).H * speed(fr.x, fr.nu);
    });
    *pot = g_.kind() == Potential::Kind::zero
               ? 0.0
               : sum_over(cfg, level_, false, mine, [&](const Piece&, const ChartJet&, const SurfaceFrame& fr,
                                                        const Vec2&) { return g_.value(fr.x) * speed(fr.x, fr.nu); });
  };
  if (t > 0.0) {
    terms(t, 0.0, "M_", &out.curvature_M, &out.potential_M);
    terms(t, 0.0, "N_", &out.curvature_N, &out.potential_N);
    PieceConfig cfg = inner_config(t);
    for (const Piece& p : cfg.pieces) {
      if (!is_sheet(p)) continue;
      double b = boundary_conormal_term(patch_edge_curve(p.patch, 1, p.name + " edge"), X, level_).term;
      (starts_with(p.name, "M_") ? out.boundary_M : out.boundary_N) = b;
    }
  } else {
    std::vector<double> rho = rho_stencil();
    const std::vector<double> powers{3.0, 4.0};
    std::vector<double> cm, pm, cn, pn;
    for (double r : rho) {
      double a, b, c, d;
      terms(0.0, r, "M_", &a, &b);
      terms(0.0, r, "N_", &c, &d);
      cm.push_back(a);
      pm.push_back(b);
      cn.push_back(c);
      pn.push_back(d);
    }
    Extrapolation e1 = extrapolate_powers(rho, cm, powers), e2 = extrapolate_powers(rho, pm, powers),
                  e3 = extrapolate_powers(rho, cn, powers), e4 = extrapolate_powers(rho, pn, powers);
    out.curvature_M = e1.value;
    out.potential_M = e2.value;
    out.curvature_N = e3.value;
    out.potential_N = e4.value;
    out.extrapolation_error = e1.error + e2.error + e3.error + e4.error;
  }
  double s = s_at(t);
  double sp = s_prime(t);
  OuterRates w = outer_rates(t, s, W_);
  OuterRates y = outer_rates(t, s, Y_);
  out.outer = (w.area + w.potential) + sp * (y.area + y.potential);
  out.inner_total = out.curvature_M + out.boundary_M + out.potential_M + out.curvature_N + out.boundary_N +
                    out.potential_N;
  out.total = out.inner_total + out.outer;
  return out;
}

CoalescenceSecondVariation CoalescencePath::second_variation(const std::vector<double>& steps) const {
  CoalescenceSecondVariation out;
  out.steps = steps;
  out.lambda = lambda_;
  AmbientField X = radial_field(chi_);
  // V'' and s'' come from first differences of the rates V'(t) and s'(t), which are evaluated directly
  std::vector<Sample> e1{{0.0, inner_energy(0.0)}}, etot{{0.0, energy(0.0)}}, sp{{0.0, s_prime(0.0)}},
      v1{{0.0, volume_rate(0.0)}}, bm{{0.0, 0.0}}, bn{{0.0, 0.0}};
  for (double h : steps) {
    check_t(h);
    e1.push_back({h, inner_energy(h)});
    etot.push_back({h, energy(h)});
    sp.push_back({h, s_prime(h)});
    v1.push_back({h, volume_rate(h)});
    PieceConfig cfg = inner_config(h);
    for (const Piece& p : cfg.pieces) {
      if (!is_sheet(p)) continue;
      double b = boundary_conormal_term(patch_edge_curve(p.patch, 1, p.name + " edge"), X, level_).term;
      (starts_with(p.name, "M_") ? bm : bn).push_back({h, b});
    }
  }
  FdEstimate inner = fd_derivative(e1, 2, Sided::one);
  out.inner = inner.value;
  out.inner_error = inner.error;
  if (out.inner_error > kPi / 4.0) {
    throw ResolutionError("finite-difference error bar " + fmt(out.inner_error) +
                          " exceeds pi/4; refine the grid or the t-stencil");
  }
  out.boundary_rate_M = fd_derivative(bm, 1, Sided::one).value;
  out.boundary_rate_N = fd_derivative(bn, 1, Sided::one).value;
  out.s_second_fd = fd_derivative(sp, 1, Sided::one).value;
  out.inner_volume_second_fd = fd_derivative(v1, 1, Sided::one).value;
  out.inner_volume_second = volume_second_derivative();
  FdEstimate tot = fd_derivative(etot, 2, Sided::one);
  out.fd_total = tot.value;
  out.fd_total_error = tot.error;

  PieceConfig outer0 = outer_config(0.0, 0.0);
  double ww = total(second_order_volume(outer0, W_, zero_field(), level_));
  out.s_second = -(out.inner_volume_second + ww) / dvol_ds_;
  out.quadratic_form = second_variation_ambient(outer0, g_, normal_component(W_), lambda_, level_).quadratic_form;
  AmbientField Z = linear_combination({{out.s_second, Y_}});
  out.outer_volume_second = total(second_order_volume(outer0, W_, Z, level_));
  out.volume_correction = lambda_ * out.outer_volume_second;
  out.outer = out.quadratic_form + out.volume_correction;
  out.total = out.inner + out.outer;
  return out;
}

std::shared_ptr<CoalescencePath> coalescence_path(const CuspPairConfig& cusp, const CutoffChi& chi,
                                                  const Potential& g, int level, CorrectionLayout layout) {
  return std::make_shared<CoalescencePath>(cusp, chi, g, level, layout);
}

// ----- wedge paths -----

double wedge_angle(const Wedge& w) {
  if (w.junction.empty()) throw DomainError("wedge '" + w.name + "' has no junction data");
  for (const BoundaryCurve& c : w.junction) {
    if (!c.has_conormal) throw DomainError("wedge '" + w.name + "' is missing conormal data at T");
  }
  auto conormal = [](const BoundaryCurve& c) {
    CurvePoint p = c.eval(0.5 * (c.s0 + c.s1));
    return c.direction == ConormalDirection::into_sheet ? p.conormal : Vec3(-p.conormal);
  };
  if (w.junction.size() == 1) return kPi;
  Vec3 a = conormal(w.junction[0]), b = conormal(w.junction[1]);
  return std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}

WedgePath::WedgePath(PieceConfig cfg, Potential g, std::vector<Wedge> wedges, int level, double t_max)
    : DeformationPath(std::move(cfg), t_max), g_(std::move(g)), wedges_(std::move(wedges)), level_(level) {
  if (wedges_.empty()) throw DomainError("wedge path needs at least one wedge");
  std::vector<int> owner(base_.pieces.size(), -1);
  int liquid = 0;
  for (std::size_t k = 0; k < wedges_.size(); ++k) {
    const Wedge& w = wedges_[k];
    if (w.pieces.size() != w.sign.size()) throw DomainError("wedge '" + w.name + "' needs one sign per piece");
    for (std::size_t i : w.pieces) {
      if (i >= base_.pieces.size()) throw DomainError("wedge '" + w.name + "' refers to a missing piece");
      if (owner[i] >= 0) throw DomainError("piece '" + base_.pieces[i].name + "' belongs to two wedges");
      owner[i] = static_cast<int>(k);
    }
    double angle = wedge_angle(w);
    if (!(angle < kPi - 1e-9)) {
      throw UnsupportedError("wedge '" + w.name + "' has opening angle " + fmt(angle) +
                             " >= pi; obtuse wedges have no push construction");
    }
    require_support(base_, w.push);
    require_support(base_, w.correction);
    liquid += w.liquid ? 1 : 0;
  }
  if (liquid != 0 && liquid != static_cast<int>(wedges_.size())) {
    throw DomainError("wedges must be all liquid or all vapour");
  }
  kind_ = liquid ? DeformationKind::break_up : DeformationKind::coalescence;
  vol_scale_ = 0.0;
  for (const Wedge& w : wedges_) {
    double v = wedge_volume(base_, w);
    vol0_.push_back(v);
    vol_scale_ = std::max(vol_scale_, std::abs(v));
    double dy = 0.0, dx = 0.0;
    for (std::size_t j = 0; j < w.pieces.size(); ++j) {
      const Piece& p = base_.pieces[w.pieces[j]];
      dy += w.sign[j] * piece_integral(p, level_, [&](const Vec3& x, const Vec3& nu) {
        return w.correction.value(x).dot(nu);
      });
      dx += w.sign[j] * piece_integral(p, level_, [&](const Vec3& x, const Vec3& nu) {
        return w.push.value(x).dot(nu);
      });
    }
    if (!(std::abs(dy) > 1e-10 * std::max(1.0, std::abs(v)))) {
      throw IllPosedError("correction field of wedge '" + w.name + "' does not change its volume");
    }
    dvol_ds_.push_back(dy);
    s_prime0_.push_back(-dx / dy);
  }
  cache_[0.0] = std::vector<double>(wedges_.size(), 0.0);
}

double WedgePath::wedge_volume(const PieceConfig& cfg, const Wedge& w) const {
  std::vector<Piece> pieces;
  for (std::size_t j = 0; j < w.pieces.size(); ++j) {
    Piece p = cfg.pieces[w.pieces[j]];
    // enclosed_volume expects normals pointing out of the region
    if (w.sign[j] < 0) p.patch = p.patch.flipped();
    pieces.push_back(p);
  }
  return enclosed_volume(pieces, cfg.volume_method, level_);
}

PieceConfig WedgePath::deformed(double t, const std::vector<double>& s) const {
  PieceConfig out = base_;
  for (std::size_t k = 0; k < wedges_.size(); ++k) {
    const Wedge& w = wedges_[k];
    for (std::size_t i : w.pieces) {
      Piece& p = out.pieces[i];
      double h = p.patch.fd_step();
      std::shared_ptr<const Chart> chart = p.patch.chart_ptr();
      if (t != 0.0) chart = std::make_shared<FlowedChart>(chart, w.push, t, h);
      if (s[k] != 0.0) {
        chart = std::make_shared<DisplacedChart>(chart, std::vector<std::pair<double, AmbientField>>{{s[k], w.correction}},
                                                 h);
      }
      if (chart != p.patch.chart_ptr()) p.patch = p.patch.with_chart(chart);
    }
  }
  return out;
}

std::vector<double> WedgePath::solve(double t) const {
  std::vector<double> s(wedges_.size(), 0.0);
  for (std::size_t k = 0; k < wedges_.size(); ++k) {
    auto f = [&](double sk) {
      std::vector<double> trial = s;
      trial[k] = sk;
      return wedge_volume(deformed(t, trial), wedges_[k]) - vol0_[k];
    };
    s[k] = newton_scalar(f, dvol_ds_[k], s_prime0_[k] * t, 1e-14 * vol_scale_, 1e-10 * vol_scale_,
                         "wedge '" + wedges_[k].name + "' correction at t = " + fmt(t));
  }
  return s;
}

std::vector<double> WedgePath::s_at(double t) const {
  check_t(t);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(t);
    if (it != cache_.end()) return it->second;
  }
  std::vector<double> s = solve(t);
  std::lock_guard<std::mutex> lock(mutex_);
  cache_[t] = s;
  return s;
}

PieceConfig WedgePath::config_at(double t) const {
  check_t(t);
  if (t == 0.0) return base_;
  return deformed(t, s_at(t));
}

std::vector<double> WedgePath::volume_drift(double t) const {
  PieceConfig cfg = config_at(t);
  std::vector<double> out;
  for (std::size_t k = 0; k < wedges_.size(); ++k) out.push_back(std::abs(wedge_volume(cfg, wedges_[k]) - vol0_[k]));
  return out;
}

std::string WedgePath::descriptor() const {
  std::ostringstream os;
  os << "flow of the wedge pushes near T composed with x + s_k(t) Y_k per wedge:";
  for (const Wedge& w : wedges_) os << " [" << w.name << ": " << w.push.label() << "; " << w.correction.label() << "]";
  return os.str();
}

WedgeFirstVariation WedgePath::first_variation(const std::vector<double>& steps) const {
  WedgeFirstVariation out;
  std::vector<double> analytic, curvature, boundary;
  for (std::size_t k = 0; k < wedges_.size(); ++k) {
    const Wedge& w = wedges_[k];
    PieceConfig sub = base_;
    sub.pieces.clear();
    for (std::size_t i : w.pieces) sub.pieces.push_back(base_.pieces[i]);
    AmbientField V = linear_combination({{1.0, w.push}, {s_prime0_[k], w.correction}});
    analytic.push_back(first_variation_ambient(sub, g_, V, level_));
    curvature.push_back(first_variation_curvature_form(sub, g_, V, level_));
    for (const BoundaryCurve& c : w.junction) boundary.push_back(boundary_conormal_term(c, w.push, level_).term);
    out.angles.push_back(wedge_angle(w));
  }
  out.analytic = pairwise_sum(analytic);
  out.curvature = pairwise_sum(curvature);
  out.boundary = pairwise_sum(boundary);
  std::vector<Sample> e{{0.0, free_energy(base_, g_, level_, false).total}};
  for (double h : steps) e.push_back({h, free_energy(config_at(h), g_, level_, false).total});
  FdEstimate fd = fd_derivative(e, 1, Sided::one);
  out.fd = fd.value;
  out.fd_error = fd.error;
  out.fd_finest = fd.raw.back();
  return out;
}

std::shared_ptr<WedgePath> wedge_breakup_path(const PieceConfig& cfg, const Potential& g, std::vector<Wedge> wedges,
                                              int level, double t_max) {
  return std::make_shared<WedgePath>(cfg, g, std::move(wedges), level, t_max);
}

}  // namespace capillary
