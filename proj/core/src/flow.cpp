#include "capillary/flow.hpp"

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>

#include "capillary/error.hpp"

namespace capillary {

namespace odeint = boost::numeric::odeint;

CutoffChi::CutoffChi(double R0) : R0_(R0) {
  if (!(R0 > 0.0)) throw DomainError("cutoff radius R0 must be positive");
}

double CutoffChi::value(double r) const {
  if (r <= R0_) return 1.0;
  if (r >= 2.0 * R0_) return 0.0;
  double x = (r - R0_) / R0_;
  return 1.0 - x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

double CutoffChi::d1(double r) const {
  if (r <= R0_ || r >= 2.0 * R0_) return 0.0;
  double x = (r - R0_) / R0_;
  return -30.0 * x * x * (1.0 - x) * (1.0 - x) / R0_;
}

double CutoffChi::d2(double r) const {
  if (r <= R0_ || r >= 2.0 * R0_) return 0.0;
  double x = (r - R0_) / R0_;
  return -60.0 * x * (1.0 - x) * (1.0 - 2.0 * x) / (R0_ * R0_);
}

RadialJet RadialFlow::radial(double t, double r) const {
  const double R0 = chi_.R0();
  if (t == 0.0 || r >= 2.0 * R0) return RadialJet{r, 1.0, 0.0};
  if (t > 0.0 && r + t <= R0) return RadialJet{r + t, 1.0, 0.0};
  using State = std::array<double, 3>;
  State y{r, 1.0, 0.0};
  double t0 = 0.0;
  if (t > 0.0 && r < R0) {
    // straight travel to the edge of the plateau
    t0 = R0 - r;
    y = {R0, 1.0, 0.0};
  }
  auto rhs = [this](const State& q, State& dq, double) {
    double c1 = chi_.d1(q[0]);
    dq[0] = chi_.value(q[0]);
    dq[1] = c1 * q[1];
    dq[2] = chi_.d2(q[0]) * q[1] * q[1] + c1 * q[2];
  };
  double span = t - t0;
  odeint::integrate_adaptive(odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(1e-14, 1e-14), rhs, y, 0.0,
                             span, span / 16.0);
  if (!std::isfinite(y[0]) || y[0] <= 0.0) throw SolverError("radial flow left the punctured window");
  return RadialJet{y[0], y[1], y[2]};
}

Vec3 RadialFlow::map(double t, const Vec3& x) const {
  double r = std::hypot(x.x(), x.y());
  if (r == 0.0) throw DomainError("radial flow is undefined on the axis");
  RadialJet j = radial(t, r);
  return Vec3(x.x() * j.phi / r, x.y() * j.phi / r, x.z());
}

AmbientField radial_field(const CutoffChi& chi) {
  Window w = Window::cylinder(Vec3::Zero(), Vec3::UnitZ(), 2.0 * chi.R0(), 1e300);
  return AmbientField(
      [chi](const Vec3& x) {
        double r = std::hypot(x.x(), x.y());
        FieldJet fj;
        if (r == 0.0) return fj;
        double c = chi.value(r), c1 = chi.d1(r);
        Vec2 e(x.x() / r, x.y() / r);
        fj.value = Vec3(c * e.x(), c * e.y(), 0.0);
        Mat2 D = c1 * e * e.transpose() + c / r * (Mat2::Identity() - e * e.transpose());
        fj.jac.topLeftCorner<2, 2>() = D;
        return fj;
      },
      Support{{Region::of(w)}}, "chi*d_r");
}

RadialFlowChart::RadialFlowChart(HeightFunction h, RadialFlow flow, double t)
    : h_(std::move(h)), flow_(flow), t_(t) {}

RadialJet RadialFlowChart::radial(double r) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(r);
    if (it != cache_.end()) return it->second;
  }
  RadialJet f = flow_.radial(t_, r);
  std::lock_guard<std::mutex> lock(mutex_);
  cache_.emplace(r, f);
  return f;
}

ChartJet RadialFlowChart::jet2(const Vec2& p) const {
  const double r = p.x(), c = std::cos(p.y()), s = std::sin(p.y());
  RadialJet f = radial(r);
  Vec2 er(c, s), et(-r * s, r * c), ett(-r * c, -r * s), ert(-s, c);
  HeightJet hj = h_(r * er);
  ChartJet j;
  j.x = Vec3(f.phi * c, f.phi * s, hj.value);
  j.xu = Vec3(f.dphi * c, f.dphi * s, hj.grad.dot(er));
  j.xv = Vec3(-f.phi * s, f.phi * c, hj.grad.dot(et));
  j.xuu = Vec3(f.ddphi * c, f.ddphi * s, er.dot(hj.hess * er));
  j.xuv = Vec3(-f.dphi * s, f.dphi * c, er.dot(hj.hess * et) + hj.grad.dot(ert));
  j.xvv = Vec3(-f.phi * c, -f.phi * s, et.dot(hj.hess * et) + hj.grad.dot(ett));
  return j;
}

ChartJet RadialFlowChart::jet1(const Vec2& p) const { return jet2(p); }

DisplacedChart::DisplacedChart(std::shared_ptr<const Chart> base, std::vector<std::pair<double, AmbientField>> terms,
                               double h)
    : base_(std::move(base)), terms_(std::move(terms)), h_(h) {}

bool DisplacedChart::active(const Vec3& x) const {
  for (const auto& [c, f] : terms_) {
    if (c != 0.0 && f.support().contains(x)) return true;
  }
  return false;
}

ChartJet DisplacedChart::jet1(const Vec2& p) const {
  ChartJet j = base_->jet1(p);
  if (!active(j.x)) return j;
  Vec3 d = Vec3::Zero();
  Mat3 D = Mat3::Zero();
  for (const auto& [c, f] : terms_) {
    if (c == 0.0) continue;
    FieldJet fj = f.jet(j.x);
    d += c * fj.value;
    D += c * fj.jac;
  }
  ChartJet out = j;
  out.x = j.x + d;
  out.xu = j.xu + D * j.xu;
  out.xv = j.xv + D * j.xv;
  return out;
}

ChartJet DisplacedChart::jet2(const Vec2& p) const {
  ChartJet base = base_->jet1(p);
  if (!active(base.x)) return base_->jet2(p);
  return fd_second(*this, p, h_);
}

namespace {

using FlowState = std::array<double, 12>;

}  // namespace

std::pair<Vec3, Mat3> integrate_flow(const AmbientField& X, const Vec3& x, double t) {
  if (t == 0.0 || !X.support().contains(x)) return {x, Mat3::Identity()};
  FlowState y{};
  for (int i = 0; i < 3; ++i) y[i] = x[i];
  for (int i = 0; i < 3; ++i) y[3 + 4 * i] = 1.0;
  auto rhs = [&X](const FlowState& q, FlowState& dq, double) {
    Vec3 p(q[0], q[1], q[2]);
    FieldJet fj = X.jet(p);
    for (int i = 0; i < 3; ++i) dq[i] = fj.value[i];
    Eigen::Map<const Mat3> J(q.data() + 3);
    Eigen::Map<Mat3> dJ(dq.data() + 3);
    dJ = fj.jac * J;
  };
  odeint::integrate_adaptive(odeint::make_controlled<odeint::runge_kutta_dopri5<FlowState>>(1e-13, 1e-13), rhs, y,
                             0.0, t, t / 16.0);
  Vec3 out(y[0], y[1], y[2]);
  Mat3 J = Eigen::Map<const Mat3>(y.data() + 3);
  if (!out.allFinite() || !J.allFinite()) {
    std::ostringstream os;
    os << "flow integration failed from (" << x.x() << ", " << x.y() << ", " << x.z() << ")";
    throw SolverError(os.str());
  }
  return {out, J};
}

FlowedChart::FlowedChart(std::shared_ptr<const Chart> base, AmbientField X, double t, double h)
    : base_(std::move(base)), X_(std::move(X)), t_(t), h_(h) {}

ChartJet FlowedChart::jet1(const Vec2& p) const {
  ChartJet j = base_->jet1(p);
  if (t_ == 0.0 || !X_.support().contains(j.x)) return j;
  auto [x, J] = integrate_flow(X_, j.x, t_);
  ChartJet out = j;
  out.x = x;
  out.xu = J * j.xu;
  out.xv = J * j.xv;
  return out;
}

ChartJet FlowedChart::jet2(const Vec2& p) const {
  ChartJet base = base_->jet1(p);
  if (t_ == 0.0 || !X_.support().contains(base.x)) return base_->jet2(p);
  return fd_second(*this, p, h_);
}

PieceConfig flow_ambient(const PieceConfig& cfg, const AmbientField& X, double t) {
  if (!X.support().inside(cfg.window)) {
    throw SupportError("field '" + X.label() + "' is not supported inside the window");
  }
  PieceConfig out = cfg;
  if (t == 0.0) return out;
  for (Piece& p : out.pieces) {
    auto chart = std::make_shared<FlowedChart>(p.patch.chart_ptr(), X, t, p.patch.fd_step());
    p.patch = p.patch.with_chart(chart);
  }
  return out;
}

}  // namespace capillary
