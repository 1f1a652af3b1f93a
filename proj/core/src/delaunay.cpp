#include "capillary/delaunay.hpp"

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <memory>

#include "capillary/error.hpp"

namespace capillary {

namespace odeint = boost::numeric::odeint;

namespace {

using OdeState = std::array<double, 3>;

}  // namespace

UnduloidProfile::UnduloidProfile(double neck, double H) : a_(neck), H_(H), step_(0.05 / H) {
  if (!(H > 0.0)) throw DomainError("unduloid mean curvature must be positive");
  if (!(neck > 0.0) || !(neck < 1.0 / H)) throw DomainError("unduloid neck must satisfy 0 < a < 1/H");
  if (neck < unduloid_min_neck(H)) throw DomainError("unduloid neck below the sphere-chain threshold");
  checkpoints_.push_back({a_, 0.0, kPi / 2.0});
}

void UnduloidProfile::extend_to(double s) const {
  auto rhs = [this](const OdeState& y, OdeState& dy, double) {
    dy[0] = std::cos(y[2]);
    dy[1] = std::sin(y[2]);
    dy[2] = H_ - std::sin(y[2]) / y[0];
  };
  while (step_ * static_cast<double>(checkpoints_.size() - 1) < s) {
    const State& last = checkpoints_.back();
    OdeState y{last.rho, last.z, last.psi};
    double s0 = step_ * static_cast<double>(checkpoints_.size() - 1);
    odeint::integrate_adaptive(odeint::make_controlled<odeint::runge_kutta_dopri5<OdeState>>(1e-14, 1e-14), rhs, y,
                               s0, s0 + step_, step_ / 8.0);
    checkpoints_.push_back({y[0], y[1], y[2]});
  }
}

UnduloidProfile::State UnduloidProfile::integrate(double s) const {
  State c;
  std::size_t k = 0;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    extend_to(s);
    k = std::min(static_cast<std::size_t>(std::floor(s / step_)), checkpoints_.size() - 1);
    c = checkpoints_[k];
  }
  double s0 = step_ * static_cast<double>(k);
  if (s - s0 <= 0.0) return c;
  OdeState y{c.rho, c.z, c.psi};
  auto rhs = [this](const OdeState& q, OdeState& dq, double) {
    dq[0] = std::cos(q[2]);
    dq[1] = std::sin(q[2]);
    dq[2] = H_ - std::sin(q[2]) / q[0];
  };
  odeint::integrate_adaptive(odeint::make_controlled<odeint::runge_kutta_dopri5<OdeState>>(1e-14, 1e-14), rhs, y, s0,
                             s, (s - s0) / 4.0);
  return {y[0], y[1], y[2]};
}

ProfileJet UnduloidProfile::operator()(double s) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = memo_.find(s);
    if (it != memo_.end()) return it->second;
  }
  State st = integrate(std::abs(s));
  double rho = st.rho, z = st.z, psi = st.psi;
  if (s < 0.0) {
    z = -z;
    psi = kPi - psi;
  }
  double dpsi = H_ - std::sin(psi) / rho;
  ProfileJet jet{rho, z, std::cos(psi), std::sin(psi), -std::sin(psi) * dpsi, std::cos(psi) * dpsi};
  std::lock_guard<std::mutex> lock(mutex_);
  memo_.emplace(s, jet);
  return jet;
}

double UnduloidProfile::arclength_at_height(double z) const {
  if (!(z > 0.0)) return 0.0;
  std::size_t k = 0;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    while (true) {
      extend_to(step_ * static_cast<double>(k + 1));
      if (checkpoints_[k + 1].z >= z) break;
      ++k;
    }
  }
  double s = step_ * (static_cast<double>(k) + 0.5);
  for (int it = 0; it < 60; ++it) {
    State st = integrate(s);
    double ds = (st.z - z) / std::sin(st.psi);
    s -= ds;
    if (std::abs(ds) < 1e-15 * (1.0 + s)) break;
  }
  return s;
}

SurfacePatch delaunay_unduloid(double neck, double H, double extent, bool outward) {
  if (!(extent > 0.0)) throw DomainError("unduloid extent must be positive");
  if (!(H > 0.0)) throw DomainError("unduloid mean curvature must be positive");
  if (std::abs(neck * H - 1.0) <= 1e-12) return make_cylinder(1.0 / H, -extent / 2.0, extent / 2.0, Frame{}, outward);
  auto prof = std::make_shared<UnduloidProfile>(neck, H);
  double s_half = prof->arclength_at_height(extent / 2.0);
  Profile f = [prof](double s) { return (*prof)(s); };
  return make_revolution(f, -s_half, s_half, Frame{}, outward ? -1 : 1, PatchKind::revolution, {0.0});
}

}  // namespace capillary
