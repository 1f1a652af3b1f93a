#include "capillary/fd.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>

#include "capillary/error.hpp"

namespace capillary {

namespace {

/// Neville extrapolation to h = 0 of a polynomial in h^p, eliminating the error terms h^(p*k).
std::vector<double> extrapolate(const std::vector<double>& raw, const std::vector<double>& h, int power,
                                double* err) {
  std::size_t n = raw.size();
  std::vector<std::vector<double>> T(n);
  for (std::size_t i = 0; i < n; ++i) {
    T[i].push_back(raw[i]);
    for (std::size_t j = 1; j <= i; ++j) {
      double ratio = std::pow(h[i - j] / h[i], power);
      T[i].push_back(T[i][j - 1] + (T[i][j - 1] - T[i - 1][j - 1]) / (ratio - 1.0));
    }
  }
  std::vector<double> diag;
  for (std::size_t i = 0; i < n; ++i) diag.push_back(T[i][i]);
  *err = n >= 2 ? std::abs(diag[n - 1] - diag[n - 2]) : 0.0;
  return diag;
}

double observed_order(const std::vector<double>& raw, const std::vector<double>& h) {
  std::size_t n = raw.size();
  if (n < 3) return 0.0;
  double d1 = std::abs(raw[n - 3] - raw[n - 2]);
  double d2 = std::abs(raw[n - 2] - raw[n - 1]);
  if (d1 == 0.0 || d2 == 0.0) return INFINITY;
  return std::log(d1 / d2) / std::log(h[n - 2] / h[n - 1]);
}

void check_decreasing(const std::vector<double>& h) {
  for (std::size_t i = 0; i + 1 < h.size(); ++i) {
    if (!(h[i + 1] < h[i])) throw DomainError("finite-difference steps must decrease strictly");
  }
}

}  // namespace

namespace {

double fit_constant(std::span<const double> rho, std::span<const double> values, std::span<const double> powers) {
  const auto n = static_cast<Eigen::Index>(powers.size() + 1);
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    for (Eigen::Index k = 1; k < n; ++k) A(i, k) = std::pow(rho[i], powers[k - 1]);
    b(i) = values[i];
  }
  return A.fullPivLu().solve(b)(0);
}

}  // namespace

Extrapolation extrapolate_powers(std::span<const double> rho, std::span<const double> values,
                                 std::span<const double> powers) {
  if (rho.size() != values.size() || rho.size() != powers.size() + 1) {
    throw DomainError("extrapolation needs exactly one more sample than eliminated powers");
  }
  for (std::size_t i = 0; i + 1 < rho.size(); ++i) {
    if (!(rho[i + 1] < rho[i]) || !(rho[i + 1] > 0.0)) throw DomainError("extrapolation radii must decrease");
  }
  Extrapolation e;
  e.value = fit_constant(rho, values, powers);
  if (powers.empty()) return e;
  double coarser = fit_constant(rho.subspan(1), values.subspan(1), powers.first(powers.size() - 1));
  e.error = std::abs(e.value - coarser);
  return e;
}

std::vector<double> geometric_steps(double h0, int n, double ratio) {
  std::vector<double> h;
  for (int i = 0; i < n; ++i) h.push_back(h0 / std::pow(ratio, i));
  return h;
}

FdEstimate fd_derivative(std::span<const Sample> samples, int order, Sided sided) {
  if (order != 1 && order != 2) throw DomainError("derivative order must be 1 or 2");
  FdEstimate out;
  std::vector<double> raw, h;
  if (sided == Sided::one) {
    bool have0 = false;
    double f0 = 0.0;
    std::vector<Sample> pos;
    for (const Sample& s : samples) {
      if (s.t == 0.0) {
        have0 = true;
        f0 = s.value;
      } else if (s.t < 0.0) {
        throw DomainError("one-sided stencil with a negative step");
      } else {
        pos.push_back(s);
      }
    }
    std::vector<double> steps;
    for (const Sample& s : pos) steps.push_back(s.t);
    check_decreasing(steps);
    if (pos.size() + (have0 ? 1 : 0) < 4) throw DomainError("at least four samples are required");
    if (have0) {
      for (std::size_t i = 0; i < pos.size(); ++i) {
        if (order == 1) {
          raw.push_back((pos[i].value - f0) / pos[i].t);
          h.push_back(pos[i].t);
        } else if (i >= 1) {
          double a = pos[i].t, b = pos[i - 1].t;
          double sa = (pos[i].value - f0) / a, sb = (pos[i - 1].value - f0) / b;
          raw.push_back(2.0 * (sb - sa) / (b - a));
          h.push_back(a);
        }
      }
    } else {
      for (std::size_t i = 1; i < pos.size(); ++i) {
        if (order == 1) {
          raw.push_back((pos[i - 1].value - pos[i].value) / (pos[i - 1].t - pos[i].t));
          h.push_back(pos[i].t);
        } else if (i >= 2) {
          double a = pos[i].t, b = pos[i - 1].t, c = pos[i - 2].t;
          double s1 = (pos[i - 1].value - pos[i].value) / (b - a);
          double s2 = (pos[i - 2].value - pos[i - 1].value) / (c - b);
          raw.push_back(2.0 * (s2 - s1) / (c - a));
          h.push_back(a);
        }
      }
    }
    out.value = extrapolate(raw, h, 1, &out.error).back();
  } else {
    std::map<double, double> plus, minus;
    bool have0 = false;
    double f0 = 0.0;
    for (const Sample& s : samples) {
      if (s.t > 0.0) plus[s.t] = s.value;
      else if (s.t < 0.0) minus[-s.t] = s.value;
      else {
        have0 = true;
        f0 = s.value;
      }
    }
    std::vector<double> steps;
    for (const Sample& s : samples) {
      if (s.t > 0.0) steps.push_back(s.t);
    }
    check_decreasing(steps);
    if (steps.size() < 2) throw DomainError("at least two symmetric step pairs are required");
    if (order == 2 && !have0) throw DomainError("two-sided second derivative needs the t = 0 sample");
    for (double s : steps) {
      auto it = minus.find(s);
      if (it == minus.end()) throw DomainError("two-sided stencil is missing a negative step");
      double fp = plus[s], fm = it->second;
      raw.push_back(order == 1 ? (fp - fm) / (2.0 * s) : (fp - 2.0 * f0 + fm) / (s * s));
      h.push_back(s);
    }
    out.value = extrapolate(raw, h, 2, &out.error).back();
  }
  out.raw = raw;
  out.steps = h;
  out.observed_order = observed_order(raw, h);
  return out;
}

}  // namespace capillary
