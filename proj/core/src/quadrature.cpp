#include "capillary/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "capillary/error.hpp"

namespace capillary {

namespace {

struct GaussTable {
  std::array<double, kGaussPoints> x{};
  std::array<double, kGaussPoints> w{};
};

std::pair<double, double> legendre(int n, double z) {
  double p0 = 1.0, p1 = 0.0;
  for (int k = 1; k <= n; ++k) {
    double p2 = p1;
    p1 = p0;
    p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
  }
  return {p0, n * (z * p0 - p1) / (z * z - 1.0)};
}

GaussTable build_gauss() {
  GaussTable t;
  const int n = kGaussPoints;
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [p, dp] = legendre(n, z);
      double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double dp = legendre(n, z).second;
    t.x[i] = -z;
    t.w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return t;
}

const GaussTable& gauss() {
  static const GaussTable table = build_gauss();
  return table;
}

}  // namespace

bool ParamDomain::contains(const Vec2& p, double tol) const {
  auto in = [tol](const ParamInterval& iv, double x) {
    if (iv.periodic) return true;
    double s = tol * std::max(1.0, iv.hi - iv.lo);
    return x >= iv.lo - s && x <= iv.hi + s;
  };
  return in(u, p.x()) && in(v, p.y());
}

LineRule make_line_rule(const ParamInterval& iv, int level) {
  if (level < 1) throw ResolutionError("resolution level must be >= 1, got " + std::to_string(level));
  if (!(iv.hi > iv.lo)) throw DomainError("empty parameter interval");
  LineRule rule;
  const double len = iv.hi - iv.lo;
  const int scale = 1 << (level - 1);
  if (iv.periodic) {
    int n = 8 * iv.base_panels * scale;
    rule.nodes.reserve(n);
    for (int i = 0; i < n; ++i) {
      rule.nodes.push_back(iv.lo + len * (i + 0.5) / n);
      rule.weights.push_back(len / n);
    }
    return rule;
  }
  std::vector<double> cuts{iv.lo};
  std::vector<double> inner = iv.breaks;
  std::sort(inner.begin(), inner.end());
  for (double b : inner) {
    if (b > cuts.back() + 1e-14 * len && b < iv.hi - 1e-14 * len) cuts.push_back(b);
  }
  cuts.push_back(iv.hi);
  const auto& g = gauss();
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double a = cuts[k], b = cuts[k + 1];
    int panels = std::max(1, static_cast<int>(std::ceil((b - a) / len * iv.base_panels * scale - 1e-9)));
    double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
      double c = a + (p + 0.5) * h;
      for (int i = 0; i < kGaussPoints; ++i) {
        rule.nodes.push_back(c + 0.5 * h * g.x[i]);
        rule.weights.push_back(0.5 * h * g.w[i]);
      }
    }
  }
  return rule;
}

QuadratureGrid make_grid(const ParamDomain& dom, int level) {
  LineRule ru = make_line_rule(dom.u, level);
  LineRule rv = make_line_rule(dom.v, level);
  QuadratureGrid grid;
  grid.level = level;
  grid.scheme = std::string(dom.u.periodic ? "trapezoid" : "gauss-legendre-8") + "x" +
                (dom.v.periodic ? "trapezoid" : "gauss-legendre-8");
  grid.nodes.reserve(ru.nodes.size() * rv.nodes.size());
  grid.weights.reserve(ru.nodes.size() * rv.nodes.size());
  for (std::size_t i = 0; i < ru.nodes.size(); ++i) {
    for (std::size_t j = 0; j < rv.nodes.size(); ++j) {
      grid.nodes.emplace_back(ru.nodes[i], rv.nodes[j]);
      grid.weights.push_back(ru.weights[i] * rv.weights[j]);
    }
  }
  return grid;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 16) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace capillary
