#pragma once

#include <span>
#include <vector>

namespace capillary {

struct Sample {
  double t = 0.0;
  double value = 0.0;
};

enum class Sided { one, two };

struct FdEstimate {
  double value = 0.0;
  double error = 0.0;           // |last - previous| of the extrapolation diagonal
  double observed_order = 0.0;  // from successive differences of the raw estimates
  std::vector<double> raw;      // unextrapolated estimates, coarsest first
  std::vector<double> steps;
};

/// Richardson-extrapolated derivative of the given order at t = 0.
/// One-sided: samples at decreasing positive steps, with t = 0 optional.
/// Two-sided: samples at +h and -h for each step (t = 0 required for order 2).
FdEstimate fd_derivative(std::span<const Sample> samples, int order, Sided sided);

struct Extrapolation {
  double value = 0.0;
  double error = 0.0;  // change caused by the last eliminated power
};

/// Fits f(rho) = f0 + sum_k c_k rho^(p_k) through the samples (one more sample than powers) and returns f0.
Extrapolation extrapolate_powers(std::span<const double> rho, std::span<const double> values,
                                 std::span<const double> powers);

/// Geometric stencil h0, h0/2, ... (n steps).
std::vector<double> geometric_steps(double h0, int n, double ratio = 2.0);

}  // namespace capillary
