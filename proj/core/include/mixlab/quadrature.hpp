#pragma once

#include <functional>
#include <vector>

namespace mixlab::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Composite Gauss-Legendre rule on [a, b]: `panels` equal panels, 16 nodes each.
Rule composite_gauss_legendre(double a, double b, int panels);

/// Integral of f over [a, b] with the composite rule above.
double integrate(const std::function<double(double)>& f, double a, double b, int panels);

}  // namespace mixlab::quad
