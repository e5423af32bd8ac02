#include "mixlab/quadrature.hpp"

#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace mixlab::quad {

namespace {
constexpr unsigned kOrder = 16;
using GL = boost::math::quadrature::gauss<double, kOrder>;
}  // namespace

Rule composite_gauss_legendre(double a, double b, int panels) {
  if (panels < 1) throw std::invalid_argument("composite_gauss_legendre: panels must be >= 1");
  // Boost stores the nonnegative half of a symmetric rule (even order: no zero node).
  const auto& x = GL::abscissa();
  const auto& w = GL::weights();
  Rule r;
  r.nodes.reserve(static_cast<std::size_t>(panels) * kOrder);
  r.weights.reserve(r.nodes.capacity());
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (std::size_t i = 0; i < x.size(); ++i) {
      r.nodes.push_back(mid - 0.5 * h * x[i]);
      r.weights.push_back(0.5 * h * w[i]);
      r.nodes.push_back(mid + 0.5 * h * x[i]);
      r.weights.push_back(0.5 * h * w[i]);
    }
  }
  return r;
}

double integrate(const std::function<double(double)>& f, double a, double b, int panels) {
  const Rule r = composite_gauss_legendre(a, b, panels);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(r.nodes[i]);
  return s;
}

}  // namespace mixlab::quad
