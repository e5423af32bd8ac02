#include "mixlab/flows.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mixlab/quadrature.hpp"

namespace mixlab::flows {

using std::numbers::pi;

double WaveTerm::time_factor(double t, double period) const {
  switch (time) {
    case TimeMode::steady: return 1.0;
    case TimeMode::cos: return std::cos(2.0 * pi * harmonic * t / period);
    case TimeMode::sin: return std::sin(2.0 * pi * harmonic * t / period);
  }
  return 1.0;
}

double WaveTerm::time_integral(double t, double period) const {
  const double w = 2.0 * pi * harmonic / period;
  switch (time) {
    case TimeMode::steady: return t;
    case TimeMode::cos: return std::sin(w * t) / w;
    case TimeMode::sin: return (1.0 - std::cos(w * t)) / w;
  }
  return t;
}

double WaveTerm::spatial(double x, double y) const {
  const double ph = kx * x + ky * y;
  return ampl * (trig == Trig::cos ? std::cos(ph) : std::sin(ph));
}

cplx WaveTerm::positive_coeff() const {
  if (kx == 0 && ky == 0) return trig == Trig::cos ? cplx(ampl) : cplx(0.0);
  return trig == Trig::cos ? cplx(0.5 * ampl, 0.0) : cplx(0.0, -0.5 * ampl);
}

Bounds triangle_bounds(const std::vector<WaveTerm>& terms, bool shear) {
  Bounds b;
  for (const auto& t : terms) {
    const double a = std::abs(t.ampl);
    if (t.kx == 0 && t.ky == 0 && t.trig == Trig::sin) continue;
    if (shear) {
      b.M += a;
      b.w11 += a * std::abs(t.ky) * 2.0 / pi;
      b.lip += a * (1.0 + std::abs(t.ky));
    } else {
      const double kap = std::hypot(t.kx, t.ky);
      b.M += a * kap;
      b.lip += a * (kap + kap * kap);
    }
  }
  return b;
}

namespace {

bool any_time_dependent(const std::vector<WaveTerm>& terms) {
  return std::any_of(terms.begin(), terms.end(), [](const WaveTerm& t) { return t.time != TimeMode::steady; });
}

void check_declared(double declared, double sampled, const char* what) {
  if (declared < 0.0) throw std::invalid_argument(std::string("declared bound ") + what + " is negative");
  if (sampled > declared + 1e-9 * std::max(1.0, declared))
    throw std::invalid_argument(std::string("declared bound ") + what + " = " + std::to_string(declared) +
                                " is below the sampled value " + std::to_string(sampled));
}

std::vector<double> validation_times(TimeKind kind, double period) {
  if (kind == TimeKind::steady) return {0.0};
  std::vector<double> ts;
  for (int i = 0; i < 64; ++i) ts.push_back(period * i / 64.0);
  return ts;
}

void add_term_coeffs(const WaveTerm& term, double scale, int lmax, std::vector<cplx>& out) {
  if (term.kx != 0) return;
  const cplx c = term.positive_coeff() * scale;
  if (term.ky == 0) {
    out[static_cast<std::size_t>(lmax)] += c;
    return;
  }
  if (std::abs(term.ky) > lmax) return;
  out[static_cast<std::size_t>(term.ky + lmax)] += c;
  out[static_cast<std::size_t>(-term.ky + lmax)] += std::conj(c);
}

}  // namespace

// ---------------------------------------------------------------------------

ShearSpec::ShearSpec(std::vector<WaveTerm> terms, double period, std::optional<Bounds> declared)
    : terms_(std::move(terms)), period_(period) {
  for (const auto& t : terms_) {
    if (t.kx != 0) throw std::invalid_argument("shear terms must have kx = 0");
    if (t.harmonic < 1) throw std::invalid_argument("time harmonic must be >= 1");
    if (!std::isfinite(t.ampl)) throw std::invalid_argument("shear amplitude is not finite");
  }
  kind_ = any_time_dependent(terms_) ? TimeKind::periodic : TimeKind::steady;
  if (kind_ == TimeKind::periodic && !(period_ > 0.0))
    throw std::invalid_argument("time-dependent shear needs a positive period");
  bounds_ = declared.value_or(triangle_bounds(terms_, true));

  if (declared) {
    constexpr int ny = 512;
    double sup = 0.0, w11 = 0.0;
    for (double t : validation_times(kind_, period_)) {
      double l1 = 0.0;
      for (int j = 0; j < ny; ++j) {
        const double y = 2.0 * pi * j / ny;
        sup = std::max(sup, std::abs(value(t, y)));
        double dy = 0.0;
        for (const auto& w : terms_) {
          const double ph = w.ky * y;
          dy += w.ampl * w.ky * (w.trig == Trig::cos ? -std::sin(ph) : std::cos(ph)) * w.time_factor(t, period_);
        }
        l1 += std::abs(dy) / ny;
      }
      w11 = std::max(w11, l1);
    }
    check_declared(bounds_.M, sup, "M");
    check_declared(bounds_.w11, w11, "w11");
  }
}

int ShearSpec::band() const {
  int b = 0;
  for (const auto& t : terms_) b = std::max(b, std::abs(t.ky));
  return b;
}

double ShearSpec::value(double t, double y) const {
  double s = 0.0;
  for (const auto& w : terms_) s += w.spatial(0.0, y) * w.time_factor(t, period_);
  return s;
}

double ShearSpec::mean(double t) const {
  double s = 0.0;
  for (const auto& w : terms_)
    if (w.ky == 0) s += w.positive_coeff().real() * w.time_factor(t, period_);
  return s;
}

bool ShearSpec::is_mean_zero() const {
  return std::none_of(terms_.begin(), terms_.end(),
                      [](const WaveTerm& w) { return w.ky == 0 && w.trig == Trig::cos && w.ampl != 0.0; });
}

std::vector<cplx> ShearSpec::coefficients(double t, int lmax) const {
  std::vector<cplx> out(static_cast<std::size_t>(2 * lmax + 1));
  for (const auto& w : terms_) add_term_coeffs(w, w.time_factor(t, period_), lmax, out);
  return out;
}

namespace {

const char* trig_name(Trig t) { return t == Trig::cos ? "cos" : "sin"; }
const char* time_name(TimeMode m) {
  switch (m) {
    case TimeMode::steady: return "steady";
    case TimeMode::cos: return "cos";
    case TimeMode::sin: return "sin";
  }
  return "steady";
}

nlohmann::json terms_json(const std::vector<WaveTerm>& terms) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : terms)
    arr.push_back({{"ampl", t.ampl},
                   {"kx", t.kx},
                   {"ky", t.ky},
                   {"phase_mode", trig_name(t.trig)},
                   {"time_mode", time_name(t.time)},
                   {"harmonic", t.harmonic}});
  return arr;
}

nlohmann::json bounds_json(const Bounds& b) { return {{"M", b.M}, {"w11", b.w11}, {"lip", b.lip}}; }

}  // namespace

nlohmann::json ShearSpec::to_json() const {
  return {{"kind", "shear"}, {"terms", terms_json(terms_)}, {"bounds", bounds_json(bounds_)}, {"period", period_}};
}

double Drift::operator()(double t) const {
  double s = 0.0;
  for (const auto& w : mean_terms) s += w.positive_coeff().real() * w.time_integral(t, period);
  return s;
}

MeanZeroReduction mean_zero_reduce(const ShearSpec& shear) {
  std::vector<WaveTerm> rest, mean;
  for (const auto& w : shear.terms()) {
    if (w.ky == 0) {
      if (w.trig == Trig::cos) mean.push_back(w);
    } else {
      rest.push_back(w);
    }
  }
  const double period = any_time_dependent(rest) ? shear.period() : 0.0;
  // The reduced profile differs from U by a y-constant, so its W^{1,1} seminorm is unchanged
  // and its sup is at most twice the original sup.
  Bounds b = triangle_bounds(rest, true);
  b.M = std::min(b.M, 2.0 * shear.M());
  b.w11 = std::min(b.w11, shear.w11());
  return {ShearSpec(std::move(rest), period, b), Drift{std::move(mean), shear.period()}};
}

std::vector<cplx> phase_integral(const ShearSpec& shear, double t, int lmax) {
  const double L = shear.time_kind() == TimeKind::steady ? 2.0 * pi : shear.period();
  const int panels = std::max(4, static_cast<int>(std::ceil(64.0 * t / L)));
  return phase_integral(shear, t, lmax, panels);
}

std::vector<cplx> phase_integral(const ShearSpec& shear, double t, int lmax, int panels) {
  if (!shear.is_mean_zero()) throw std::invalid_argument("phase_integral: shear must be mean-zero reduced");
  std::vector<cplx> out(static_cast<std::size_t>(2 * lmax + 1));
  if (t == 0.0) return out;
  std::optional<quad::Rule> rule;
  for (const auto& w : shear.terms()) {
    double weight = t;
    if (w.time != TimeMode::steady) {
      if (!rule) rule = quad::composite_gauss_legendre(0.0, t, panels);
      weight = 0.0;
      for (std::size_t i = 0; i < rule->nodes.size(); ++i)
        weight += rule->weights[i] * w.time_factor(rule->nodes[i], shear.period());
    }
    add_term_coeffs(w, weight, lmax, out);
  }
  return out;
}

// ---------------------------------------------------------------------------

FlowSpec::FlowSpec(std::vector<WaveTerm> stream_terms, double period, std::optional<Bounds> declared)
    : terms_(std::move(stream_terms)), period_(period) {
  if (!(period_ > 0.0)) throw std::invalid_argument("flow period must be positive");
  for (const auto& t : terms_) {
    if (t.harmonic < 1) throw std::invalid_argument("time harmonic must be >= 1");
    if (!std::isfinite(t.ampl)) throw std::invalid_argument("stream amplitude is not finite");
  }
  kind_ = any_time_dependent(terms_) ? TimeKind::periodic : TimeKind::steady;
  bounds_ = declared.value_or(triangle_bounds(terms_, false));

  if (declared) {
    constexpr int n = 64;
    double sup_u = 0.0, lip = 0.0;
    for (double th : validation_times(kind_, period_)) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double x = 2.0 * pi * i / n, y = 2.0 * pi * j / n;
          double ux = 0.0, uy = 0.0, g[4] = {0.0, 0.0, 0.0, 0.0};
          for (const auto& w : terms_) {
            const double ph = w.kx * x + w.ky * y, tf = w.ampl * w.time_factor(th, period_);
            // d(trig)/dph and d^2(trig)/dph^2
            const double d1 = w.trig == Trig::cos ? -std::sin(ph) : std::cos(ph);
            const double d2 = w.trig == Trig::cos ? -std::cos(ph) : -std::sin(ph);
            ux += -tf * w.ky * d1;
            uy += tf * w.kx * d1;
            g[0] += -tf * w.ky * w.kx * d2;
            g[1] += -tf * w.ky * w.ky * d2;
            g[2] += tf * w.kx * w.kx * d2;
            g[3] += tf * w.kx * w.ky * d2;
          }
          const double u = std::hypot(ux, uy);
          sup_u = std::max(sup_u, u);
          lip = std::max(lip, u + std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]));
        }
    }
    check_declared(bounds_.M, sup_u, "M");
    check_declared(bounds_.lip, lip, "lip");
  }
}

int FlowSpec::band_x() const {
  int b = 0;
  for (const auto& t : terms_) b = std::max(b, std::abs(t.kx));
  return b;
}

int FlowSpec::band_y() const {
  int b = 0;
  for (const auto& t : terms_) b = std::max(b, std::abs(t.ky));
  return b;
}

spectral::Lattice FlowSpec::band_lattice() const {
  return spectral::Lattice(std::max(1, band_x()), std::max(1, band_y()));
}

double FlowSpec::stream(double theta, double x, double y) const {
  double s = 0.0;
  for (const auto& w : terms_) s += w.spatial(x, y) * w.time_factor(theta, period_);
  return s;
}

std::pair<double, double> FlowSpec::velocity(double theta, double x, double y) const {
  double ux = 0.0, uy = 0.0;
  for (const auto& w : terms_) {
    const double ph = w.kx * x + w.ky * y, tf = w.ampl * w.time_factor(theta, period_);
    const double d1 = w.trig == Trig::cos ? -std::sin(ph) : std::cos(ph);
    ux += -tf * w.ky * d1;
    uy += tf * w.kx * d1;
  }
  return {ux, uy};
}

spectral::SpectralField2D FlowSpec::stream_coeffs(double theta, spectral::Lattice lattice) const {
  spectral::SpectralField2D psi(lattice);
  for (const auto& w : terms_) {
    if (w.kx == 0 && w.ky == 0) continue;  // constants carry no velocity
    const double tf = w.time_factor(theta, period_);
    if (w.trig == Trig::cos)
      psi.add_cos(w.ampl * tf, w.kx, w.ky);
    else
      psi.add_sin(w.ampl * tf, w.kx, w.ky);
  }
  return psi;
}

nlohmann::json FlowSpec::to_json() const {
  return {{"kind", "flow2d"}, {"terms", terms_json(terms_)}, {"bounds", bounds_json(bounds_)}, {"period", period_}};
}

SteadyVelocity velocity_from_stream(const spectral::SpectralField2D& psi) {
  const auto& lat = psi.lattice();
  SteadyVelocity v{psi, spectral::SpectralField2D(lat), spectral::SpectralField2D(lat)};
  for (int k = -lat.kmax; k <= lat.kmax; ++k)
    for (int l = -lat.lmax; l <= lat.lmax; ++l) {
      v.ux(k, l) = cplx(0.0, -l) * psi(k, l);
      v.uy(k, l) = cplx(0.0, k) * psi(k, l);
    }
  return v;
}

SteadyVelocity time_average(const FlowSpec& flow, int panels) {
  const auto lat = flow.band_lattice();
  if (flow.time_kind() == TimeKind::steady) return velocity_from_stream(flow.stream_coeffs(0.0, lat));
  const auto rule = quad::composite_gauss_legendre(0.0, flow.period(), panels);
  spectral::SpectralField2D psi(lat);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    auto s = flow.stream_coeffs(rule.nodes[i], lat);
    s *= rule.weights[i] / flow.period();
    psi += s;
  }
  return velocity_from_stream(psi);
}

FlowSpec shear_as_flow(const ShearSpec& shear) {
  if (shear.time_kind() != TimeKind::steady) throw std::invalid_argument("shear_as_flow: shear must be steady");
  if (!shear.is_mean_zero()) throw std::invalid_argument("shear_as_flow: a y-constant drift has no periodic streamfunction");
  // u_x = -d_y psi = U: a cos(ky y) <- psi = -(a/ky) sin(ky y); a sin(ky y) <- psi = (a/ky) cos(ky y)
  std::vector<WaveTerm> terms;
  for (const auto& w : shear.terms()) {
    if (w.ky == 0) continue;
    WaveTerm s = w;
    if (w.trig == Trig::cos) {
      s.trig = Trig::sin;
      s.ampl = -w.ampl / w.ky;
    } else {
      s.trig = Trig::cos;
      s.ampl = w.ampl / w.ky;
    }
    terms.push_back(s);
  }
  return FlowSpec(std::move(terms), 1.0);
}

// ---------------------------------------------------------------------------

namespace {

Trig parse_trig(const nlohmann::json& j, const std::string& path) {
  const auto s = j.get<std::string>();
  if (s == "cos") return Trig::cos;
  if (s == "sin") return Trig::sin;
  throw std::invalid_argument(path + ": expected \"cos\" or \"sin\", got \"" + s + "\"");
}

TimeMode parse_time(const nlohmann::json& j, const std::string& path) {
  const auto s = j.get<std::string>();
  if (s == "steady") return TimeMode::steady;
  if (s == "cos") return TimeMode::cos;
  if (s == "sin") return TimeMode::sin;
  throw std::invalid_argument(path + ": expected \"steady\", \"cos\" or \"sin\", got \"" + s + "\"");
}

std::vector<WaveTerm> parse_terms(const nlohmann::json& j, const std::string& path) {
  if (!j.contains("terms")) throw std::invalid_argument(path + ".terms: missing field");
  if (!j.at("terms").is_array()) throw std::invalid_argument(path + ".terms: expected an array");
  std::vector<WaveTerm> out;
  std::size_t i = 0;
  for (const auto& e : j.at("terms")) {
    const std::string p = path + ".terms[" + std::to_string(i++) + "]";
    if (!e.contains("ampl")) throw std::invalid_argument(p + ".ampl: missing field");
    WaveTerm w;
    w.ampl = e.at("ampl").get<double>();
    w.kx = e.value("kx", 0);
    w.ky = e.value("ky", 0);
    if (e.contains("phase_mode")) w.trig = parse_trig(e.at("phase_mode"), p + ".phase_mode");
    if (e.contains("time_mode")) w.time = parse_time(e.at("time_mode"), p + ".time_mode");
    w.harmonic = e.value("harmonic", 1);
    out.push_back(w);
  }
  return out;
}

std::optional<Bounds> parse_bounds(const nlohmann::json& j) {
  if (!j.contains("bounds")) return std::nullopt;
  const auto& b = j.at("bounds");
  Bounds out;
  out.M = b.value("M", 0.0);
  out.w11 = b.value("w11", 0.0);
  out.lip = b.value("lip", 0.0);
  return out;
}

}  // namespace

ShearSpec shear_preset(const std::string& name) {
  if (name == "couette") return ShearSpec({WaveTerm{1.0, 0, 1, Trig::sin}});
  if (name == "zero") return ShearSpec(std::vector<WaveTerm>{});
  throw std::invalid_argument("unknown shear preset \"" + name + "\" (known: couette, zero)");
}

FlowSpec flow_preset(const std::string& name) {
  // sin x sin y = (cos(x - y) - cos(x + y)) / 2
  if (name == "cellular") return FlowSpec({WaveTerm{0.5, 1, -1, Trig::cos}, WaveTerm{-0.5, 1, 1, Trig::cos}}, 1.0);
  if (name == "couette") return shear_as_flow(shear_preset("couette"));
  if (name == "zero") return FlowSpec(std::vector<WaveTerm>{}, 1.0);
  throw std::invalid_argument("unknown flow preset \"" + name + "\" (known: cellular, couette, zero)");
}

ShearSpec shear_from_json(const nlohmann::json& j) {
  if (j.is_string()) return shear_preset(j.get<std::string>());
  if (j.contains("preset")) return shear_preset(j.at("preset").get<std::string>());
  if (j.value("kind", std::string("shear")) != "shear") throw std::invalid_argument("shear.kind: expected \"shear\"");
  return ShearSpec(parse_terms(j, "shear"), j.value("period", 0.0), parse_bounds(j));
}

FlowSpec flow_from_json(const nlohmann::json& j) {
  if (j.is_string()) return flow_preset(j.get<std::string>());
  if (j.contains("preset")) return flow_preset(j.at("preset").get<std::string>());
  const auto kind = j.value("kind", std::string("flow2d"));
  if (kind == "shear") return shear_as_flow(shear_from_json(j));
  if (kind != "flow2d") throw std::invalid_argument("flow.kind: expected \"shear\" or \"flow2d\"");
  return FlowSpec(parse_terms(j, "flow"), j.value("period", 1.0), parse_bounds(j));
}

}  // namespace mixlab::flows
