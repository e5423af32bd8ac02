#include "mixlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mixlab/averaging.hpp"
#include "mixlab/certificates.hpp"
#include "mixlab/inviscid.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/shear_diffusion.hpp"

namespace mixlab::harness {

namespace fs = std::filesystem;
using nlohmann::json;

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::inviscid: return "inviscid";
    case Regime::diffusive_shear: return "diffusive_shear";
    case Regime::fast_oscillation: return "fast_oscillation";
  }
  return "?";
}

namespace {

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path.empty() ? "<root>" : path, "expected an object");
  if (!j.contains(key) || j.at(key).is_null())
    throw SchemaError(path.empty() ? key : path + "." + key, "missing field");
  return j.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "expected a finite number");
  return v;
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  return j.get<int>();
}

// Library validation errors from flows:: already carry a field path; wrap them as schema errors.
template <class F>
auto with_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) {
      const auto colon = what.find(": ");
      throw SchemaError(what.substr(0, colon), colon == std::string::npos ? what : what.substr(colon + 2));
    }
    throw SchemaError(path, what);
  } catch (const json::exception& e) {
    throw SchemaError(path, e.what());
  }
}

std::vector<double> parse_times(const json& j) {
  std::vector<double> t;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) t.push_back(number(j[i], "times[" + std::to_string(i) + "]"));
  } else if (j.is_object()) {
    const double a = number(require(j, "start", "times"), "times.start");
    const double b = number(require(j, "stop", "times"), "times.stop");
    const int n = integer(require(j, "count", "times"), "times.count");
    if (n < 1) throw SchemaError("times.count", "must be >= 1");
    if (n == 1) {
      t.push_back(b);
    } else {
      for (int i = 0; i < n; ++i) t.push_back(a + (b - a) * i / (n - 1));
    }
  } else {
    throw SchemaError("times", "expected an array or {start, stop, count}");
  }
  if (t.empty()) throw SchemaError("times", "must not be empty");
  double prev = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] >= prev)) throw SchemaError("times[" + std::to_string(i) + "]", "times must be >= 0 and nondecreasing");
    prev = t[i];
  }
  return t;
}

spectral::SpectralField2D parse_initial(const json& j, std::optional<spectral::Lattice> lattice) {
  if (j.contains("field")) {
    auto f = with_path("initial.field", [&] { return spectral::field_from_json(j.at("field")); });
    return lattice ? f.resized(*lattice) : f;
  }
  const auto& terms = require(j, "terms", "initial");
  if (!terms.is_array()) throw SchemaError("initial.terms", "expected an array");
  if (!lattice) throw SchemaError("lattice", "missing field");
  spectral::SpectralField2D f(*lattice);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string p = "initial.terms[" + std::to_string(i) + "]";
    const auto& e = terms[i];
    const double a = number(require(e, "ampl", p), p + ".ampl");
    const int kx = e.contains("kx") ? integer(e.at("kx"), p + ".kx") : 0;
    const int ky = e.contains("ky") ? integer(e.at("ky"), p + ".ky") : 0;
    if (!lattice->contains(kx, ky)) throw SchemaError(p, "wavevector outside the lattice");
    const std::string trig = e.value("phase_mode", std::string("cos"));
    if (trig == "cos") {
      f.add_cos(a, kx, ky);
    } else if (trig == "sin") {
      f.add_sin(a, kx, ky);
    } else {
      throw SchemaError(p + ".phase_mode", "expected \"cos\" or \"sin\"");
    }
  }
  return f;
}

Regime parse_regime(const json& j) {
  const std::string s = j.get<std::string>();
  if (s == "inviscid") return Regime::inviscid;
  if (s == "diffusive_shear") return Regime::diffusive_shear;
  if (s == "fast_oscillation") return Regime::fast_oscillation;
  throw SchemaError("regime", "expected inviscid, diffusive_shear or fast_oscillation, got \"" + s + "\"");
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("<root>", "expected an object");
  Scenario s;
  const auto& name = require(j, "name", "");
  if (!name.is_string()) throw SchemaError("name", "expected a string");
  s.name = name.get<std::string>();

  const bool has_nu = j.contains("nu") && !j.at("nu").is_null();
  if (j.contains("regime")) {
    if (!j.at("regime").is_string()) throw SchemaError("regime", "expected a string");
    s.regime = parse_regime(j.at("regime"));
  } else {
    s.regime = !has_nu ? Regime::inviscid : j.contains("flow") ? Regime::fast_oscillation : Regime::diffusive_shear;
  }

  std::optional<spectral::Lattice> lat;
  if (j.contains("lattice")) {
    const auto& l = j.at("lattice");
    const int kmax = integer(require(l, "kmax", "lattice"), "lattice.kmax");
    const int lmax = integer(require(l, "lmax", "lattice"), "lattice.lmax");
    if (kmax < 1 || lmax < 1) throw SchemaError("lattice", "cutoffs must be >= 1");
    lat = spectral::Lattice(kmax, lmax);
  }
  s.initial = parse_initial(require(j, "initial", ""), lat);
  s.lattice = s.initial.lattice();
  if (s.initial.is_zero()) throw SchemaError("initial", "datum is zero");
  if (!s.initial.is_mean_zero()) throw SchemaError("initial", "datum must have zero mean");

  if (s.regime == Regime::inviscid) {
    if (has_nu) throw SchemaError("nu", "must be absent for regime inviscid");
  } else {
    s.nu = number(require(j, "nu", ""), "nu");
    if (!(*s.nu > 0.0)) throw SchemaError("nu", "must be > 0");
  }
  if (s.regime == Regime::fast_oscillation) {
    const auto& f = require(j, "flow", "");
    s.flow = with_path("flow", [&] { return flows::flow_from_json(f); });
    s.A = number(require(j, "A", ""), "A");
    if (s.A < 0.0) throw SchemaError("A", "must be >= 0");
    if (j.contains("eta")) {
      s.eta = number(j.at("eta"), "eta");
      if (!(s.eta > 0.0 && s.eta <= 1.0)) throw SchemaError("eta", "must lie in (0, 1]");
    }
    if (j.contains("cutoff")) {
      s.cutoff = integer(j.at("cutoff"), "cutoff");
      if (s.cutoff < std::max(s.lattice.kmax, s.lattice.lmax))
        throw SchemaError("cutoff", "must be >= the lattice cutoffs");
    } else {
      s.cutoff = std::max({16, s.lattice.kmax, s.lattice.lmax});
    }
  } else {
    if (j.contains("flow")) throw SchemaError("flow", "only valid for regime fast_oscillation");
    const auto& sh = require(j, "shear", "");
    s.shear = with_path("shear", [&] { return flows::shear_from_json(sh); });
  }

  s.times = parse_times(require(j, "times", ""));
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    if (t.contains("margin")) s.tol = number(t.at("margin"), "tolerances.margin");
    if (!(s.tol >= 0.0 && s.tol < 1.0)) throw SchemaError("tolerances.margin", "must lie in [0, 1)");
  }
  if (j.contains("dt")) {
    s.dt = number(j.at("dt"), "dt");
    if (!(s.dt > 0.0)) throw SchemaError("dt", "must be > 0");
  }
  if (j.contains("lmax_evolve")) {
    s.lmax_evolve = integer(j.at("lmax_evolve"), "lmax_evolve");
    if (s.lmax_evolve != 0 && s.lmax_evolve < s.lattice.lmax)
      throw SchemaError("lmax_evolve", "must be >= lattice.lmax");
  }
  if (j.contains("safety")) {
    s.safety = number(j.at("safety"), "safety");
    if (!(s.safety >= 1.0)) throw SchemaError("safety", "must be >= 1");
  }
  return s;
}

Scenario load_scenario(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error(file.string() + ": cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

// ---------------------------------------------------------------------------

namespace {

const char* kBuiltins[][2] = {
    {"heat_cosy", R"({
  "name": "heat_cosy", "regime": "diffusive_shear",
  "lattice": {"kmax": 1, "lmax": 4},
  "initial": {"terms": [{"ampl": 1, "ky": 1, "phase_mode": "cos"}]},
  "shear": "zero", "nu": 0.1,
  "times": {"start": 0, "stop": 10, "count": 21}
})"},
    {"sharpness_p1_nu025", R"({
  "name": "sharpness_p1_nu025", "regime": "diffusive_shear",
  "lattice": {"kmax": 1, "lmax": 4},
  "initial": {"terms": [{"ampl": 1, "ky": 4, "phase_mode": "cos"}]},
  "shear": "zero", "nu": 0.25,
  "times": {"start": 0, "stop": 2, "count": 21}
})"},
    {"inviscid_cosx_siny", R"({
  "name": "inviscid_cosx_siny", "regime": "inviscid",
  "lattice": {"kmax": 1, "lmax": 8},
  "initial": {"terms": [{"ampl": 1, "kx": 1, "phase_mode": "cos"}]},
  "shear": {"kind": "shear", "terms": [{"ampl": 1, "ky": 1, "phase_mode": "sin"}]},
  "times": {"start": 0, "stop": 50, "count": 200}
})"},
    {"fast_cellular", R"({
  "name": "fast_cellular", "regime": "fast_oscillation",
  "lattice": {"kmax": 8, "lmax": 8},
  "initial": {"terms": [{"ampl": 1, "kx": 1, "phase_mode": "cos"}, {"ampl": 0.5, "ky": 2, "phase_mode": "sin"}]},
  "flow": {"kind": "flow2d", "period": 1, "terms": [
    {"ampl": 0.5, "kx": 1, "ky": -1, "phase_mode": "cos", "time_mode": "sin"},
    {"ampl": -0.5, "kx": 1, "ky": 1, "phase_mode": "cos", "time_mode": "sin"}]},
  "nu": 0.5, "A": 100, "cutoff": 8,
  "times": {"start": 0, "stop": 2, "count": 11}
})"},
};

}  // namespace

std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& b : kBuiltins) out.emplace_back(b[0]);
  return out;
}

json builtin_json(const std::string& name) {
  for (const auto& b : kBuiltins)
    if (name == b[0]) return json::parse(b[1]);
  throw std::invalid_argument("unknown built-in scenario \"" + name + "\"");
}

Scenario builtin_scenario(const std::string& name) { return scenario_from_json(builtin_json(name)); }

// ---------------------------------------------------------------------------

bool ScenarioReport::pass() const {
  if (checks.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const BoundReport& r) { return r.pass && r.aux_pass(); });
}

double ScenarioReport::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : checks) m = std::min(m, c.min_margin);
  return m;
}

const BoundReport* ScenarioReport::find(const std::string& check) const {
  for (const auto& c : checks)
    if (c.check == check) return &c;
  return nullptr;
}

json ScenarioReport::to_json(bool with_runtime) const {
  json cs = json::array();
  for (const auto& c : checks) cs.push_back(c.to_json(with_runtime));
  json j = {{"scenario", scenario},
            {"regime", regime_name(regime)},
            {"verdict", pass() ? "PASS" : "FAIL"},
            {"min_margin", checks.empty() ? 0.0 : min_margin()},
            {"checks", cs},
            {"extra", extra}};
  if (with_runtime) j["runtime_s"] = runtime_s;
  return j;
}

namespace {

json damping_json(const averaging::DampingResult& d) {
  return {{"D", d.D},
          {"sampled_sup", d.sampled_sup},
          {"t_argmax", d.t_argmax},
          {"T_sup", d.T_sup},
          {"tail_bound", d.tail_bound},
          {"similarity_bound", d.similarity_bound},
          {"nilpotency", d.nilpotency},
          {"cond_S", d.cond_S},
          {"eta_eff", d.eta_eff}};
}

void record_series(const std::vector<double>& times, const std::vector<spectral::SpectralField2D>& fields,
                   ScenarioReport& out) {
  for (std::size_t i = 0; i < times.size(); ++i)
    out.series.push_back({times[i], spectral::l2_norm(fields[i]), spectral::hneg1_norm(fields[i])});
}

void run_inviscid(const Scenario& s, ScenarioReport& out) {
  const auto red = flows::mean_zero_reduce(*s.shear);
  const auto cert = inviscid::inviscid_certificate(s.initial, red.shear, s.safety);
  out.checks.push_back(inviscid::check_inviscid_bound(s.initial, red.shear, cert, s.times, s.tol));
  // Transport conserves the L2 norm; the measured quantity is the H^-1 norm.
  const double l2 = spectral::l2_norm(s.initial);
  for (const auto& p : out.checks.back().samples) out.series.push_back({p.t, l2, p.measured});
  out.extra["drift_removed"] = !s.shear->is_mean_zero();
}

void run_shear(const Scenario& s, const RunOptions& o, ScenarioReport& out) {
  const double nu = o.nu.value_or(*s.nu);
  const auto red = flows::mean_zero_reduce(*s.shear);
  const auto c2 = cert::c2_certificate(s.initial, red.shear.M(), nu);
  const auto mix = cert::mixing_certificate(s.initial, red.shear.M(), nu, c2.c2);
  shear::EvolveOptions eo;
  eo.dt = o.dt.value_or(s.dt);
  eo.lmax = s.lmax_evolve;
  const auto traj = shear::evolve_shear(s.initial, red.shear, nu, s.times, eo);
  out.checks.push_back(cert::check_exponential_bound(traj, c2, s.tol));
  out.checks.push_back(cert::check_mixing_bound(traj, mix, s.tol));
  out.extra["drift_removed"] = !s.shear->is_mean_zero();
  out.extra["nu"] = nu;
  record_series(traj.times, traj.fields, out);
  if (traj.times.size() >= 2) out.extra["dissipation_max_residual"] = shear::dissipation_report(traj).max_residual;
}

void run_fast(const Scenario& s, const RunOptions& o, ScenarioReport& out) {
  const double nu = o.nu.value_or(*s.nu);
  const double eta = o.eta.value_or(s.eta > 0.0 ? s.eta : averaging::small_viscosity_eta(nu));
  const int cutoff = o.cutoff.value_or(s.cutoff);
  if (cutoff < std::max(s.lattice.kmax, s.lattice.lmax))
    throw std::invalid_argument("cutoff must be >= the lattice cutoffs");
  const auto op = averaging::averaged_operator(*s.flow, nu, cutoff);
  averaging::FastEstimates est;
  est.spectrum = averaging::detecting_spectrum(op, s.initial);
  est.damping = averaging::damping_constant(est.spectrum.G, est.spectrum.gamma_nu, eta);
  est.sylvester = averaging::sylvester_constant(op, est.spectrum);
  auto fc = averaging::fast_certificate(*s.flow, s.initial, nu, eta, est);
  fc.basis += "; cutoff " + std::to_string(cutoff);
  averaging::Evolve2DOptions eo;
  eo.dt = o.dt.value_or(s.dt);
  const auto traj = averaging::evolve_2d(s.initial, *s.flow, s.A, nu, s.times, eo);
  out.checks.push_back(averaging::check_fast_bound(traj, fc, s.tol));
  record_series(traj.times, traj.fields, out);
  out.extra["nu"] = nu;
  out.extra["cutoff"] = cutoff;
  out.extra["band_warning"] = op.band_warning();
  out.extra["spectrum"] = est.spectrum.to_json(16);
  out.extra["damping"] = damping_json(est.damping);
  out.extra["sylvester"] = est.sylvester.to_json();
}

}  // namespace

ScenarioReport run(const Scenario& s, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioReport out;
  out.scenario = s.name;
  out.regime = s.regime;
  switch (s.regime) {
    case Regime::inviscid: run_inviscid(s, out); break;
    case Regime::diffusive_shear: run_shear(s, opts, out); break;
    case Regime::fast_oscillation: run_fast(s, opts, out); break;
  }
  out.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (auto& c : out.checks) {
    c.scenario = s.name;
    c.runtime_s = out.runtime_s;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::size_t CorpusSummary::count(const std::string& status) const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [&](const CorpusRow& r) { return r.status == status; }));
}

int CorpusSummary::exit_code() const { return count("FAIL") + count("ERROR") > 0 ? 1 : 0; }

CorpusSummary corpus_run(const fs::path& dir, const std::optional<fs::path>& out_dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error(dir.string() + ": not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (out_dir) fs::create_directories(*out_dir);

  CorpusSummary summary;
  summary.rows.resize(files.size());
  parallel_for(files.size(), [&](std::size_t i) {
    CorpusRow& row = summary.rows[i];
    row.file = files[i].filename().string();
    try {
      const Scenario s = load_scenario(files[i]);
      row.scenario = s.name;
      row.regime = regime_name(s.regime);
      const ScenarioReport rep = run(s);
      row.status = rep.pass() ? "PASS" : "FAIL";
      row.checks = rep.checks.size();
      row.min_margin = rep.min_margin();
      row.aux_pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const BoundReport& r) { return r.aux_pass(); });
      row.runtime_s = rep.runtime_s;
      if (out_dir) {
        std::ofstream os(*out_dir / (files[i].stem().string() + ".report.json"));
        if (!os) throw std::runtime_error("cannot write report for " + row.file);
        os << rep.to_json().dump(2) << "\n";
      }
    } catch (const std::exception& e) {
      row.status = "ERROR";
      row.error = e.what();
    }
  });
  if (out_dir) {
    std::ofstream os(*out_dir / "summary.csv");
    if (!os) throw std::runtime_error((*out_dir / "summary.csv").string() + ": cannot write");
    write_summary_csv(summary, os);
  }
  return summary;
}

void write_summary_csv(const CorpusSummary& s, std::ostream& os) {
  auto quote = [](const std::string& v) {
    std::string q = "\"";
    for (char c : v) {
      if (c == '"') q += '"';
      q += c == '\n' ? ' ' : c;
    }
    return q + "\"";
  };
  os << "file,scenario,regime,status,checks,min_margin,aux_pass,runtime_s,error\n";
  char buf[64];
  for (const auto& r : s.rows) {
    os << quote(r.file) << ',' << quote(r.scenario) << ',' << r.regime << ',' << r.status << ',' << r.checks << ',';
    if (r.status == "ERROR") {
      os << ",,";
    } else {
      std::snprintf(buf, sizeof buf, "%.12g", r.min_margin);
      os << buf << ',' << (r.aux_pass ? "true" : "false") << ',';
      std::snprintf(buf, sizeof buf, "%.3f", r.runtime_s);
      os << buf;
    }
    os << ',' << quote(r.error) << '\n';
  }
}

}  // namespace mixlab::harness
