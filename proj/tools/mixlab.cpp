// mixlab command-line driver.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mixlab/mixlab.hpp"

using namespace mixlab;
using nlohmann::json;

namespace {

struct Common {
  std::string scenario;
  std::string out;
  std::string csv;
  std::optional<double> dt, nu, eta;
  std::optional<int> cutoff;
};

harness::Scenario load(const std::string& arg) {
  // A path to a file, or the name of a built-in scenario.
  std::ifstream probe(arg);
  if (probe) return harness::load_scenario(arg);
  for (const auto& n : harness::builtin_names())
    if (n == arg) return harness::builtin_scenario(n);
  throw std::runtime_error(arg + ": no such file or built-in scenario");
}

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream os(out);
  if (!os) throw std::runtime_error(out + ": cannot write");
  os << j.dump(2) << "\n";
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error(path + ": cannot write");
  os.precision(17);
  return os;
}

void trajectory_csv(const std::string& path, const std::vector<double>& times,
                    const std::vector<spectral::SpectralField2D>& fields, int kreport) {
  auto os = open_csv(path);
  os << "t,l2,hneg1,mix_scale";
  for (int k = -kreport; k <= kreport; ++k) os << ",E_" << k;
  os << "\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto& f = fields[i];
    const double l2 = spectral::l2_norm(f);
    const double h = spectral::hneg1_norm(f);
    os << times[i] << ',' << l2 << ',' << h << ',' << (l2 > 0.0 ? h / l2 : 0.0);
    const auto e = spectral::mode_energies(f);
    for (int k = -kreport; k <= kreport; ++k) {
      const bool inside = std::abs(k) <= f.lattice().kmax;
      os << ',' << (inside ? e[static_cast<std::size_t>(k + f.lattice().kmax)] : 0.0);
    }
    os << "\n";
  }
}

int cmd_simulate(const Common& c, int kreport) {
  const auto s = load(c.scenario);
  std::vector<spectral::SpectralField2D> fields;
  switch (s.regime) {
    case harness::Regime::inviscid: {
      const auto red = flows::mean_zero_reduce(*s.shear);
      for (double t : s.times) fields.push_back(inviscid::evolve_inviscid(s.initial, red.shear, t));
      break;
    }
    case harness::Regime::diffusive_shear: {
      shear::EvolveOptions eo;
      eo.dt = c.dt.value_or(s.dt);
      eo.lmax = s.lmax_evolve;
      fields = shear::evolve_shear(s.initial, flows::mean_zero_reduce(*s.shear).shear, c.nu.value_or(*s.nu), s.times, eo)
                   .fields;
      break;
    }
    case harness::Regime::fast_oscillation: {
      averaging::Evolve2DOptions eo;
      eo.dt = c.dt.value_or(s.dt);
      fields = averaging::evolve_2d(s.initial, *s.flow, s.A, c.nu.value_or(*s.nu), s.times, eo).fields;
      break;
    }
  }
  const int kr = kreport >= 0 ? kreport : s.lattice.kmax;
  if (!c.csv.empty()) trajectory_csv(c.csv, s.times, fields, kr);
  json samples = json::array();
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    const double l2 = spectral::l2_norm(fields[i]);
    const double h = spectral::hneg1_norm(fields[i]);
    samples.push_back({{"t", s.times[i]}, {"l2", l2}, {"hneg1", h}, {"mix_scale", l2 > 0.0 ? h / l2 : 0.0}});
  }
  emit({{"scenario", s.name},
        {"regime", harness::regime_name(s.regime)},
        {"samples", samples},
        {"final", spectral::to_json(fields.back())}},
       c.out);
  return 0;
}

int cmd_certify(const std::string& kind, const Common& c, const std::vector<double>& nus) {
  const auto s = load(c.scenario);
  if (kind == "inviscid") {
    if (!s.shear) throw std::runtime_error("certify inviscid: scenario has no shear");
    const auto red = flows::mean_zero_reduce(*s.shear);
    emit(inviscid::inviscid_certificate(s.initial, red.shear, s.safety).to_json(), c.out);
    return 0;
  }
  if (kind == "c2" || kind == "mix") {
    if (!s.shear) throw std::runtime_error("certify " + kind + ": scenario has no shear");
    const double nu = c.nu ? *c.nu : s.nu ? *s.nu : throw std::runtime_error("certify: --nu required");
    const double M = flows::mean_zero_reduce(*s.shear).shear.M();
    const auto c2 = cert::c2_certificate(s.initial, M, nu);
    if (kind == "c2") {
      emit(c2.to_json(), c.out);
    } else {
      emit(cert::mixing_certificate(s.initial, M, nu, c2.c2).to_json(), c.out);
    }
    if (!c.csv.empty()) {
      std::vector<double> list = nus;
      if (list.empty())
        for (double f : {1.0, 0.5, 0.25, 0.125}) list.push_back(nu * f);
      auto os = open_csv(c.csv);
      os << "nu,c2,c2_times_nu,c2_over_nu,branch\n";
      for (const auto& r : cert::nu_scaling_report(s.initial, M, list))
        os << r.nu << ',' << r.c2 << ',' << r.c2_times_nu << ',' << r.c2_over_nu << ',' << cert::branch_name(r.branch)
           << "\n";
    }
    return 0;
  }
  if (kind == "fast") {
    if (!s.flow) throw std::runtime_error("certify fast: scenario has no flow");
    const double nu = c.nu.value_or(*s.nu);
    const double eta = c.eta.value_or(s.eta > 0.0 ? s.eta : averaging::small_viscosity_eta(nu));
    const int cutoff = c.cutoff.value_or(s.cutoff);
    const auto est = averaging::estimate_fast(*s.flow, s.initial, nu, eta, cutoff);
    auto fc = averaging::fast_certificate(*s.flow, s.initial, nu, eta, est);
    fc.basis += "; cutoff " + std::to_string(cutoff);
    json j = fc.to_json();
    j["sylvester"] = est.sylvester.to_json();
    j["damping"] = {{"D", est.damping.D}, {"similarity_bound", est.damping.similarity_bound}};
    emit(j, c.out);
    return 0;
  }
  throw std::runtime_error("certify: unknown kind \"" + kind + "\" (inviscid, c2, mix, fast)");
}

int cmd_verify(const Common& c, const std::string& regime) {
  const auto s = load(c.scenario);
  if (!regime.empty() && regime != harness::regime_name(s.regime) &&
      !(regime == "shear" && s.regime == harness::Regime::diffusive_shear) &&
      !(regime == "fast" && s.regime == harness::Regime::fast_oscillation))
    throw std::runtime_error("verify " + regime + ": scenario regime is " + harness::regime_name(s.regime));
  harness::RunOptions o;
  o.dt = c.dt;
  o.nu = c.nu;
  o.eta = c.eta;
  o.cutoff = c.cutoff;
  const auto rep = harness::run(s, o);
  emit(rep.to_json(), c.out);
  if (!c.csv.empty()) {
    auto os = open_csv(c.csv);
    os << "check,t,l2,hneg1,measured,envelope,margin\n";
    for (const auto& r : rep.checks)
      for (std::size_t i = 0; i < r.samples.size(); ++i) {
        const auto& p = r.samples[i];
        os << r.check << ',' << p.t << ',' << rep.series[i][1] << ',' << rep.series[i][2] << ',' << p.measured << ','
           << p.envelope << ',' << p.margin << "\n";
      }
  }
  std::cerr << rep.scenario << ": " << (rep.pass() ? "PASS" : "FAIL") << "\n";
  return rep.pass() ? 0 : 1;
}

int cmd_sharpness(const Common& c, double p, double t_end, int count) {
  const double nu = c.nu.value_or(0.25);
  const auto sc = cert::sharpness_family(nu, p);
  const auto c2 = cert::c2_certificate(sc.rho0, 0.0, nu);
  const auto mix = cert::mixing_certificate(sc.rho0, 0.0, nu, c2.c2);
  std::vector<double> times;
  for (int i = 0; i < count; ++i) times.push_back(count == 1 ? t_end : t_end * i / (count - 1));
  const auto traj = shear::evolve_shear(sc.rho0, flows::shear_preset("zero"), nu, times);
  const auto rep = cert::check_mixing_bound(traj, mix);
  json ratios = json::array();
  for (const auto& f : traj.fields) ratios.push_back(spectral::mixing_scale(f));
  if (!c.csv.empty()) trajectory_csv(c.csv, traj.times, traj.fields, 0);
  emit({{"nu", nu},
        {"p", p},
        {"n", sc.n},
        {"expected_ratio", sc.expected_ratio},
        {"expected_c_star", sc.expected_c_star},
        {"c_star", mix.c_star},
        {"decay_rate", sc.decay_rate},
        {"decay_window", p == 1.0 ? json(sc.decay_window) : json(nullptr)},
        {"ratios", ratios},
        {"report", rep.to_json(false)}},
       c.out);
  return rep.pass ? 0 : 1;
}

int cmd_spectrum(const Common& c, const std::vector<int>& sweep) {
  const auto s = load(c.scenario);
  flows::FlowSpec flow = s.flow ? *s.flow : flows::shear_as_flow(flows::mean_zero_reduce(*s.shear).shear);
  const double nu = c.nu ? *c.nu : s.nu ? *s.nu : throw std::runtime_error("spectrum: --nu required");
  const int cutoff = c.cutoff.value_or(std::max({s.cutoff, s.lattice.kmax, s.lattice.lmax}));
  const auto op = averaging::averaged_operator(flow, nu, cutoff);
  const auto ds = averaging::detecting_spectrum(op, s.initial);
  json j = ds.to_json(static_cast<std::size_t>(64));
  j["cutoff"] = cutoff;
  j["band_warning"] = op.band_warning();
  if (!sweep.empty()) {
    json rows = json::array();
    for (int k : sweep) {
      const auto d = averaging::detecting_spectrum(averaging::averaged_operator(flow, nu, k), s.initial);
      rows.push_back({{"cutoff", k},
                      {"lambda_nu", {d.lambda_nu.real(), d.lambda_nu.imag()}},
                      {"d_nu", d.d_nu},
                      {"Q_nu", d.Q_nu},
                      {"max_residual", d.max_residual}});
    }
    j["cutoff_convergence"] = rows;
  }
  emit(j, c.out);
  return 0;
}

int cmd_corpus(const std::string& dir, const std::string& out) {
  const auto summary = harness::corpus_run(dir, out.empty() ? std::nullopt : std::optional<std::filesystem::path>(out));
  harness::write_summary_csv(summary, std::cout);
  std::cerr << summary.count("PASS") << " PASS, " << summary.count("FAIL") << " FAIL, " << summary.count("ERROR")
            << " ERROR\n";
  return summary.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixlab: mixing-rate certificates for passive scalars on the torus"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* sub, bool scenario_required) {
    auto* o = sub->add_option("--scenario", c.scenario, "scenario JSON file or built-in name");
    if (scenario_required) o->required();
    sub->add_option("--out", c.out, "write JSON here instead of stdout");
    sub->add_option("--csv", c.csv, "CSV output path");
    sub->add_option("--dt", c.dt, "time step override");
    sub->add_option("--nu", c.nu, "viscosity override");
    sub->add_option("--eta", c.eta, "damping margin in (0, 1]");
    sub->add_option("--cutoff", c.cutoff, "averaged-operator truncation");
  };

  int kreport = -1;
  auto* sim = app.add_subcommand("simulate", "evolve a scenario and write the trajectory");
  add_common(sim, true);
  sim->add_option("--kreport", kreport, "report E_k for |k| <= kreport (default: lattice kmax)");

  std::string kind;
  std::vector<double> nus;
  auto* certify = app.add_subcommand("certify", "print a certificate");
  certify->add_option("kind", kind, "inviscid | c2 | mix | fast")->required();
  add_common(certify, true);
  certify->add_option("--nus", nus, "viscosities for the --csv scaling table (comma-separated)")->delimiter(',');

  std::string verify_regime;
  auto* verify = app.add_subcommand("verify", "certify, evolve and check a scenario");
  verify->add_option("regime", verify_regime, "optional: inviscid | shear | fast (must match the scenario)");
  add_common(verify, true);

  double p = 1.0, t_end = 2.0;
  int count = 21;
  auto* sharp = app.add_subcommand("sharpness", "heat-eigenfunction sharpness family");
  add_common(sharp, false);
  sharp->add_option("--p", p, "exponent p > 0");
  sharp->add_option("--t-end", t_end, "final time");
  sharp->add_option("--count", count, "number of samples");

  std::vector<int> sweep;
  auto* spectrum = app.add_subcommand("spectrum", "averaged-operator eigenvalues and detecting cluster");
  add_common(spectrum, true);
  spectrum->add_option("--sweep", sweep, "also report the detecting cluster at these cutoffs");

  std::string dir;
  auto* corpus = app.add_subcommand("corpus", "run every scenario in a directory");
  corpus->add_option("dir", dir, "scenario directory")->required();
  corpus->add_option("--out", c.out, "directory for summary.csv and per-scenario reports");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return cmd_simulate(c, kreport);
    if (*certify) return cmd_certify(kind, c, nus);
    if (*verify) return cmd_verify(c, verify_regime);
    if (*sharp) return cmd_sharpness(c, p, t_end, count);
    if (*spectrum) return cmd_spectrum(c, sweep);
    if (*corpus) return cmd_corpus(dir, c.out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
