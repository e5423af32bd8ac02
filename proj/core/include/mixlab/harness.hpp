#pragma once

// Scenario files, the per-regime certify / evolve / check pipelines and corpus runs.
//
// Scenario JSON:
//   {name, regime: "inviscid"|"diffusive_shear"|"fast_oscillation",
//    lattice: {kmax, lmax}, initial: {terms: [...]} | {field: {...}},
//    shear | flow, nu?, A?, times: [..] | {start, stop, count},
//    tolerances?: {margin}, dt?, lmax_evolve?, eta?, cutoff?, safety?}

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixlab/flows.hpp"
#include "mixlab/report.hpp"
#include "mixlab/spectral.hpp"

namespace mixlab::harness {

enum class Regime { inviscid, diffusive_shear, fast_oscillation };

const char* regime_name(Regime r);

/// Thrown for malformed scenarios; what() starts with the offending field path.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& path, const std::string& msg)
      : std::runtime_error(path + ": " + msg), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct Scenario {
  std::string name;
  Regime regime = Regime::diffusive_shear;
  spectral::Lattice lattice;
  spectral::SpectralField2D initial;
  std::optional<flows::ShearSpec> shear;
  std::optional<flows::FlowSpec> flow;
  std::optional<double> nu;
  double A = 0.0;
  std::vector<double> times;
  double tol = 1e-6;
  double dt = 0.0;        // <= 0: solver default
  int lmax_evolve = 0;    // shear regime: finer y-lattice for the solver
  double eta = -1.0;      // fast regime; < 0: small_viscosity_eta(nu)
  int cutoff = 16;        // fast regime operator truncation
  double safety = 1.01;   // inviscid sampling inflation
};

Scenario scenario_from_json(const nlohmann::json& j);
/// Throws SchemaError (parse errors included) or std::runtime_error for I/O failures.
Scenario load_scenario(const std::filesystem::path& file);

/// Named scenarios compiled into the library.
std::vector<std::string> builtin_names();
nlohmann::json builtin_json(const std::string& name);
Scenario builtin_scenario(const std::string& name);

struct ScenarioReport {
  std::string scenario;
  Regime regime = Regime::diffusive_shear;
  std::vector<BoundReport> checks;
  nlohmann::json extra = nlohmann::json::object();
  /// (t, ||rho(t)||_2, hneg1(rho(t))) per sample; not serialized.
  std::vector<std::array<double, 3>> series;
  double runtime_s = 0.0;

  /// Every check passes its margin and its auxiliary inequalities.
  bool pass() const;
  double min_margin() const;
  const BoundReport* find(const std::string& check) const;
  nlohmann::json to_json(bool with_runtime = true) const;
};

struct RunOptions {
  std::optional<double> dt;
  std::optional<double> nu;
  std::optional<double> eta;
  std::optional<int> cutoff;
};

/// Certify, evolve and check according to the scenario's regime. Deterministic.
ScenarioReport run(const Scenario& s, const RunOptions& opts = {});

struct CorpusRow {
  std::string file;
  std::string scenario;
  std::string regime;
  std::string status;  // PASS, FAIL or ERROR
  std::size_t checks = 0;
  double min_margin = 0.0;
  bool aux_pass = false;
  double runtime_s = 0.0;
  std::string error;
};

struct CorpusSummary {
  std::vector<CorpusRow> rows;
  std::size_t count(const std::string& status) const;
  /// 0 iff no row is FAIL or ERROR.
  int exit_code() const;
};

/// Runs every *.json in `dir` (sorted by file name, in parallel). Writes
/// out_dir/summary.csv and out_dir/<stem>.report.json per scenario when out_dir is set.
CorpusSummary corpus_run(const std::filesystem::path& dir, const std::optional<std::filesystem::path>& out_dir = {});

void write_summary_csv(const CorpusSummary& s, std::ostream& os);

}  // namespace mixlab::harness
