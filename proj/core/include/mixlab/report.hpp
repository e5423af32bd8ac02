#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mixlab {

struct BoundSample {
  double t = 0.0;
  double measured = 0.0;
  double envelope = 0.0;
  double margin = 0.0;  // measured / envelope for lower bounds
};

/// A secondary inequality evaluated alongside the main envelope, e.g. a tail or
/// retention estimate. Passes when value <= limit.
struct AuxCheck {
  std::string name;
  double t = 0.0;
  double value = 0.0;
  double limit = 0.0;
  bool pass = true;
};

struct BoundReport {
  std::string scenario;
  std::string check;
  nlohmann::json certificate;
  std::vector<BoundSample> samples;
  double min_margin = 0.0;
  double tol = 1e-6;
  bool pass = false;  // min_margin >= 1 - tol
  std::vector<AuxCheck> aux;
  double runtime_s = 0.0;

  bool aux_pass() const;
  const char* verdict() const { return pass ? "PASS" : "FAIL"; }

  /// Recomputes min_margin and pass from the samples.
  void finalize();
  /// Full report; `with_runtime = false` gives a byte-stable form.
  nlohmann::json to_json(bool with_runtime = true) const;
};

BoundReport make_report(std::string check, nlohmann::json certificate, std::vector<BoundSample> samples, double tol);

}  // namespace mixlab
