#include "mixlab/report.hpp"

#include <algorithm>
#include <limits>

namespace mixlab {

bool BoundReport::aux_pass() const {
  return std::all_of(aux.begin(), aux.end(), [](const AuxCheck& a) { return a.pass; });
}

void BoundReport::finalize() {
  min_margin = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) min_margin = std::min(min_margin, s.margin);
  if (samples.empty()) min_margin = 0.0;
  pass = !samples.empty() && min_margin >= 1.0 - tol;
}

nlohmann::json BoundReport::to_json(bool with_runtime) const {
  nlohmann::json s = nlohmann::json::array();
  for (const auto& x : samples) s.push_back({{"t", x.t}, {"measured", x.measured}, {"envelope", x.envelope}, {"margin", x.margin}});
  // Aux checks can be numerous; keep the worst one per name plus a count.
  nlohmann::json aux_summary = nlohmann::json::object();
  for (const auto& a : aux) {
    auto& e = aux_summary[a.name];
    const double slack = a.limit - a.value;
    if (e.is_null()) e = {{"count", 0}, {"pass", true}, {"worst_slack", slack}, {"t", a.t}, {"value", a.value}, {"limit", a.limit}};
    e["count"] = e["count"].get<int>() + 1;
    e["pass"] = e["pass"].get<bool>() && a.pass;
    if (slack < e["worst_slack"].get<double>()) {
      e["worst_slack"] = slack;
      e["t"] = a.t;
      e["value"] = a.value;
      e["limit"] = a.limit;
    }
  }
  nlohmann::json j = {{"scenario", scenario},
                      {"check", check},
                      {"certificate", certificate},
                      {"samples", s},
                      {"min_margin", min_margin},
                      {"tol", tol},
                      {"verdict", verdict()},
                      {"aux_checks", aux_summary},
                      {"aux_pass", aux_pass()}};
  if (with_runtime) j["runtime_s"] = runtime_s;
  return j;
}

BoundReport make_report(std::string check, nlohmann::json certificate, std::vector<BoundSample> samples, double tol) {
  BoundReport r;
  r.check = std::move(check);
  r.certificate = std::move(certificate);
  r.samples = std::move(samples);
  r.tol = tol;
  r.finalize();
  return r;
}

}  // namespace mixlab
