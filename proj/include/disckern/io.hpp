#pragma once

// Count-file ingestion and JSON / CSV serialization of every result type.
// Needs nlohmann/json on the include path.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "disckern/bandwidth.hpp"
#include "disckern/error.hpp"
#include "disckern/estimator.hpp"
#include "disckern/kernel.hpp"
#include "disckern/pmf.hpp"
#include "disckern/simulation.hpp"

namespace disckern::io {

using nlohmann::json;

//------------------------------------------------------------------------------
// Ingestion

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

[[noreturn]] inline void bad_line(std::size_t line, const std::string& why,
                                  std::string_view text) {
  fail(ErrorKind::Input,
       "line " + std::to_string(line) + ": " + why + " '" + std::string(text) + "'");
}

}  // namespace detail

/// One non-negative integer per line, optionally under a "count" header.
/// Blank lines are ignored.
inline CountSample parse_counts(std::istream& in) {
  std::vector<Count> values;
  std::string raw;
  std::size_t line = 0;
  bool seen_content = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view s = detail::trim(raw);
    if (s.empty()) continue;
    if (!seen_content) {
      seen_content = true;
      if (s == "count") continue;
    }
    if (detail::all_digits(s)) {
      if (s.size() > 18) detail::bad_line(line, "count too large", s);
      values.push_back(std::stoll(std::string(s)));
      continue;
    }
    const std::string text(s);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      detail::bad_line(line, "non-numeric entry", s);
    }
    if (used != text.size() || !std::isfinite(v)) detail::bad_line(line, "non-numeric entry", s);
    if (v < 0.0) detail::bad_line(line, "negative entry", s);
    if (v != std::floor(v)) detail::bad_line(line, "fractional entry", s);
    detail::bad_line(line, "entry is not a plain integer", s);
  }
  if (values.empty()) fail(ErrorKind::Input, "count file contains no observations");
  return CountSample(std::move(values));
}

inline CountSample ingest_counts(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Input, "cannot open count file '" + path + "'");
  return parse_counts(in);
}

/// Line format accepted by parse_counts.
inline std::string format_counts(const CountSample& sample) {
  std::string out;
  for (Count v : sample.values()) out += std::to_string(v) + "\n";
  return out;
}

//------------------------------------------------------------------------------
// Number formatting

/// 17 significant digits; round-trips any double.
inline std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// 6 significant digits, for human-readable tables.
inline std::string num6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

//------------------------------------------------------------------------------
// JSON

inline json to_json(const Pmf& p) {
  return {{"support", p.support}, {"probs", p.probs}, {"tail_bound", p.tail_bound}};
}

inline Pmf pmf_from_json(const json& j) {
  return Pmf(j.at("support").get<std::vector<Count>>(), j.at("probs").get<std::vector<double>>(),
             j.value("tail_bound", 0.0));
}

inline json to_json(const EstimateResult& r, KernelFamily kernel) {
  return {{"kernel", to_string(kernel)},
          {"bandwidth", r.bandwidth},
          {"normalizer", r.normalizer},
          {"eval_support_max", r.eval_support.empty() ? 0 : r.eval_support.back()},
          {"support_tail_bound", r.support_tail_bound},
          {"raw", to_json(r.raw)},
          {"normalized", to_json(r.normalized)}};
}

inline json to_json(const CvResult& r) {
  json grid = json::array();
  for (const auto& p : r.grid) {
    grid.push_back({{"h", p.h},
                    {"score", p.score ? json(*p.score) : json(nullptr)},
                    {"admissible", p.admissible}});
  }
  return {{"h_cv", r.h_cv}, {"score_at_h", r.score_at_h}, {"grid", grid}};
}

inline json to_json(const McReport& r) {
  json reps = json::array();
  for (std::size_t t = 0; t < r.per_replication.size(); ++t) {
    const auto& p = r.per_replication[t];
    reps.push_back(
        {{"replication", t}, {"seed", p.seed}, {"c_n", p.c_n}, {"ise", p.ise}, {"h", p.h}});
  }
  return {{"scenario", r.scenario},       {"kernel", to_string(r.kernel)},
          {"n", r.n},                     {"n_sim", r.n_sim},
          {"seed", r.master_seed},        {"c_hat_mean", r.c_hat_mean},
          {"c_hat_sd", r.c_hat_sd},       {"ise_mean", r.ise_mean},
          {"ise_sd", r.ise_sd},           {"per_replication", reps}};
}

inline json to_json(const NormalityReport& r) {
  return {{"scenario", r.scenario},
          {"kernel", to_string(r.kernel)},
          {"n", r.n},
          {"n_sim", r.n_sim},
          {"seed", r.master_seed},
          {"h", r.h},
          {"target_x", r.target_x},
          {"f_target", r.f_target},
          {"sample_mean", r.sample_mean},
          {"sample_sd", r.sample_sd},
          {"theoretical_sd", r.theoretical_sd},
          {"ks_statistic", r.ks_statistic},
          {"deviations", r.deviations}};
}

inline json to_json(const ProbeReport& r, KernelFamily kernel) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json per = json::array();
  for (std::size_t i = 0; i < r.per_target.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < r.per_target[i].size(); ++j) {
      row.push_back({{"x", r.targets[j]},
                     {"mean_dev", r.per_target[i][j].mean_dev},
                     {"variance", r.per_target[i][j].variance}});
    }
    per.push_back({{"h", r.h_values[i]}, {"targets", row}});
  }
  return {{"kernel", to_string(kernel)},
          {"h_values", r.h_values},
          {"sup_mean_dev", r.sup_mean_dev},
          {"sup_var", r.sup_var},
          {"delta_estimate", r.delta_estimate},
          {"mean_rate", opt(r.mean_rate)},
          {"var_rate", opt(r.var_rate)},
          {"per_target", per}};
}

inline json error_record(const Error& e, int exit_code) {
  json err = {{"kind", to_string(e.kind())}, {"exit_code", exit_code}, {"message", e.what()}};
  if (const auto* re = dynamic_cast<const ReplicationError*>(&e)) {
    err["replication"] = re->replication();
    err["seed"] = re->seed();
  }
  return {{"error", err}};
}

//------------------------------------------------------------------------------
// CSV

inline std::string pmf_csv(const Pmf& p) {
  std::string out = "x,probability\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    out += std::to_string(p.support[i]) + "," + num17(p.probs[i]) + "\n";
  }
  return out;
}

/// (x, f0(x), fhat(x)) triples over the estimate support.
inline std::string plot_data_csv(const Pmf& naive, const Pmf& fhat) {
  std::string out = "x,f0,fhat\n";
  for (std::size_t i = 0; i < fhat.size(); ++i) {
    const Count x = fhat.support[i];
    out += std::to_string(x) + "," + num17(naive.at(x)) + "," + num17(fhat.probs[i]) + "\n";
  }
  return out;
}

inline std::string cv_csv(const CvResult& r) {
  std::string out = "h,score,admissible\n";
  for (const auto& p : r.grid) {
    out += num17(p.h) + "," + (p.score ? num17(*p.score) : std::string()) + "," +
           (p.admissible ? "true" : "false") + "\n";
  }
  return out;
}

inline const char* kMcCsvHeader = "scenario,n,kernel,c_hat_mean,c_hat_sd,ise_mean,ise_sd\n";

inline std::string mc_csv_row(const McReport& r) {
  return r.scenario + "," + std::to_string(r.n) + "," + std::string(to_string(r.kernel)) + "," +
         num17(r.c_hat_mean) + "," + num17(r.c_hat_sd) + "," + num17(r.ise_mean) + "," +
         num17(r.ise_sd) + "\n";
}

inline std::string mc_csv(const McReport& r) { return kMcCsvHeader + mc_csv_row(r); }

inline std::string deviations_csv(const NormalityReport& r) {
  std::string out;
  for (double d : r.deviations) out += num17(d) + "\n";
  return out;
}

inline std::string probe_csv(const ProbeReport& r) {
  std::string out = "h,sup_mean_dev,sup_var\n";
  for (std::size_t i = 0; i < r.h_values.size(); ++i) {
    out += num17(r.h_values[i]) + "," + num17(r.sup_mean_dev[i]) + "," + num17(r.sup_var[i]) +
           "\n";
  }
  return out;
}

}  // namespace disckern::io
