// disckern: command-line front end for discrete associated-kernel pmf
// estimation, bandwidth selection and Monte Carlo experiments.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "disckern/disckern.hpp"
#include "disckern/io.hpp"

namespace {

using namespace disckern;
using io::json;

constexpr std::uint64_t kDefaultSeed = 20230101;

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kInput = 3,
  kTruncation = 4,
  kBracket = 5,
  kDegenerate = 6,
  kInsufficientSample = 7,
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return kUsage;
    case ErrorKind::Input: return kInput;
    case ErrorKind::Truncation: return kTruncation;
    case ErrorKind::BracketFailure: return kBracket;
    case ErrorKind::Degenerate: return kDegenerate;
    case ErrorKind::InsufficientSample: return kInsufficientSample;
  }
  return kInternal;
}

struct Options {
  std::string kernel = "cmp";
  std::optional<double> h;
  bool cv = false;
  double grid_min = 1e-3;
  std::optional<double> grid_max;
  std::size_t grid_size = 40;
  std::string cv_variant = "literal";
  std::string scenario = "A";
  std::size_t n = 100;
  std::size_t nsim = 100;
  std::optional<std::uint64_t> seed;
  Count x = 6;
  std::string h_rule;
  std::string input;
  std::string output;
  std::string format = "json";
  std::optional<double> eps_tail;
  unsigned threads = 0;
  std::string plot_data;
  bool naive = false;
  Count targets_max = 20;
  std::vector<double> h_values{0.5, 0.1, 0.01};
};

KernelSpec kernel_spec(const Options& o) {
  KernelSpec spec{parse_kernel_family(o.kernel), {}};
  if (o.eps_tail) {
    if (!(*o.eps_tail > 0.0)) fail(ErrorKind::InvalidArgument, "--eps-tail must be > 0");
    spec.policy.tail_tol = *o.eps_tail;
  }
  return spec;
}

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("DISCKERN_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::InvalidArgument, "DISCKERN_SEED is not an unsigned integer");
  }
  return kDefaultSeed;
}

std::vector<double> grid_for(const Options& o, KernelFamily family) {
  const double hi = o.grid_max.value_or(family == KernelFamily::Binomial ? 0.999 : 3.0);
  return log_grid(o.grid_min, hi, o.grid_size);
}

CvVariant cv_variant(const Options& o) {
  if (o.cv_variant == "literal") return CvVariant::Literal;
  if (o.cv_variant == "normalized") return CvVariant::BothNormalized;
  fail(ErrorKind::InvalidArgument, "--cv-variant must be literal or normalized");
}

void emit(const Options& o, const std::string& body) {
  if (o.output.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream out(o.output, std::ios::binary);
  if (!out) fail(ErrorKind::Input, "cannot write output file '" + o.output + "'");
  out << body;
}

// CMP with nu = 1/h <= 1 is Poisson or overdispersed; allowed, but worth a note.
void note_dispersion(const KernelSpec& spec, double h) {
  if (spec.family == KernelFamily::CoMPoisson && h >= 1.0) {
    std::cerr << "note: cmp kernel with h >= 1 is equidispersed or overdispersed\n";
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

bool want_csv(const Options& o) {
  if (o.format == "csv") return true;
  if (o.format == "json") return false;
  fail(ErrorKind::InvalidArgument, "--format must be json or csv");
}

void require_input(const Options& o) {
  if (o.input.empty()) fail(ErrorKind::InvalidArgument, "this command requires --input");
}

double fixed_bandwidth(const Options& o) {
  if (!o.h) fail(ErrorKind::InvalidArgument, "give --h or --cv");
  return *o.h;
}

//------------------------------------------------------------------------------

int run_estimate(const Options& o) {
  require_input(o);
  if (o.cv && o.h) fail(ErrorKind::InvalidArgument, "--h and --cv are mutually exclusive");
  const bool csv = want_csv(o);
  const CountSample sample = io::ingest_counts(o.input);
  const KernelSpec spec = kernel_spec(o);
  std::optional<CvResult> cv;
  double h;
  if (o.cv) {
    cv = select_bandwidth(sample, spec, grid_for(o, spec.family), {cv_variant(o), o.threads});
    h = cv->h_cv;
  } else {
    h = fixed_bandwidth(o);
  }
  note_dispersion(spec, h);
  const EstimateResult est = normalized_estimate(sample, spec, h);
  const Pmf f0 = naive_estimate(sample);
  if (!o.plot_data.empty()) {
    std::ofstream out(o.plot_data, std::ios::binary);
    if (!out) fail(ErrorKind::Input, "cannot write plot data '" + o.plot_data + "'");
    out << io::plot_data_csv(f0, est.normalized);
  }
  if (csv) {
    emit(o, io::pmf_csv(est.normalized));
    return kOk;
  }
  json j = io::to_json(est, spec.family);
  j["n"] = sample.n();
  if (cv) j["cv"] = io::to_json(*cv);
  if (o.naive) {
    j["naive"] = io::to_json(f0);
    j["ise0"] = ise_empirical(est.normalized, f0);
  }
  emit(o, dump(j));
  return kOk;
}

int run_bandwidth(const Options& o) {
  require_input(o);
  const bool csv = want_csv(o);
  const CountSample sample = io::ingest_counts(o.input);
  const KernelSpec spec = kernel_spec(o);
  const CvResult r =
      select_bandwidth(sample, spec, grid_for(o, spec.family), {cv_variant(o), o.threads});
  emit(o, csv ? io::cv_csv(r) : dump(io::to_json(r)));
  return kOk;
}

BandwidthRule simulation_rule(const Options& o, KernelFamily family) {
  const int chosen = (o.cv ? 1 : 0) + (o.h_rule == "sqrtnlogn" ? 1 : 0) +
                     (o.h && o.h_rule != "sqrtnlogn" ? 1 : 0);
  if (!o.h_rule.empty() && o.h_rule != "fixed" && o.h_rule != "sqrtnlogn") {
    fail(ErrorKind::InvalidArgument, "--h-rule must be fixed or sqrtnlogn");
  }
  if (chosen != 1 || (o.h_rule == "fixed" && !o.h)) {
    fail(ErrorKind::InvalidArgument,
         "choose exactly one bandwidth rule: --h <value>, --cv, or --h-rule sqrtnlogn");
  }
  if (o.cv) {
    BandwidthRule r = BandwidthRule::cross_validation(grid_for(o, family));
    r.variant = cv_variant(o);
    return r;
  }
  if (o.h_rule == "sqrtnlogn") return BandwidthRule::sqrt_n_log_n();
  return BandwidthRule::fixed(*o.h);
}

McConfig mc_config(const Options& o) {
  McConfig c;
  c.scenario = Scenario::from_id(o.scenario);
  c.kernel = kernel_spec(o);
  c.n = o.n;
  c.n_sim = o.nsim;
  c.bandwidth_rule = simulation_rule(o, c.kernel.family);
  if (c.bandwidth_rule.kind == BandwidthRule::Kind::Fixed) {
    note_dispersion(c.kernel, c.bandwidth_rule.h);
  }
  c.master_seed = resolve_seed(o);
  c.threads = o.threads;
  return c;
}

int run_simulate(const Options& o) {
  const bool csv = want_csv(o);
  const McReport r = monte_carlo(mc_config(o));
  emit(o, csv ? io::mc_csv(r) : dump(io::to_json(r)));
  if (!o.output.empty()) {
    std::cout << "scenario " << r.scenario << "  n " << r.n << "  kernel "
              << to_string(r.kernel) << "  C_n " << io::num6(r.c_hat_mean) << " ("
              << io::num6(r.c_hat_sd) << ")  ISE " << io::num6(r.ise_mean) << " ("
              << io::num6(r.ise_sd) << ")\n";
  }
  return kOk;
}

int run_normality(const Options& o) {
  const bool csv = want_csv(o);
  const NormalityReport r = normality_experiment(mc_config(o), o.x);
  emit(o, csv ? io::deviations_csv(r) : dump(io::to_json(r)));
  if (!o.output.empty()) {
    std::cout << "x " << r.target_x << "  mean " << io::num6(r.sample_mean) << "  sd "
              << io::num6(r.sample_sd) << "  theoretical sd " << io::num6(r.theoretical_sd)
              << "  KS " << io::num6(r.ks_statistic) << "\n";
  }
  return kOk;
}

int run_probe(const Options& o) {
  const bool csv = want_csv(o);
  if (o.targets_max < 0) fail(ErrorKind::InvalidArgument, "--targets-max must be >= 0");
  const KernelSpec spec = kernel_spec(o);
  std::vector<Count> targets;
  for (Count x = 0; x <= o.targets_max; ++x) targets.push_back(x);
  const ProbeReport r = assumption_probe(spec, targets, o.h_values);
  emit(o, csv ? io::probe_csv(r) : dump(io::to_json(r, spec.family)));
  return kOk;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--kernel", o.kernel, "dirac | binomial | cmp")
      ->check(CLI::IsMember({"dirac", "binomial", "cmp"}));
  cmd->add_option("--output", o.output, "output file (default: stdout)");
  cmd->add_option("--format", o.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--eps-tail", o.eps_tail, "tail tolerance for truncated supports");
  cmd->add_option("--threads", o.threads, "worker cap (0 = all cores); never changes results");
}

void add_bandwidth_flags(CLI::App* cmd, Options& o, bool with_cv) {
  cmd->add_option("--h", o.h, "fixed bandwidth");
  if (with_cv) cmd->add_flag("--cv", o.cv, "cross-validated bandwidth");
  cmd->add_option("--grid-min", o.grid_min, "smallest CV grid point");
  cmd->add_option("--grid-max", o.grid_max, "largest CV grid point");
  cmd->add_option("--grid-size", o.grid_size, "number of log-spaced CV grid points");
  cmd->add_option("--cv-variant", o.cv_variant, "literal | normalized")
      ->check(CLI::IsMember({"literal", "normalized"}));
}

void add_simulation_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--scenario", o.scenario, "A | B | C | D")
      ->check(CLI::IsMember({"A", "B", "C", "D"}));
  cmd->add_option("--n", o.n, "sample size")->check(CLI::PositiveNumber);
  cmd->add_option("--nsim", o.nsim, "number of replications")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "master seed (fallback: $DISCKERN_SEED)");
  cmd->add_option("--h-rule", o.h_rule, "fixed | sqrtnlogn")
      ->check(CLI::IsMember({"fixed", "sqrtnlogn"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete associated-kernel estimation of probability mass functions"};
  app.require_subcommand(1);
  // "-h" would collide with --h
  app.set_help_flag("--help", "print this help and exit");
  Options o;

  auto* estimate = app.add_subcommand("estimate", "normalized kernel estimate of a count file");
  add_common(estimate, o);
  add_bandwidth_flags(estimate, o, true);
  estimate->add_option("--input", o.input, "count file")->required();
  estimate->add_flag("--naive", o.naive, "also report the naive estimate and ISE_0");
  estimate->add_option("--plot-data", o.plot_data, "write x,f0,fhat CSV to this path");

  auto* bandwidth = app.add_subcommand("bandwidth", "cross-validation bandwidth selection");
  add_common(bandwidth, o);
  add_bandwidth_flags(bandwidth, o, false);
  bandwidth->add_option("--input", o.input, "count file")->required();

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo C_n / ISE summary");
  add_common(simulate, o);
  add_bandwidth_flags(simulate, o, true);
  add_simulation_flags(simulate, o);

  auto* normality = app.add_subcommand("normality", "distribution of sqrt(n)(fhat(x) - f(x))");
  add_common(normality, o);
  add_bandwidth_flags(normality, o, true);
  add_simulation_flags(normality, o);
  normality->add_option("--x", o.x, "target point");

  auto* probe = app.add_subcommand("kernel-probe", "kernel mean/variance as h shrinks");
  add_common(probe, o);
  probe->add_option("--targets-max", o.targets_max, "probe targets 0..M");
  probe->add_option("--h-values", o.h_values, "strictly decreasing bandwidths")->expected(1, -1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*estimate) return run_estimate(o);
    if (*bandwidth) return run_bandwidth(o);
    if (*simulate) return run_simulate(o);
    if (*normality) return run_normality(o);
    if (*probe) return run_probe(o);
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    std::cerr << io::error_record(e, code).dump() << "\n";
    return code;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"kind", "internal"}, {"exit_code", kInternal},
                                 {"message", e.what()}}}}.dump()
              << "\n";
    return kInternal;
  }
  return kUsage;
}
