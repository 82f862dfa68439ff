#include "byzsim_app/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <utility>

#include <CLI11.hpp>

#include "byzsim/error.hpp"

namespace byzsim::app {

namespace {

using nlohmann::json;

constexpr const char* kAggregatorNames = "mean|mom|vrmom|trimmed";

template <typename F>
auto rethrow_as_usage(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(key, key + ": " + e.what());
  }
}

bool is_aggregator_name(const std::string& name) {
  return name == "mean" || name == "mom" || name == "vrmom" || name == "trimmed";
}

bool is_analysis_name(const std::string& name) {
  return name == "sigma-k" || name == "efficiency" || name == "c-matrix" || name == "hphi";
}

std::string stop_name(StoppingRule::Kind kind) {
  return kind == StoppingRule::Kind::Tolerance ? "tol" : "fixed";
}

StoppingRule::Kind parse_stop(const std::string& name) {
  if (name == "tol") return StoppingRule::Kind::Tolerance;
  if (name == "fixed") return StoppingRule::Kind::FixedIterations;
  throw UsageError("stop", "stop: expected tol|fixed, got '" + name + "'");
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Mean: return "mean";
    case Mode::Rcsl: return "rcsl";
    case Mode::Analyze: return "analyze";
  }
  return "unknown";
}

Mode parse_mode(const std::string& name) {
  if (name == "mean") return Mode::Mean;
  if (name == "rcsl") return Mode::Rcsl;
  if (name == "analyze") return Mode::Analyze;
  throw UsageError("mode", "mode: expected mean|rcsl|analyze, got '" + name + "'");
}

std::string to_string(OutputFormat format) {
  return format == OutputFormat::Csv ? "csv" : "markdown";
}

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "markdown" || name == "md") return OutputFormat::Markdown;
  throw UsageError("format", "format: expected csv|markdown, got '" + name + "'");
}

std::string to_string(RmseMode mode) {
  return mode == RmseMode::MeanNorm ? "mean-norm" : "root-mean-square";
}

RmseMode parse_rmse_mode(const std::string& name) {
  if (name == "mean-norm") return RmseMode::MeanNorm;
  if (name == "root-mean-square") return RmseMode::RootMeanSquare;
  throw UsageError("rmse-mode",
                   "rmse-mode: expected mean-norm|root-mean-square, got '" + name + "'");
}

AggregatorSpec make_aggregator(const std::string& name, int k, double trim, const std::string& key) {
  return rethrow_as_usage(key, [&] {
    if (name == "mean") return AggregatorSpec::mean();
    if (name == "mom") return AggregatorSpec::mom();
    if (name == "vrmom") return AggregatorSpec::vrmom(k);
    if (name == "trimmed") return AggregatorSpec::trimmed_mean(trim);
    throw UsageError(key, key + ": expected " + std::string(kAggregatorNames) + ", got '" + name + "'");
  });
}

CovarianceKind ExperimentConfig::covariance() const {
  if (cov) return *cov;
  return mode == Mode::Mean ? CovarianceKind::Identity : CovarianceKind::Toeplitz;
}

StoppingRule ExperimentConfig::stopping_rule() const {
  return stop == StoppingRule::Kind::Tolerance ? StoppingRule::until(tol, iters)
                                               : StoppingRule::fixed(iters);
}

AttackSpec ExperimentConfig::attack_spec(AttackKind kind) const {
  AttackSpec spec;
  spec.kind = kind;
  spec.gaussian_std = gaussian_std;
  spec.refresh = payload_refresh;
  return spec;
}

SyntheticSpec ExperimentConfig::data_spec(std::size_t dim) const {
  SyntheticSpec spec;
  spec.task = mode == Mode::Mean ? Task::MeanEstimation : Task::Regression;
  spec.model.kind = model;
  spec.model.p = dim;
  spec.model.huber_delta = huber_delta;
  spec.mu_x = mu_x;
  spec.covariance = covariance();
  return spec;
}

std::vector<AggregatorSpec> ExperimentConfig::aggregator_specs() const {
  if (aggregator != "vrmom") return {make_aggregator(aggregator, 1, trim, "aggregator")};
  std::vector<AggregatorSpec> specs;
  for (int kk : k) specs.push_back(make_aggregator(aggregator, kk, trim, "k"));
  return specs;
}

std::optional<AggregatorSpec> ExperimentConfig::baseline_spec() const {
  if (baseline == "none") return std::nullopt;
  return make_aggregator(baseline, k.empty() ? 10 : k.front(), trim, "baseline");
}

void ExperimentConfig::validate() const {
  if (mode == Mode::Analyze) {
    if (!is_analysis_name(analysis)) {
      throw UsageError("analysis",
                       "analysis: expected sigma-k|efficiency|c-matrix|hphi, got '" + analysis + "'");
    }
    if (k.empty()) throw UsageError("k", "k: at least one value required");
    for (int kk : k) {
      if (kk < 1) throw UsageError("k", "k: quantile level counts must be >= 1");
    }
    if (points < 2) throw UsageError("points", "points: grid needs at least 2 points");
    return;
  }
  if (!is_aggregator_name(aggregator)) {
    throw UsageError("aggregator", "aggregator: expected " + std::string(kAggregatorNames) +
                                       ", got '" + aggregator + "'");
  }
  if (baseline != "none" && !is_aggregator_name(baseline)) {
    throw UsageError("baseline", "baseline: expected " + std::string(kAggregatorNames) +
                                     "|none, got '" + baseline + "'");
  }
  if (k.empty()) throw UsageError("k", "k: at least one value required");
  for (int kk : k) {
    if (kk < 1) throw UsageError("k", "k: quantile level counts must be >= 1");
  }
  if (!(trim >= 0.0 && trim < 0.5)) throw UsageError("trim", "trim: must lie in [0, 0.5)");
  if (m < 1) throw UsageError("m", "m: need at least one worker");
  if (n < 1) throw UsageError("n", "n: need at least one sample per machine");
  if (p.empty()) throw UsageError("p", "p: at least one dimension required");
  for (std::size_t d : p) {
    if (d < 1) throw UsageError("p", "p: dimensions must be >= 1");
  }
  if (alpha.empty()) throw UsageError("alpha", "alpha: at least one value required");
  for (double a : alpha) {
    if (!(a >= 0.0 && a < 0.5)) throw UsageError("alpha", "alpha: values must lie in [0, 0.5)");
  }
  if (attack.empty()) throw UsageError("attack", "attack: at least one value required");
  for (AttackKind a : attack) {
    if (a == AttackKind::LabelFlip && (mode != Mode::Rcsl || model != ModelKind::Logistic)) {
      throw UsageError("attack", "attack: labelflip requires rcsl mode with the logistic model");
    }
  }
  if (reps < 1) throw UsageError("reps", "reps: must be >= 1");
  if (!(tol > 0.0)) throw UsageError("tol", "tol: must be positive");
  if (iters < 0) throw UsageError("iters", "iters: must be >= 0");
  if (!(huber_delta > 0.0)) throw UsageError("huber-delta", "huber-delta: must be positive");
  if (!(gaussian_std > 0.0)) throw UsageError("gaussian-std", "gaussian-std: must be positive");
  if (mode == Mode::Mean && mu_x != 0.0) {
    throw UsageError("mu-x", "mu-x: only meaningful in rcsl mode");
  }
}

json to_json(const ExperimentConfig& c) {
  std::vector<std::string> attacks;
  for (AttackKind a : c.attack) attacks.push_back(to_string(a));
  json j = {
      {"mode", to_string(c.mode)},
      {"model", to_string(c.model)},
      {"aggregator", c.aggregator},
      {"k", c.k},
      {"trim", c.trim},
      {"baseline", c.baseline},
      {"m", c.m},
      {"n", c.n},
      {"p", c.p},
      {"alpha", c.alpha},
      {"attack", attacks},
      {"reps", c.reps},
      {"seed", c.seed},
      {"stop", stop_name(c.stop)},
      {"tol", c.tol},
      {"iters", c.iters},
      {"format", to_string(c.format)},
      {"out", c.out},
      {"mu_x", c.mu_x},
      {"cov", c.cov ? json(to_string(*c.cov)) : json(nullptr)},
      {"rmse_mode", to_string(c.rmse_mode)},
      {"huber_delta", c.huber_delta},
      {"gaussian_std", c.gaussian_std},
      {"payload_refresh", to_string(c.payload_refresh)},
      {"threads", c.threads},
      {"analysis", c.analysis},
      {"points", c.points},
  };
  return j;
}

ExperimentConfig from_json(const json& j, ExperimentConfig c) {
  if (!j.is_object()) throw UsageError("config", "config: top level must be an object");
  // Scalars are accepted where the CLI would accept a one-element list.
  auto list = [](const json& v) { return v.is_array() ? v : json::array({v}); };
  const std::map<std::string, std::function<void(const json&)>> setters = {
      {"mode", [&](const json& v) { c.mode = parse_mode(v.get<std::string>()); }},
      {"model", [&](const json& v) { c.model = parse_model_kind(v.get<std::string>()); }},
      {"aggregator", [&](const json& v) { c.aggregator = v.get<std::string>(); }},
      {"k", [&](const json& v) { c.k = list(v).get<std::vector<int>>(); }},
      {"trim", [&](const json& v) { c.trim = v.get<double>(); }},
      {"baseline", [&](const json& v) { c.baseline = v.get<std::string>(); }},
      {"m", [&](const json& v) { c.m = v.get<std::size_t>(); }},
      {"n", [&](const json& v) { c.n = v.get<std::size_t>(); }},
      {"p", [&](const json& v) { c.p = list(v).get<std::vector<std::size_t>>(); }},
      {"alpha", [&](const json& v) { c.alpha = list(v).get<std::vector<double>>(); }},
      {"attack",
       [&](const json& v) {
         c.attack.clear();
         for (const auto& a : list(v)) c.attack.push_back(parse_attack_kind(a.get<std::string>()));
       }},
      {"reps", [&](const json& v) { c.reps = v.get<std::size_t>(); }},
      {"seed", [&](const json& v) { c.seed = v.get<std::uint64_t>(); }},
      {"stop", [&](const json& v) { c.stop = parse_stop(v.get<std::string>()); }},
      {"tol", [&](const json& v) { c.tol = v.get<double>(); }},
      {"iters", [&](const json& v) { c.iters = v.get<int>(); }},
      {"format", [&](const json& v) { c.format = parse_format(v.get<std::string>()); }},
      {"out", [&](const json& v) { c.out = v.get<std::string>(); }},
      {"mu_x", [&](const json& v) { c.mu_x = v.get<double>(); }},
      {"cov",
       [&](const json& v) {
         if (v.is_null()) {
           c.cov.reset();
         } else {
           c.cov = parse_covariance_kind(v.get<std::string>());
         }
       }},
      {"rmse_mode", [&](const json& v) { c.rmse_mode = parse_rmse_mode(v.get<std::string>()); }},
      {"huber_delta", [&](const json& v) { c.huber_delta = v.get<double>(); }},
      {"gaussian_std", [&](const json& v) { c.gaussian_std = v.get<double>(); }},
      {"payload_refresh",
       [&](const json& v) {
         c.payload_refresh = rethrow_as_usage(
             "payload-refresh", [&] { return parse_payload_refresh(v.get<std::string>()); });
       }},
      {"threads", [&](const json& v) { c.threads = v.get<unsigned>(); }},
      {"analysis", [&](const json& v) { c.analysis = v.get<std::string>(); }},
      {"points", [&](const json& v) { c.points = v.get<std::size_t>(); }},
  };
  for (const auto& [key, value] : j.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) throw UsageError(key, "config: unknown key '" + key + "'");
    rethrow_as_usage(key, [&] { it->second(value); });
  }
  return c;
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw UsageError("config", "config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config", "config: " + path + ": " + e.what());
  }
  return from_json(j, std::move(base));
}

namespace {

/// Flags bound to scratch storage; only the ones the user actually typed
/// are copied into the config, after the file has been applied.
class FlagSet {
 public:
  template <typename T, typename Apply>
  void add(CLI::App* app, const std::string& flag, const std::string& help, Apply apply,
           bool list = false) {
    auto storage = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *storage, help);
    if (list) opt->delimiter(',');
    const std::string key = flag.substr(2);
    entries_.push_back({opt, [storage, apply, key](ExperimentConfig& c) {
                          rethrow_as_usage(key, [&] { apply(c, *storage); });
                        }});
  }

  void apply(ExperimentConfig& c) const {
    for (const auto& e : entries_) {
      if (e.option->count() > 0) e.apply(c);
    }
  }

 private:
  struct Entry {
    CLI::Option* option;
    std::function<void(ExperimentConfig&)> apply;
  };
  std::vector<Entry> entries_;
};

void add_output_flags(CLI::App* app, FlagSet& flags) {
  flags.add<std::string>(app, "--format", "csv|markdown",
                         [](ExperimentConfig& c, const std::string& v) { c.format = parse_format(v); });
  flags.add<std::string>(app, "--out", "output path (stdout when omitted)",
                         [](ExperimentConfig& c, const std::string& v) { c.out = v; });
}

void add_simulation_flags(CLI::App* app, FlagSet& flags) {
  flags.add<std::string>(app, "--model", "linear|logistic|huber",
                         [](ExperimentConfig& c, const std::string& v) { c.model = parse_model_kind(v); });
  flags.add<std::string>(app, "--aggregator", "mean|mom|vrmom|trimmed",
                         [](ExperimentConfig& c, const std::string& v) { c.aggregator = v; });
  flags.add<std::vector<int>>(
      app, "--k", "quantile level counts, comma separated",
      [](ExperimentConfig& c, const std::vector<int>& v) { c.k = v; }, true);
  flags.add<double>(app, "--trim", "trimmed-mean fraction per tail",
                    [](ExperimentConfig& c, double v) { c.trim = v; });
  flags.add<std::string>(app, "--baseline", "mean|mom|vrmom|trimmed|none",
                         [](ExperimentConfig& c, const std::string& v) { c.baseline = v; });
  flags.add<std::size_t>(app, "--m", "number of workers",
                         [](ExperimentConfig& c, std::size_t v) { c.m = v; });
  flags.add<std::size_t>(app, "--n", "samples per machine",
                         [](ExperimentConfig& c, std::size_t v) { c.n = v; });
  flags.add<std::vector<std::size_t>>(
      app, "--p", "dimensions, comma separated",
      [](ExperimentConfig& c, const std::vector<std::size_t>& v) { c.p = v; }, true);
  flags.add<std::vector<double>>(
      app, "--alpha", "Byzantine fractions, comma separated",
      [](ExperimentConfig& c, const std::vector<double>& v) { c.alpha = v; }, true);
  flags.add<std::vector<std::string>>(
      app, "--attack", "none|gaussian|omniscient|bitflip|labelflip, comma separated",
      [](ExperimentConfig& c, const std::vector<std::string>& v) {
        c.attack.clear();
        for (const auto& a : v) c.attack.push_back(parse_attack_kind(a));
      },
      true);
  flags.add<std::size_t>(app, "--reps", "replications per cell",
                         [](ExperimentConfig& c, std::size_t v) { c.reps = v; });
  flags.add<std::uint64_t>(app, "--seed", "master seed",
                           [](ExperimentConfig& c, std::uint64_t v) { c.seed = v; });
  flags.add<std::string>(app, "--stop", "tol|fixed",
                         [](ExperimentConfig& c, const std::string& v) { c.stop = parse_stop(v); });
  flags.add<double>(app, "--tol", "relative-change stopping tolerance",
                    [](ExperimentConfig& c, double v) { c.tol = v; });
  flags.add<int>(app, "--iters", "iterations (fixed) or iteration cap (tol)",
                 [](ExperimentConfig& c, int v) { c.iters = v; });
  flags.add<double>(app, "--mu-x", "mean of every covariate",
                    [](ExperimentConfig& c, double v) { c.mu_x = v; });
  flags.add<std::string>(app, "--cov", "identity|toeplitz",
                         [](ExperimentConfig& c, const std::string& v) { c.cov = parse_covariance_kind(v); });
  flags.add<std::string>(app, "--rmse-mode", "mean-norm|root-mean-square",
                         [](ExperimentConfig& c, const std::string& v) { c.rmse_mode = parse_rmse_mode(v); });
  flags.add<double>(app, "--huber-delta", "Huber threshold",
                    [](ExperimentConfig& c, double v) { c.huber_delta = v; });
  flags.add<double>(app, "--gaussian-std", "per-coordinate std of Gaussian attack payloads",
                    [](ExperimentConfig& c, double v) { c.gaussian_std = v; });
  flags.add<std::string>(app, "--payload-refresh", "round|replication (Gaussian payload redraw in rcsl)",
                         [](ExperimentConfig& c, const std::string& v) {
                           c.payload_refresh =
                               rethrow_as_usage("payload-refresh", [&] { return parse_payload_refresh(v); });
                         });
  flags.add<unsigned>(app, "--threads", "worker threads (0 = all cores)",
                      [](ExperimentConfig& c, unsigned v) { c.threads = v; });
  add_output_flags(app, flags);
}

}  // namespace

Invocation parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Byzantine-robust distributed estimation simulator", "byzsim"};
  app.require_subcommand(1);

  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config; flags override its values");
  };

  FlagSet mean_flags;
  FlagSet rcsl_flags;
  FlagSet analyze_flags;
  CLI::App* mean = app.add_subcommand("mean-sim", "robust mean estimation tables");
  CLI::App* rcsl = app.add_subcommand("rcsl-sim", "robust surrogate-likelihood tables");
  CLI::App* analyze = app.add_subcommand("analyze", "asymptotic variance and covariance quantities");
  add_config(mean);
  add_config(rcsl);
  add_config(analyze);
  add_simulation_flags(mean, mean_flags);
  add_simulation_flags(rcsl, rcsl_flags);

  std::string analysis;
  analyze->add_option("analysis", analysis, "sigma-k|efficiency|c-matrix|hphi")->required();
  analyze_flags.add<std::vector<int>>(
      analyze, "--k", "quantile level counts, comma separated",
      [](ExperimentConfig& c, const std::vector<int>& v) { c.k = v; }, true);
  analyze_flags.add<std::size_t>(analyze, "--points", "grid size for c-matrix and hphi",
                                 [](ExperimentConfig& c, std::size_t v) { c.points = v; });
  add_output_flags(analyze, analyze_flags);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::string text = app.help();
    for (const CLI::App* sub : app.get_subcommands()) text = sub->help();
    return {{}, text};
  } catch (const CLI::ParseError& e) {
    throw UsageError("args", e.what());
  }

  Mode mode = Mode::Mean;
  const FlagSet* flags = &mean_flags;
  if (rcsl->parsed()) {
    mode = Mode::Rcsl;
    flags = &rcsl_flags;
  } else if (analyze->parsed()) {
    mode = Mode::Analyze;
    flags = &analyze_flags;
  }

  ExperimentConfig config;
  if (mode == Mode::Analyze) config.k = {1, 2, 5, 10, 20, 50, 100, 1000, 2000};
  if (!config_path.empty()) config = load_config_file(config_path, config);
  config.mode = mode;
  if (mode == Mode::Analyze) config.analysis = analysis;
  flags->apply(config);
  config.validate();
  return {config, std::nullopt};
}

}  // namespace byzsim::app
