#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "byzsim/aggregators.hpp"
#include "byzsim/attacks.hpp"
#include "byzsim/models.hpp"
#include "byzsim/replication.hpp"
#include "byzsim/simulator.hpp"

namespace byzsim::app {

/// Bad flag, bad value or invalid combination. `key` names the offender.
class UsageError : public std::runtime_error {
 public:
  UsageError(std::string key, const std::string& message)
      : std::runtime_error(message), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class Mode { Mean, Rcsl, Analyze };
enum class OutputFormat { Csv, Markdown };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& name);
std::string to_string(OutputFormat format);
OutputFormat parse_format(const std::string& name);
std::string to_string(RmseMode mode);
RmseMode parse_rmse_mode(const std::string& name);

struct ExperimentConfig {
  Mode mode = Mode::Mean;
  ModelKind model = ModelKind::Linear;
  /// mean | mom | vrmom | trimmed
  std::string aggregator = "vrmom";
  /// Quantile level counts, one table row per entry for vrmom.
  std::vector<int> k = {10};
  double trim = 0.1;
  /// Aggregator the ratio column divides by: mean | mom | vrmom | trimmed | none.
  std::string baseline = "mom";
  std::size_t m = 100;
  std::size_t n = 1000;
  std::vector<std::size_t> p = {30};
  std::vector<double> alpha = {0.0};
  std::vector<AttackKind> attack = {AttackKind::None};
  std::size_t reps = 500;
  std::uint64_t seed = 20240607;
  StoppingRule::Kind stop = StoppingRule::Kind::Tolerance;
  double tol = 1e-4;
  /// T under fixed stopping, the iteration cap under tol.
  int iters = 50;
  OutputFormat format = OutputFormat::Csv;
  /// Empty writes to stdout.
  std::string out;
  double mu_x = 0.0;
  /// Unset means identity for mean mode and Toeplitz for rcsl mode.
  std::optional<CovarianceKind> cov;
  RmseMode rmse_mode = RmseMode::MeanNorm;
  double huber_delta = kDefaultHuberDelta;
  double gaussian_std = AttackSpec{}.gaussian_std;
  PayloadRefresh payload_refresh = AttackSpec{}.refresh;
  unsigned threads = 0;
  /// analyze only: sigma-k | efficiency | c-matrix | hphi
  std::string analysis;
  /// analyze only: grid size for c-matrix and hphi.
  std::size_t points = 181;

  /// Throws UsageError naming the first offending key.
  void validate() const;

  CovarianceKind covariance() const;
  StoppingRule stopping_rule() const;
  AttackSpec attack_spec(AttackKind kind) const;
  SyntheticSpec data_spec(std::size_t dim) const;
  /// One spec per K for vrmom, otherwise a single spec.
  std::vector<AggregatorSpec> aggregator_specs() const;
  std::optional<AggregatorSpec> baseline_spec() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Builds an aggregator from its CLI name; UsageError under `key` otherwise.
AggregatorSpec make_aggregator(const std::string& name, int k, double trim, const std::string& key);

nlohmann::json to_json(const ExperimentConfig& config);
/// Starts from `base` and overwrites the keys present in `j`. Unknown keys
/// and ill-typed values raise UsageError.
ExperimentConfig from_json(const nlohmann::json& j, ExperimentConfig base = {});

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});

/// Either a parsed config or the text for --help.
struct Invocation {
  ExperimentConfig config;
  std::optional<std::string> help;
};

/// args excludes the program name. Values from --config are applied first,
/// then every flag given explicitly on the command line.
Invocation parse_args(const std::vector<std::string>& args);

}  // namespace byzsim::app
