#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "byzsim/aggregators.hpp"
#include "byzsim/attacks.hpp"
#include "byzsim/linalg.hpp"
#include "byzsim/models.hpp"
#include "byzsim/rng.hpp"

namespace byzsim {

enum class Task { MeanEstimation, Regression };
enum class CovarianceKind { Identity, Toeplitz };

std::string to_string(CovarianceKind kind);
CovarianceKind parse_covariance_kind(const std::string& name);

/// Data-generating process for one simulated experiment.
///
/// Mean estimation: X_i ~ N(mu*, Sigma) with mu* = ladder_parameter(p).
/// Regression: X_i ~ N(mu_x * 1, Sigma) and, with theta* = ladder_parameter(p),
///   Linear/Huber: Y_i = X_i^T theta* + noise_std * N(0, 1)
///   Logistic:     Y_i ~ Bernoulli(logistic(X_i^T theta*)).
struct SyntheticSpec {
  Task task = Task::Regression;
  /// model.p is the dimension in both tasks.
  ModelSpec model;
  double mu_x = 0.0;
  CovarianceKind covariance = CovarianceKind::Toeplitz;
  double toeplitz_rho = 0.5;
  double noise_std = 1.0;

  std::size_t dim() const noexcept { return model.p; }
  DenseMatrix covariance_matrix() const;
  void validate() const;
  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

/// p^{-1/2} (1, (p-2)/(p-1), ..., 1/(p-1), 0): linearly decreasing from
/// p^{-1/2} to 0. Defined as (1) for p = 1.
DenseVector ladder_parameter(std::size_t p);

/// m + 1 equally sized shards; shard 0 belongs to the master.
struct Topology {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<DataShard> shards;
  ByzantineSet byzantine;
  /// Ground truth (mu* or theta*).
  DenseVector truth;

  const DataShard& master() const { return shards.front(); }
  std::size_t total_samples() const noexcept { return (m + 1) * n; }
};

/// Draws every shard from its own child stream of `rng`, so a shard does not
/// depend on how many other shards were generated. Throws ConfigError for
/// m or n of zero, invalid alpha, or a label-flip attack on a non-logistic
/// regression.
Topology generate_topology(const SyntheticSpec& spec, std::size_t m, std::size_t n, double alpha,
                           const AttackSpec& attack, const SeededRng& rng);

/// Per-machine sample means (Byzantine ones already corrupted) and the
/// master-block standard deviations. Worker j draws attack payloads from
/// rng.stream(j).
BlockSummaries mean_estimation_blocks(const Topology& top, const AttackSpec& attack,
                                      const SeededRng& rng);

DenseVector run_mean_estimation(const Topology& top, const AggregatorSpec& spec,
                                const AttackSpec& attack, const SeededRng& rng);

struct StoppingRule {
  enum class Kind { FixedIterations, Tolerance };
  Kind kind = Kind::Tolerance;
  /// T for FixedIterations; the iteration cap for Tolerance.
  int iterations = 50;
  double tolerance = 1e-4;

  static StoppingRule fixed(int iterations) { return {Kind::FixedIterations, iterations, 1e-4}; }
  static StoppingRule until(double tolerance, int max_iterations) {
    return {Kind::Tolerance, max_iterations, tolerance};
  }
  void validate() const;
  friend bool operator==(const StoppingRule&, const StoppingRule&) = default;
};

struct RcslState {
  DenseVector theta;
  int iteration = 0;
  /// |theta_t - theta_{t-1}|^2 / |theta_{t-1}|^2 of the latest step.
  double conv_metric = 0.0;
  /// |theta_t - truth|_2 for t = 0, 1, ...; empty when truth is unknown.
  std::vector<double> error_history;
  /// Only meaningful under a Tolerance rule.
  bool converged = true;
};

/// One master/worker round: gradients at state.theta, Byzantine
/// corruption, coordinate-wise aggregation, surrogate minimization.
/// `worker_rngs` holds one attack stream per machine (index 0 unused).
/// Solver failures are rethrown as SolverError naming the iteration.
RcslState rcsl_step(const Topology& top, const RcslState& state, const ModelSpec& model,
                    const AggregatorSpec& agg, const AttackSpec& attack,
                    std::span<SeededRng> worker_rngs);

/// Local ERM on the master followed by rcsl_step until `stop` fires. A
/// Tolerance rule that runs out of iterations returns with converged =
/// false rather than throwing.
RcslState run_rcsl(const Topology& top, const ModelSpec& model, const AggregatorSpec& agg,
                   const AttackSpec& attack, const StoppingRule& stop, const SeededRng& rng);

}  // namespace byzsim
