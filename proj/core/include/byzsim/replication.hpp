#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "byzsim/aggregators.hpp"
#include "byzsim/attacks.hpp"
#include "byzsim/rng.hpp"
#include "byzsim/simulator.hpp"

namespace byzsim {

/// How per-replication l2 errors are summarized.
enum class RmseMode {
  MeanNorm,        ///< mean of |theta_hat - theta*|_2
  RootMeanSquare,  ///< sqrt of the mean of |theta_hat - theta*|_2^2
};

struct ReplicationConfig {
  SyntheticSpec data;
  std::size_t m = 100;
  std::size_t n = 1000;
  double alpha = 0.0;
  AttackSpec attack;
  /// Every aggregator is run on the same data, Byzantine set and attack
  /// payloads, so results are seed-paired.
  std::vector<AggregatorSpec> aggregators;
  StoppingRule stop;
  std::size_t reps = 500;
  RmseMode rmse_mode = RmseMode::MeanNorm;
  /// 0 selects resolve_thread_count(0).
  unsigned threads = 0;
};

struct ExperimentResult {
  AggregatorSpec aggregator;
  /// Per-replication l2 error; NaN for failed replications.
  std::vector<double> errors;
  /// Per-replication final estimate (empty for failed replications).
  std::vector<DenseVector> estimates;
  /// Per-replication RCSL iteration count (0 for mean estimation).
  std::vector<int> iterations;
  double rmse = 0.0;
  /// Standard deviation of the per-replication errors (0 when reps == 1).
  double rmse_std = 0.0;
  double mean_iterations = 0.0;
  std::size_t nonconverged = 0;
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;

  std::size_t successes() const noexcept { return errors.size() - failures; }
};

/// Honors BYZSIM_THREADS as an upper bound. requested == 0 means "as many
/// as the hardware offers".
unsigned resolve_thread_count(unsigned requested);

/// Runs body(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any body is rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

/// Replication r draws everything from rng.stream(r): results do not depend
/// on thread count or scheduling. Returns one result per configured
/// aggregator, in order. A failing replication is recorded, not thrown.
std::vector<ExperimentResult> run_paired_replications(const ReplicationConfig& config,
                                                      const SeededRng& rng);

/// Single-aggregator convenience: uses config.aggregators.front().
ExperimentResult run_replications(const ReplicationConfig& config, const SeededRng& rng);

/// Mean and standard deviation of the finite entries of `errors`.
void summarize_errors(ExperimentResult& result, RmseMode mode);

}  // namespace byzsim
