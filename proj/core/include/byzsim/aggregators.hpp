#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "byzsim/linalg.hpp"

namespace byzsim {

enum class AggregatorKind { Mean, Mom, Vrmom, TrimmedMean };

/// Coordinate-wise robust aggregation rule.
///
/// For VRMOM the K quantile levels tau_k = k / (K + 1), their normal
/// quantiles Delta_k and the normalizer sum_k psi(Delta_k) are computed
/// once at construction.
class AggregatorSpec {
 public:
  static AggregatorSpec mean();
  static AggregatorSpec mom();
  /// Throws ConfigError when quantile_levels < 1.
  static AggregatorSpec vrmom(int quantile_levels);
  /// Throws ConfigError unless 0 <= trim_fraction < 1/2.
  static AggregatorSpec trimmed_mean(double trim_fraction);

  AggregatorKind kind() const noexcept { return kind_; }
  int quantile_levels() const noexcept { return k_; }
  double trim_fraction() const noexcept { return beta_; }
  const std::vector<double>& deltas() const noexcept { return deltas_; }
  double psi_sum() const noexcept { return psi_sum_; }

  /// "mean", "mom", "vrmom" or "trimmed".
  std::string name() const;

  friend bool operator==(const AggregatorSpec& a, const AggregatorSpec& b) {
    return a.kind_ == b.kind_ && a.k_ == b.k_ && a.beta_ == b.beta_;
  }

 private:
  AggregatorKind kind_ = AggregatorKind::Mean;
  int k_ = 1;
  double beta_ = 0.0;
  std::vector<double> deltas_;
  double psi_sum_ = 0.0;
};

/// Per-machine block summaries presented to the master. Index 0 of
/// `means` is the master block; the rest are worker reports, which may be
/// attacker-controlled.
struct BlockSummaries {
  std::vector<DenseVector> means;
  /// Per-coordinate standard deviation estimated on the master block.
  DenseVector sigma_hat;
  /// Observations per block.
  std::size_t n = 1;

  std::size_t dim() const { return means.empty() ? 0 : means.front().size(); }
};

/// Below this master-block standard deviation VRMOM returns the
/// coordinate median unchanged.
inline constexpr double kSigmaFloor = 1e-12;

DenseVector mean_aggregate(const BlockSummaries& blocks);
DenseVector mom_aggregate(const BlockSummaries& blocks);
DenseVector vrmom_aggregate(const BlockSummaries& blocks, const AggregatorSpec& spec);
DenseVector trimmed_mean_aggregate(const BlockSummaries& blocks, double trim_fraction);

/// Dispatches on spec.kind().
DenseVector aggregate(const BlockSummaries& blocks, const AggregatorSpec& spec);

/// K/2 + 1 - ceil((K + 1) * Phi(z)): the signed count of quantile levels
/// lying above z, recentred. Always within [-K/2, K/2]. Infinite z
/// saturates.
double vrmom_correction_summand(double z, int quantile_levels);

/// Per-coordinate standard deviation with 1/n normalization over the rows
/// of `samples` (one sample per row).
DenseVector block_sigma_hat(const DenseMatrix& samples);
DenseVector block_sigma_hat(std::span<const DenseVector> samples);

}  // namespace byzsim
