#include "byzsim/aggregators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "byzsim/error.hpp"
#include "byzsim/numerics.hpp"

namespace byzsim {

namespace {

void check_blocks(const BlockSummaries& blocks) {
  if (blocks.means.empty()) throw DimensionError("aggregate: no blocks");
  const std::size_t p = blocks.means.front().size();
  for (const auto& v : blocks.means) {
    if (v.size() != p) throw DimensionError("aggregate: block means differ in dimension");
  }
}

// Calls fn(l, column) with the l-th coordinate of every block in a reused
// scratch buffer, and stores its return value.
template <typename Fn>
DenseVector coordinatewise(const BlockSummaries& blocks, Fn&& fn) {
  check_blocks(blocks);
  const std::size_t p = blocks.dim();
  DenseVector out(p);
  std::vector<double> column(blocks.means.size());
  for (std::size_t l = 0; l < p; ++l) {
    for (std::size_t j = 0; j < blocks.means.size(); ++j) column[j] = blocks.means[j][l];
    out[l] = fn(l, std::span<double>(column));
  }
  return out;
}

}  // namespace

AggregatorSpec AggregatorSpec::mean() { return AggregatorSpec{}; }

AggregatorSpec AggregatorSpec::mom() {
  AggregatorSpec s;
  s.kind_ = AggregatorKind::Mom;
  return s;
}

AggregatorSpec AggregatorSpec::vrmom(int quantile_levels) {
  if (quantile_levels < 1) {
    throw ConfigError("vrmom: number of quantile levels K must be >= 1, got " +
                      std::to_string(quantile_levels));
  }
  AggregatorSpec s;
  s.kind_ = AggregatorKind::Vrmom;
  s.k_ = quantile_levels;
  s.deltas_.reserve(static_cast<std::size_t>(quantile_levels));
  for (int k = 1; k <= quantile_levels; ++k) {
    const double delta = normal_inv_cdf(static_cast<double>(k) / (quantile_levels + 1));
    s.deltas_.push_back(delta);
    s.psi_sum_ += normal_pdf(delta);
  }
  return s;
}

AggregatorSpec AggregatorSpec::trimmed_mean(double trim_fraction) {
  if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) {
    throw ConfigError("trimmed mean: trim fraction must lie in [0, 1/2), got " +
                      std::to_string(trim_fraction));
  }
  AggregatorSpec s;
  s.kind_ = AggregatorKind::TrimmedMean;
  s.beta_ = trim_fraction;
  return s;
}

std::string AggregatorSpec::name() const {
  switch (kind_) {
    case AggregatorKind::Mean: return "mean";
    case AggregatorKind::Mom: return "mom";
    case AggregatorKind::Vrmom: return "vrmom";
    case AggregatorKind::TrimmedMean: return "trimmed";
  }
  return "unknown";
}

DenseVector mean_aggregate(const BlockSummaries& blocks) {
  return coordinatewise(blocks, [](std::size_t, std::span<double> col) {
    double s = 0.0;
    for (double v : col) s += v;
    return s / static_cast<double>(col.size());
  });
}

DenseVector mom_aggregate(const BlockSummaries& blocks) {
  return coordinatewise(blocks, [](std::size_t, std::span<double> col) {
    return select_quantile_inplace(col, 0.5);
  });
}

double vrmom_correction_summand(double z, int quantile_levels) {
  if (std::isnan(z)) throw DomainError("vrmom_correction_summand: NaN argument");
  const double k = static_cast<double>(quantile_levels);
  double phi = 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0);
  phi = std::clamp(phi, 1e-16, 1.0 - 1e-16);
  return k / 2.0 + 1.0 - std::ceil((k + 1.0) * phi);
}

DenseVector vrmom_aggregate(const BlockSummaries& blocks, const AggregatorSpec& spec) {
  if (spec.kind() != AggregatorKind::Vrmom) throw ConfigError("vrmom_aggregate: spec is not VRMOM");
  if (blocks.n < 1) throw ConfigError("vrmom_aggregate: block size must be >= 1");
  check_blocks(blocks);
  if (blocks.sigma_hat.size() != blocks.dim()) {
    throw DimensionError("vrmom_aggregate: sigma_hat dimension mismatch");
  }
  const double sqrt_n = std::sqrt(static_cast<double>(blocks.n));
  const double machines = static_cast<double>(blocks.means.size());
  const int levels = spec.quantile_levels();

  return coordinatewise(blocks, [&](std::size_t l, std::span<double> col) {
    const double sigma = blocks.sigma_hat[l];
    // The column is permuted by the selection; the correction sum does not
    // depend on order.
    const double med = select_quantile_inplace(col, 0.5);
    if (!(sigma > kSigmaFloor)) return med;
    double total = 0.0;
    for (double v : col) total += vrmom_correction_summand(sqrt_n * (v - med) / sigma, levels);
    return med - sigma / (machines * sqrt_n * spec.psi_sum()) * total;
  });
}

DenseVector trimmed_mean_aggregate(const BlockSummaries& blocks, double trim_fraction) {
  if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) {
    throw ConfigError("trimmed mean: trim fraction must lie in [0, 1/2)");
  }
  return coordinatewise(blocks, [&](std::size_t, std::span<double> col) {
    for (double v : col) {
      if (std::isnan(v)) throw DomainError("trimmed mean: NaN in input");
    }
    const auto trim = static_cast<std::size_t>(
        std::floor(trim_fraction * static_cast<double>(col.size())));
    std::sort(col.begin(), col.end());
    double s = 0.0;
    for (std::size_t i = trim; i < col.size() - trim; ++i) s += col[i];
    return s / static_cast<double>(col.size() - 2 * trim);
  });
}

DenseVector aggregate(const BlockSummaries& blocks, const AggregatorSpec& spec) {
  switch (spec.kind()) {
    case AggregatorKind::Mean: return mean_aggregate(blocks);
    case AggregatorKind::Mom: return mom_aggregate(blocks);
    case AggregatorKind::Vrmom: return vrmom_aggregate(blocks, spec);
    case AggregatorKind::TrimmedMean: return trimmed_mean_aggregate(blocks, spec.trim_fraction());
  }
  throw ConfigError("aggregate: unknown aggregator kind");
}

DenseVector block_sigma_hat(const DenseMatrix& samples) {
  if (samples.rows() == 0) throw DomainError("block_sigma_hat: no samples");
  const std::size_t n = samples.rows();
  const std::size_t p = samples.cols();
  DenseVector mean(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = samples.row(i);
    for (std::size_t l = 0; l < p; ++l) mean[l] += r[l];
  }
  for (double& v : mean) v /= static_cast<double>(n);
  DenseVector var(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = samples.row(i);
    for (std::size_t l = 0; l < p; ++l) {
      const double d = r[l] - mean[l];
      var[l] += d * d;
    }
  }
  for (double& v : var) v = std::sqrt(v / static_cast<double>(n));
  return var;
}

DenseVector block_sigma_hat(std::span<const DenseVector> samples) {
  if (samples.empty()) throw DomainError("block_sigma_hat: no samples");
  const std::size_t p = samples.front().size();
  DenseMatrix m(samples.size(), p);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].size() != p) throw DimensionError("block_sigma_hat: ragged samples");
    std::copy(samples[i].begin(), samples[i].end(), m.row(i).begin());
  }
  return block_sigma_hat(m);
}

}  // namespace byzsim
