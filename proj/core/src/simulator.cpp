#include "byzsim/simulator.hpp"

#include <cmath>
#include <string>

#include "byzsim/error.hpp"

namespace byzsim {

namespace {

constexpr std::uint64_t kByzantineStream = 0xB7A2'0000'0000'0001ULL;

DataShard sample_shard(const SyntheticSpec& spec, const DenseMatrix& chol, std::size_t n,
                       const DenseVector& truth, SeededRng rng) {
  const std::size_t p = spec.dim();
  const bool identity = spec.covariance == CovarianceKind::Identity;
  const double shift = spec.task == Task::Regression ? spec.mu_x : 0.0;
  DataShard shard{DenseMatrix(n, p), {}};
  if (spec.task == Task::Regression) shard.y.resize(n);
  DenseVector z(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : z) v = rng.normal();
    auto row = shard.x.row(i);
    for (std::size_t a = 0; a < p; ++a) {
      double v = z[a];
      if (!identity) {
        v = 0.0;
        for (std::size_t b = 0; b <= a; ++b) v += chol(a, b) * z[b];
      }
      row[a] = (spec.task == Task::MeanEstimation ? truth[a] : shift) + v;
    }
    if (spec.task == Task::Regression) {
      const double u = dot(row, truth);
      if (spec.model.kind == ModelKind::Logistic) {
        shard.y[i] = rng.uniform() < logistic(u) ? 1.0 : 0.0;
      } else {
        shard.y[i] = u + spec.noise_std * rng.normal();
      }
    }
  }
  return shard;
}

double squared_norm(const DenseVector& v) { return dot(v, v); }

}  // namespace

std::string to_string(CovarianceKind kind) {
  return kind == CovarianceKind::Identity ? "identity" : "toeplitz";
}

CovarianceKind parse_covariance_kind(const std::string& name) {
  if (name == "identity") return CovarianceKind::Identity;
  if (name == "toeplitz") return CovarianceKind::Toeplitz;
  throw ConfigError("unknown covariance '" + name + "' (expected identity|toeplitz)");
}

DenseMatrix SyntheticSpec::covariance_matrix() const {
  if (covariance == CovarianceKind::Identity) return DenseMatrix::identity(dim());
  return toeplitz_ar1(dim(), toeplitz_rho);
}

void SyntheticSpec::validate() const {
  model.validate();
  if (covariance == CovarianceKind::Toeplitz && !(std::abs(toeplitz_rho) < 1.0)) {
    throw ConfigError("synthetic: Toeplitz correlation must lie in (-1, 1)");
  }
  if (!(noise_std >= 0.0)) throw ConfigError("synthetic: noise_std must be non-negative");
  if (!std::isfinite(mu_x)) throw ConfigError("synthetic: mu_x must be finite");
}

DenseVector ladder_parameter(std::size_t p) {
  if (p == 0) throw ConfigError("ladder_parameter: p must be >= 1");
  if (p == 1) return {1.0};
  DenseVector theta(p);
  const double scale = 1.0 / std::sqrt(static_cast<double>(p));
  for (std::size_t i = 0; i < p; ++i) {
    theta[i] = scale * static_cast<double>(p - 1 - i) / static_cast<double>(p - 1);
  }
  return theta;
}

Topology generate_topology(const SyntheticSpec& spec, std::size_t m, std::size_t n, double alpha,
                           const AttackSpec& attack, const SeededRng& rng) {
  spec.validate();
  attack.validate();
  if (m < 1 || n < 1) throw ConfigError("topology: m and n must both be >= 1");
  if (attack.kind == AttackKind::LabelFlip &&
      (spec.task != Task::Regression || spec.model.kind != ModelKind::Logistic)) {
    throw ConfigError("topology: labelflip attack requires the logistic model");
  }
  Topology top;
  top.m = m;
  top.n = n;
  top.truth = ladder_parameter(spec.dim());
  const DenseMatrix chol = cholesky(spec.covariance_matrix());
  top.shards.reserve(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    top.shards.push_back(sample_shard(spec, chol, n, top.truth, rng.stream(j)));
  }
  SeededRng byz_rng = rng.stream(kByzantineStream);
  top.byzantine = sample_byzantine_set(m, alpha, byz_rng);
  return top;
}

BlockSummaries mean_estimation_blocks(const Topology& top, const AttackSpec& attack,
                                      const SeededRng& rng) {
  if (attack.kind == AttackKind::LabelFlip) {
    throw ConfigError("mean estimation: labelflip attack needs responses");
  }
  BlockSummaries blocks;
  blocks.n = top.n;
  blocks.means.reserve(top.m + 1);
  for (std::size_t j = 0; j <= top.m; ++j) {
    const DataShard& shard = top.shards[j];
    DenseVector mean(shard.dim(), 0.0);
    for (std::size_t i = 0; i < shard.size(); ++i) {
      const auto r = shard.x.row(i);
      for (std::size_t l = 0; l < mean.size(); ++l) mean[l] += r[l];
    }
    for (double& v : mean) v /= static_cast<double>(shard.size());
    if (j > 0 && top.byzantine.contains(j)) {
      SeededRng worker = rng.stream(j);
      mean = corrupt_report(mean, attack, worker);
    }
    blocks.means.push_back(std::move(mean));
  }
  blocks.sigma_hat = block_sigma_hat(top.master().x);
  return blocks;
}

DenseVector run_mean_estimation(const Topology& top, const AggregatorSpec& spec,
                                const AttackSpec& attack, const SeededRng& rng) {
  return aggregate(mean_estimation_blocks(top, attack, rng), spec);
}

void StoppingRule::validate() const {
  if (iterations < 0) throw ConfigError("stopping rule: iteration count must be >= 0");
  if (kind == Kind::Tolerance && !(tolerance > 0.0)) {
    throw ConfigError("stopping rule: tolerance must be positive");
  }
}

RcslState rcsl_step(const Topology& top, const RcslState& state, const ModelSpec& model,
                    const AggregatorSpec& agg, const AttackSpec& attack,
                    std::span<SeededRng> worker_rngs) {
  if (worker_rngs.size() < top.m + 1) {
    throw ConfigError("rcsl_step: need one attack stream per machine");
  }
  const int t = state.iteration + 1;
  try {
    BlockSummaries blocks;
    blocks.n = top.n;
    blocks.means.resize(top.m + 1);
    for (std::size_t j = 0; j <= top.m; ++j) {
      const bool byzantine = j > 0 && top.byzantine.contains(j);
      if (!byzantine) {
        blocks.means[j] = gradient(model, top.shards[j], state.theta);
        continue;
      }
      switch (attack.kind) {
        case AttackKind::LabelFlip:
          blocks.means[j] = gradient(model, label_flip_shard(top.shards[j]), state.theta);
          break;
        case AttackKind::GaussianNoise:
          // The payload ignores the honest gradient; skip computing it.
          blocks.means[j] = corrupt_report(DenseVector(model.p, 0.0), attack, worker_rngs[j]);
          break;
        default:
          blocks.means[j] =
              corrupt_report(gradient(model, top.shards[j], state.theta), attack, worker_rngs[j]);
      }
    }
    if (agg.kind() == AggregatorKind::Vrmom) {
      blocks.sigma_hat = block_sigma_hat(per_sample_gradients(model, top.master(), state.theta));
    } else {
      blocks.sigma_hat.assign(model.p, 0.0);
    }
    const DenseVector aggregated = aggregate(blocks, agg);
    SurrogateProblem problem{top.master(), model, subtract(blocks.means[0], aggregated)};

    RcslState next;
    next.theta = surrogate_minimize(problem, state.theta);
    next.iteration = t;
    const double step = squared_norm(subtract(next.theta, state.theta));
    const double base = squared_norm(state.theta);
    next.conv_metric = base > 0.0 ? step / base : step;
    next.error_history = state.error_history;
    if (!top.truth.empty() && top.truth.size() == next.theta.size()) {
      next.error_history.push_back(norm2(subtract(next.theta, top.truth)));
    }
    next.converged = state.converged;
    return next;
  } catch (const SolverError& e) {
    throw SolverError("rcsl iteration " + std::to_string(t) + ": " + e.what(), e.last_iterate(),
                      e.residual_norm());
  } catch (const FactorizationError& e) {
    throw SolverError("rcsl iteration " + std::to_string(t) + ": " + e.what(), state.theta,
                      std::nan(""));
  }
}

RcslState run_rcsl(const Topology& top, const ModelSpec& model, const AggregatorSpec& agg,
                   const AttackSpec& attack, const StoppingRule& stop, const SeededRng& rng) {
  stop.validate();
  RcslState state;
  state.theta = local_erm(model, top.master());
  if (!top.truth.empty()) state.error_history.push_back(norm2(subtract(state.theta, top.truth)));

  std::vector<SeededRng> worker_rngs;
  worker_rngs.reserve(top.m + 1);
  for (std::size_t j = 0; j <= top.m; ++j) worker_rngs.push_back(rng.stream(j));

  // A payload fixed per replication is replayed by rewinding the streams.
  const std::vector<SeededRng> initial_rngs =
      attack.refresh == PayloadRefresh::PerReplication ? worker_rngs : std::vector<SeededRng>{};
  auto step = [&] {
    if (!initial_rngs.empty()) worker_rngs = initial_rngs;
    state = rcsl_step(top, state, model, agg, attack, worker_rngs);
  };

  if (stop.kind == StoppingRule::Kind::FixedIterations) {
    for (int t = 0; t < stop.iterations; ++t) step();
    return state;
  }
  state.converged = stop.iterations == 0;
  while (state.iteration < stop.iterations) {
    step();
    if (state.conv_metric <= stop.tolerance) {
      state.converged = true;
      break;
    }
  }
  return state;
}

}  // namespace byzsim
