#include "byzsim/replication.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "byzsim/error.hpp"

namespace byzsim {

namespace {

constexpr std::uint64_t kDataStream = 0;
constexpr std::uint64_t kAttackStream = 1;

struct ReplicationOutcome {
  std::vector<double> errors;
  std::vector<DenseVector> estimates;
  std::vector<int> iterations;
  std::vector<bool> converged;
  std::vector<std::string> failures;
};

ReplicationOutcome run_one(const ReplicationConfig& cfg, const SeededRng& rep_rng) {
  const std::size_t k = cfg.aggregators.size();
  ReplicationOutcome out{std::vector<double>(k, std::nan("")), std::vector<DenseVector>(k),
                         std::vector<int>(k, 0), std::vector<bool>(k, true),
                         std::vector<std::string>(k)};
  Topology top;
  try {
    top = generate_topology(cfg.data, cfg.m, cfg.n, cfg.alpha, cfg.attack,
                            rep_rng.stream(kDataStream));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    for (auto& f : out.failures) f = e.what();
    return out;
  }
  const SeededRng attack_rng = rep_rng.stream(kAttackStream);

  if (cfg.data.task == Task::MeanEstimation) {
    const BlockSummaries blocks = mean_estimation_blocks(top, cfg.attack, attack_rng);
    for (std::size_t a = 0; a < k; ++a) {
      try {
        out.estimates[a] = aggregate(blocks, cfg.aggregators[a]);
        out.errors[a] = norm2(subtract(out.estimates[a], top.truth));
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        out.failures[a] = e.what();
      }
    }
    return out;
  }

  for (std::size_t a = 0; a < k; ++a) {
    try {
      RcslState state =
          run_rcsl(top, cfg.data.model, cfg.aggregators[a], cfg.attack, cfg.stop, attack_rng);
      out.errors[a] = norm2(subtract(state.theta, top.truth));
      out.estimates[a] = std::move(state.theta);
      out.iterations[a] = state.iteration;
      out.converged[a] = state.converged;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      out.failures[a] = e.what();
    }
  }
  return out;
}

}  // namespace

unsigned resolve_thread_count(unsigned requested) {
  unsigned threads = requested;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BYZSIM_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) threads = std::min(threads, static_cast<unsigned>(cap));
  }
  return threads;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  const auto workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            next.store(count);
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

void summarize_errors(ExperimentResult& result, RmseMode mode) {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (double e : result.errors) {
    if (std::isnan(e)) continue;
    sum += e;
    sum_sq += e * e;
    ++count;
  }
  if (count == 0) {
    result.rmse = std::nan("");
    result.rmse_std = std::nan("");
    return;
  }
  const double mean = sum / static_cast<double>(count);
  result.rmse = mode == RmseMode::MeanNorm ? mean : std::sqrt(sum_sq / static_cast<double>(count));
  double ss = 0.0;
  for (double e : result.errors) {
    if (!std::isnan(e)) ss += (e - mean) * (e - mean);
  }
  result.rmse_std = count > 1 ? std::sqrt(ss / static_cast<double>(count - 1)) : 0.0;
}

std::vector<ExperimentResult> run_paired_replications(const ReplicationConfig& config,
                                                      const SeededRng& rng) {
  if (config.reps < 1) throw ConfigError("replications: reps must be >= 1");
  if (config.aggregators.empty()) throw ConfigError("replications: no aggregator configured");
  config.data.validate();
  config.attack.validate();
  config.stop.validate();
  if (config.m < 1 || config.n < 1) throw ConfigError("replications: m and n must be >= 1");
  if (!(config.alpha >= 0.0 && config.alpha < 0.5)) {
    throw ConfigError("replications: alpha must lie in [0, 1/2)");
  }

  std::vector<ReplicationOutcome> outcomes(config.reps);
  parallel_for(config.reps, resolve_thread_count(config.threads),
               [&](std::size_t r) { outcomes[r] = run_one(config, rng.stream(r)); });

  std::vector<ExperimentResult> results;
  for (std::size_t a = 0; a < config.aggregators.size(); ++a) {
    ExperimentResult res;
    res.aggregator = config.aggregators[a];
    double iter_sum = 0.0;
    for (const auto& o : outcomes) {
      res.errors.push_back(o.errors[a]);
      res.estimates.push_back(o.estimates[a]);
      res.iterations.push_back(o.iterations[a]);
      if (!o.failures[a].empty()) {
        ++res.failures;
        res.failure_messages.push_back(o.failures[a]);
        continue;
      }
      iter_sum += o.iterations[a];
      if (!o.converged[a]) ++res.nonconverged;
    }
    const std::size_t ok = res.successes();
    res.mean_iterations = ok > 0 ? iter_sum / static_cast<double>(ok) : std::nan("");
    summarize_errors(res, config.rmse_mode);
    results.push_back(std::move(res));
  }
  return results;
}

ExperimentResult run_replications(const ReplicationConfig& config, const SeededRng& rng) {
  if (config.aggregators.empty()) throw ConfigError("replications: no aggregator configured");
  ReplicationConfig single = config;
  single.aggregators.resize(1);
  return run_paired_replications(single, rng).front();
}

}  // namespace byzsim
