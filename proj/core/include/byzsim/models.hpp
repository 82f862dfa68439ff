#pragma once

#include <cstddef>
#include <string>

#include "byzsim/linalg.hpp"

namespace byzsim {

enum class ModelKind { Linear, Logistic, Huber };

inline constexpr double kDefaultHuberDelta = 1.345;

struct ModelSpec {
  ModelKind kind = ModelKind::Linear;
  std::size_t p = 1;
  double huber_delta = kDefaultHuberDelta;

  /// Throws ConfigError for p == 0 or a non-positive Huber threshold.
  void validate() const;
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

std::string to_string(ModelKind kind);
/// Accepts "linear", "logistic", "huber"; throws ConfigError otherwise.
ModelKind parse_model_kind(const std::string& name);

/// One machine's observations: x is n-by-p, y has length n. Mean
/// estimation shards leave y empty.
struct DataShard {
  DenseMatrix x;
  DenseVector y;

  std::size_t size() const noexcept { return x.rows(); }
  std::size_t dim() const noexcept { return x.cols(); }
};

/// The master's tilted objective: mean loss(theta) - <shift, theta>.
struct SurrogateProblem {
  const DataShard& shard;
  ModelSpec model;
  DenseVector shift;
};

/// Losses per observation (y = response, u = x^T theta):
///   Linear:   (y - u)^2
///   Logistic: log(1 + e^u) - y u
///   Huber:    r^2 / 2 for |r| <= delta, delta (|r| - delta / 2) otherwise, r = y - u
double loss_value(const ModelSpec& model, const DataShard& shard, const DenseVector& theta);

/// Average gradient of the loss over the shard.
DenseVector gradient(const ModelSpec& model, const DataShard& shard, const DenseVector& theta);

/// Row i holds the gradient of observation i's loss.
DenseMatrix per_sample_gradients(const ModelSpec& model, const DataShard& shard,
                                 const DenseVector& theta);

/// Average Hessian. Huber uses the indicator weights I(|r| <= delta) plus a
/// 1e-10 ridge so that fully clipped shards still factorize.
DenseMatrix hessian(const ModelSpec& model, const DataShard& shard, const DenseVector& theta);

/// Numerically stable logistic function e^u / (1 + e^u).
double logistic(double u) noexcept;

struct NewtonOptions {
  double gradient_tolerance = 1e-8;
  int max_iterations = 200;
};

/// Minimizer of the mean loss on one shard. Linear models use the normal
/// equations; logistic and Huber use damped Newton with step halving.
/// Throws FactorizationError for a singular linear design and SolverError
/// when Newton fails to converge.
DenseVector local_erm(const ModelSpec& model, const DataShard& shard,
                      const NewtonOptions& options = {});

/// argmin mean loss(theta) - <shift, theta>. On return the shard gradient
/// at the solution equals `shift` to within the solver tolerance.
DenseVector surrogate_minimize(const SurrogateProblem& problem,
                               const NewtonOptions& options = {});

/// Same as surrogate_minimize, warm-started at `start`.
DenseVector surrogate_minimize(const SurrogateProblem& problem, const DenseVector& start,
                               const NewtonOptions& options = {});

}  // namespace byzsim
