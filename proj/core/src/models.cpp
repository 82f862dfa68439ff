#include "byzsim/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "byzsim/error.hpp"

namespace byzsim {

namespace {

void check_shapes(const ModelSpec& model, const DataShard& shard, const DenseVector& theta) {
  if (theta.size() != model.p || shard.dim() != model.p) {
    throw DimensionError("model: parameter has dimension " + std::to_string(theta.size()) +
                         ", shard has " + std::to_string(shard.dim()) + ", model expects " +
                         std::to_string(model.p));
  }
  if (shard.y.size() != shard.size()) throw DimensionError("model: response length mismatch");
  if (shard.size() == 0) throw DimensionError("model: empty shard");
}

double softplus(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

double huber_loss(double r, double delta) {
  const double a = std::abs(r);
  return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

double huber_score(double r, double delta) {
  return std::abs(r) <= delta ? r : (r > 0.0 ? delta : -delta);
}

// d loss_i / d u_i, with u_i = x_i^T theta.
double loss_derivative(const ModelSpec& model, double u, double y) {
  switch (model.kind) {
    case ModelKind::Linear: return 2.0 * (u - y);
    case ModelKind::Logistic: return logistic(u) - y;
    case ModelKind::Huber: return -huber_score(y - u, model.huber_delta);
  }
  return 0.0;
}

// d^2 loss_i / d u_i^2.
double loss_curvature(const ModelSpec& model, double u, double y) {
  switch (model.kind) {
    case ModelKind::Linear: return 2.0;
    case ModelKind::Logistic: {
      const double l = logistic(u);
      return l * (1.0 - l);
    }
    case ModelKind::Huber: return std::abs(y - u) <= model.huber_delta ? 1.0 : 0.0;
  }
  return 0.0;
}

double surrogate_objective(const SurrogateProblem& prob, const DenseVector& theta) {
  return loss_value(prob.model, prob.shard, theta) - dot(prob.shift, theta);
}

DenseVector surrogate_gradient(const SurrogateProblem& prob, const DenseVector& theta) {
  DenseVector g = gradient(prob.model, prob.shard, theta);
  for (std::size_t l = 0; l < g.size(); ++l) g[l] -= prob.shift[l];
  return g;
}

DenseVector solve_linear_surrogate(const SurrogateProblem& prob) {
  const auto& shard = prob.shard;
  const std::size_t n = shard.size();
  const std::size_t p = prob.model.p;
  DenseMatrix gram(p, p);
  DenseVector rhs(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = shard.x.row(i);
    for (std::size_t a = 0; a < p; ++a) {
      rhs[a] += xi[a] * shard.y[i];
      for (std::size_t b = 0; b <= a; ++b) gram(a, b) += xi[a] * xi[b];
    }
  }
  const double scale = 2.0 / static_cast<double>(n);
  for (std::size_t a = 0; a < p; ++a) {
    rhs[a] = scale * rhs[a] + prob.shift[a];
    for (std::size_t b = 0; b <= a; ++b) {
      gram(a, b) *= scale;
      gram(b, a) = gram(a, b);
    }
  }
  return solve_spd(gram, rhs);
}

// Mean squared covariate, at least 1.
double design_scale(const DataShard& shard) {
  double s = 0.0;
  for (double v : shard.x.data()) s += v * v;
  return std::max(1.0, s / static_cast<double>(shard.x.data().size()));
}

DenseVector damped_newton(const SurrogateProblem& prob, DenseVector theta,
                          const NewtonOptions& options) {
  double objective = surrogate_objective(prob, theta);
  DenseVector grad = surrogate_gradient(prob, theta);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (norm_inf(grad) <= options.gradient_tolerance) return theta;
    DenseMatrix h = hessian(prob.model, prob.shard, theta);
    DenseVector step;
    try {
      step = solve_spd(h, grad);
    } catch (const FactorizationError&) {
      // Curvature too flat to factor (every Huber residual clipped, say):
      // Levenberg damping scaled to the design.
      const double lambda = 1e-3 * design_scale(prob.shard);
      for (std::size_t a = 0; a < h.rows(); ++a) h(a, a) += lambda;
      step = solve_spd(h, grad);
    }
    const double slope = dot(grad, step);
    // Below this predicted decrease the objective cannot tell steps apart,
    // so the full Newton step is taken unchecked.
    const bool resolvable = slope > 1e3 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(objective));

    double t = 1.0;
    DenseVector candidate(theta.size());
    double cand_objective = objective;
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t l = 0; l < theta.size(); ++l) candidate[l] = theta[l] - t * step[l];
      cand_objective = surrogate_objective(prob, candidate);
      if (!resolvable || cand_objective <= objective - 1e-4 * t * slope) break;
      t *= 0.5;
    }
    // At rounding level the Armijo test can fail even for a good step; the
    // last halved candidate is kept either way.
    theta = std::move(candidate);
    objective = cand_objective;
    grad = surrogate_gradient(prob, theta);
  }
  if (norm_inf(grad) <= options.gradient_tolerance) return theta;
  throw SolverError("damped Newton did not converge in " + std::to_string(options.max_iterations) +
                        " iterations (gradient inf-norm " + std::to_string(norm_inf(grad)) + ")",
                    theta, norm_inf(grad));
}

}  // namespace

void ModelSpec::validate() const {
  if (p == 0) throw ConfigError("model: dimension p must be >= 1");
  if (kind == ModelKind::Huber && !(huber_delta > 0.0)) {
    throw ConfigError("model: huber_delta must be positive");
  }
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Linear: return "linear";
    case ModelKind::Logistic: return "logistic";
    case ModelKind::Huber: return "huber";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "linear") return ModelKind::Linear;
  if (name == "logistic") return ModelKind::Logistic;
  if (name == "huber") return ModelKind::Huber;
  throw ConfigError("unknown model '" + name + "' (expected linear|logistic|huber)");
}

double logistic(double u) noexcept {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double loss_value(const ModelSpec& model, const DataShard& shard, const DenseVector& theta) {
  check_shapes(model, shard, theta);
  double total = 0.0;
  for (std::size_t i = 0; i < shard.size(); ++i) {
    const double u = dot(shard.x.row(i), theta);
    const double y = shard.y[i];
    switch (model.kind) {
      case ModelKind::Linear: total += (y - u) * (y - u); break;
      case ModelKind::Logistic: total += softplus(u) - y * u; break;
      case ModelKind::Huber: total += huber_loss(y - u, model.huber_delta); break;
    }
  }
  return total / static_cast<double>(shard.size());
}

DenseVector gradient(const ModelSpec& model, const DataShard& shard, const DenseVector& theta) {
  check_shapes(model, shard, theta);
  DenseVector g(model.p, 0.0);
  for (std::size_t i = 0; i < shard.size(); ++i) {
    const auto xi = shard.x.row(i);
    const double w = loss_derivative(model, dot(xi, theta), shard.y[i]);
    for (std::size_t l = 0; l < model.p; ++l) g[l] += w * xi[l];
  }
  for (double& v : g) v /= static_cast<double>(shard.size());
  return g;
}

DenseMatrix per_sample_gradients(const ModelSpec& model, const DataShard& shard,
                                 const DenseVector& theta) {
  check_shapes(model, shard, theta);
  DenseMatrix out(shard.size(), model.p);
  for (std::size_t i = 0; i < shard.size(); ++i) {
    const auto xi = shard.x.row(i);
    const double w = loss_derivative(model, dot(xi, theta), shard.y[i]);
    auto row = out.row(i);
    for (std::size_t l = 0; l < model.p; ++l) row[l] = w * xi[l];
  }
  return out;
}

DenseMatrix hessian(const ModelSpec& model, const DataShard& shard, const DenseVector& theta) {
  check_shapes(model, shard, theta);
  const std::size_t p = model.p;
  DenseMatrix h(p, p);
  for (std::size_t i = 0; i < shard.size(); ++i) {
    const auto xi = shard.x.row(i);
    const double w = loss_curvature(model, dot(xi, theta), shard.y[i]);
    if (w == 0.0) continue;
    for (std::size_t a = 0; a < p; ++a) {
      const double wa = w * xi[a];
      for (std::size_t b = 0; b <= a; ++b) h(a, b) += wa * xi[b];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(shard.size());
  const double ridge = model.kind == ModelKind::Huber ? 1e-10 : 0.0;
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      h(a, b) *= inv_n;
      h(b, a) = h(a, b);
    }
    h(a, a) += ridge;
  }
  return h;
}

DenseVector local_erm(const ModelSpec& model, const DataShard& shard,
                      const NewtonOptions& options) {
  SurrogateProblem prob{shard, model, DenseVector(model.p, 0.0)};
  return surrogate_minimize(prob, options);
}

DenseVector surrogate_minimize(const SurrogateProblem& problem, const NewtonOptions& options) {
  return surrogate_minimize(problem, DenseVector(problem.model.p, 0.0), options);
}

DenseVector surrogate_minimize(const SurrogateProblem& problem, const DenseVector& start,
                               const NewtonOptions& options) {
  problem.model.validate();
  check_shapes(problem.model, problem.shard, start);
  if (problem.shift.size() != problem.model.p) {
    throw DimensionError("surrogate_minimize: shift dimension mismatch");
  }
  for (double s : problem.shift) {
    if (!std::isfinite(s)) throw DomainError("surrogate_minimize: non-finite shift");
  }
  if (problem.model.kind == ModelKind::Linear) return solve_linear_surrogate(problem);
  return damped_newton(problem, start, options);
}

}  // namespace byzsim
