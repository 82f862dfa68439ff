#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "byzsim/attacks.hpp"
#include "byzsim/error.hpp"
#include "byzsim/replication.hpp"
#include "byzsim/simulator.hpp"
#include "oracles.hpp"

using namespace byzsim;

namespace {

SyntheticSpec regression(ModelKind kind, std::size_t p) {
  SyntheticSpec s;
  s.task = Task::Regression;
  s.model.kind = kind;
  s.model.p = p;
  return s;
}

SyntheticSpec mean_task(std::size_t p) {
  SyntheticSpec s;
  s.task = Task::MeanEstimation;
  s.model.p = p;
  s.covariance = CovarianceKind::Identity;
  return s;
}

AttackSpec attack_of(AttackKind kind) {
  AttackSpec a;
  a.kind = kind;
  return a;
}

}  // namespace

TEST_CASE("sample_byzantine_set examples") {
  SeededRng rng(1);
  CHECK(sample_byzantine_set(100, 0.0, rng).size() == 0);
  const ByzantineSet s = sample_byzantine_set(100, 0.15, rng);
  CHECK(s.size() == 15);
  CHECK(std::is_sorted(s.indices.begin(), s.indices.end()));
  CHECK(std::adjacent_find(s.indices.begin(), s.indices.end()) == s.indices.end());
  for (std::size_t j : s.indices) {
    CHECK(j >= 1);
    CHECK(j <= 100);
  }
  CHECK_FALSE(s.contains(0));
  CHECK(sample_byzantine_set(100, 0.009, rng).size() == 0);
  CHECK_THROWS_AS(sample_byzantine_set(100, 0.5, rng), ConfigError);
  CHECK_THROWS_AS(sample_byzantine_set(0, 0.1, rng), ConfigError);
}

TEST_CASE("sample_byzantine_set is uniform over workers") {
  SeededRng rng(3);
  std::vector<int> hits(11, 0);
  for (int t = 0; t < 20000; ++t) {
    for (std::size_t j : sample_byzantine_set(10, 0.3, rng).indices) ++hits[j];
  }
  CHECK(hits[0] == 0);
  for (std::size_t j = 1; j <= 10; ++j) CHECK(std::abs(hits[j] - 6000) < 300);
}

TEST_CASE("corrupt_report examples") {
  SeededRng rng(5);
  DenseVector v(30);
  std::iota(v.begin(), v.end(), 1.0);
  const DenseVector omni = corrupt_report(v, attack_of(AttackKind::Omniscient), rng);
  for (std::size_t l = 0; l < 30; ++l) CHECK(omni[l] == -1e10 * v[l]);
  const DenseVector flip = corrupt_report(v, attack_of(AttackKind::BitFlip), rng);
  for (std::size_t l = 0; l < 30; ++l) CHECK(flip[l] == (l < 5 ? -v[l] : v[l]));
  CHECK(corrupt_report(v, attack_of(AttackKind::None), rng) == v);
  CHECK(corrupt_report(DenseVector{1, 2}, attack_of(AttackKind::BitFlip), rng) == DenseVector{-1, -2});
}

TEST_CASE("gaussian payloads have the configured scale and ignore the honest report") {
  SeededRng rng(7);
  const AttackSpec a = attack_of(AttackKind::GaussianNoise);
  std::vector<double> honest;
  std::vector<double> sent;
  for (int i = 0; i < 1000; ++i) {
    const double h = rng.normal();
    honest.push_back(h);
    sent.push_back(corrupt_report(DenseVector{h}, a, rng)[0]);
  }
  const double mh = oracle::sample_mean(honest);
  const double ms = oracle::sample_mean(sent);
  double cov = 0.0;
  for (std::size_t i = 0; i < honest.size(); ++i) cov += (honest[i] - mh) * (sent[i] - ms);
  cov /= static_cast<double>(honest.size() - 1);
  const double corr = cov / std::sqrt(oracle::sample_variance(honest) * oracle::sample_variance(sent));
  CHECK(std::abs(corr) < 0.1);
  CHECK(std::sqrt(oracle::sample_variance(sent)) == doctest::Approx(std::sqrt(200.0)).epsilon(0.06));
}

TEST_CASE("label_flip_shard examples") {
  const DataShard s{DenseMatrix{{1}, {2}, {3}}, DenseVector{1, 0, 1}};
  const DataShard f = label_flip_shard(s);
  CHECK(f.y == DenseVector{0, 1, 0});
  CHECK(f.x == s.x);
  CHECK(label_flip_shard(f).y == s.y);
  CHECK(label_flip_shard(DataShard{DenseMatrix(3, 1), DenseVector{1, 1, 1}}).y == DenseVector{0, 0, 0});
  CHECK_THROWS_AS(label_flip_shard(DataShard{DenseMatrix(1, 1), DenseVector{0.5}}), DomainError);
}

TEST_CASE("ladder_parameter") {
  CHECK(ladder_parameter(1) == DenseVector{1});
  const DenseVector t = ladder_parameter(3);
  CHECK(t[0] == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(t[1] == doctest::Approx(0.5 / std::sqrt(3.0)));
  CHECK(t[2] == 0.0);
  const DenseVector t30 = ladder_parameter(30);
  CHECK(t30.size() == 30);
  CHECK(t30[0] == doctest::Approx(1.0 / std::sqrt(30.0)));
  CHECK(t30[29] == 0.0);
  CHECK(t30[1] == doctest::Approx(28.0 / 29.0 / std::sqrt(30.0)));
  CHECK_THROWS_AS(ladder_parameter(0), ConfigError);
}

TEST_CASE("generate_topology shape and determinism") {
  const SyntheticSpec spec = regression(ModelKind::Linear, 30);
  const Topology a = generate_topology(spec, 20, 50, 0.15, attack_of(AttackKind::Omniscient), SeededRng(9));
  CHECK(a.shards.size() == 21);
  for (const auto& s : a.shards) {
    CHECK(s.size() == 50);
    CHECK(s.dim() == 30);
    CHECK(s.y.size() == 50);
  }
  CHECK(a.total_samples() == 21 * 50);
  CHECK(a.byzantine.size() == 3);
  CHECK(a.truth == ladder_parameter(30));
  const Topology b = generate_topology(spec, 20, 50, 0.15, attack_of(AttackKind::Omniscient), SeededRng(9));
  for (std::size_t j = 0; j <= 20; ++j) {
    CHECK(a.shards[j].x == b.shards[j].x);
    CHECK(a.shards[j].y == b.shards[j].y);
  }
  CHECK(a.byzantine.indices == b.byzantine.indices);
  const Topology c = generate_topology(spec, 20, 50, 0.15, attack_of(AttackKind::Omniscient), SeededRng(10));
  CHECK_FALSE(a.shards[3].x == c.shards[3].x);
}

TEST_CASE("shard j does not depend on the number of machines") {
  const SyntheticSpec spec = regression(ModelKind::Logistic, 4);
  const Topology small = generate_topology(spec, 3, 40, 0.0, AttackSpec{}, SeededRng(12));
  const Topology big = generate_topology(spec, 9, 40, 0.0, AttackSpec{}, SeededRng(12));
  for (std::size_t j = 0; j <= 3; ++j) CHECK(small.shards[j].x == big.shards[j].x);
}

TEST_CASE("generate_topology validation") {
  CHECK_THROWS_AS(generate_topology(regression(ModelKind::Linear, 3), 10, 10, 0.1,
                                    attack_of(AttackKind::LabelFlip), SeededRng(1)),
                  ConfigError);
  CHECK_THROWS_AS(generate_topology(mean_task(3), 0, 10, 0.0, AttackSpec{}, SeededRng(1)), ConfigError);
  CHECK_THROWS_AS(generate_topology(mean_task(3), 10, 0, 0.0, AttackSpec{}, SeededRng(1)), ConfigError);
  CHECK_THROWS_AS(generate_topology(mean_task(3), 10, 10, 0.6, AttackSpec{}, SeededRng(1)), ConfigError);
}

TEST_CASE("synthetic data has the configured moments") {
  SyntheticSpec spec = regression(ModelKind::Linear, 3);
  spec.mu_x = 0.5;
  const Topology top = generate_topology(spec, 1, 60000, 0.0, AttackSpec{}, SeededRng(13));
  const DataShard& s = top.master();
  DenseVector mean(3, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t l = 0; l < 3; ++l) mean[l] += s.x(i, l) / static_cast<double>(s.size());
  }
  for (double v : mean) CHECK(std::abs(v - 0.5) < 0.02);
  double c01 = 0.0;
  double c02 = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    c01 += (s.x(i, 0) - mean[0]) * (s.x(i, 1) - mean[1]);
    c02 += (s.x(i, 0) - mean[0]) * (s.x(i, 2) - mean[2]);
  }
  CHECK(std::abs(c01 / static_cast<double>(s.size()) - 0.5) < 0.02);
  CHECK(std::abs(c02 / static_cast<double>(s.size()) - 0.25) < 0.02);
  double resid = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double u = 0.0;
    for (std::size_t l = 0; l < 3; ++l) u += s.x(i, l) * top.truth[l];
    resid += (s.y[i] - u) * (s.y[i] - u);
  }
  CHECK(std::abs(resid / static_cast<double>(s.size()) - 1.0) < 0.03);
}

TEST_CASE("run_mean_estimation examples") {
  const Topology top = generate_topology(mean_task(4), 9, 30, 0.0, AttackSpec{}, SeededRng(15));
  const DenseVector est = run_mean_estimation(top, AggregatorSpec::mean(), AttackSpec{}, SeededRng(16));
  DenseVector grand(4, 0.0);
  for (const auto& s : top.shards) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t l = 0; l < 4; ++l) grand[l] += s.x(i, l);
    }
  }
  for (std::size_t l = 0; l < 4; ++l) CHECK(est[l] == doctest::Approx(grand[l] / 300.0).epsilon(1e-12));

  Topology flat = top;
  for (auto& s : flat.shards) {
    for (double& v : s.x.data()) v = 2.5;
  }
  CHECK(run_mean_estimation(flat, AggregatorSpec::vrmom(10), AttackSpec{}, SeededRng(16)) ==
        DenseVector(4, 2.5));
}

TEST_CASE("attack kind none leaves Byzantine workers honest") {
  const SyntheticSpec spec = regression(ModelKind::Linear, 5);
  const Topology clean = generate_topology(spec, 20, 80, 0.0, AttackSpec{}, SeededRng(17));
  const Topology named = generate_topology(spec, 20, 80, 0.3, AttackSpec{}, SeededRng(17));
  REQUIRE(named.byzantine.size() == 6);
  const StoppingRule stop = StoppingRule::fixed(4);
  const RcslState a = run_rcsl(clean, spec.model, AggregatorSpec::vrmom(10), AttackSpec{}, stop, SeededRng(18));
  const RcslState b = run_rcsl(named, spec.model, AggregatorSpec::vrmom(10), AttackSpec{}, stop, SeededRng(18));
  CHECK(a.theta == b.theta);
}

TEST_CASE("rcsl_step with the mean aggregator is the plain CSL step") {
  const SyntheticSpec spec = regression(ModelKind::Linear, 3);
  const Topology top = generate_topology(spec, 10, 100, 0.0, AttackSpec{}, SeededRng(19));
  RcslState s0;
  s0.theta = local_erm(spec.model, top.master());
  std::vector<SeededRng> rngs(11, SeededRng(0));
  const RcslState s1 = rcsl_step(top, s0, spec.model, AggregatorSpec::mean(), AttackSpec{}, rngs);
  DenseVector global(3, 0.0);
  for (const auto& shard : top.shards) {
    const DenseVector g = gradient(spec.model, shard, s0.theta);
    for (std::size_t l = 0; l < 3; ++l) global[l] += g[l] / 11.0;
  }
  const DenseVector shift = subtract(gradient(spec.model, top.master(), s0.theta), global);
  const DenseVector expected = surrogate_minimize({top.master(), spec.model, shift});
  for (std::size_t l = 0; l < 3; ++l) CHECK(s1.theta[l] == doctest::Approx(expected[l]).epsilon(1e-12));
  CHECK(s1.iteration == 1);
  CHECK(s1.conv_metric >= 0.0);
}

TEST_CASE("noiseless linear data is a fixed point") {
  SyntheticSpec spec = regression(ModelKind::Linear, 4);
  spec.noise_std = 0.0;
  const Topology top = generate_topology(spec, 8, 50, 0.0, AttackSpec{}, SeededRng(21));
  RcslState s0;
  s0.theta = top.truth;
  std::vector<SeededRng> rngs(9, SeededRng(0));
  const RcslState s1 = rcsl_step(top, s0, spec.model, AggregatorSpec::vrmom(10), AttackSpec{}, rngs);
  for (std::size_t l = 0; l < 4; ++l) CHECK(std::abs(s1.theta[l] - top.truth[l]) < 1e-10);
}

TEST_CASE("run_rcsl stopping rules") {
  const SyntheticSpec spec = regression(ModelKind::Linear, 10);
  const Topology top = generate_topology(spec, 30, 300, 0.1, attack_of(AttackKind::GaussianNoise), SeededRng(23));
  const AttackSpec atk = attack_of(AttackKind::GaussianNoise);
  const RcslState fixed3 = run_rcsl(top, spec.model, AggregatorSpec::vrmom(10), atk, StoppingRule::fixed(3), SeededRng(24));
  CHECK(fixed3.iteration == 3);
  CHECK(fixed3.error_history.size() == 4);
  const RcslState fixed0 = run_rcsl(top, spec.model, AggregatorSpec::vrmom(10), atk, StoppingRule::fixed(0), SeededRng(24));
  CHECK(fixed0.iteration == 0);
  CHECK(fixed0.theta == local_erm(spec.model, top.master()));
  const RcslState tol = run_rcsl(top, spec.model, AggregatorSpec::vrmom(10), atk, StoppingRule::until(1e-4, 50), SeededRng(24));
  CHECK(atk.refresh == PayloadRefresh::PerReplication);
  CHECK(tol.converged);
  CHECK(tol.iteration <= 10);
  CHECK(tol.conv_metric <= 1e-4);
  const RcslState capped = run_rcsl(top, spec.model, AggregatorSpec::vrmom(10), atk, StoppingRule::until(1e-300, 2), SeededRng(24));
  CHECK_FALSE(capped.converged);
  CHECK(capped.iteration == 2);
  CHECK_THROWS_AS(StoppingRule::fixed(-1).validate(), ConfigError);
  CHECK_THROWS_AS(StoppingRule::until(0.0, 5).validate(), ConfigError);
}

TEST_CASE("logistic label flip converges within ten steps") {
  const SyntheticSpec spec = regression(ModelKind::Logistic, 10);
  const AttackSpec atk = attack_of(AttackKind::LabelFlip);
  const Topology top = generate_topology(spec, 40, 500, 0.15, atk, SeededRng(25));
  const RcslState s = run_rcsl(top, spec.model, AggregatorSpec::vrmom(10), atk, StoppingRule::until(1e-4, 10), SeededRng(26));
  CHECK(s.converged);
  CHECK(s.iteration <= 10);
}

TEST_CASE("huber model runs end to end") {
  const SyntheticSpec spec = regression(ModelKind::Huber, 5);
  const AttackSpec atk = attack_of(AttackKind::BitFlip);
  const Topology top = generate_topology(spec, 20, 200, 0.1, atk, SeededRng(27));
  const RcslState s = run_rcsl(top, spec.model, AggregatorSpec::vrmom(10), atk, StoppingRule::until(1e-4, 50), SeededRng(28));
  CHECK(s.converged);
  CHECK(norm2(subtract(s.theta, top.truth)) < 0.1);
}

TEST_CASE("RCSL resists the omniscient attack") {
  const SyntheticSpec spec = regression(ModelKind::Linear, 8);
  const AttackSpec atk = attack_of(AttackKind::Omniscient);
  const Topology top = generate_topology(spec, 40, 300, 0.15, atk, SeededRng(29));
  const RcslState robust = run_rcsl(top, spec.model, AggregatorSpec::vrmom(10), atk, StoppingRule::fixed(5), SeededRng(30));
  CHECK(norm2(subtract(robust.theta, top.truth)) < 0.1);
  const RcslState naive = run_rcsl(top, spec.model, AggregatorSpec::mean(), atk, StoppingRule::fixed(5), SeededRng(30));
  CHECK(norm2(subtract(naive.theta, top.truth)) > 1.0);
}

namespace {

ReplicationConfig small_mean_config() {
  ReplicationConfig c;
  c.data = mean_task(3);
  c.m = 20;
  c.n = 50;
  c.alpha = 0.1;
  c.attack = attack_of(AttackKind::GaussianNoise);
  c.aggregators = {AggregatorSpec::vrmom(10), AggregatorSpec::mom()};
  c.reps = 12;
  return c;
}

}  // namespace

TEST_CASE("run_replications determinism and thread independence") {
  ReplicationConfig c = small_mean_config();
  c.threads = 1;
  const auto serial = run_paired_replications(c, SeededRng(31));
  c.threads = 4;
  const auto parallel = run_paired_replications(c, SeededRng(31));
  const auto again = run_paired_replications(c, SeededRng(31));
  REQUIRE(serial.size() == 2);
  for (std::size_t a = 0; a < 2; ++a) {
    CHECK(serial[a].errors == parallel[a].errors);
    CHECK(serial[a].rmse == parallel[a].rmse);
    CHECK(parallel[a].errors == again[a].errors);
  }
  const auto other = run_paired_replications(c, SeededRng(32));
  CHECK_FALSE(other[0].errors == serial[0].errors);
}

TEST_CASE("paired runs do not depend on aggregator order") {
  ReplicationConfig c = small_mean_config();
  const auto forward = run_paired_replications(c, SeededRng(33));
  std::swap(c.aggregators[0], c.aggregators[1]);
  const auto backward = run_paired_replications(c, SeededRng(33));
  CHECK(forward[0].errors == backward[1].errors);
  CHECK(forward[1].errors == backward[0].errors);
  CHECK(run_replications(c, SeededRng(33)).errors == backward[0].errors);
}

TEST_CASE("replication summaries") {
  ReplicationConfig c = small_mean_config();
  c.reps = 1;
  const ExperimentResult one = run_replications(c, SeededRng(35));
  CHECK(one.errors.size() == 1);
  CHECK(one.rmse == one.errors[0]);
  CHECK(one.rmse_std == 0.0);

  c.reps = 9;
  const ExperimentResult r = run_replications(c, SeededRng(35));
  CHECK(r.rmse == doctest::Approx(oracle::sample_mean(r.errors)).epsilon(1e-14));
  CHECK(r.rmse_std == doctest::Approx(std::sqrt(oracle::sample_variance(r.errors))).epsilon(1e-12));
  c.rmse_mode = RmseMode::RootMeanSquare;
  const ExperimentResult rms = run_replications(c, SeededRng(35));
  double sq = 0.0;
  for (double e : rms.errors) sq += e * e;
  CHECK(rms.rmse == doctest::Approx(std::sqrt(sq / 9.0)).epsilon(1e-14));
  CHECK(rms.rmse >= r.rmse);
}

TEST_CASE("RCSL replications record iterations") {
  ReplicationConfig c;
  c.data = regression(ModelKind::Linear, 5);
  c.m = 15;
  c.n = 100;
  c.aggregators = {AggregatorSpec::vrmom(10)};
  c.stop = StoppingRule::until(1e-4, 50);
  c.reps = 4;
  const ExperimentResult r = run_replications(c, SeededRng(37));
  CHECK(r.failures == 0);
  CHECK(r.nonconverged == 0);
  CHECK(r.mean_iterations >= 1.0);
  for (int it : r.iterations) CHECK(it >= 1);
}

TEST_CASE("failed replications are recorded, not thrown") {
  ReplicationConfig c;
  c.data = regression(ModelKind::Linear, 8);
  c.m = 3;
  c.n = 4;  // fewer samples than parameters: singular master design
  c.aggregators = {AggregatorSpec::vrmom(10)};
  c.reps = 3;
  const ExperimentResult r = run_replications(c, SeededRng(39));
  CHECK(r.failures == 3);
  CHECK(r.successes() == 0);
  CHECK_FALSE(r.failure_messages.empty());
  for (double e : r.errors) CHECK(std::isnan(e));
}

TEST_CASE("resolve_thread_count") {
  CHECK(resolve_thread_count(3) >= 1);
  CHECK(resolve_thread_count(0) >= 1);
  std::vector<int> seen(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { seen[i] += 1; });
  for (int v : seen) CHECK(v == 1);
  CHECK_THROWS_AS(parallel_for(10, 2, [](std::size_t i) {
                    if (i == 7) throw ConfigError("boom");
                  }),
                  ConfigError);
}
