#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "byzsim/linalg.hpp"
#include "byzsim/models.hpp"
#include "byzsim/rng.hpp"

namespace byzsim {

enum class AttackKind { None, GaussianNoise, Omniscient, BitFlip, LabelFlip };

/// When a Byzantine worker draws a new Gaussian payload in RCSL.
enum class PayloadRefresh {
  PerRound,        ///< fresh draw in every communication round
  PerReplication,  ///< drawn once, then resent unchanged every round
};

/// How a Byzantine worker's report is produced from its honest one.
struct AttackSpec {
  AttackKind kind = AttackKind::None;
  /// Per-coordinate standard deviation of Gaussian payloads. The default
  /// reads N(0, 200 I) as variance 200 per coordinate.
  double gaussian_std = 14.142135623730951;
  double omniscient_scale = 1e10;
  std::size_t bitflip_dims = 5;
  PayloadRefresh refresh = PayloadRefresh::PerReplication;

  void validate() const;
  friend bool operator==(const AttackSpec&, const AttackSpec&) = default;
};

std::string to_string(AttackKind kind);
/// Accepts none|gaussian|omniscient|bitflip|labelflip.
AttackKind parse_attack_kind(const std::string& name);
std::string to_string(PayloadRefresh refresh);
/// Accepts round|replication.
PayloadRefresh parse_payload_refresh(const std::string& name);

/// Sorted worker indices in {1..m}; the master (0) is never included.
struct ByzantineSet {
  std::vector<std::size_t> indices;
  double fraction = 0.0;

  bool contains(std::size_t machine) const;
  std::size_t size() const noexcept { return indices.size(); }
};

/// Uniformly random subset of floor(alpha * m) workers.
/// Throws ConfigError unless 0 <= alpha < 1/2 and m >= 1.
ByzantineSet sample_byzantine_set(std::size_t m, double alpha, SeededRng& rng);

/// The message a Byzantine worker sends in place of `honest`. LabelFlip
/// acts on the data (see label_flip_shard), so here it is the identity.
DenseVector corrupt_report(const DenseVector& honest, const AttackSpec& spec, SeededRng& rng);

/// Replaces every response y by 1 - y. Throws DomainError for non-binary
/// responses.
DataShard label_flip_shard(const DataShard& shard);

}  // namespace byzsim
