#include "byzsim/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "byzsim/error.hpp"

namespace byzsim {

void AttackSpec::validate() const {
  if (!(gaussian_std > 0.0)) throw ConfigError("attack: gaussian_std must be positive");
  if (!std::isfinite(omniscient_scale)) throw ConfigError("attack: omniscient_scale must be finite");
  if (kind == AttackKind::BitFlip && bitflip_dims == 0) {
    throw ConfigError("attack: bitflip_dims must be positive");
  }
}

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::None: return "none";
    case AttackKind::GaussianNoise: return "gaussian";
    case AttackKind::Omniscient: return "omniscient";
    case AttackKind::BitFlip: return "bitflip";
    case AttackKind::LabelFlip: return "labelflip";
  }
  return "unknown";
}

AttackKind parse_attack_kind(const std::string& name) {
  if (name == "none") return AttackKind::None;
  if (name == "gaussian") return AttackKind::GaussianNoise;
  if (name == "omniscient") return AttackKind::Omniscient;
  if (name == "bitflip") return AttackKind::BitFlip;
  if (name == "labelflip") return AttackKind::LabelFlip;
  throw ConfigError("unknown attack '" + name +
                    "' (expected none|gaussian|omniscient|bitflip|labelflip)");
}

std::string to_string(PayloadRefresh refresh) {
  return refresh == PayloadRefresh::PerRound ? "round" : "replication";
}

PayloadRefresh parse_payload_refresh(const std::string& name) {
  if (name == "round") return PayloadRefresh::PerRound;
  if (name == "replication") return PayloadRefresh::PerReplication;
  throw ConfigError("unknown payload refresh '" + name + "' (expected round|replication)");
}

bool ByzantineSet::contains(std::size_t machine) const {
  return std::binary_search(indices.begin(), indices.end(), machine);
}

ByzantineSet sample_byzantine_set(std::size_t m, double alpha, SeededRng& rng) {
  if (m < 1) throw ConfigError("byzantine set: need at least one worker");
  if (!(alpha >= 0.0 && alpha < 0.5)) {
    throw ConfigError("byzantine set: alpha must lie in [0, 1/2), got " + std::to_string(alpha));
  }
  const auto count = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(m)));
  std::vector<std::size_t> workers(m);
  std::iota(workers.begin(), workers.end(), std::size_t{1});
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(m - i));
    std::swap(workers[i], workers[j]);
  }
  ByzantineSet set;
  set.fraction = alpha;
  set.indices.assign(workers.begin(), workers.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(set.indices.begin(), set.indices.end());
  return set;
}

DenseVector corrupt_report(const DenseVector& honest, const AttackSpec& spec, SeededRng& rng) {
  switch (spec.kind) {
    case AttackKind::None:
    case AttackKind::LabelFlip:
      return honest;
    case AttackKind::GaussianNoise: {
      DenseVector out(honest.size());
      for (double& v : out) v = spec.gaussian_std * rng.normal();
      return out;
    }
    case AttackKind::Omniscient: {
      DenseVector out(honest.size());
      for (std::size_t l = 0; l < honest.size(); ++l) out[l] = -spec.omniscient_scale * honest[l];
      return out;
    }
    case AttackKind::BitFlip: {
      DenseVector out = honest;
      const std::size_t flips = std::min(spec.bitflip_dims, out.size());
      for (std::size_t l = 0; l < flips; ++l) out[l] = -out[l];
      return out;
    }
  }
  return honest;
}

DataShard label_flip_shard(const DataShard& shard) {
  DataShard out = shard;
  for (double& y : out.y) {
    if (y != 0.0 && y != 1.0) throw DomainError("label_flip_shard: responses must be 0 or 1");
    y = 1.0 - y;
  }
  return out;
}

}  // namespace byzsim
