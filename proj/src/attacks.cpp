#include "tattooed/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include "tattooed/errors.hpp"

namespace tattooed {

std::optional<AttackKind> parse_attack_kind(std::string_view name) {
  if (name == "prune_random") return AttackKind::kPruneRandom;
  if (name == "prune_magnitude") return AttackKind::kPruneMagnitude;
  if (name == "perturb_gaussian") return AttackKind::kPerturbGaussian;
  if (name == "shuffle") return AttackKind::kShuffle;
  return std::nullopt;
}

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::kPruneRandom: return "prune_random";
    case AttackKind::kPruneMagnitude: return "prune_magnitude";
    case AttackKind::kPerturbGaussian: return "perturb_gaussian";
    case AttackKind::kShuffle: return "shuffle";
  }
  return "unknown";
}

ParameterVector prune(const ParameterVector& weights, double fraction,
                      PruneStrategy strategy, const Seed& attack_seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw AttackError("pruning fraction must lie in [0, 1]");
  }
  const std::size_t n = weights.size();
  const auto count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  ParameterVector out = weights;

  if (strategy == PruneStrategy::kRandom) {
    for (auto i : seeded_prefix(attack_seed, StreamDomain::kPrune, n, count)) out.values[i] = 0.0F;
  } else {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto smaller = [&](std::size_t a, std::size_t b) {
      const float fa = std::fabs(weights.values[a]);
      const float fb = std::fabs(weights.values[b]);
      return fa < fb || (fa == fb && a < b);
    };
    if (count < n) {
      std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count),
                       order.end(), smaller);
    }
    for (std::size_t i = 0; i < count; ++i) out.values[order[i]] = 0.0F;
  }
  out.provenance = content_hash(out.values);
  return out;
}

ParameterVector perturb(const ParameterVector& weights, double sigma_w, const Seed& attack_seed) {
  if (!(sigma_w >= 0.0) || !std::isfinite(sigma_w)) {
    throw AttackError("perturbation std must be a finite value >= 0");
  }
  ParameterVector out = weights;
  if (sigma_w > 0.0) {
    KeyedStream stream(attack_seed, StreamDomain::kPerturb, 0);
    for (auto& w : out.values) {
      w = static_cast<float>(static_cast<double>(w) + sigma_w * stream.normal());
    }
  }
  out.provenance = content_hash(out.values);
  return out;
}

ShuffleResult shuffle_model_with_map(const TensorContainer& model, const Seed& attack_seed) {
  PermutationMap map = identity_permutations(model);
  for (std::size_t l = 0; l < map.per_layer.size(); ++l) {
    KeyedStream stream(attack_seed, StreamDomain::kShuffle, l);
    auto& p = map.per_layer[l];
    for (std::size_t i = p.size(); i > 1; --i) std::swap(p[i - 1], p[stream.uniform_below(i)]);
  }
  ShuffleResult r{apply_permutations(model, map), std::move(map)};
  return r;
}

TensorContainer shuffle_model(const TensorContainer& model, const Seed& attack_seed) {
  return shuffle_model_with_map(model, attack_seed).model;
}

TensorContainer apply_attack(const TensorContainer& model, const AttackSpec& spec) {
  switch (spec.kind) {
    case AttackKind::kPruneRandom:
    case AttackKind::kPruneMagnitude: {
      const auto strategy = spec.kind == AttackKind::kPruneRandom ? PruneStrategy::kRandom
                                                                   : PruneStrategy::kMagnitude;
      return unflatten(prune(flatten(model), spec.intensity, strategy, spec.attack_seed),
                       model.manifest());
    }
    case AttackKind::kPerturbGaussian:
      return unflatten(perturb(flatten(model), spec.intensity, spec.attack_seed),
                       model.manifest());
    case AttackKind::kShuffle:
      return shuffle_model(model, spec.attack_seed);
  }
  throw AttackError("unknown attack kind");
}

std::vector<double> default_pruning_fractions() {
  return {0.25, 0.50, 0.75, 0.90, 0.95, 0.99, 0.9975, 0.9999};
}

std::vector<PruningRow> run_pruning_sweep(const ParameterVector& marked, const MarkRecord& record,
                                          const SecretKey& key, const ParameterVector& baseline,
                                          std::span<const double> fractions,
                                          const Seed& attack_seed, PruneStrategy strategy) {
  std::vector<PruningRow> rows;
  for (double f : fractions) {
    const ParameterVector attacked = prune(marked, f, strategy, attack_seed);
    const VerifyReport rep = verify(attacked, record, key, baseline);
    rows.push_back({f, rep.watermark_accuracy,
                    rep.channel_lost ? -std::numeric_limits<double>::infinity()
                                     : rep.estimate.snr_db,
                    rep.decision});
  }
  return rows;
}

void write_pruning_csv(std::span<const PruningRow> rows, std::ostream& out) {
  out << "fraction,watermark_accuracy,snr_db\n";
  const auto flags = out.flags();
  for (const auto& r : rows) {
    out << std::setprecision(6) << r.fraction << ',' << r.watermark_accuracy << ',';
    if (std::isinf(r.snr_db)) {
      out << (r.snr_db < 0 ? "-inf" : "inf");
    } else {
      out << std::fixed << std::setprecision(4) << r.snr_db;
      out.flags(flags);
    }
    out << '\n';
  }
  out.flags(flags);
}

}  // namespace tattooed
