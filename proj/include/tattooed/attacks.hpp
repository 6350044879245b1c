#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tattooed/dense_network.hpp"
#include "tattooed/model_io.hpp"
#include "tattooed/watermark.hpp"

namespace tattooed {

enum class AttackKind { kPruneRandom, kPruneMagnitude, kPerturbGaussian, kShuffle };
enum class PruneStrategy { kRandom, kMagnitude };

/// "prune_random", "prune_magnitude", "perturb_gaussian", "shuffle".
std::optional<AttackKind> parse_attack_kind(std::string_view name);
std::string_view to_string(AttackKind kind);

/// intensity: pruning fraction in [0, 1], noise std >= 0, unused for shuffle.
struct AttackSpec {
  AttackKind kind = AttackKind::kPruneRandom;
  double intensity = 0.0;
  Seed attack_seed{};
};

/// Zeroes exactly floor(fraction * N) weights. Random picks them with a seeded
/// shuffle; magnitude takes the smallest |w|, ties broken by index.
ParameterVector prune(const ParameterVector& weights, double fraction,
                      PruneStrategy strategy, const Seed& attack_seed);

/// Adds seeded i.i.d. N(0, sigma_w^2) to every weight. Stands in for
/// fine-tuning drift; it is not a substitute for gradient training.
ParameterVector perturb(const ParameterVector& weights, double sigma_w,
                        const Seed& attack_seed);

struct ShuffleResult {
  TensorContainer model;
  PermutationMap permutations;
};

/// Seeded neuron permutation of every hidden layer.
ShuffleResult shuffle_model_with_map(const TensorContainer& model, const Seed& attack_seed);
TensorContainer shuffle_model(const TensorContainer& model, const Seed& attack_seed);

TensorContainer apply_attack(const TensorContainer& model, const AttackSpec& spec);

struct PruningRow {
  double fraction = 0.0;
  double watermark_accuracy = 0.0;
  double snr_db = 0.0;  // -inf when the preamble gain is lost
  int decision = 0;
};

/// 25%, 50%, 75%, 90%, 95%, 99%, 99.75%, 99.99%.
std::vector<double> default_pruning_fractions();

std::vector<PruningRow> run_pruning_sweep(const ParameterVector& marked, const MarkRecord& record,
                                          const SecretKey& key, const ParameterVector& baseline,
                                          std::span<const double> fractions,
                                          const Seed& attack_seed,
                                          PruneStrategy strategy = PruneStrategy::kRandom);

/// Header `fraction,watermark_accuracy,snr_db`.
void write_pruning_csv(std::span<const PruningRow> rows, std::ostream& out);

}  // namespace tattooed
