#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tattooed/dense_network.hpp"
#include "tattooed/model_io.hpp"

namespace tattooed {

/// Row-major square matrix of similarities.
struct SimilarityMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * n + j]; }
};

inline constexpr double kMatchFloor = 0.5;

/// Entry (i, j) is the cosine similarity between neuron (row) i of
/// `original` and neuron j of `shuffled`, both [neurons, fan_in] row-major.
/// Throws DegenerateNeuronError for an all-zero neuron and ShuffleError for
/// mismatched sizes.
SimilarityMatrix cosine_matrix(std::span<const float> original, std::span<const float> shuffled,
                               std::size_t neurons, std::size_t fan_in);

/// p[i] = column matched to row i. Greedy row argmax when that is already a
/// bijection, otherwise a maximum-weight assignment. Throws
/// RecoveryFailedError when any matched similarity is below `floor`.
Permutation recover_permutation(const SimilarityMatrix& cos, double floor = kMatchFloor);

/// Maximum-weight perfect matching on a square matrix (Hungarian method).
Permutation max_weight_assignment(const SimilarityMatrix& weights);

struct UnshuffleResult {
  TensorContainer model;
  PermutationMap permutations;  // the shuffles that were undone
};

/// Restores `reference`'s neuron order on `shuffled`, first layer to last.
/// `reference` is any copy of the network in its canonical order, e.g. the
/// owner's marked model. RecoveryFailedError carries the failing layer.
UnshuffleResult unshuffle_model(const TensorContainer& shuffled, const TensorContainer& reference);

}  // namespace tattooed
