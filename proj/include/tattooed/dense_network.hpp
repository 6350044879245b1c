#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tattooed/model_io.hpp"

namespace tattooed {

/// One fully connected layer inside a container: a 2-D [out, in] weight
/// tensor, optionally followed directly by its 1-D [out] bias.
struct DenseLayer {
  static constexpr std::size_t kNoBias = static_cast<std::size_t>(-1);

  std::size_t weight = 0;
  std::size_t bias = kNoBias;
  std::size_t out = 0;
  std::size_t in = 0;
};

/// Throws ShuffleError unless the container is a chain of dense layers with
/// matching widths.
std::vector<DenseLayer> dense_layers(const TensorContainer& model);

/// ReLU on hidden layers, identity on the output layer.
std::vector<double> dense_forward(const TensorContainer& model, std::span<const double> input);

/// perm[i] is the position neuron i moves to.
using Permutation = std::vector<std::size_t>;

struct PermutationMap {
  std::vector<Permutation> per_layer;  // one per hidden layer
};

bool is_bijection(const Permutation& perm);
Permutation inverse(const Permutation& perm);
PermutationMap identity_permutations(const TensorContainer& model);

/// Moves hidden neurons: rows of W_l and entries of b_l, plus the matching
/// columns of W_{l+1}. Preserves the network function.
TensorContainer apply_permutations(const TensorContainer& model, const PermutationMap& map);

}  // namespace tattooed
