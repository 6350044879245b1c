#include "tattooed/unshuffle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tattooed/errors.hpp"

namespace tattooed {
namespace {

// Squared norms; the cosine divides by sqrt(|a|^2 |b|^2) so that a neuron
// compared with itself gives exactly 1.
std::vector<double> squared_norms(std::span<const float> m, std::size_t rows, std::size_t cols,
                                  const char* which) {
  std::vector<double> norms(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      s += static_cast<double>(m[r * cols + c]) * m[r * cols + c];
    }
    if (s == 0.0) {
      throw DegenerateNeuronError(std::string(which) + " neuron " + std::to_string(r) +
                                  " has zero norm");
    }
    norms[r] = s;
  }
  return norms;
}

}  // namespace

SimilarityMatrix cosine_matrix(std::span<const float> original, std::span<const float> shuffled,
                               std::size_t neurons, std::size_t fan_in) {
  if (original.size() != neurons * fan_in || shuffled.size() != neurons * fan_in) {
    throw ShuffleError("layer matrices do not share the expected shape");
  }
  const auto sq_a = squared_norms(original, neurons, fan_in, "original");
  const auto sq_b = squared_norms(shuffled, neurons, fan_in, "shuffled");
  SimilarityMatrix cos{neurons, std::vector<double>(neurons * neurons)};
  for (std::size_t i = 0; i < neurons; ++i) {
    const float* a = original.data() + i * fan_in;
    for (std::size_t j = 0; j < neurons; ++j) {
      const float* b = shuffled.data() + j * fan_in;
      double dot = 0.0;
      for (std::size_t c = 0; c < fan_in; ++c) dot += static_cast<double>(a[c]) * b[c];
      cos(i, j) = dot / std::sqrt(sq_a[i] * sq_b[j]);
    }
  }
  return cos;
}

Permutation max_weight_assignment(const SimilarityMatrix& w) {
  // Shortest augmenting path formulation with potentials, minimising -w.
  const std::size_t n = w.n;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);  // match[col] = row, 1-based
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const std::size_t i0 = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -w(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = col0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          col1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  Permutation p(n);
  for (std::size_t j = 1; j <= n; ++j) p[match[j] - 1] = j - 1;
  return p;
}

Permutation recover_permutation(const SimilarityMatrix& cos, double floor) {
  const std::size_t n = cos.n;
  Permutation p(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < n; ++j) {
      if (cos(i, j) > cos(i, best)) best = j;
    }
    p[i] = best;
  }
  if (!is_bijection(p)) p = max_weight_assignment(cos);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(cos(i, p[i]) >= floor)) {
      throw RecoveryFailedError("neuron " + std::to_string(i) + " best match has similarity " +
                                std::to_string(cos(i, p[i])) + ", below " +
                                std::to_string(floor));
    }
  }
  return p;
}

UnshuffleResult unshuffle_model(const TensorContainer& shuffled, const TensorContainer& reference) {
  const auto layers = dense_layers(shuffled);
  const auto ref_layers = dense_layers(reference);
  if (layers.size() != ref_layers.size()) throw ShuffleError("architectures differ in depth");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].out != ref_layers[l].out || layers[l].in != ref_layers[l].in) {
      throw ShuffleError("architectures differ at layer " + std::to_string(l));
    }
  }

  UnshuffleResult result{shuffled, {}};
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const auto& L = layers[l];
    Permutation p;
    try {
      p = recover_permutation(cosine_matrix(reference.tensor(ref_layers[l].weight),
                                            result.model.tensor(L.weight), L.out, L.in));
    } catch (const RecoveryFailedError& ex) {
      throw RecoveryFailedError("layer " + std::to_string(l) + ": " + ex.what(),
                                static_cast<int>(l));
    }
    // Undo only this layer; the next one is compared after its columns move.
    PermutationMap step = identity_permutations(result.model);
    step.per_layer[l] = inverse(p);
    result.model = apply_permutations(result.model, step);
    result.permutations.per_layer.push_back(std::move(p));
  }
  return result;
}

}  // namespace tattooed
