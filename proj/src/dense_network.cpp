#include "tattooed/dense_network.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "tattooed/errors.hpp"

namespace tattooed {

std::vector<DenseLayer> dense_layers(const TensorContainer& model) {
  const auto& m = model.manifest();
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].shape.size() != 2) {
      throw ShuffleError("tensor '" + m[i].name + "' is not a [out, in] weight matrix");
    }
    DenseLayer layer;
    layer.weight = i;
    layer.out = m[i].shape[0];
    layer.in = m[i].shape[1];
    if (i + 1 < m.size() && m[i + 1].shape.size() == 1) {
      if (m[i + 1].shape[0] != layer.out) {
        throw ShuffleError("bias '" + m[i + 1].name + "' does not match its layer width");
      }
      layer.bias = ++i;
    }
    if (!layers.empty() && layers.back().out != layer.in) {
      throw ShuffleError("layer '" + m[layer.weight].name + "' expects " +
                         std::to_string(layer.in) + " inputs, previous layer emits " +
                         std::to_string(layers.back().out));
    }
    layers.push_back(layer);
  }
  if (layers.empty()) throw ShuffleError("model has no dense layers");
  return layers;
}

std::vector<double> dense_forward(const TensorContainer& model, std::span<const double> input) {
  const auto layers = dense_layers(model);
  if (input.size() != layers.front().in) throw ShuffleError("probe input has the wrong width");
  std::vector<double> x(input.begin(), input.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    const auto w = model.tensor(L.weight);
    std::vector<double> y(L.out, 0.0);
    for (std::size_t o = 0; o < L.out; ++o) {
      double acc = L.bias == DenseLayer::kNoBias ? 0.0 : model.tensor(L.bias)[o];
      for (std::size_t i = 0; i < L.in; ++i) acc += static_cast<double>(w[o * L.in + i]) * x[i];
      y[o] = (l + 1 < layers.size()) ? std::max(acc, 0.0) : acc;
    }
    x = std::move(y);
  }
  return x;
}

bool is_bijection(const Permutation& perm) {
  std::vector<std::uint8_t> seen(perm.size(), 0);
  for (auto p : perm) {
    if (p >= perm.size() || seen[p]) return false;
    seen[p] = 1;
  }
  return true;
}

Permutation inverse(const Permutation& perm) {
  Permutation inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
  return inv;
}

PermutationMap identity_permutations(const TensorContainer& model) {
  const auto layers = dense_layers(model);
  PermutationMap map;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    Permutation p(layers[l].out);
    std::iota(p.begin(), p.end(), std::size_t{0});
    map.per_layer.push_back(std::move(p));
  }
  return map;
}

TensorContainer apply_permutations(const TensorContainer& model, const PermutationMap& map) {
  const auto layers = dense_layers(model);
  if (map.per_layer.size() != layers.size() - 1) {
    throw ShuffleError("permutation map has " + std::to_string(map.per_layer.size()) +
                       " layers, model has " + std::to_string(layers.size() - 1) +
                       " hidden layers");
  }
  TensorContainer out = model;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const Permutation& perm = map.per_layer[l];
    const auto& L = layers[l];
    const auto& next = layers[l + 1];
    if (perm.size() != L.out || !is_bijection(perm)) {
      throw ShuffleError("layer " + std::to_string(l) + " permutation is not a bijection of " +
                         std::to_string(L.out) + " neurons");
    }
    // Columns of W_l were already moved by the previous layer's round.
    const std::vector<float> src_w(out.tensor(L.weight).begin(), out.tensor(L.weight).end());
    auto dst_w = out.tensor(L.weight);
    for (std::size_t i = 0; i < L.out; ++i) {
      std::copy_n(src_w.begin() + static_cast<std::ptrdiff_t>(i * L.in), L.in,
                  dst_w.begin() + static_cast<std::ptrdiff_t>(perm[i] * L.in));
    }
    if (L.bias != DenseLayer::kNoBias) {
      const auto src_b = model.tensor(L.bias);
      auto dst_b = out.tensor(L.bias);
      for (std::size_t i = 0; i < L.out; ++i) dst_b[perm[i]] = src_b[i];
    }
    auto next_w = out.tensor(next.weight);
    std::vector<float> row(next.in);
    for (std::size_t o = 0; o < next.out; ++o) {
      auto r = next_w.subspan(o * next.in, next.in);
      for (std::size_t i = 0; i < next.in; ++i) row[perm[i]] = r[i];
      std::copy(row.begin(), row.end(), r.begin());
    }
  }
  return out;
}

}  // namespace tattooed
