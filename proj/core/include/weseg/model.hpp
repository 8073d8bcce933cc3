#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "weseg/rng.hpp"
#include "weseg/types.hpp"

namespace weseg {

enum class Activation { Relu, Sigmoid, Identity };

std::string_view activation_name(Activation a);
Activation activation_from_name(std::string_view name);

struct Layer {
  Matrix weight;  // out x in
  std::vector<double> bias;
  Activation act = Activation::Identity;

  std::size_t in_dim() const { return weight.cols; }
  std::size_t out_dim() const { return weight.rows; }
};

inline constexpr std::size_t kAttentionHidden = 128;

// Gated-tanh attention head over trunk embeddings:
//   a = softmax_i(w . tanh(V h_i)),  bag_prob = sigmoid(bag_weight . sum_i a_i h_i + bag_bias)
struct AttentionParams {
  Matrix v;  // H x D_emb
  std::vector<double> w;
  std::vector<double> bag_weight;
  double bag_bias = 0.0;

  std::size_t hidden_dim() const { return v.rows; }
  std::size_t emb_dim() const { return v.cols; }
};

struct ModelParams {
  std::vector<Layer> layers;
  std::optional<AttentionParams> attention;

  std::size_t input_dim() const;
  // Width of the embedding the attention head consumes (output of the
  // second-to-last layer).
  std::size_t trunk_dim() const;
  void validate() const;
};

// Default tile scorer: input -> 64 relu -> 32 relu -> 1 sigmoid, weights
// uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
ModelParams make_mlp(std::size_t input_dim, Rng& rng);
// Same trunk with an attention head (H = 128) over the 32-wide embeddings.
ModelParams make_attention_mil(std::size_t input_dim, Rng& rng);

// Zero-filled copy sharing all shapes; gradient and moment container.
ModelParams zeros_like(const ModelParams& params);

// Flat views over every parameter tensor in one fixed order, shared by the
// optimizer, the checkpoint writer, and the finite-difference checker.
std::vector<std::span<double>> param_tensors(ModelParams& params);
std::vector<std::span<const double>> param_tensors(const ModelParams& params);
std::size_t param_count(const ModelParams& params);

struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;   // pre-activations, one per applied layer
  std::vector<Matrix> post;  // activated outputs
  std::size_t layer_count = 0;
};

// Full stack over an n x D feature matrix; the last layer must be one unit
// wide. Each output depends only on its own row.
std::vector<double> mlp_forward(const ModelParams& params, const Matrix& features,
                                ForwardCache* cache = nullptr);

// All layers but the last; yields the n x trunk_dim embedding matrix.
Matrix trunk_forward(const ModelParams& params, const Matrix& features,
                     ForwardCache* cache = nullptr);

// Accumulates d(loss)/d(param) into `grads` for the layers recorded in the
// cache; `grad_out` has one row per input row and the width of the last
// applied layer. Returns d(loss)/d(input). Rejects caches whose shapes do
// not match the params.
Matrix layers_backward(const ModelParams& params, const ForwardCache& cache,
                       const Matrix& grad_out, ModelParams& grads);

// Convenience wrapper for the full stack: upstream gradient per tile prob.
void mlp_backward(const ModelParams& params, const ForwardCache& cache,
                  std::span<const double> grad_probs, ModelParams& grads);

struct AttentionCache {
  Matrix embeddings;  // n x D_emb as seen by the pool
  Matrix tanh_vh;     // n x H
  std::vector<double> weights;
  std::vector<double> pooled;  // D_emb
  double bag_logit = 0.0;
  double bag_prob = 0.0;
};

struct BagResult {
  double bag_prob = 0.0;
  std::vector<double> weights;  // softmax simplex, one per tile
};

BagResult attention_pool(const ModelParams& params, const Matrix& embeddings,
                         AttentionCache* cache = nullptr);

// Accumulates attention-parameter gradients into `grads` and returns
// d(loss)/d(embeddings) for chaining into the trunk.
Matrix attention_backward(const ModelParams& params, const AttentionCache& cache,
                          double grad_bag_prob, ModelParams& grads);

// Per-tile scores from attention weights: min-max scaled, all zero when the
// bag is predicted normal (bag_prob < 0.5), all 0.5 when max = min.
std::vector<double> attention_scores(std::span<const double> weights, double bag_prob);

double sigmoid(double x);

}  // namespace weseg
