#include "weseg/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace weseg {

namespace {

double apply_activation(Activation act, double x) {
  switch (act) {
    case Activation::Relu: return x > 0.0 ? x : 0.0;
    case Activation::Sigmoid: return sigmoid(x);
    case Activation::Identity: return x;
  }
  return x;
}

double activation_derivative(Activation act, double pre, double post) {
  switch (act) {
    case Activation::Relu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::Sigmoid: return post * (1.0 - post);
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

Layer glorot_layer(std::size_t out, std::size_t in, Activation act, Rng& rng) {
  Layer l;
  l.weight = Matrix(out, in);
  l.bias.assign(out, 0.0);
  l.act = act;
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  for (double& w : l.weight.data) w = rng.uniform(-limit, limit);
  return l;
}

void glorot_fill(std::span<double> values, std::size_t fan_in, std::size_t fan_out,
                 Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : values) v = rng.uniform(-limit, limit);
}

// Runs the first `count` layers; fills the cache when given.
Matrix run_layers(const ModelParams& params, const Matrix& features,
                  std::size_t count, ForwardCache* cache) {
  if (params.layers.empty()) throw std::invalid_argument("model has no layers");
  if (count > params.layers.size()) throw std::invalid_argument("layer count out of range");
  if (features.cols != params.input_dim()) {
    throw std::invalid_argument("feature dim " + std::to_string(features.cols) +
                                " does not match model input dim " +
                                std::to_string(params.input_dim()));
  }
  if (cache) {
    cache->input = features;
    cache->pre.clear();
    cache->post.clear();
    cache->layer_count = count;
  }
  Matrix x = features;
  const std::size_t n = features.rows;
  for (std::size_t li = 0; li < count; ++li) {
    const Layer& layer = params.layers[li];
    Matrix z(n, layer.out_dim());
    for (std::size_t i = 0; i < n; ++i) {
      const auto xi = x.row(i);
      for (std::size_t o = 0; o < layer.out_dim(); ++o) {
        double acc = layer.bias[o];
        const double* wrow = layer.weight.data.data() + o * layer.in_dim();
        for (std::size_t k = 0; k < layer.in_dim(); ++k) acc += wrow[k] * xi[k];
        z(i, o) = acc;
      }
    }
    Matrix a(n, layer.out_dim());
    for (std::size_t idx = 0; idx < z.data.size(); ++idx) {
      a.data[idx] = apply_activation(layer.act, z.data[idx]);
    }
    if (cache) {
      cache->pre.push_back(z);
      cache->post.push_back(a);
    }
    x = std::move(a);
  }
  return x;
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Identity: return "identity";
  }
  return "identity";
}

Activation activation_from_name(std::string_view name) {
  if (name == "relu") return Activation::Relu;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation: " + std::string(name));
}

std::size_t ModelParams::input_dim() const {
  if (layers.empty()) throw std::logic_error("model has no layers");
  return layers.front().in_dim();
}

std::size_t ModelParams::trunk_dim() const {
  if (layers.size() < 2) throw std::logic_error("model has no embedding trunk");
  return layers[layers.size() - 2].out_dim();
}

void ModelParams::validate() const {
  if (layers.empty()) throw std::invalid_argument("model has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    if (l.weight.rows == 0 || l.weight.cols == 0) {
      throw std::invalid_argument("layer " + std::to_string(i) + " has empty weight");
    }
    if (l.weight.data.size() != l.weight.rows * l.weight.cols) {
      throw std::invalid_argument("layer " + std::to_string(i) + " weight storage mismatch");
    }
    if (l.bias.size() != l.out_dim()) {
      throw std::invalid_argument("layer " + std::to_string(i) + " bias size mismatch");
    }
    if (i > 0 && l.in_dim() != layers[i - 1].out_dim()) {
      throw std::invalid_argument("layer " + std::to_string(i) + " input dim breaks the chain");
    }
  }
  if (layers.back().out_dim() != 1 || layers.back().act != Activation::Sigmoid) {
    throw std::invalid_argument("final layer must be a single sigmoid unit");
  }
  if (attention) {
    if (attention->hidden_dim() != kAttentionHidden) {
      throw std::invalid_argument("attention hidden dim must be 128");
    }
    if (attention->emb_dim() != trunk_dim()) {
      throw std::invalid_argument("attention embedding dim does not match trunk");
    }
    if (attention->w.size() != attention->hidden_dim() ||
        attention->bag_weight.size() != attention->emb_dim()) {
      throw std::invalid_argument("attention vector sizes inconsistent");
    }
  }
}

ModelParams make_mlp(std::size_t input_dim, Rng& rng) {
  ModelParams p;
  p.layers.push_back(glorot_layer(64, input_dim, Activation::Relu, rng));
  p.layers.push_back(glorot_layer(32, 64, Activation::Relu, rng));
  p.layers.push_back(glorot_layer(1, 32, Activation::Sigmoid, rng));
  return p;
}

ModelParams make_attention_mil(std::size_t input_dim, Rng& rng) {
  ModelParams p = make_mlp(input_dim, rng);
  AttentionParams att;
  const std::size_t d_emb = p.trunk_dim();
  att.v = Matrix(kAttentionHidden, d_emb);
  glorot_fill(att.v.data, d_emb, kAttentionHidden, rng);
  att.w.assign(kAttentionHidden, 0.0);
  glorot_fill(att.w, kAttentionHidden, 1, rng);
  att.bag_weight.assign(d_emb, 0.0);
  glorot_fill(att.bag_weight, d_emb, 1, rng);
  att.bag_bias = 0.0;
  p.attention = std::move(att);
  return p;
}

ModelParams zeros_like(const ModelParams& params) {
  ModelParams z;
  for (const Layer& l : params.layers) {
    Layer zl;
    zl.weight = Matrix(l.weight.rows, l.weight.cols);
    zl.bias.assign(l.bias.size(), 0.0);
    zl.act = l.act;
    z.layers.push_back(std::move(zl));
  }
  if (params.attention) {
    AttentionParams za;
    za.v = Matrix(params.attention->v.rows, params.attention->v.cols);
    za.w.assign(params.attention->w.size(), 0.0);
    za.bag_weight.assign(params.attention->bag_weight.size(), 0.0);
    za.bag_bias = 0.0;
    z.attention = std::move(za);
  }
  return z;
}

std::vector<std::span<double>> param_tensors(ModelParams& params) {
  std::vector<std::span<double>> out;
  for (Layer& l : params.layers) {
    out.push_back(std::span<double>(l.weight.data));
    out.push_back(std::span<double>(l.bias));
  }
  if (params.attention) {
    AttentionParams& a = *params.attention;
    out.push_back(std::span<double>(a.v.data));
    out.push_back(std::span<double>(a.w));
    out.push_back(std::span<double>(a.bag_weight));
    out.push_back(std::span<double>(&a.bag_bias, 1));
  }
  return out;
}

std::vector<std::span<const double>> param_tensors(const ModelParams& params) {
  std::vector<std::span<const double>> out;
  for (const Layer& l : params.layers) {
    out.push_back(std::span<const double>(l.weight.data));
    out.push_back(std::span<const double>(l.bias));
  }
  if (params.attention) {
    const AttentionParams& a = *params.attention;
    out.push_back(std::span<const double>(a.v.data));
    out.push_back(std::span<const double>(a.w));
    out.push_back(std::span<const double>(a.bag_weight));
    out.push_back(std::span<const double>(&a.bag_bias, 1));
  }
  return out;
}

std::size_t param_count(const ModelParams& params) {
  std::size_t total = 0;
  for (const auto& t : param_tensors(params)) total += t.size();
  return total;
}

std::vector<double> mlp_forward(const ModelParams& params, const Matrix& features,
                                ForwardCache* cache) {
  if (params.layers.back().out_dim() != 1) {
    throw std::invalid_argument("tile scorer must end in a single unit");
  }
  Matrix out = run_layers(params, features, params.layers.size(), cache);
  return out.data;
}

Matrix trunk_forward(const ModelParams& params, const Matrix& features,
                     ForwardCache* cache) {
  if (params.layers.size() < 2) throw std::invalid_argument("model has no embedding trunk");
  return run_layers(params, features, params.layers.size() - 1, cache);
}

Matrix layers_backward(const ModelParams& params, const ForwardCache& cache,
                       const Matrix& grad_out, ModelParams& grads) {
  const std::size_t count = cache.layer_count;
  if (count == 0 || count > params.layers.size() ||
      cache.pre.size() != count || cache.post.size() != count) {
    throw std::invalid_argument("forward cache does not match model");
  }
  if (grads.layers.size() != params.layers.size()) {
    throw std::invalid_argument("gradient container shape mismatch");
  }
  const std::size_t n = cache.input.rows;
  if (cache.input.cols != params.layers[0].in_dim()) {
    throw std::invalid_argument("stale forward cache: input width mismatch");
  }
  for (std::size_t li = 0; li < count; ++li) {
    if (cache.pre[li].rows != n || cache.pre[li].cols != params.layers[li].out_dim()) {
      throw std::invalid_argument("stale forward cache: layer shape mismatch");
    }
  }
  if (grad_out.rows != n || grad_out.cols != params.layers[count - 1].out_dim()) {
    throw std::invalid_argument("upstream gradient shape mismatch");
  }

  Matrix delta = grad_out;  // d(loss)/d(post-activation) of current layer
  for (std::size_t li = count; li-- > 0;) {
    const Layer& layer = params.layers[li];
    Layer& g = grads.layers[li];
    const Matrix& pre = cache.pre[li];
    const Matrix& post = cache.post[li];
    const Matrix& in = li == 0 ? cache.input : cache.post[li - 1];

    // delta through the activation: d(loss)/d(pre).
    for (std::size_t idx = 0; idx < delta.data.size(); ++idx) {
      delta.data[idx] *= activation_derivative(layer.act, pre.data[idx], post.data[idx]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto di = delta.row(i);
      const auto xi = in.row(i);
      for (std::size_t o = 0; o < layer.out_dim(); ++o) {
        const double d = di[o];
        if (d == 0.0) continue;
        double* wg = g.weight.data.data() + o * layer.in_dim();
        for (std::size_t k = 0; k < layer.in_dim(); ++k) wg[k] += d * xi[k];
        g.bias[o] += d;
      }
    }
    if (li == 0) {
      Matrix dx(n, layer.in_dim());
      for (std::size_t i = 0; i < n; ++i) {
        const auto di = delta.row(i);
        auto dxi = dx.row(i);
        for (std::size_t o = 0; o < layer.out_dim(); ++o) {
          const double d = di[o];
          if (d == 0.0) continue;
          const double* wrow = layer.weight.data.data() + o * layer.in_dim();
          for (std::size_t k = 0; k < layer.in_dim(); ++k) dxi[k] += d * wrow[k];
        }
      }
      return dx;
    }
    Matrix next(n, layer.in_dim());
    for (std::size_t i = 0; i < n; ++i) {
      const auto di = delta.row(i);
      auto ni = next.row(i);
      for (std::size_t o = 0; o < layer.out_dim(); ++o) {
        const double d = di[o];
        if (d == 0.0) continue;
        const double* wrow = layer.weight.data.data() + o * layer.in_dim();
        for (std::size_t k = 0; k < layer.in_dim(); ++k) ni[k] += d * wrow[k];
      }
    }
    delta = std::move(next);
  }
  return Matrix(n, params.input_dim());  // unreachable
}

void mlp_backward(const ModelParams& params, const ForwardCache& cache,
                  std::span<const double> grad_probs, ModelParams& grads) {
  if (cache.layer_count != params.layers.size()) {
    throw std::invalid_argument("cache does not cover the full stack");
  }
  Matrix g(grad_probs.size(), 1);
  std::copy(grad_probs.begin(), grad_probs.end(), g.data.begin());
  layers_backward(params, cache, g, grads);
}

BagResult attention_pool(const ModelParams& params, const Matrix& embeddings,
                         AttentionCache* cache) {
  if (!params.attention) throw std::invalid_argument("model has no attention head");
  const AttentionParams& att = *params.attention;
  const std::size_t n = embeddings.rows;
  const std::size_t h = att.hidden_dim();
  const std::size_t d = att.emb_dim();
  if (n == 0) throw std::invalid_argument("attention_pool: empty bag");
  if (embeddings.cols != d) throw std::invalid_argument("embedding dim mismatch");

  Matrix tanh_vh(n, h);
  std::vector<double> scores(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto hi = embeddings.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < h; ++j) {
      const double* vrow = att.v.data.data() + j * d;
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += vrow[k] * hi[k];
      const double t = std::tanh(acc);
      tanh_vh(i, j) = t;
      s += att.w[j] * t;
    }
    scores[i] = s;
  }

  const double smax = *std::max_element(scores.begin(), scores.end());
  std::vector<double> weights(n, 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weights[i] = std::exp(scores[i] - smax);
    z += weights[i];
  }
  for (double& w : weights) w /= z;

  std::vector<double> pooled(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto hi = embeddings.row(i);
    for (std::size_t k = 0; k < d; ++k) pooled[k] += weights[i] * hi[k];
  }
  double logit = att.bag_bias;
  for (std::size_t k = 0; k < d; ++k) logit += att.bag_weight[k] * pooled[k];
  const double prob = sigmoid(logit);

  if (cache) {
    cache->embeddings = embeddings;
    cache->tanh_vh = std::move(tanh_vh);
    cache->weights = weights;
    cache->pooled = pooled;
    cache->bag_logit = logit;
    cache->bag_prob = prob;
  }
  return BagResult{prob, std::move(weights)};
}

Matrix attention_backward(const ModelParams& params, const AttentionCache& cache,
                          double grad_bag_prob, ModelParams& grads) {
  if (!params.attention || !grads.attention) {
    throw std::invalid_argument("attention params or gradient container missing");
  }
  const AttentionParams& att = *params.attention;
  AttentionParams& g = *grads.attention;
  const std::size_t n = cache.embeddings.rows;
  const std::size_t h = att.hidden_dim();
  const std::size_t d = att.emb_dim();
  if (cache.tanh_vh.rows != n || cache.tanh_vh.cols != h ||
      cache.weights.size() != n || cache.pooled.size() != d) {
    throw std::invalid_argument("stale attention cache");
  }

  const double dlogit = grad_bag_prob * cache.bag_prob * (1.0 - cache.bag_prob);
  g.bag_bias += dlogit;
  std::vector<double> dpooled(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    g.bag_weight[k] += dlogit * cache.pooled[k];
    dpooled[k] = dlogit * att.bag_weight[k];
  }

  // pooled = sum_i a_i h_i
  std::vector<double> da(n, 0.0);
  Matrix dh(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto hi = cache.embeddings.row(i);
    auto dhi = dh.row(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      acc += dpooled[k] * hi[k];
      dhi[k] = cache.weights[i] * dpooled[k];
    }
    da[i] = acc;
  }

  // softmax jacobian: ds_i = a_i (da_i - sum_j a_j da_j)
  double dot = 0.0;
  for (std::size_t i = 0; i < n; ++i) dot += cache.weights[i] * da[i];
  std::vector<double> ds(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) ds[i] = cache.weights[i] * (da[i] - dot);

  // s_i = w . tanh(V h_i)
  for (std::size_t i = 0; i < n; ++i) {
    const double dsi = ds[i];
    if (dsi == 0.0) continue;
    const auto hi = cache.embeddings.row(i);
    auto dhi = dh.row(i);
    for (std::size_t j = 0; j < h; ++j) {
      const double t = cache.tanh_vh(i, j);
      g.w[j] += dsi * t;
      const double du = dsi * att.w[j] * (1.0 - t * t);
      if (du == 0.0) continue;
      double* vg = g.v.data.data() + j * d;
      const double* vrow = att.v.data.data() + j * d;
      for (std::size_t k = 0; k < d; ++k) {
        vg[k] += du * hi[k];
        dhi[k] += du * vrow[k];
      }
    }
  }
  return dh;
}

std::vector<double> attention_scores(std::span<const double> weights, double bag_prob) {
  std::vector<double> out(weights.size(), 0.0);
  if (weights.empty()) return out;
  if (bag_prob < 0.5) return out;
  const auto [mn_it, mx_it] = std::minmax_element(weights.begin(), weights.end());
  const double mn = *mn_it, mx = *mx_it;
  if (mx == mn) {
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  const double inv = 1.0 / (mx - mn);
  for (std::size_t i = 0; i < weights.size(); ++i) out[i] = (weights[i] - mn) * inv;
  return out;
}

}  // namespace weseg
