#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "support.hpp"
#include "weseg/gradcheck.hpp"
#include "weseg/loss.hpp"
#include "weseg/model.hpp"
#include "weseg/rng.hpp"

using namespace weseg;

namespace {

ModelParams single_unit(double w, double b, Activation act = Activation::Sigmoid) {
  ModelParams p;
  Layer l;
  l.weight = Matrix(1, 1);
  l.weight(0, 0) = w;
  l.bias = {b};
  l.act = act;
  p.layers.push_back(l);
  return p;
}

Matrix column(std::vector<double> values) {
  Matrix m(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(i, 0) = values[i];
  return m;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("default architecture and initialization") {
  Rng rng(1);
  const auto p = make_mlp(30, rng);
  REQUIRE(p.layers.size() == 3);
  CHECK(p.layers[0].weight.rows == 64);
  CHECK(p.layers[0].weight.cols == 30);
  CHECK(p.layers[0].act == Activation::Relu);
  CHECK(p.layers[1].weight.rows == 32);
  CHECK(p.layers[1].weight.cols == 64);
  CHECK(p.layers[1].act == Activation::Relu);
  CHECK(p.layers[2].weight.rows == 1);
  CHECK(p.layers[2].weight.cols == 32);
  CHECK(p.layers[2].act == Activation::Sigmoid);
  CHECK(!p.attention.has_value());
  for (const auto& layer : p.layers) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(layer.in_dim() + layer.out_dim()));
    double max_abs = 0.0;
    for (double w : layer.weight.data) max_abs = std::max(max_abs, std::abs(w));
    CHECK(max_abs <= limit);
    CHECK(max_abs > 0.0);
    for (double b : layer.bias) CHECK(b == 0.0);
  }
  p.validate();

  const auto a = make_attention_mil(30, rng);
  REQUIRE(a.attention.has_value());
  CHECK(a.attention->hidden_dim() == kAttentionHidden);
  CHECK(a.attention->emb_dim() == 32);
  CHECK(a.trunk_dim() == 32);
  a.validate();
}

TEST_CASE("sigmoid of zero input is one half") {
  const auto p = single_unit(1.0, 0.0);
  const auto probs = mlp_forward(p, column({0.0}));
  CHECK(probs[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("zero weights push every probability to sigmoid(bias)") {
  Rng rng(3);
  auto p = make_mlp(7, rng);
  for (auto& layer : p.layers) {
    for (double& w : layer.weight.data) w = 0.0;
  }
  p.layers.back().bias[0] = -1.3;
  const auto features = testutil::random_matrix(9, 7, rng);
  const auto probs = mlp_forward(p, features);
  for (double q : probs) CHECK(q == doctest::Approx(sigmoid(-1.3)).epsilon(1e-15));
}

TEST_CASE("rows are processed independently") {
  Rng rng(4);
  const auto p = make_mlp(5, rng);
  auto features = testutil::random_matrix(6, 5, rng);
  const auto before = mlp_forward(p, features);

  // Duplicated rows give duplicated outputs.
  for (std::size_t j = 0; j < 5; ++j) features(3, j) = features(0, j);
  const auto dup = mlp_forward(p, features);
  CHECK(dup[3] == dup[0]);

  // Changing one row leaves the others untouched.
  features(2, 0) += 10.0;
  const auto after = mlp_forward(p, features);
  for (std::size_t i = 0; i < 6; ++i) {
    if (i == 2) continue;
    CHECK(after[i] == dup[i]);
  }
}

TEST_CASE("single unit gradient matches the closed form") {
  const double w = 0.7, b = -0.2, x = 1.4, g = 0.9;
  auto p = single_unit(w, b);
  ForwardCache cache;
  const auto probs = mlp_forward(p, column({x}), &cache);
  const double q = probs[0];

  auto grads = zeros_like(p);
  mlp_backward(p, cache, std::vector<double>{g}, grads);

  const double dlogit = g * q * (1.0 - q);
  CHECK(grads.layers[0].weight(0, 0) == doctest::Approx(dlogit * x).epsilon(1e-12));
  CHECK(grads.layers[0].bias[0] == doctest::Approx(dlogit).epsilon(1e-12));
}

TEST_CASE("zero upstream gradient yields zero parameter gradients") {
  Rng rng(6);
  const auto p = make_mlp(4, rng);
  const auto features = testutil::random_matrix(5, 4, rng);
  ForwardCache cache;
  mlp_forward(p, features, &cache);
  auto grads = zeros_like(p);
  mlp_backward(p, cache, std::vector<double>(5, 0.0), grads);
  for (const auto t : param_tensors(grads)) {
    for (double v : t) REQUIRE(v == 0.0);
  }
}

TEST_CASE("stale cache is rejected") {
  Rng rng(8);
  const auto p = make_mlp(4, rng);
  const auto other = make_mlp(6, rng);
  ForwardCache cache;
  mlp_forward(other, testutil::random_matrix(3, 6, rng), &cache);
  auto grads = zeros_like(p);
  CHECK_THROWS_AS(mlp_backward(p, cache, std::vector<double>(3, 0.1), grads),
                  std::invalid_argument);
}

// Central differences across a relu hinge carry an O(slope jump) error, so
// the check point shifts every relu bias off zero; no pre-activation then
// sits within the step of a hinge and the error is pure h^2 truncation.
void shift_relu_biases(ModelParams& p, double delta) {
  for (Layer& l : p.layers) {
    if (l.act == Activation::Relu) {
      for (double& b : l.bias) b += delta;
    }
  }
}

TEST_CASE("mlp with masked bce passes the finite-difference check") {
  Rng rng(903);
  const std::size_t dim = 6 + rng.below(6);
  const std::size_t tiles = 8 + rng.below(16);
  const auto features = testutil::random_matrix(tiles, dim, rng, -1.5, 1.5);

  Rng init(43);
  auto params = make_mlp(dim, init);
  shift_relu_biases(params, 1.0);

  ProxyTarget target;
  target.targets.resize(tiles);
  target.mask.resize(tiles);
  for (std::size_t i = 0; i < tiles; ++i) {
    target.targets[i] = static_cast<std::uint8_t>(rng.below(2));
    target.mask[i] = static_cast<std::uint8_t>(rng.below(5) != 0);
  }
  if (target.masked_in_count() == 0) target.mask[0] = 1;

  const auto loss_fn = [&](const ModelParams& q) {
    return masked_bce(mlp_forward(q, features), target).loss;
  };
  ForwardCache cache;
  const auto lg = masked_bce(mlp_forward(params, features, &cache), target);
  auto analytic = zeros_like(params);
  mlp_backward(params, cache, lg.grad, analytic);

  CHECK(finite_diff_check(loss_fn, params, analytic, 1e-3).max_rel_err <= 1e-4);
  CHECK(finite_diff_check(loss_fn, params, analytic, 1e-5).max_rel_err <= 1e-6);
}

TEST_CASE("attention weights form a simplex") {
  Rng rng(21);
  for (int rep = 0; rep < 50; ++rep) {
    const auto p = make_attention_mil(5, rng);
    const std::size_t n = 1 + rng.below(20);
    const auto emb =
        trunk_forward(p, testutil::random_matrix(n, 5, rng, -2.0, 2.0));
    const auto bag = attention_pool(p, emb);
    double sum = 0.0;
    for (double a : bag.weights) {
      REQUIRE(a >= 0.0);
      sum += a;
    }
    REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(bag.bag_prob > 0.0);
    REQUIRE(bag.bag_prob < 1.0);
  }
}

TEST_CASE("attention pool degenerate bags") {
  Rng rng(22);
  const auto p = make_attention_mil(5, rng);

  const auto one = attention_pool(p, testutil::random_matrix(1, 32, rng));
  REQUIRE(one.weights.size() == 1);
  CHECK(one.weights[0] == doctest::Approx(1.0).epsilon(1e-15));

  Matrix same(6, 32);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 32; ++j) same(i, j) = 0.3 * (j % 5) - 0.2;
  }
  const auto uniform = attention_pool(p, same);
  for (double a : uniform.weights) {
    CHECK(a == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  }
}

TEST_CASE("attention requires attention params") {
  Rng rng(23);
  const auto p = make_mlp(5, rng);
  CHECK_THROWS_AS(attention_pool(p, testutil::random_matrix(2, 32, rng)),
                  std::invalid_argument);
}

TEST_CASE("attention_scores min-max scaling rules") {
  const std::vector<double> a{0.1, 0.4, 0.5};
  auto s = attention_scores(a, 0.9);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(s[1] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(s[2] == doctest::Approx(1.0).epsilon(1e-15));

  s = attention_scores(a, 0.2);  // bag predicted normal
  CHECK(s == std::vector<double>{0.0, 0.0, 0.0});

  s = attention_scores(std::vector<double>{0.25, 0.25, 0.25, 0.25}, 0.9);
  CHECK(s == std::vector<double>{0.5, 0.5, 0.5, 0.5});
}

TEST_CASE("attention bag loss passes the finite-difference check") {
  Rng rng(910);
  const std::size_t dim = 6 + rng.below(6);
  const std::size_t tiles = 8 + rng.below(16);
  const auto features = testutil::random_matrix(tiles, dim, rng, -1.5, 1.5);

  Rng init(80);
  auto params = make_attention_mil(dim, init);
  shift_relu_biases(params, 1.0);
  const double y = 0.0;

  const auto bag_loss = [&](const ModelParams& q) {
    const auto emb = trunk_forward(q, features);
    const double prob =
        std::clamp(attention_pool(q, emb).bag_prob, kProbEps, 1.0 - kProbEps);
    return -(y * std::log(prob) + (1.0 - y) * std::log(1.0 - prob));
  };

  ForwardCache cache;
  const auto emb = trunk_forward(params, features, &cache);
  AttentionCache acache;
  const auto bag = attention_pool(params, emb, &acache);
  auto analytic = zeros_like(params);
  const double dprob = (bag.bag_prob - y) / (bag.bag_prob * (1.0 - bag.bag_prob));
  const Matrix demb = attention_backward(params, acache, dprob, analytic);
  layers_backward(params, cache, demb, analytic);

  CHECK(finite_diff_check(bag_loss, params, analytic, 1e-3).max_rel_err <= 1e-4);
  CHECK(finite_diff_check(bag_loss, params, analytic, 1e-5).max_rel_err <= 1e-6);
}

TEST_CASE("validate rejects broken wiring") {
  Rng rng(41);
  auto p = make_mlp(5, rng);
  p.layers[1].weight = Matrix(32, 63);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  auto q = make_attention_mil(5, rng);
  q.attention->v = Matrix(64, 32);  // H must stay 128
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}

}  // TEST_SUITE
