#include <cmath>
#include <limits>
#include <vector>

#include <doctest.h>

#include "evinam/errors.hpp"
#include "evinam/shape_net.hpp"

using namespace evinam;
using evinam::diff::Tensor;

namespace {

ShapeNet randomized(ShapeNetConfig cfg) {
  ShapeNet net = init_shape_net(cfg);
  // Give the output layer weights so the net is no longer identically zero.
  std::uint64_t k = 1;
  for (Tensor* slot : parameter_slots(net)) {
    std::vector<double> v(slot->data().begin(), slot->data().end());
    for (double& x : v) x += 0.3 * std::sin(static_cast<double>(k++));
    *slot = Tensor(slot->shape(), v);
  }
  return net;
}

}  // namespace

TEST_SUITE("shapefn") {
  TEST_CASE("freshly initialized nets output exactly zero") {
    for (bool separate : {false, true}) {
      ShapeNetConfig cfg;
      cfg.separate_nets = separate;
      cfg.init_seed = 11;
      const ShapeNet net = init_shape_net(cfg);
      const std::vector<double> x{-1e3, -2.5, 0.0, 0.7, 4.0, 1e3};
      const Tensor out = shape_forward(net, x);
      CHECK(out.shape() == diff::Shape{x.size(), 4});
      for (double v : out.data()) CHECK(v == 0.0);
    }
  }

  TEST_CASE("dead relu path leaves only the final bias") {
    ShapeNet net;
    net.config.hidden_sizes = {1};
    net.config.n_outputs = 1;
    net.trunks = {{DenseLayer{Tensor::matrix(1, 1, {1.0}), Tensor::vector({1.0})},
                   DenseLayer{Tensor::matrix(1, 1, {1.0}), Tensor::vector({1.0})}}};
    const std::vector<double> x{-5.0};
    CHECK(shape_forward(net, x).item() == 1.0);
  }

  TEST_CASE("duplicated inputs give identical rows and samples do not interact") {
    ShapeNetConfig cfg;
    cfg.init_seed = 5;
    const ShapeNet net = randomized(cfg);
    const std::vector<double> batch{0.3, -1.1, 0.3, 2.0};
    const Tensor out = shape_forward(net, batch);
    for (std::size_t k = 0; k < 4; ++k) CHECK(out.at(0, k) == out.at(2, k));
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const std::vector<double> one{batch[i]};
      const Tensor single = shape_forward(net, one);
      for (std::size_t k = 0; k < 4; ++k) CHECK(single.at(0, k) == out.at(i, k));
    }
  }

  TEST_CASE("initialization is seeded") {
    ShapeNetConfig cfg;
    cfg.hidden_sizes = {2};
    cfg.init_seed = 42;
    const ShapeNet a = init_shape_net(cfg);
    const ShapeNet b = init_shape_net(cfg);
    CHECK(a.trunks[0][0].weight == b.trunks[0][0].weight);
    CHECK(a.trunks[0][0].bias == b.trunks[0][0].bias);
    cfg.init_seed = 43;
    const ShapeNet c = init_shape_net(cfg);
    CHECK_FALSE(a.trunks[0][0].weight == c.trunks[0][0].weight);
  }

  TEST_CASE("layer shapes chain from width 1 to n_outputs") {
    ShapeNetConfig cfg;
    cfg.hidden_sizes = {8, 5, 3};
    cfg.n_outputs = 3;
    const ShapeNet shared = init_shape_net(cfg);
    REQUIRE(shared.trunks.size() == 1);
    std::size_t in = 1;
    for (const DenseLayer& layer : shared.trunks[0]) {
      CHECK(layer.weight.shape()[0] == in);
      in = layer.weight.shape()[1];
      CHECK(layer.bias.size() == in);
    }
    CHECK(in == 3);
    CHECK(shared.parameter_count() == (1 * 8 + 8) + (8 * 5 + 5) + (5 * 3 + 3) + (3 * 3 + 3));

    cfg.separate_nets = true;
    const ShapeNet separate = init_shape_net(cfg);
    CHECK(separate.trunks.size() == 3);
    for (const auto& trunk : separate.trunks) CHECK(trunk.back().weight.shape()[1] == 1);
    CHECK(separate.parameter_count() == 3 * ((1 * 8 + 8) + (8 * 5 + 5) + (5 * 3 + 3) + (3 * 1 + 1)));
  }

  TEST_CASE("graph and eager forwards agree") {
    for (Activation act : {Activation::relu, Activation::gelu}) {
      for (bool separate : {false, true}) {
        ShapeNetConfig cfg;
        cfg.activation = act;
        cfg.separate_nets = separate;
        cfg.init_seed = 9;
        const ShapeNet net = randomized(cfg);
        const std::vector<double> x{-2.0, -0.1, 0.4, 3.3};
        diff::Graph g;
        const BoundShapeNet bound = bind(g, net, true);
        const diff::Var out = shape_forward(bound, g.constant(Tensor::vector(x)));
        CHECK(out.value() == shape_forward(net, x));
        CHECK(g.parameter_count() == parameter_slots(const_cast<ShapeNet&>(net)).size());
      }
    }
  }

  TEST_CASE("errors") {
    const ShapeNet net = init_shape_net(ShapeNetConfig{});
    const std::vector<double> bad{0.0, std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(shape_forward(net, bad), DomainError);
    const std::vector<double> inf{std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(shape_forward(net, inf), DomainError);
    ShapeNetConfig cfg;
    cfg.hidden_sizes = {};
    CHECK_THROWS_AS(init_shape_net(cfg), ConfigError);
    cfg.hidden_sizes = {4, 0};
    CHECK_THROWS_AS(init_shape_net(cfg), ConfigError);
    cfg.hidden_sizes = {4};
    cfg.n_outputs = 0;
    CHECK_THROWS_AS(init_shape_net(cfg), ConfigError);
    CHECK_THROWS_AS(activation_from_string("tanh"), ConfigError);
    CHECK(activation_from_string(to_string(Activation::gelu)) == Activation::gelu);
  }
}
