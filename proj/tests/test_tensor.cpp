#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "common/fd_oracle.hpp"
#include "dymacl/stats.hpp"
#include "dymacl/tensor.hpp"

using namespace dymacl;
using testutil::fd_max_rel_err;

TEST_CASE("dense with identity weight is the identity") {
  Graph g;
  Tensor w = Tensor::matrix(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor b = Tensor::zeros({3});
  Tensor x = Tensor::vector({0.5, -2.0, 3.25});
  auto y = g.dense(g.constant(x), g.constant(w), g.constant(b), Activation::Identity);
  CHECK(g.value(y).values == x.values);
}

TEST_CASE("dense with zero weights and relu is zero") {
  Graph g;
  Tensor w = Tensor::zeros({3, 4});
  Tensor b = Tensor::zeros({3});
  Tensor x = Tensor::vector({1, 2, 3, 4});
  auto y = g.dense(g.constant(x), g.constant(w), g.constant(b), Activation::Relu);
  for (double v : g.value(y).values) CHECK(v == 0.0);
}

TEST_CASE("dense shape mismatch is a ShapeError") {
  Graph g;
  Tensor w = Tensor::zeros({3, 4});
  Tensor b = Tensor::zeros({3});
  Tensor x = Tensor::vector({1, 2, 3});
  CHECK_THROWS_AS(g.dense(g.constant(x), g.constant(w), g.constant(b), Activation::Identity),
                  ShapeError);
}

TEST_CASE("dense gradients match finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(derive_seed(seed, "dense-fd"));
    Tensor w = init_matrix(3, 4, rng);
    Tensor b = init_vector(3, 4, rng);
    Tensor x = Tensor::vector(
        {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    for (Activation act : {Activation::Identity, Activation::Tanh, Activation::Sigmoid}) {
      double err = fd_max_rel_err({w, b, x}, [act](Graph& g, const auto& ids) {
        return g.sum(g.square(g.dense(ids[2], ids[0], ids[1], act)));
      });
      CHECK(err < 1e-4);
    }
  }
}

TEST_CASE("relu gradients match finite differences away from the kink") {
  // Pre-activations are kept away from zero so the difference quotient is
  // valid on both sides.
  Tensor w = Tensor::matrix(2, 2, {1.0, 0.5, -0.75, 0.25});
  Tensor b = Tensor::vector({0.4, -0.3});
  Tensor x = Tensor::vector({0.9, 0.7});
  double err = fd_max_rel_err({w, b, x}, [](Graph& g, const auto& ids) {
    return g.sum(g.square(g.dense(ids[2], ids[0], ids[1], Activation::Relu)));
  });
  CHECK(err < 1e-4);
}

TEST_CASE("gru with zero parameters and zero hidden stays at zero") {
  Graph g;
  auto zm = [&](std::size_t r, std::size_t c) { return g.constant(Tensor::zeros({r, c})); };
  auto zv = [&](std::size_t n) { return g.constant(Tensor::zeros({n})); };
  Graph::GruNodes p{zm(3, 4), zm(3, 3), zv(3), zm(3, 4), zm(3, 3), zv(3),
                    zm(3, 4), zm(3, 3), zv(3)};
  auto h = g.gru_step(g.constant(Tensor::vector({1, 2, 3, 4})),
                      g.constant(Tensor::zeros({3})), p);
  for (double v : g.value(h).values) CHECK(v == 0.0);
}

TEST_CASE("gru gradients match finite differences for every input") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(derive_seed(seed, "gru-fd"));
    std::vector<Tensor> leaves;
    for (int i = 0; i < 3; ++i) {
      leaves.push_back(init_matrix(3, 4, rng));  // W
      leaves.push_back(init_matrix(3, 3, rng));  // U
      leaves.push_back(init_vector(3, 4, rng));  // b
    }
    leaves.push_back(Tensor::vector({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                                     rng.uniform(-1, 1)}));
    leaves.push_back(Tensor::vector({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}));
    double err = fd_max_rel_err(leaves, [](Graph& g, const auto& ids) {
      Graph::GruNodes p{ids[0], ids[1], ids[2], ids[3], ids[4], ids[5], ids[6], ids[7], ids[8]};
      return g.sum(g.square(g.gru_step(ids[9], ids[10], p)));
    });
    CHECK(err < 1e-4);
  }
}

TEST_CASE("gru is deterministic") {
  Rng rng(42);
  std::vector<Tensor> leaves;
  for (int i = 0; i < 3; ++i) {
    leaves.push_back(init_matrix(4, 4, rng));
    leaves.push_back(init_matrix(4, 4, rng));
    leaves.push_back(init_vector(4, 4, rng));
  }
  Tensor x = Tensor::vector({0.1, -0.2, 0.3, 0.4});
  Tensor h = Tensor::vector({0.5, 0.6, -0.7, 0.8});
  auto run = [&] {
    Graph g;
    Graph::GruNodes p{g.constant(leaves[0]), g.constant(leaves[1]), g.constant(leaves[2]),
                      g.constant(leaves[3]), g.constant(leaves[4]), g.constant(leaves[5]),
                      g.constant(leaves[6]), g.constant(leaves[7]), g.constant(leaves[8])};
    return g.value(g.gru_step(g.constant(x), g.constant(h), p)).values;
  };
  CHECK(run() == run());
}

TEST_CASE("aggregate definitions") {
  Graph g;
  auto a = g.constant(Tensor::vector({1, 2}));
  auto b = g.constant(Tensor::vector({3, 4}));
  CHECK(g.value(g.aggregate(Aggregation::Sum, {a, b}, 2)).values == std::vector<double>{4, 6});
  CHECK(g.value(g.aggregate(Aggregation::Mean, {a, b}, 2)).values == std::vector<double>{2, 3});
  CHECK(g.value(g.aggregate(Aggregation::Max, {a, b}, 2)).values == std::vector<double>{3, 4});
}

TEST_CASE("aggregate of a single item is that item for all kinds") {
  Graph g;
  auto a = g.constant(Tensor::vector({-1.5, 0.25, 9}));
  for (Aggregation k : {Aggregation::Sum, Aggregation::Mean, Aggregation::Max})
    CHECK(g.value(g.aggregate(k, {a}, 3)).values == std::vector<double>{-1.5, 0.25, 9});
}

TEST_CASE("aggregate of the empty set is a zero vector") {
  Graph g;
  for (Aggregation k : {Aggregation::Sum, Aggregation::Mean, Aggregation::Max})
    CHECK(g.value(g.aggregate(k, {}, 4)).values == std::vector<double>(4, 0.0));
}

TEST_CASE("aggregate shape mismatch is a ShapeError") {
  Graph g;
  auto a = g.constant(Tensor::vector({1, 2}));
  auto b = g.constant(Tensor::vector({1, 2, 3}));
  CHECK_THROWS_AS(g.aggregate(Aggregation::Sum, {a, b}, 2), ShapeError);
}

TEST_CASE("sum aggregation routes ones to every item, max to the argmax only") {
  Graph g;
  auto a = g.leaf(Tensor::vector({1.0, 5.0}));
  auto b = g.leaf(Tensor::vector({2.0, 3.0}));
  SUBCASE("sum") {
    g.backward(g.sum(g.aggregate(Aggregation::Sum, {a, b}, 2)));
    CHECK(g.grad(a).values == std::vector<double>{1, 1});
    CHECK(g.grad(b).values == std::vector<double>{1, 1});
  }
  SUBCASE("max") {
    g.backward(g.sum(g.aggregate(Aggregation::Max, {a, b}, 2)));
    CHECK(g.grad(a).values == std::vector<double>{0, 1});
    CHECK(g.grad(b).values == std::vector<double>{1, 0});
  }
}

TEST_CASE("aggregate gradients match finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(derive_seed(seed, "agg-fd"));
    std::vector<Tensor> items;
    for (int k = 0; k < 4; ++k)
      items.push_back(
          Tensor::vector({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)}));
    for (Aggregation agg : {Aggregation::Sum, Aggregation::Mean, Aggregation::Max}) {
      double err = fd_max_rel_err(items, [agg](Graph& g, const auto& ids) {
        return g.sum(g.square(g.aggregate(agg, ids, 3)));
      });
      CHECK(err < 1e-4);
    }
  }
}

TEST_CASE("aggregate is permutation invariant") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 2 + rng.next_index(5);
    std::vector<Tensor> items;
    for (std::size_t k = 0; k < n; ++k)
      items.push_back(
          Tensor::vector({rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)}));
    std::vector<Tensor> shuffled = items;
    for (std::size_t i = n; i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.next_index(i)]);

    for (Aggregation agg : {Aggregation::Sum, Aggregation::Mean, Aggregation::Max}) {
      Graph g;
      std::vector<Graph::NodeId> a, b;
      for (const Tensor& t : items) a.push_back(g.constant(t));
      for (const Tensor& t : shuffled) b.push_back(g.constant(t));
      const Tensor& va = g.value(g.aggregate(agg, a, 3));
      const Tensor& vb = g.value(g.aggregate(agg, b, 3));
      for (std::size_t i = 0; i < 3; ++i) {
        if (agg == Aggregation::Max)
          CHECK(va.at(i) == vb.at(i));
        else
          CHECK(std::fabs(va.at(i) - vb.at(i)) < 1e-9);
      }
    }
  }
}

TEST_CASE("softmax_t values") {
  SUBCASE("equal logits give the uniform distribution") {
    Graph g;
    auto y = g.softmax_t(g.constant(Tensor::vector({2, 2, 2, 2})), 0.7);
    for (double v : g.value(y).values) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("[1,0] at unit temperature") {
    Graph g;
    auto y = g.softmax_t(g.constant(Tensor::vector({1, 0})), 1.0);
    double e = std::exp(1.0);
    CHECK(g.value(y).at(0) == doctest::Approx(e / (e + 1)).epsilon(1e-12));
    CHECK(g.value(y).at(1) == doctest::Approx(1 / (e + 1)).epsilon(1e-12));
  }
  SUBCASE("large temperature flattens to uniform") {
    Graph g;
    auto y = g.softmax_t(g.constant(Tensor::vector({1, 0})), 1e6);
    CHECK(std::fabs(g.value(y).at(0) - 0.5) < 1e-5);
    CHECK(std::fabs(g.value(y).at(1) - 0.5) < 1e-5);
  }
  SUBCASE("non-positive temperature is a DomainError") {
    Graph g;
    CHECK_THROWS_AS(g.softmax_t(g.constant(Tensor::vector({1, 0})), 0.0), DomainError);
    CHECK_THROWS_AS(softmax_with_temperature({1, 0}, -1.0), DomainError);
  }
}

TEST_CASE("softmax_t sums to one and ignores constant shifts") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> logits;
    for (int i = 0; i < 5; ++i) logits.push_back(rng.uniform(-30, 30));
    double omega = rng.uniform(0.1, 10.0);
    std::vector<double> p = softmax_with_temperature(logits, omega);
    double total = 0.0;
    for (double v : p) total += v;
    CHECK(std::fabs(total - 1.0) < 1e-12);

    std::vector<double> shifted = logits;
    double c = rng.uniform(-100, 100);
    for (double& v : shifted) v += c;
    std::vector<double> q = softmax_with_temperature(shifted, omega);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::fabs(p[i] - q[i]) < 1e-9);
  }
}

TEST_CASE("softmax_t gradients match finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(derive_seed(seed, "softmax-fd"));
    Tensor logits = Tensor::vector(
        {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
    double omega = rng.uniform(0.5, 4.0);
    double err = fd_max_rel_err({logits}, [omega](Graph& g, const auto& ids) {
      return g.sum(g.square(g.softmax_t(ids[0], omega)));
    });
    CHECK(err < 1e-4);
    double err_log = fd_max_rel_err({logits}, [omega](Graph& g, const auto& ids) {
      return g.dot(g.constant(Tensor::vector({0.1, 0.2, 0.3, 0.4})),
                   g.log_softmax_t(ids[0], omega));
    });
    CHECK(err_log < 1e-4);
  }
}

TEST_CASE("backward of a parameter sum is all ones") {
  Graph g;
  auto p = g.leaf(Tensor::vector({1, 2, 3, 4, 5}));
  g.backward(g.sum(p));
  CHECK(g.grad(p).values == std::vector<double>(5, 1.0));
}

TEST_CASE("backward through a zero scale gives zero gradients") {
  Graph g;
  auto p = g.leaf(Tensor::vector({1, 2, 3}));
  g.backward(g.sum(g.scale(p, 0.0)));
  CHECK(g.grad(p).values == std::vector<double>(3, 0.0));
}

TEST_CASE("backward contract violations") {
  SUBCASE("twice without rebuilding") {
    Graph g;
    auto p = g.leaf(Tensor::vector({1, 2}));
    auto loss = g.sum(p);
    g.backward(loss);
    CHECK_THROWS_AS(g.backward(loss), ContractError);
  }
  SUBCASE("non-scalar loss") {
    Graph g;
    auto p = g.leaf(Tensor::vector({1, 2}));
    CHECK_THROWS_AS(g.backward(p), ContractError);
  }
}

TEST_CASE("non-finite results trip a NumericError") {
  Graph g;
  auto huge = g.constant(Tensor::vector({1e308, 1e308}));
  CHECK_THROWS_AS(g.mul(huge, huge), NumericError);
}

TEST_CASE("clip_grad_norm") {
  SUBCASE("below the bound is untouched") {
    std::vector<Tensor> grads = {Tensor::vector({3, 4})};  // norm 5
    double norm = clip_grad_norm(grads, 10.0);
    CHECK(norm == doctest::Approx(5.0));
    CHECK(grads[0].values == std::vector<double>{3, 4});
  }
  SUBCASE("scales down to the bound") {
    std::vector<Tensor> grads = {Tensor::vector({30, 40})};  // norm 50
    clip_grad_norm(grads, 10.0);
    CHECK(grads[0].at(0) == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(grads[0].at(1) == doctest::Approx(8.0).epsilon(1e-12));
  }
  SUBCASE("post-clip norm never exceeds the bound") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Tensor> grads;
      for (int k = 0; k < 3; ++k)
        grads.push_back(Tensor::vector({rng.uniform(-40, 40), rng.uniform(-40, 40)}));
      clip_grad_norm(grads, 10.0);
      double sq = 0.0;
      for (const Tensor& t : grads)
        for (double v : t.values) sq += v * v;
      CHECK(std::sqrt(sq) <= 10.0 + 1e-9);
    }
  }
  SUBCASE("NaN gradients are a NumericError") {
    std::vector<Tensor> grads = {Tensor::vector({std::nan("")})};
    CHECK_THROWS_AS(clip_grad_norm(grads, 10.0), NumericError);
  }
}

TEST_CASE("adam step") {
  SUBCASE("zero gradients leave parameters unchanged") {
    Tensor p = Tensor::vector({1.5, -2.5});
    OptimizerConfig cfg;
    OptimizerState opt(cfg, std::vector<const Tensor*>{&p});
    opt.step({&p}, {Tensor::zeros({2})});
    CHECK(p.values == std::vector<double>{1.5, -2.5});
    CHECK(opt.step_count() == 1);
  }
  SUBCASE("first bias-corrected step moves by about lr in the gradient direction") {
    // m_hat = g, v_hat = g^2, so the first update is lr * g / (|g| + eps).
    Tensor p = Tensor::vector({0.0});
    OptimizerConfig cfg;
    cfg.learning_rate = 0.1;
    OptimizerState opt(cfg, std::vector<const Tensor*>{&p});
    opt.step({&p}, {Tensor::vector({1.0})});
    CHECK(p.at(0) == doctest::Approx(-0.1).epsilon(1e-6));
  }
  SUBCASE("identical states and gradients produce identical results") {
    auto run = [] {
      Tensor p = Tensor::vector({0.3, 0.7});
      OptimizerConfig cfg;
      OptimizerState opt(cfg, std::vector<const Tensor*>{&p});
      for (int i = 0; i < 5; ++i) opt.step({&p}, {Tensor::vector({0.5, -0.25})});
      return p.values;
    };
    CHECK(run() == run());
  }
  SUBCASE("shape mismatch is a ShapeError") {
    Tensor p = Tensor::vector({0.0});
    OptimizerConfig cfg;
    OptimizerState opt(cfg, std::vector<const Tensor*>{&p});
    CHECK_THROWS_AS(opt.step({&p}, {Tensor::vector({1.0, 2.0})}), ShapeError);
  }
}

TEST_CASE("rmsprop step is deterministic and moves against the gradient") {
  Tensor p = Tensor::vector({1.0});
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::RmsProp;
  cfg.learning_rate = 1e-2;
  cfg.epsilon = 1e-5;
  OptimizerState opt(cfg, std::vector<const Tensor*>{&p});
  opt.step({&p}, {Tensor::vector({2.0})});
  CHECK(p.at(0) < 1.0);
  // v = (1-alpha) g^2; step = lr*g/(sqrt(v)+eps)
  double v = (1.0 - cfg.alpha) * 4.0;
  double expected = 1.0 - cfg.learning_rate * 2.0 / (std::sqrt(v) + cfg.epsilon);
  CHECK(p.at(0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("student t helpers behave at table values") {
  // t = 1.833 with 9 dof sits at the one-sided 5% point.
  CHECK(student_t_cdf(1.8331, 9.0) == doctest::Approx(0.95).epsilon(1e-3));
  CHECK(paired_t_pvalue_greater({1, 2, 3, 4}, {0, 1, 2, 3}) < 0.01);
  CHECK(paired_t_pvalue_greater({0, 1, 2, 3}, {1, 2, 3, 4}) > 0.95);
}
