#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "common/fd_oracle.hpp"
#include "dymacl/dyan.hpp"
#include "dymacl/replay.hpp"

using namespace dymacl;
using testutil::random_observation;

namespace {

DyanSpec small_spec(Aggregation agg = Aggregation::Sum) {
  DyanSpec spec;
  spec.env_self_width = 10;
  spec.neighbor_feature_width = 3;
  spec.hidden_units = 6;
  spec.num_actions = 5;
  spec.aggregation = agg;
  return spec;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("build is deterministic given the seed") {
  DyanSpec spec = small_spec();
  DyanParams a = dyan_build(spec, 5);
  DyanParams b = dyan_build(spec, 5);
  DyanParams c = dyan_build(spec, 6);
  auto pa = a.parameters();
  auto pb = b.parameters();
  auto pc = c.parameters();
  REQUIRE(pa.size() == pb.size());
  bool same = true, different = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    same = same && pa[i]->values == pb[i]->values;
    different = different || pa[i]->values != pc[i]->values;
  }
  CHECK(same);
  CHECK(different);
}

TEST_CASE("parameter count matches the hand-computed layer arithmetic") {
  DyanSpec spec;  // defaults: env_self 41, nbr 3, hidden 16, actions 21, gru, split
  std::size_t h = spec.hidden_units;
  std::size_t expected = (h * spec.env_self_width + h)       // env+self branch
                         + 2 * (h * spec.neighbor_feature_width + h)  // two neighbor branches
                         + 3 * (h * (3 * h) + h * h + h)     // gru gates on 3h-wide input
                         + (spec.num_actions * h + spec.num_actions);  // q head
  CHECK(dyan_build(spec, 1).parameter_count() == expected);
  CHECK(expected == 4277);
}

TEST_CASE("parameter count is independent of how many agents will be observed") {
  DyanSpec spec = small_spec();
  DyanParams p = dyan_build(spec, 3);
  Rng rng(9);
  Observation small = random_observation(rng, 10, 3, 2, 2);
  Observation large = random_observation(rng, 10, 3, 9, 9);
  CHECK(dyan_forward(p, small).q_values.size() == 5);
  CHECK(dyan_forward(p, large).q_values.size() == 5);
  CHECK(p.parameter_count() == dyan_build(spec, 99).parameter_count());
}

TEST_CASE("forward with no visible neighbors produces zero embeddings") {
  DyanParams p = dyan_build(small_spec(), 1);
  Rng rng(3);
  Observation obs = random_observation(rng, 10, 3, 0, 0);
  ForwardOutput fo = dyan_forward(p, obs);
  CHECK(fo.teammate_embedding == std::vector<double>(6, 0.0));
  CHECK(fo.enemy_embedding == std::vector<double>(6, 0.0));
  CHECK(fo.q_values.size() == 5);
}

TEST_CASE("forward is invariant to neighbor order") {
  for (Aggregation agg : {Aggregation::Sum, Aggregation::Mean, Aggregation::Max}) {
    DyanParams p = dyan_build(small_spec(agg), 2);
    Rng rng(4);
    Observation obs = random_observation(rng, 10, 3, 3, 4);
    Observation swapped = obs;
    std::swap(swapped.teammate_features[0], swapped.teammate_features[2]);
    std::swap(swapped.enemy_features[1], swapped.enemy_features[3]);
    ForwardOutput a = dyan_forward(p, obs);
    ForwardOutput b = dyan_forward(p, swapped);
    for (std::size_t i = 0; i < a.q_values.size(); ++i)
      CHECK(std::fabs(a.q_values[i] - b.q_values[i]) < 1e-9);
  }
}

TEST_CASE("graph forward and plain forward agree bit for bit") {
  for (Aggregation agg : {Aggregation::Sum, Aggregation::Mean, Aggregation::Max}) {
    DyanSpec spec = small_spec(agg);
    DyanParams p = dyan_build(spec, 7);
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
      Observation obs =
          random_observation(rng, 10, 3, rng.next_index(4), rng.next_index(4));
      Tensor hidden = Tensor::zeros({spec.hidden_units});
      for (double& v : hidden.values) v = rng.uniform(-1, 1);
      ForwardOutput plain = dyan_forward(p, obs, hidden);

      Graph g;
      DyanNodes nodes = dyan_add_params(g, p, false);
      DyanGraphOutput fo = dyan_forward_graph(g, nodes, spec, obs, g.constant(hidden));
      CHECK(g.value(fo.q_values).values == plain.q_values);
      CHECK(g.value(fo.hidden_next).values == plain.hidden_next.values);
      CHECK(g.value(fo.teammate_embedding).values == plain.teammate_embedding);
      CHECK(g.value(fo.enemy_embedding).values == plain.enemy_embedding);
    }
  }
}

TEST_CASE("embed matches the embeddings of a full forward") {
  DyanParams p = dyan_build(small_spec(), 11);
  Rng rng(12);
  Observation obs = random_observation(rng, 10, 3, 2, 3);
  auto [tm, en] = dyan_embed(p, obs);
  ForwardOutput fo = dyan_forward(p, obs);
  CHECK(tm == fo.teammate_embedding);
  CHECK(en == fo.enemy_embedding);

  Observation empty = random_observation(rng, 10, 3, 0, 0);
  auto [tm0, en0] = dyan_embed(p, empty);
  CHECK(tm0 == std::vector<double>(6, 0.0));
  CHECK(en0 == std::vector<double>(6, 0.0));
}

TEST_CASE("sum aggregation is additive over the neighbor set") {
  DyanParams p = dyan_build(small_spec(Aggregation::Sum), 13);
  Rng rng(14);
  Observation both = random_observation(rng, 10, 3, 2, 0);
  Observation only_a = both;
  only_a.teammate_features = {both.teammate_features[0]};
  Observation only_b = both;
  only_b.teammate_features = {both.teammate_features[1]};
  auto [tm_ab, en_ab] = dyan_embed(p, both);
  auto [tm_a, en_a] = dyan_embed(p, only_a);
  auto [tm_b, en_b] = dyan_embed(p, only_b);
  for (std::size_t i = 0; i < tm_ab.size(); ++i) CHECK(tm_ab[i] == tm_a[i] + tm_b[i]);
}

TEST_CASE("neighbor width mismatch is a ShapeError") {
  DyanParams p = dyan_build(small_spec(), 15);
  Rng rng(16);
  Observation obs = random_observation(rng, 10, 3, 1, 0);
  obs.teammate_features[0].push_back(0.5);
  CHECK_THROWS_AS(dyan_forward(p, obs), ShapeError);
}

TEST_CASE("checkpoint roundtrip is bit-exact") {
  DyanSpec spec = small_spec(Aggregation::Max);
  DyanParams p = dyan_build(spec, 17);
  auto path = temp_file("dymacl_test_roundtrip.ckpt");
  dyan_save(p, path);
  DyanParams q = dyan_load(path);

  auto pp = p.parameters();
  auto qp = q.parameters();
  REQUIRE(pp.size() == qp.size());
  for (std::size_t i = 0; i < pp.size(); ++i) CHECK(pp[i]->values == qp[i]->values);
  CHECK(p.spec == q.spec);

  Rng rng(18);
  for (int trial = 0; trial < 100; ++trial) {
    Observation obs = random_observation(rng, 10, 3, rng.next_index(5), rng.next_index(5));
    CHECK(dyan_forward(p, obs).q_values == dyan_forward(q, obs).q_values);
  }
  std::filesystem::remove(path);
}

TEST_CASE("a checkpoint built on a small task runs on a larger one") {
  // Same spec regardless of task size, so forwards stay valid: this is what
  // makes reloading a 3v3 model into a 5v5 task possible.
  DyanSpec spec;  // default widths match the battle env
  DyanParams p = dyan_build(spec, 19);
  auto path = temp_file("dymacl_test_reload.ckpt");
  dyan_save(p, path);
  DyanParams q = dyan_load(path);
  Rng rng(20);
  Observation obs5v5 = random_observation(rng, Observation::env_self_width(),
                                          Observation::kNeighborWidth, 4, 5);
  CHECK(dyan_forward(q, obs5v5).q_values.size() == 21);
  std::filesystem::remove(path);
}

TEST_CASE("truncated checkpoints are rejected without a partial load") {
  DyanParams p = dyan_build(small_spec(), 21);
  auto path = temp_file("dymacl_test_trunc.ckpt");
  dyan_save(p, path);
  auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size / 2);
  CHECK_THROWS_AS(dyan_load(path), CheckpointError);

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  os << "not a checkpoint at all";
  os.close();
  CHECK_THROWS_AS(dyan_load(path), CheckpointError);
  std::filesystem::remove(path);
}

TEST_CASE("full network gradients match finite differences end to end") {
  for (Aggregation agg : {Aggregation::Sum, Aggregation::Mean, Aggregation::Max}) {
    DyanSpec spec = small_spec(agg);
    for (std::size_t neighbors : {0u, 1u, 4u}) {
      DyanParams params = dyan_build(spec, derive_seed(31, agg == Aggregation::Sum ? 0 : 1));
      Rng rng(derive_seed(32, neighbors));
      Observation obs = random_observation(rng, 10, 3, neighbors, neighbors);
      std::vector<double> target;
      for (std::size_t a = 0; a < spec.num_actions; ++a) target.push_back(rng.uniform(-1, 1));
      double err = testutil::dyan_fd_max_rel_err(params, [&](Graph& g, const DyanNodes& n) {
        DyanGraphOutput fo =
            dyan_forward_graph(g, n, spec, obs, g.constant(dyan_zero_hidden(spec)));
        return g.sum(g.square(g.sub(fo.q_values, g.constant_vector(target))));
      });
      CHECK(err < 1e-3);
    }
  }
}

TEST_CASE("vanilla mode consumes a fixed-width padded input") {
  DyanSpec spec = small_spec();
  spec.vanilla = true;
  spec.teammate_slots = 3;
  spec.enemy_slots = 3;
  spec.env_self_width = Observation::env_self_width();
  DyanParams p = dyan_build(spec, 23);

  Rng rng(24);
  Observation obs = random_observation(rng, Observation::env_self_width(),
                                       Observation::kNeighborWidth, 2, 1);
  ForwardOutput fo = dyan_forward(p, obs);
  CHECK(fo.q_values.size() == 5);
  CHECK(fo.teammate_embedding == std::vector<double>(6, 0.0));

  Observation too_many = random_observation(rng, Observation::env_self_width(),
                                            Observation::kNeighborWidth, 5, 0);
  CHECK_THROWS_AS(dyan_forward(p, too_many), ShapeError);

  std::size_t h = spec.hidden_units;
  std::size_t flat = spec.flat_input_width();
  std::size_t expected = (h * flat + h) + 3 * (h * h + h * h + h) +
                         (spec.num_actions * h + spec.num_actions);
  CHECK(p.parameter_count() == expected);
}

TEST_CASE("non-gru mode replaces the recurrent layer with a dense one") {
  DyanSpec spec = small_spec();
  spec.use_gru = false;
  DyanParams p = dyan_build(spec, 25);
  Rng rng(26);
  Observation obs = random_observation(rng, 10, 3, 1, 1);
  ForwardOutput fo = dyan_forward(p, obs);
  CHECK(fo.q_values.size() == 5);
  std::size_t h = spec.hidden_units;
  std::size_t expected = (h * 10 + h) + 2 * (h * 3 + h) + (h * 3 * h + h) + (5 * h + 5);
  CHECK(p.parameter_count() == expected);
}
