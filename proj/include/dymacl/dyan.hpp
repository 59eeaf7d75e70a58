#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "dymacl/env.hpp"
#include "dymacl/tensor.hpp"

namespace dymacl {

// Network layout. The parameter set depends only on this struct, never on
// how many agents happen to be visible, which is what makes checkpoints
// portable across tasks with different agent counts.
struct DyanSpec {
  std::size_t env_self_width = Observation::env_self_width();
  std::size_t neighbor_feature_width = Observation::kNeighborWidth;
  std::size_t hidden_units = 16;
  std::size_t num_actions = Action::kCount;
  Aggregation aggregation = Aggregation::Sum;
  Activation activation = Activation::Tanh;
  bool use_gru = true;
  bool split_teams = true;  // separate teammate and enemy branch parameters

  // Baseline mode: one fixed-width flat input (padded observation), no
  // aggregation branches. Slot counts fix the input width to one task size.
  bool vanilla = false;
  std::size_t teammate_slots = 0;
  std::size_t enemy_slots = 0;

  void validate() const;
  std::size_t flat_input_width() const;       // vanilla input width
  std::size_t recurrent_input_width() const;  // width entering the GRU / post layer

  bool operator==(const DyanSpec&) const = default;
};

struct GruParams {
  Tensor wz, uz, bz;
  Tensor wr, ur, br;
  Tensor wh, uh, bh;
};

struct DyanParams {
  DyanSpec spec;
  Tensor env_self_w, env_self_b;  // in vanilla mode: the flat input layer
  Tensor teammate_w, teammate_b;  // shared across all visible teammates
  Tensor enemy_w, enemy_b;        // empty when !split_teams (teammate branch is reused)
  GruParams gru;                  // empty when !use_gru
  Tensor post_w, post_b;          // dense replacement when !use_gru
  Tensor head_w, head_b;

  // Fixed enumeration order; empty tensors (unused in this spec) are skipped.
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  template <typename F>
  void visit(F&& f) const;
  std::size_t parameter_count() const;
  bool all_finite() const;
};

struct ForwardOutput {
  std::vector<double> q_values;
  Tensor hidden_next;
  std::vector<double> teammate_embedding;
  std::vector<double> enemy_embedding;
};

// Seeded parameter construction; uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)].
DyanParams dyan_build(const DyanSpec& spec, std::uint64_t seed);

Tensor dyan_zero_hidden(const DyanSpec& spec);

// Pure single-observation forward pass (no autodiff bookkeeping). Bit-equal
// to the graph path below; a test pins that equality.
ForwardOutput dyan_forward(const DyanParams& params, const Observation& obs,
                           const Tensor& hidden);
ForwardOutput dyan_forward(const DyanParams& params, const Observation& obs);

// Post-aggregation embeddings only (for the semantic analysis).
std::pair<std::vector<double>, std::vector<double>> dyan_embed(const DyanParams& params,
                                                               const Observation& obs);

// --- graph path, used by the training losses --------------------------------

struct DyanNodes {
  Graph::NodeId env_self_w, env_self_b;
  Graph::NodeId teammate_w, teammate_b;
  Graph::NodeId enemy_w, enemy_b;
  Graph::GruNodes gru;
  Graph::NodeId post_w, post_b;
  Graph::NodeId head_w, head_b;
};

// Enter all parameters into a graph once; trainable iff `trainable`.
DyanNodes dyan_add_params(Graph& g, const DyanParams& params, bool trainable);

struct DyanGraphOutput {
  Graph::NodeId q_values;
  Graph::NodeId hidden_next;
  Graph::NodeId teammate_embedding;
  Graph::NodeId enemy_embedding;
};

DyanGraphOutput dyan_forward_graph(Graph& g, const DyanNodes& nodes, const DyanSpec& spec,
                                   const Observation& obs, Graph::NodeId hidden);

// Collect d(loss)/d(param) in the same order as DyanParams::parameters().
std::vector<Tensor> dyan_collect_grads(const Graph& g, const DyanNodes& nodes,
                                       const DyanSpec& spec);

// --- checkpointing -----------------------------------------------------------

// Versioned container with the spec as metadata and every tensor by name;
// load(save(p)) is bit-exact. See docs/formats.md.
void dyan_save(const DyanParams& params, const std::filesystem::path& path);
DyanParams dyan_load(const std::filesystem::path& path);

template <typename F>
void DyanParams::visit(F&& f) const {
  auto emit = [&](const char* name, const Tensor& t) {
    if (!t.empty()) f(name, t);
  };
  emit("env_self_w", env_self_w);
  emit("env_self_b", env_self_b);
  emit("teammate_w", teammate_w);
  emit("teammate_b", teammate_b);
  emit("enemy_w", enemy_w);
  emit("enemy_b", enemy_b);
  emit("gru_wz", gru.wz);
  emit("gru_uz", gru.uz);
  emit("gru_bz", gru.bz);
  emit("gru_wr", gru.wr);
  emit("gru_ur", gru.ur);
  emit("gru_br", gru.br);
  emit("gru_wh", gru.wh);
  emit("gru_uh", gru.uh);
  emit("gru_bh", gru.bh);
  emit("post_w", post_w);
  emit("post_b", post_b);
  emit("head_w", head_w);
  emit("head_b", head_b);
}

}  // namespace dymacl
