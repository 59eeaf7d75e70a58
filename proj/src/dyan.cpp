#include "dymacl/dyan.hpp"

#include <cmath>

#include "dymacl/checkpoint.hpp"
#include "dymacl/replay.hpp"

namespace dymacl {

void DyanSpec::validate() const {
  if (env_self_width == 0 || neighbor_feature_width == 0 || hidden_units == 0 ||
      num_actions == 0)
    throw ConfigError("dyan spec: all widths must be > 0");
  if (vanilla && teammate_slots == 0 && enemy_slots == 0)
    throw ConfigError("dyan spec: vanilla mode needs neighbor slot counts");
}

std::size_t DyanSpec::flat_input_width() const {
  return env_self_width + (teammate_slots + enemy_slots) * neighbor_feature_width;
}

std::size_t DyanSpec::recurrent_input_width() const {
  return vanilla ? hidden_units : 3 * hidden_units;
}

std::vector<Tensor*> DyanParams::parameters() {
  std::vector<Tensor*> out;
  auto emit = [&](Tensor& t) {
    if (!t.empty()) out.push_back(&t);
  };
  emit(env_self_w);
  emit(env_self_b);
  emit(teammate_w);
  emit(teammate_b);
  emit(enemy_w);
  emit(enemy_b);
  emit(gru.wz);
  emit(gru.uz);
  emit(gru.bz);
  emit(gru.wr);
  emit(gru.ur);
  emit(gru.br);
  emit(gru.wh);
  emit(gru.uh);
  emit(gru.bh);
  emit(post_w);
  emit(post_b);
  emit(head_w);
  emit(head_b);
  return out;
}

std::vector<const Tensor*> DyanParams::parameters() const {
  auto mut = const_cast<DyanParams*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::size_t DyanParams::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor* t : parameters()) n += t->size();
  return n;
}

bool DyanParams::all_finite() const {
  for (const Tensor* t : parameters())
    if (!t->all_finite()) return false;
  return true;
}

DyanParams dyan_build(const DyanSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(derive_seed(seed, "dyan-init"));
  std::size_t h = spec.hidden_units;

  DyanParams p;
  p.spec = spec;
  std::size_t in0 = spec.vanilla ? spec.flat_input_width() : spec.env_self_width;
  p.env_self_w = init_matrix(h, in0, rng);
  p.env_self_b = init_vector(h, in0, rng);
  if (!spec.vanilla) {
    p.teammate_w = init_matrix(h, spec.neighbor_feature_width, rng);
    p.teammate_b = init_vector(h, spec.neighbor_feature_width, rng);
    if (spec.split_teams) {
      p.enemy_w = init_matrix(h, spec.neighbor_feature_width, rng);
      p.enemy_b = init_vector(h, spec.neighbor_feature_width, rng);
    }
  }
  std::size_t x = spec.recurrent_input_width();
  if (spec.use_gru) {
    p.gru.wz = init_matrix(h, x, rng);
    p.gru.uz = init_matrix(h, h, rng);
    p.gru.bz = init_vector(h, x, rng);
    p.gru.wr = init_matrix(h, x, rng);
    p.gru.ur = init_matrix(h, h, rng);
    p.gru.br = init_vector(h, x, rng);
    p.gru.wh = init_matrix(h, x, rng);
    p.gru.uh = init_matrix(h, h, rng);
    p.gru.bh = init_vector(h, x, rng);
  } else {
    p.post_w = init_matrix(h, x, rng);
    p.post_b = init_vector(h, x, rng);
  }
  p.head_w = init_matrix(spec.num_actions, h, rng);
  p.head_b = init_vector(spec.num_actions, h, rng);
  return p;
}

Tensor dyan_zero_hidden(const DyanSpec& spec) { return Tensor::zeros({spec.hidden_units}); }

// ---------------------------------------------------------------------------
// Plain forward. The arithmetic below mirrors the graph ops operation for
// operation so the two paths agree bit-exactly (pinned by a test).

namespace {

std::vector<double> mv(const Tensor& w, const std::vector<double>& x) {
  std::vector<double> out(w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < w.cols(); ++c) acc += w.at(r, c) * x[c];
    out[r] = acc;
  }
  return out;
}

void add_inplace(std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

void apply_activation(std::vector<double>& v, Activation act) {
  for (double& x : v) {
    switch (act) {
      case Activation::Identity: break;
      case Activation::Relu: x = x > 0.0 ? x : 0.0; break;
      case Activation::Tanh: x = std::tanh(x); break;
      case Activation::Sigmoid: x = 1.0 / (1.0 + std::exp(-x)); break;
    }
  }
}

std::vector<double> dense_plain(const Tensor& w, const Tensor& b, const std::vector<double>& x,
                                Activation act) {
  if (w.cols() != x.size()) throw ShapeError("dyan forward: input width mismatch");
  std::vector<double> out = mv(w, x);
  add_inplace(out, b.values);
  apply_activation(out, act);
  return out;
}

std::vector<double> aggregate_plain(Aggregation kind,
                                    const std::vector<std::vector<double>>& items,
                                    std::size_t width) {
  std::vector<double> out(width, 0.0);
  if (items.empty()) return out;
  switch (kind) {
    case Aggregation::Sum:
    case Aggregation::Mean: {
      for (const auto& it : items)
        for (std::size_t i = 0; i < width; ++i) out[i] += it[i];
      if (kind == Aggregation::Mean) {
        double inv = 1.0 / static_cast<double>(items.size());
        for (double& v : out) v *= inv;
      }
      break;
    }
    case Aggregation::Max: {
      out = items[0];
      for (std::size_t k = 1; k < items.size(); ++k)
        for (std::size_t i = 0; i < width; ++i)
          if (items[k][i] > out[i]) out[i] = items[k][i];
      break;
    }
  }
  return out;
}

std::vector<double> gru_plain(const GruParams& p, const std::vector<double>& x,
                              const std::vector<double>& h) {
  std::vector<double> z = mv(p.wz, x);
  add_inplace(z, mv(p.uz, h));
  add_inplace(z, p.bz.values);
  apply_activation(z, Activation::Sigmoid);

  std::vector<double> r = mv(p.wr, x);
  add_inplace(r, mv(p.ur, h));
  add_inplace(r, p.br.values);
  apply_activation(r, Activation::Sigmoid);

  std::vector<double> rh(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) rh[i] = r[i] * h[i];

  std::vector<double> hh = mv(p.wh, x);
  add_inplace(hh, mv(p.uh, rh));
  add_inplace(hh, p.bh.values);
  apply_activation(hh, Activation::Tanh);

  std::vector<double> out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i)
    out[i] = (z[i] * -1.0 + 1.0) * h[i] + z[i] * hh[i];
  return out;
}

void check_obs(const DyanSpec& spec, const Observation& obs) {
  if (obs.env_features.size() + obs.self_features.size() != spec.env_self_width)
    throw ShapeError("dyan forward: env+self width mismatch");
  for (const auto& f : obs.teammate_features)
    if (f.size() != spec.neighbor_feature_width)
      throw ShapeError("dyan forward: teammate feature width mismatch");
  for (const auto& f : obs.enemy_features)
    if (f.size() != spec.neighbor_feature_width)
      throw ShapeError("dyan forward: enemy feature width mismatch");
}

}  // namespace

ForwardOutput dyan_forward(const DyanParams& params, const Observation& obs,
                           const Tensor& hidden) {
  const DyanSpec& spec = params.spec;
  check_obs(spec, obs);
  std::size_t h = spec.hidden_units;
  if (hidden.size() != h) throw ShapeError("dyan forward: hidden width mismatch");

  ForwardOutput out;
  std::vector<double> trunk;
  if (spec.vanilla) {
    std::vector<double> flat = pad_to(obs, spec.teammate_slots, spec.enemy_slots);
    trunk = dense_plain(params.env_self_w, params.env_self_b, flat, spec.activation);
    out.teammate_embedding.assign(h, 0.0);
    out.enemy_embedding.assign(h, 0.0);
  } else {
    std::vector<double> base =
        dense_plain(params.env_self_w, params.env_self_b, obs.env_self(), spec.activation);
    const Tensor& ew = spec.split_teams ? params.enemy_w : params.teammate_w;
    const Tensor& eb = spec.split_teams ? params.enemy_b : params.teammate_b;
    std::vector<std::vector<double>> tm;
    tm.reserve(obs.teammate_features.size());
    for (const auto& f : obs.teammate_features)
      tm.push_back(dense_plain(params.teammate_w, params.teammate_b, f, spec.activation));
    std::vector<std::vector<double>> en;
    en.reserve(obs.enemy_features.size());
    for (const auto& f : obs.enemy_features)
      en.push_back(dense_plain(ew, eb, f, spec.activation));
    out.teammate_embedding = aggregate_plain(spec.aggregation, tm, h);
    out.enemy_embedding = aggregate_plain(spec.aggregation, en, h);

    trunk.reserve(3 * h);
    trunk.insert(trunk.end(), base.begin(), base.end());
    trunk.insert(trunk.end(), out.teammate_embedding.begin(), out.teammate_embedding.end());
    trunk.insert(trunk.end(), out.enemy_embedding.begin(), out.enemy_embedding.end());
  }

  std::vector<double> top;
  if (spec.use_gru) {
    top = gru_plain(params.gru, trunk, hidden.values);
    out.hidden_next = Tensor::vector(top);
  } else {
    top = dense_plain(params.post_w, params.post_b, trunk, spec.activation);
    out.hidden_next = Tensor::zeros({h});
  }
  out.q_values = dense_plain(params.head_w, params.head_b, top, Activation::Identity);
  for (double q : out.q_values)
    if (!std::isfinite(q)) throw NumericError("non-finite q value");
  return out;
}

ForwardOutput dyan_forward(const DyanParams& params, const Observation& obs) {
  return dyan_forward(params, obs, dyan_zero_hidden(params.spec));
}

std::pair<std::vector<double>, std::vector<double>> dyan_embed(const DyanParams& params,
                                                               const Observation& obs) {
  ForwardOutput out = dyan_forward(params, obs);
  return {out.teammate_embedding, out.enemy_embedding};
}

// ---------------------------------------------------------------------------
// Graph path.

DyanNodes dyan_add_params(Graph& g, const DyanParams& p, bool trainable) {
  auto enter = [&](const Tensor& t) -> Graph::NodeId {
    if (t.empty()) return -1;
    return trainable ? g.leaf(t) : g.constant(t);
  };
  DyanNodes n;
  n.env_self_w = enter(p.env_self_w);
  n.env_self_b = enter(p.env_self_b);
  n.teammate_w = enter(p.teammate_w);
  n.teammate_b = enter(p.teammate_b);
  n.enemy_w = enter(p.enemy_w);
  n.enemy_b = enter(p.enemy_b);
  n.gru.wz = enter(p.gru.wz);
  n.gru.uz = enter(p.gru.uz);
  n.gru.bz = enter(p.gru.bz);
  n.gru.wr = enter(p.gru.wr);
  n.gru.ur = enter(p.gru.ur);
  n.gru.br = enter(p.gru.br);
  n.gru.wh = enter(p.gru.wh);
  n.gru.uh = enter(p.gru.uh);
  n.gru.bh = enter(p.gru.bh);
  n.post_w = enter(p.post_w);
  n.post_b = enter(p.post_b);
  n.head_w = enter(p.head_w);
  n.head_b = enter(p.head_b);
  return n;
}

DyanGraphOutput dyan_forward_graph(Graph& g, const DyanNodes& nodes, const DyanSpec& spec,
                                   const Observation& obs, Graph::NodeId hidden) {
  check_obs(spec, obs);
  std::size_t h = spec.hidden_units;

  DyanGraphOutput out;
  Graph::NodeId trunk;
  if (spec.vanilla) {
    Graph::NodeId flat =
        g.constant_vector(pad_to(obs, spec.teammate_slots, spec.enemy_slots));
    trunk = g.dense(flat, nodes.env_self_w, nodes.env_self_b, spec.activation);
    out.teammate_embedding = g.constant(Tensor::zeros({h}));
    out.enemy_embedding = g.constant(Tensor::zeros({h}));
  } else {
    Graph::NodeId base = g.dense(g.constant_vector(obs.env_self()), nodes.env_self_w,
                                 nodes.env_self_b, spec.activation);
    Graph::NodeId ew = spec.split_teams ? nodes.enemy_w : nodes.teammate_w;
    Graph::NodeId eb = spec.split_teams ? nodes.enemy_b : nodes.teammate_b;
    std::vector<Graph::NodeId> tm;
    tm.reserve(obs.teammate_features.size());
    for (const auto& f : obs.teammate_features)
      tm.push_back(g.dense(g.constant_vector(f), nodes.teammate_w, nodes.teammate_b,
                           spec.activation));
    std::vector<Graph::NodeId> en;
    en.reserve(obs.enemy_features.size());
    for (const auto& f : obs.enemy_features)
      en.push_back(g.dense(g.constant_vector(f), ew, eb, spec.activation));
    out.teammate_embedding = g.aggregate(spec.aggregation, tm, h);
    out.enemy_embedding = g.aggregate(spec.aggregation, en, h);
    trunk = g.concat({base, out.teammate_embedding, out.enemy_embedding});
  }

  Graph::NodeId top;
  if (spec.use_gru) {
    top = g.gru_step(trunk, hidden, nodes.gru);
    out.hidden_next = top;
  } else {
    top = g.dense(trunk, nodes.post_w, nodes.post_b, spec.activation);
    out.hidden_next = g.constant(Tensor::zeros({h}));
  }
  out.q_values = g.dense(top, nodes.head_w, nodes.head_b, Activation::Identity);
  return out;
}

std::vector<Tensor> dyan_collect_grads(const Graph& g, const DyanNodes& nodes,
                                       const DyanSpec& spec) {
  std::vector<Tensor> grads;
  auto emit = [&](Graph::NodeId id) {
    if (id >= 0) grads.push_back(g.grad(id));
  };
  emit(nodes.env_self_w);
  emit(nodes.env_self_b);
  if (!spec.vanilla) {
    emit(nodes.teammate_w);
    emit(nodes.teammate_b);
    if (spec.split_teams) {
      emit(nodes.enemy_w);
      emit(nodes.enemy_b);
    }
  }
  if (spec.use_gru) {
    emit(nodes.gru.wz);
    emit(nodes.gru.uz);
    emit(nodes.gru.bz);
    emit(nodes.gru.wr);
    emit(nodes.gru.ur);
    emit(nodes.gru.br);
    emit(nodes.gru.wh);
    emit(nodes.gru.uh);
    emit(nodes.gru.bh);
  } else {
    emit(nodes.post_w);
    emit(nodes.post_b);
  }
  emit(nodes.head_w);
  emit(nodes.head_b);
  return grads;
}

// ---------------------------------------------------------------------------
// Checkpointing.

void dyan_save(const DyanParams& params, const std::filesystem::path& path) {
  Container c;
  const DyanSpec& s = params.spec;
  c.metadata["format"] = "dyan";
  c.metadata["env_self_width"] = std::to_string(s.env_self_width);
  c.metadata["neighbor_feature_width"] = std::to_string(s.neighbor_feature_width);
  c.metadata["hidden_units"] = std::to_string(s.hidden_units);
  c.metadata["num_actions"] = std::to_string(s.num_actions);
  c.metadata["aggregation"] = to_string(s.aggregation);
  c.metadata["activation"] = to_string(s.activation);
  c.metadata["use_gru"] = s.use_gru ? "1" : "0";
  c.metadata["split_teams"] = s.split_teams ? "1" : "0";
  c.metadata["vanilla"] = s.vanilla ? "1" : "0";
  c.metadata["teammate_slots"] = std::to_string(s.teammate_slots);
  c.metadata["enemy_slots"] = std::to_string(s.enemy_slots);
  params.visit([&](const char* name, const Tensor& t) { c.tensors.emplace_back(name, t); });
  c.save(path);
}

DyanParams dyan_load(const std::filesystem::path& path) {
  Container c = Container::load(path);
  if (!c.has_meta("format") || c.meta("format") != "dyan")
    throw CheckpointError("not a dyan checkpoint: " + path.string());

  DyanSpec s;
  try {
    s.env_self_width = std::stoul(c.meta("env_self_width"));
    s.neighbor_feature_width = std::stoul(c.meta("neighbor_feature_width"));
    s.hidden_units = std::stoul(c.meta("hidden_units"));
    s.num_actions = std::stoul(c.meta("num_actions"));
    s.aggregation = aggregation_from_string(c.meta("aggregation"));
    s.activation = activation_from_string(c.meta("activation"));
    s.use_gru = c.meta("use_gru") == "1";
    s.split_teams = c.meta("split_teams") == "1";
    s.vanilla = c.meta("vanilla") == "1";
    s.teammate_slots = std::stoul(c.meta("teammate_slots"));
    s.enemy_slots = std::stoul(c.meta("enemy_slots"));
  } catch (const std::logic_error&) {
    throw CheckpointError("malformed spec metadata in " + path.string());
  }

  DyanParams expected = dyan_build(s, 0);
  DyanParams p;
  p.spec = s;
  auto take = [&](const char* name, const Tensor& model) -> Tensor {
    if (model.empty()) return Tensor{};
    const Tensor& t = c.tensor(name);
    if (t.shape != model.shape)
      throw CheckpointError(std::string("checkpoint tensor ") + name + " has wrong shape");
    Tensor out = t;
    out.requires_grad = true;
    return out;
  };
  p.env_self_w = take("env_self_w", expected.env_self_w);
  p.env_self_b = take("env_self_b", expected.env_self_b);
  p.teammate_w = take("teammate_w", expected.teammate_w);
  p.teammate_b = take("teammate_b", expected.teammate_b);
  p.enemy_w = take("enemy_w", expected.enemy_w);
  p.enemy_b = take("enemy_b", expected.enemy_b);
  p.gru.wz = take("gru_wz", expected.gru.wz);
  p.gru.uz = take("gru_uz", expected.gru.uz);
  p.gru.bz = take("gru_bz", expected.gru.bz);
  p.gru.wr = take("gru_wr", expected.gru.wr);
  p.gru.ur = take("gru_ur", expected.gru.ur);
  p.gru.br = take("gru_br", expected.gru.br);
  p.gru.wh = take("gru_wh", expected.gru.wh);
  p.gru.uh = take("gru_uh", expected.gru.uh);
  p.gru.bh = take("gru_bh", expected.gru.bh);
  p.post_w = take("post_w", expected.post_w);
  p.post_b = take("post_b", expected.post_b);
  p.head_w = take("head_w", expected.head_w);
  p.head_b = take("head_b", expected.head_b);
  if (!p.all_finite()) throw CheckpointError("non-finite parameters in " + path.string());
  return p;
}

}  // namespace dymacl
