#include "dymacl/replay.hpp"

#include <algorithm>

#include "dymacl/checkpoint.hpp"

namespace dymacl {

TaskBuffer::TaskBuffer(int task_id, ReplayConfig cfg) : task_id_(task_id), cfg_(cfg) {
  if (cfg_.capacity == 0) throw ConfigError("replay capacity must be > 0");
}

void TaskBuffer::push(Transition t) {
  if (t.task_id != task_id_)
    throw ProtocolError("transition task " + std::to_string(t.task_id) +
                        " pushed to buffer for task " + std::to_string(task_id_));
  if (items_.size() < cfg_.capacity) {
    items_.push_back(std::move(t));
  } else {
    items_[head_] = std::move(t);
    head_ = (head_ + 1) % cfg_.capacity;
  }
}

const Transition& TaskBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw ContractError("buffer index out of range");
  return items_[(head_ + i) % items_.size()];
}

std::optional<std::vector<Transition>> TaskBuffer::sample(std::size_t batch, Rng& rng) const {
  if (!ready()) return std::nullopt;
  std::vector<Transition> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) out.push_back(items_[rng.next_index(items_.size())]);
  return out;
}

MultiBatch multi_sample(const std::vector<const TaskBuffer*>& buffers, std::size_t batch,
                        Rng& rng) {
  MultiBatch mb;
  for (const TaskBuffer* b : buffers) {
    if (!b->ready()) {
      mb.ready = false;
      mb.not_ready_task = b->task_id();
      mb.per_task.clear();
      mb.task_ids.clear();
      return mb;
    }
  }
  mb.ready = true;
  for (const TaskBuffer* b : buffers) {
    mb.task_ids.push_back(b->task_id());
    mb.per_task.push_back(*b->sample(batch, rng));
  }
  return mb;
}

std::size_t padded_width(std::size_t teammate_slots, std::size_t enemy_slots) {
  return Observation::env_self_width() +
         (teammate_slots + enemy_slots) * Observation::kNeighborWidth;
}

std::vector<double> pad_to(const Observation& obs, std::size_t teammate_slots,
                           std::size_t enemy_slots) {
  if (obs.teammate_features.size() > teammate_slots)
    throw ShapeError("pad_to: " + std::to_string(obs.teammate_features.size()) +
                     " teammates exceed " + std::to_string(teammate_slots) + " slots");
  if (obs.enemy_features.size() > enemy_slots)
    throw ShapeError("pad_to: " + std::to_string(obs.enemy_features.size()) +
                     " enemies exceed " + std::to_string(enemy_slots) + " slots");
  std::vector<double> out;
  out.reserve(obs.env_features.size() + obs.self_features.size() +
              (teammate_slots + enemy_slots) * Observation::kNeighborWidth);
  out.insert(out.end(), obs.env_features.begin(), obs.env_features.end());
  out.insert(out.end(), obs.self_features.begin(), obs.self_features.end());
  for (std::size_t i = 0; i < teammate_slots; ++i) {
    if (i < obs.teammate_features.size())
      out.insert(out.end(), obs.teammate_features[i].begin(), obs.teammate_features[i].end());
    else
      out.insert(out.end(), Observation::kNeighborWidth, 0.0);
  }
  for (std::size_t i = 0; i < enemy_slots; ++i) {
    if (i < obs.enemy_features.size())
      out.insert(out.end(), obs.enemy_features[i].begin(), obs.enemy_features[i].end());
    else
      out.insert(out.end(), Observation::kNeighborWidth, 0.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dump / restore via the shared container format. Each transition is one
// flat f64 tensor; counts are stored as exact small integers.

namespace {

void encode_obs(std::vector<double>& v, const Observation& o) {
  v.push_back(static_cast<double>(o.env_features.size()));
  v.insert(v.end(), o.env_features.begin(), o.env_features.end());
  v.push_back(static_cast<double>(o.self_features.size()));
  v.insert(v.end(), o.self_features.begin(), o.self_features.end());
  v.push_back(static_cast<double>(o.teammate_features.size()));
  for (const auto& f : o.teammate_features) v.insert(v.end(), f.begin(), f.end());
  v.push_back(static_cast<double>(o.enemy_features.size()));
  for (const auto& f : o.enemy_features) v.insert(v.end(), f.begin(), f.end());
}

struct Cursor {
  const std::vector<double>& v;
  std::size_t i = 0;
  double next() {
    if (i >= v.size()) throw CheckpointError("corrupt buffer dump: record too short");
    return v[i++];
  }
  std::size_t count() {
    double d = next();
    if (d < 0 || d > 1e12) throw CheckpointError("corrupt buffer dump: bad count");
    return static_cast<std::size_t>(d);
  }
  std::vector<double> take(std::size_t n) {
    if (i + n > v.size()) throw CheckpointError("corrupt buffer dump: record too short");
    std::vector<double> out(v.begin() + static_cast<long>(i), v.begin() + static_cast<long>(i + n));
    i += n;
    return out;
  }
};

Observation decode_obs(Cursor& c) {
  Observation o;
  o.env_features = c.take(c.count());
  o.self_features = c.take(c.count());
  std::size_t tm = c.count();
  for (std::size_t k = 0; k < tm; ++k) o.teammate_features.push_back(c.take(Observation::kNeighborWidth));
  std::size_t en = c.count();
  for (std::size_t k = 0; k < en; ++k) o.enemy_features.push_back(c.take(Observation::kNeighborWidth));
  return o;
}

std::vector<double> encode_transition(const Transition& t) {
  std::vector<double> v;
  v.push_back(static_cast<double>(t.task_id));
  v.push_back(t.done ? 1.0 : 0.0);
  v.push_back(t.team_reward);
  v.push_back(static_cast<double>(t.agent_ids.size()));
  for (std::size_t i = 0; i < t.agent_ids.size(); ++i) {
    v.push_back(static_cast<double>(t.agent_ids[i]));
    v.push_back(static_cast<double>(t.actions[i]));
    v.push_back(t.rewards[i]);
    encode_obs(v, t.obs[i]);
  }
  v.push_back(static_cast<double>(t.next_agent_ids.size()));
  for (std::size_t i = 0; i < t.next_agent_ids.size(); ++i) {
    v.push_back(static_cast<double>(t.next_agent_ids[i]));
    encode_obs(v, t.next_obs[i]);
  }
  v.push_back(static_cast<double>(t.hidden.size()));
  for (const Tensor& hTensor : t.hidden) {
    v.push_back(static_cast<double>(hTensor.size()));
    v.insert(v.end(), hTensor.values.begin(), hTensor.values.end());
  }
  v.push_back(static_cast<double>(t.next_hidden.size()));
  for (const Tensor& hTensor : t.next_hidden) {
    v.push_back(static_cast<double>(hTensor.size()));
    v.insert(v.end(), hTensor.values.begin(), hTensor.values.end());
  }
  return v;
}

Transition decode_transition(const std::vector<double>& v) {
  Cursor c{v};
  Transition t;
  t.task_id = static_cast<int>(c.next());
  t.done = c.next() != 0.0;
  t.team_reward = c.next();
  std::size_t n = c.count();
  for (std::size_t i = 0; i < n; ++i) {
    t.agent_ids.push_back(static_cast<int>(c.next()));
    t.actions.push_back(static_cast<int>(c.next()));
    t.rewards.push_back(c.next());
    t.obs.push_back(decode_obs(c));
  }
  std::size_t m = c.count();
  for (std::size_t i = 0; i < m; ++i) {
    t.next_agent_ids.push_back(static_cast<int>(c.next()));
    t.next_obs.push_back(decode_obs(c));
  }
  std::size_t nh = c.count();
  for (std::size_t i = 0; i < nh; ++i) t.hidden.push_back(Tensor::vector(c.take(c.count())));
  nh = c.count();
  for (std::size_t i = 0; i < nh; ++i) t.next_hidden.push_back(Tensor::vector(c.take(c.count())));
  return t;
}

}  // namespace

void TaskBuffer::dump(const std::filesystem::path& path) const {
  Container c;
  c.metadata["format"] = "task-buffer";
  c.metadata["task_id"] = std::to_string(task_id_);
  c.metadata["capacity"] = std::to_string(cfg_.capacity);
  c.metadata["min_fill"] = std::to_string(cfg_.min_fill);
  c.metadata["count"] = std::to_string(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i)
    c.tensors.emplace_back("t" + std::to_string(i), Tensor::vector(encode_transition(at(i))));
  c.save(path);
}

TaskBuffer TaskBuffer::restore(const std::filesystem::path& path) {
  Container c = Container::load(path);
  if (!c.has_meta("format") || c.meta("format") != "task-buffer")
    throw CheckpointError("not a task-buffer dump: " + path.string());
  ReplayConfig cfg;
  cfg.capacity = std::stoul(c.meta("capacity"));
  cfg.min_fill = std::stoul(c.meta("min_fill"));
  TaskBuffer buf(std::stoi(c.meta("task_id")), cfg);
  std::size_t count = std::stoul(c.meta("count"));
  for (std::size_t i = 0; i < count; ++i)
    buf.push(decode_transition(c.tensor("t" + std::to_string(i)).values));
  return buf;
}

}  // namespace dymacl
