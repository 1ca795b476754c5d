#include "milpsat/gnn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "milpsat/rng.hpp"

namespace milpsat {

const char* to_string(LossKind k) { return k == LossKind::bce ? "bce" : "mse"; }

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "bce" || s == "BCE") return LossKind::bce;
  if (s == "mse" || s == "MSE") return LossKind::mse;
  throw parse_error("unknown loss kind: " + s);
}

namespace {

Mlp make_mlp(int in, int hidden, int out) {
  Mlp mlp;
  mlp.w1 = Tensor(hidden, in);
  mlp.b1 = Tensor(1, hidden);
  mlp.w2 = Tensor(out, hidden);
  mlp.b2 = Tensor(1, out);
  return mlp;
}

GnnModel make_skeleton(int d, int rounds, double rni_fraction, LossKind loss_kind) {
  if (d < 1 || rounds < 0) throw dimension_error("model needs d >= 1 and rounds >= 0");
  if (rni_fraction < 0.0 || rni_fraction > 1.0)
    throw dimension_error("RNI fraction must lie in [0, 1]");
  GnnModel m;
  m.d = d;
  m.rounds = rounds;
  m.rni_fraction = rni_fraction;
  m.loss_kind = loss_kind;
  m.in_v = make_mlp(m.constraint_input_dim(), d, d);
  if (m.uses_rni())
    m.in_w = make_mlp(1, d, d);
  else
    m.in_w_const = Tensor(1, d);
  m.per_round.resize(static_cast<std::size_t>(rounds));
  for (auto& round : m.per_round) {
    round.f_v = make_mlp(d, d, d);
    round.f_w = make_mlp(d, d, d);
    round.g_v = make_mlp(2 * d, d, d);
    round.g_w = make_mlp(2 * d, d, d);
  }
  m.out = make_mlp(2 * d, d, 1);
  return m;
}

void glorot_fill(Tensor& w, Rng& rng) {
  // Weight tensors are [fan_out, fan_in]; biases stay zero.
  const double bound = std::sqrt(6.0 / (w.rows + w.cols));
  for (double& v : w.v) v = (2.0 * rng.uniform01() - 1.0) * bound;
}

} // namespace

GnnModel init_model(int d, int rounds, double rni_fraction, std::uint64_t seed,
                    LossKind loss_kind) {
  GnnModel m = make_skeleton(d, rounds, rni_fraction, loss_kind);
  Rng rng(derive_seed(seed, 0x696e6974ULL));
  for_each_param(m, [&rng](const std::string& name, Tensor& t) {
    const bool is_bias = name.ends_with(".b1") || name.ends_with(".b2");
    if (!is_bias) glorot_fill(t, rng);
  });
  return m;
}

GnnModel zero_model(int d, int rounds, double rni_fraction, LossKind loss_kind) {
  return make_skeleton(d, rounds, rni_fraction, loss_kind);
}

namespace {

template <class Model, class Fn>
void visit_params(Model& m, const Fn& fn) {
  auto mlp = [&fn](const std::string& prefix, auto& p) {
    fn(prefix + ".w1", p.w1);
    fn(prefix + ".b1", p.b1);
    fn(prefix + ".w2", p.w2);
    fn(prefix + ".b2", p.b2);
  };
  mlp("in_v", m.in_v);
  if (m.uses_rni())
    mlp("in_w", m.in_w);
  else
    fn("in_w_const", m.in_w_const);
  for (std::size_t r = 0; r < m.per_round.size(); ++r) {
    const std::string p = "round" + std::to_string(r);
    mlp(p + ".f_v", m.per_round[r].f_v);
    mlp(p + ".f_w", m.per_round[r].f_w);
    mlp(p + ".g_v", m.per_round[r].g_v);
    mlp(p + ".g_w", m.per_round[r].g_w);
  }
  mlp("out", m.out);
}

} // namespace

void for_each_param(GnnModel& m, const std::function<void(const std::string&, Tensor&)>& fn) {
  visit_params(m, fn);
}

void for_each_param(const GnnModel& m,
                    const std::function<void(const std::string&, const Tensor&)>& fn) {
  visit_params(m, fn);
}

std::vector<Tensor*> parameters(GnnModel& m) {
  std::vector<Tensor*> out;
  for_each_param(m, [&out](const std::string&, Tensor& t) { out.push_back(&t); });
  return out;
}

namespace {

struct TapeModel {
  struct TapeMlp {
    Tape::Id w1, b1, w2, b2;
  };
  TapeMlp in_v, in_w, out;
  Tape::Id in_w_const = -1;
  std::vector<std::array<TapeMlp, 4>> rounds; // f_v, f_w, g_v, g_w

  static TapeMlp push_mlp(Tape& tape, const Mlp& m) {
    return {tape.leaf(m.w1), tape.leaf(m.b1), tape.leaf(m.w2), tape.leaf(m.b2)};
  }
};

Tape::Id apply_mlp(Tape& tape, const TapeModel::TapeMlp& m, Tape::Id x) {
  return tape.linear(tape.relu(tape.linear(x, m.w1, m.b1)), m.w2, m.b2);
}

struct ForwardGraph {
  Tape tape;
  TapeModel params;
  Tape::Id yhat = -1; // [B,1] after logistic
};

void check_dims(const GnnModel& m, const BatchedGraph& g) {
  if (g.constraint_dim != m.constraint_input_dim() || g.variable_dim != m.variable_input_dim())
    throw dimension_error(
        "graph feature dims (" + std::to_string(g.constraint_dim) + "," +
        std::to_string(g.variable_dim) + ") do not match the model (expects RNI slot iff "
        "rni_fraction > 0)");
}

ForwardGraph build_forward(const GnnModel& m, const BatchedGraph& g) {
  check_dims(m, g);
  ForwardGraph fg;
  Tape& tape = fg.tape;

  fg.params.in_v = TapeModel::push_mlp(tape, m.in_v);
  if (m.uses_rni())
    fg.params.in_w = TapeModel::push_mlp(tape, m.in_w);
  else
    fg.params.in_w_const = tape.leaf(m.in_w_const);
  fg.params.rounds.reserve(m.per_round.size());
  for (const auto& round : m.per_round)
    fg.params.rounds.push_back({TapeModel::push_mlp(tape, round.f_v),
                                TapeModel::push_mlp(tape, round.f_w),
                                TapeModel::push_mlp(tape, round.g_v),
                                TapeModel::push_mlp(tape, round.g_w)});
  fg.params.out = TapeModel::push_mlp(tape, m.out);

  Tensor xc(g.constraint_count, g.constraint_dim);
  xc.v = g.constraint_features;
  Tape::Id h_c = apply_mlp(tape, fg.params.in_v, tape.leaf(std::move(xc)));

  Tape::Id h_v;
  if (m.uses_rni()) {
    Tensor xv(g.variable_count, g.variable_dim);
    xv.v = g.variable_features;
    h_v = apply_mlp(tape, fg.params.in_w, tape.leaf(std::move(xv)));
  } else {
    h_v = tape.broadcast_row(fg.params.in_w_const, g.variable_count);
  }

  for (const auto& round : fg.params.rounds) {
    // Both sides read the pre-round embeddings (synchronous update).
    const Tape::Id msg_w = apply_mlp(tape, round[1], h_v);
    const Tape::Id agg_c = tape.aggregate_to_constraints(msg_w, g);
    const Tape::Id msg_v = apply_mlp(tape, round[0], h_c);
    const Tape::Id agg_v = tape.aggregate_to_variables(msg_v, g);
    const Tape::Id next_c = apply_mlp(tape, round[2], tape.concat_cols(h_c, agg_c));
    const Tape::Id next_v = apply_mlp(tape, round[3], tape.concat_cols(h_v, agg_v));
    h_c = next_c;
    h_v = next_v;
  }

  const Tape::Id pooled_c = tape.segment_sum(h_c, g.member_constraint_offset);
  const Tape::Id pooled_v = tape.segment_sum(h_v, g.member_variable_offset);
  const Tape::Id logits = apply_mlp(tape, fg.params.out, tape.concat_cols(pooled_c, pooled_v));
  fg.yhat = tape.logistic(logits);
  return fg;
}

} // namespace

std::vector<double> forward(const GnnModel& m, const BatchedGraph& g) {
  ForwardGraph fg = build_forward(m, g);
  return fg.tape.value(fg.yhat).v;
}

double relu_margin(const GnnModel& m, const BatchedGraph& g) {
  ForwardGraph fg = build_forward(m, g);
  return fg.tape.relu_margin();
}

int classify(double yhat) { return yhat > 0.5 ? 1 : 0; }

double loss_value(std::span<const double> yhat, std::span<const int> labels, LossKind kind) {
  if (yhat.size() != labels.size()) throw dimension_error("loss: length mismatch");
  if (yhat.empty()) throw dimension_error("loss: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < yhat.size(); ++i) {
    if (kind == LossKind::bce) {
      const double p = std::clamp(yhat[i], 1e-12, 1.0 - 1e-12);
      total += labels[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
    } else {
      const double diff = yhat[i] - labels[i];
      total += diff * diff;
    }
  }
  return total / static_cast<double>(yhat.size());
}

Gradients backward(const GnnModel& m, const BatchedGraph& g, std::span<const int> labels,
                   LossKind kind) {
  if (static_cast<int>(labels.size()) != g.member_count)
    throw dimension_error("backward: one label per batch member required");
  ForwardGraph fg = build_forward(m, g);
  Tape& tape = fg.tape;
  const Tape::Id loss =
      kind == LossKind::bce ? tape.bce_loss(fg.yhat, labels) : tape.mse_loss(fg.yhat, labels);
  tape.backward(loss);

  Gradients grads;
  grads.loss = tape.value(loss).v[0];
  grads.yhat = tape.value(fg.yhat).v;

  std::vector<Tape::Id> param_ids;
  auto collect_mlp = [&param_ids](const TapeModel::TapeMlp& p) {
    param_ids.push_back(p.w1);
    param_ids.push_back(p.b1);
    param_ids.push_back(p.w2);
    param_ids.push_back(p.b2);
  };
  collect_mlp(fg.params.in_v);
  if (m.uses_rni())
    collect_mlp(fg.params.in_w);
  else
    param_ids.push_back(fg.params.in_w_const);
  for (const auto& round : fg.params.rounds)
    for (const auto& p : round) collect_mlp(p);
  collect_mlp(fg.params.out);

  grads.by_param.reserve(param_ids.size());
  for (Tape::Id id : param_ids) grads.by_param.push_back(tape.grad(id));
  return grads;
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               double learning_rate) {
  if (params.size() != grads.size()) throw dimension_error("adam_step: param/grad count mismatch");
  if (state.first_moment.empty()) {
    for (const Tensor* p : params) {
      state.first_moment.emplace_back(p->rows, p->cols);
      state.second_moment.emplace_back(p->rows, p->cols);
    }
  }
  if (state.first_moment.size() != params.size())
    throw dimension_error("adam_step: state/param count mismatch");

  ++state.step;
  const double bias1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = grads[i];
    Tensor& m1 = state.first_moment[i];
    Tensor& m2 = state.second_moment[i];
    if (!p.same_shape(g) || !p.same_shape(m1))
      throw dimension_error("adam_step: shape mismatch");
    for (std::size_t j = 0; j < p.size(); ++j) {
      m1.v[j] = state.beta1 * m1.v[j] + (1.0 - state.beta1) * g.v[j];
      m2.v[j] = state.beta2 * m2.v[j] + (1.0 - state.beta2) * g.v[j] * g.v[j];
      const double mhat = m1.v[j] / bias1;
      const double vhat = m2.v[j] / bias2;
      p.v[j] -= learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

namespace {

constexpr int kCheckpointVersion = 1;

nlohmann::json tensor_to_json(const Tensor& t) {
  nlohmann::json j;
  j["shape"] = {t.rows, t.cols};
  j["data"] = t.v;
  return j;
}

Tensor tensor_from_json(const nlohmann::json& j) {
  const auto shape = j.at("shape");
  Tensor t(shape.at(0).get<int>(), shape.at(1).get<int>());
  const auto& data = j.at("data");
  if (data.size() != t.size()) throw dimension_error("checkpoint tensor data/shape mismatch");
  t.v = data.get<std::vector<double>>();
  return t;
}

} // namespace

void save_checkpoint(const GnnModel& m, std::ostream& out) {
  nlohmann::json j;
  j["format"] = "milpsat-gnn";
  j["version"] = kCheckpointVersion;
  j["d"] = m.d;
  j["rounds"] = m.rounds;
  j["rni_fraction"] = m.rni_fraction;
  j["loss"] = to_string(m.loss_kind);
  nlohmann::json tensors;
  for_each_param(m, [&tensors](const std::string& name, const Tensor& t) {
    tensors[name] = tensor_to_json(t);
  });
  j["tensors"] = std::move(tensors);
  out << j.dump(2) << "\n";
}

void save_checkpoint(const GnnModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write checkpoint: " + path);
  save_checkpoint(m, out);
}

GnnModel load_checkpoint(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("malformed checkpoint: ") + e.what());
  }
  try {
    if (j.at("format") != "milpsat-gnn" || j.at("version").get<int>() != kCheckpointVersion)
      throw parse_error("unsupported checkpoint format or version");
    GnnModel m = zero_model(j.at("d").get<int>(), j.at("rounds").get<int>(),
                            j.at("rni_fraction").get<double>(),
                            loss_kind_from_string(j.at("loss").get<std::string>()));
    const auto& tensors = j.at("tensors");
    for_each_param(m, [&tensors](const std::string& name, Tensor& t) {
      if (!tensors.contains(name)) throw dimension_error("checkpoint misses tensor " + name);
      Tensor loaded = tensor_from_json(tensors.at(name));
      if (!loaded.same_shape(t))
        throw dimension_error("checkpoint tensor " + name + " has mismatched shape");
      t = std::move(loaded);
    });
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("malformed checkpoint: ") + e.what());
  }
}

GnnModel load_checkpoint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot read checkpoint: " + path);
  return load_checkpoint(in);
}

} // namespace milpsat
