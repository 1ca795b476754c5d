#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "milpsat/graph.hpp"
#include "milpsat/tensor.hpp"

namespace milpsat {

enum class LossKind { bce, mse };

const char* to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& s);

// Two-layer perceptron with a rectified-linear hidden layer of width d.
// w1:[hidden,in] b1:[1,hidden] w2:[out,hidden] b2:[1,out]
struct Mlp {
  Tensor w1, b1, w2, b2;
};

// The message-passing classifier over MILP bipartite graphs.
//
// Input layer embeds constraint features through in_v; variable nodes carry
// an empty feature, so their shared initial embedding is the learnable vector
// in_w_const — unless RNI appends a slot, in which case in_w maps it. Each
// round r updates both sides synchronously from the previous round:
//   h_c <- g_v(h_c, sum_e w_e f_w(h_var(e)))
//   h_v <- g_w(h_v, sum_e w_e f_v(h_con(e)))
// with per-round parameters (no weight tying). The output layer applies a
// perceptron to (sum of constraint embeddings, sum of variable embeddings)
// and squashes through the logistic, so predictions live in (0,1).
struct GnnModel {
  int d = 32;
  int rounds = 2;
  double rni_fraction = 0.0;
  LossKind loss_kind = LossKind::bce;

  Mlp in_v;
  Mlp in_w;          // used iff rni_fraction > 0
  Tensor in_w_const; // 1 x d, used iff rni_fraction == 0
  struct Round {
    Mlp f_v, f_w, g_v, g_w;
  };
  std::vector<Round> per_round;
  Mlp out;

  bool uses_rni() const { return rni_fraction > 0.0; }
  int constraint_input_dim() const { return uses_rni() ? 2 : 1; }
  int variable_input_dim() const { return uses_rni() ? 1 : 0; }
};

// Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases.
GnnModel init_model(int d, int rounds, double rni_fraction, std::uint64_t seed,
                    LossKind loss_kind = LossKind::bce);

// Zero everything; forward then yields logistic(0) = 1/2 on any graph.
GnnModel zero_model(int d, int rounds, double rni_fraction, LossKind loss_kind = LossKind::bce);

// Deterministic traversal order shared by Adam, checkpoints and grad checks.
void for_each_param(GnnModel& m, const std::function<void(const std::string&, Tensor&)>& fn);
void for_each_param(const GnnModel& m, const std::function<void(const std::string&, const Tensor&)>& fn);
std::vector<Tensor*> parameters(GnnModel& m);

// Per-member predictions in (0,1).
std::vector<double> forward(const GnnModel& m, const BatchedGraph& g);

// Smallest |pre-activation| over all rectified-linear units of one forward
// pass. Gradient checks need a margin here: at zero the loss has a kink.
double relu_margin(const GnnModel& m, const BatchedGraph& g);

// 1 iff yhat > 1/2, strictly.
int classify(double yhat);

double loss_value(std::span<const double> yhat, std::span<const int> labels, LossKind kind);

struct Gradients {
  double loss = 0.0;
  std::vector<double> yhat;
  std::vector<Tensor> by_param; // aligned with parameters(m)
};

// Mean loss over the batch and exact reverse-mode gradients for every model
// parameter.
Gradients backward(const GnnModel& m, const BatchedGraph& g, std::span<const int> labels,
                   LossKind kind);

// Bias-corrected adaptive-moment update, beta1=0.9 beta2=0.999 eps=1e-8.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
};

void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               double learning_rate);

// Versioned JSON checkpoint holding the architecture fields and all tensors.
// Loading rejects unknown versions and any shape mismatch.
void save_checkpoint(const GnnModel& m, std::ostream& out);
void save_checkpoint(const GnnModel& m, const std::string& path);
GnnModel load_checkpoint(std::istream& in);
GnnModel load_checkpoint_file(const std::string& path);

} // namespace milpsat
