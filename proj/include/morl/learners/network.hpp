#pragma once

#include "morl/core.hpp"

#include <iosfwd>
#include <vector>

namespace morl::learners {

/// Layer widths of the multi-head value network. Head i receives the trunk
/// embedding concatenated with the first i (normalized) threshold inputs.
struct MlpSpec {
  std::vector<int> trunk{128, 64};
  std::vector<std::vector<int>> heads{{64}, {64, 32}};

  bool operator==(const MlpSpec&) const = default;
};

struct DenseLayer {
  matrix_t W;
  vector_t b;
};

struct LayerGrad {
  matrix_t W;
  vector_t b;
};

struct NetGrads {
  std::vector<LayerGrad> trunk;
  std::vector<std::vector<LayerGrad>> heads;

  scalar_t squared_norm() const;
  void scale(scalar_t f);
};

/// Shared-trunk multi-head MLP with rectified-linear hidden layers and
/// linear per-action outputs. Inputs are column-major batches.
class MultiHeadNet {
 public:
  MultiHeadNet(int input_dim, int action_count, int objective_count, int threshold_inputs,
               MlpSpec spec, rng_t& rng);

  int input_dim() const { return input_dim_; }
  int action_count() const { return actions_; }
  int objective_count() const { return objectives_; }
  int threshold_inputs() const { return threshold_inputs_; }
  const MlpSpec& spec() const { return spec_; }

  struct Cache {
    matrix_t input;                          // input_dim x B
    matrix_t thresholds;                     // threshold_inputs x B
    std::vector<matrix_t> trunk_acts;        // post-ReLU per trunk layer
    std::vector<std::vector<matrix_t>> head_acts;  // per head, per layer (last linear)
  };

  /// Per-objective outputs, each action_count x B. T has threshold_inputs
  /// rows (ignored rows beyond what a head consumes).
  std::vector<matrix_t> forward(const matrix_t& X, const matrix_t& T, Cache* cache = nullptr) const;

  /// Reverse-mode gradients for upstream dL/dQ_i (action_count x B each).
  NetGrads backward(const Cache& cache, const std::vector<matrix_t>& dQ) const;

  NetGrads zero_grads() const;
  void sgd_step(NetGrads grads, scalar_t lr, scalar_t clip_norm);

  /// Flat parameter access (used by finite-difference checks and tests).
  Eigen::Index parameter_count() const;
  vector_t flatten_parameters() const;
  void set_parameters(const vector_t& flat);
  static vector_t flatten_grads(const NetGrads& g);

  void save(std::ostream& out) const;
  /// Rejects streams whose architecture line does not match this net.
  void load(std::istream& in);

  std::string architecture_string() const;

 private:
  int input_dim_;
  int actions_;
  int objectives_;
  int threshold_inputs_;
  MlpSpec spec_;
  std::vector<DenseLayer> trunk_;
  std::vector<std::vector<DenseLayer>> heads_;
};

/// Huber loss with threshold delta and its derivative.
inline scalar_t huber(scalar_t r, scalar_t delta = 1.0) {
  const scalar_t a = std::abs(r);
  return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}
inline scalar_t huber_grad(scalar_t r, scalar_t delta = 1.0) {
  return std::clamp(r, -delta, delta);
}

}  // namespace morl::learners
