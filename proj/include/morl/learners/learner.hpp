#pragma once

#include "morl/learners/generalized_q.hpp"
#include "morl/learners/network.hpp"
#include "morl/learners/replay.hpp"

#include <iosfwd>
#include <memory>

namespace morl::learners {

/// Raised when a training run produces a non-finite loss.
class TrainingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Epsilon-greedy action selection around the preference-conditioned greedy
/// policy. The random branch draws uniformly over all actions.
int act(const GeneralizedQ& q, const StateSample& s, const Preference& pref, scalar_t eps,
        rng_t& rng);

class Learner {
 public:
  virtual ~Learner() = default;

  virtual void observe(const Experience& exp) = 0;
  virtual void update(int batches, int batch_size) = 0;
  virtual void sync_target() {}

  virtual const GeneralizedQ& online() const = 0;
  std::unique_ptr<GeneralizedQ> snapshot() const { return online().clone(); }

  /// Maps a sampled grid value onto this learner's preference kind.
  virtual Preference preference_from(scalar_t grid_value) const = 0;

  virtual void save(std::ostream& out) const = 0;
  virtual void load(std::istream& in) = 0;
};

/// Tabular-generalized gTLO learner (exact backend, no target network: the
/// classic TD update bootstraps from the live table). Each replayed
/// experience is additionally updated under a freshly drawn grid preference:
/// transitions do not depend on the preference, so off-preference backups are
/// valid and every threshold bin learns from the whole buffer.
class GtloTabularLearner final : public Learner {
 public:
  /// `decay_alpha` selects the 1/sqrt(visits) step-size schedule; a constant
  /// step size converges faster on deterministic environments.
  GtloTabularLearner(int state_count, int action_count, PreferenceGrid grid,
                     std::vector<scalar_t> gammas, scalar_t alpha, std::uint64_t seed,
                     bool decay_alpha = true);

  void observe(const Experience& exp) override { replay_.push(exp); }
  void update(int batches, int batch_size) override;
  const GeneralizedQ& online() const override { return q_; }
  Preference preference_from(scalar_t v) const override {
    return ThresholdPreference::from_constrained({v});
  }
  void save(std::ostream& out) const override;
  void load(std::istream& in) override;

  TabularGtloQ& table() { return q_; }

 private:
  void update_one(const Experience& exp);

  TabularGtloQ q_;
  ReplayBuffer replay_;
  scalar_t alpha_;
  bool decay_alpha_;
  std::vector<scalar_t> grid_values_;
  rng_t relabel_rng_;
};

/// Network-backed generalized Q for gTLO (multi-head MLP behind the
/// GeneralizedQ contract). Threshold inputs are scaled to [0,1] by the
/// sampling-grid bounds.
class NetworkGtloQ final : public GeneralizedQ {
 public:
  NetworkGtloQ(MultiHeadNet net, PreferenceGrid grid) : net_(std::move(net)), grid_(grid) {}

  int action_count() const override { return net_.action_count(); }
  int objective_count() const override { return net_.objective_count(); }
  matrix_t qrow(const StateSample& s, const Preference& pref) const override;
  std::unique_ptr<GeneralizedQ> clone() const override {
    return std::make_unique<NetworkGtloQ>(*this);
  }

  MultiHeadNet& net() { return net_; }
  const MultiHeadNet& net() const { return net_; }
  const PreferenceGrid& grid() const { return grid_; }

  scalar_t normalize(scalar_t t0) const {
    return grid_.hi > grid_.lo ? (t0 - grid_.lo) / (grid_.hi - grid_.lo) : 0.0;
  }

 private:
  MultiHeadNet net_;
  PreferenceGrid grid_;
};

/// Mean Huber(delta=1) loss of a batch against gTLO targets from the target
/// parameters, with its parameter gradient. Only the taken action's outputs
/// receive error signal.
struct LossGrads {
  scalar_t loss = 0;
  NetGrads grads;
};
LossGrads gtlo_loss(const std::vector<Experience>& batch, NetworkGtloQ& online,
                    const NetworkGtloQ& target, const std::vector<scalar_t>& gammas);

/// Approximate gTLO learner. Half of every sampled batch is relabeled with a
/// freshly drawn grid threshold (transitions are preference-independent), so
/// the threshold-conditioned head trains on the full buffer for every
/// preference instead of only the behavior threshold's share.
class GtloNetworkLearner final : public Learner {
 public:
  GtloNetworkLearner(int obs_dim, int action_count, int objective_count, PreferenceGrid grid,
                     MlpSpec spec, std::vector<scalar_t> gammas, scalar_t lr, scalar_t grad_clip,
                     std::uint64_t seed);

  void observe(const Experience& exp) override { replay_.push(exp); }
  void update(int batches, int batch_size) override;
  void sync_target() override { target_ = online_; }
  const GeneralizedQ& online() const override { return online_; }
  Preference preference_from(scalar_t v) const override {
    return ThresholdPreference::from_constrained({v});
  }
  void save(std::ostream& out) const override;
  void load(std::istream& in) override;

  NetworkGtloQ& online_q() { return online_; }
  const NetworkGtloQ& target_q() const { return target_; }

 private:
  NetworkGtloQ online_;
  NetworkGtloQ target_;
  ReplayBuffer replay_;
  std::vector<scalar_t> gammas_;
  scalar_t lr_;
  scalar_t grad_clip_;
  std::vector<scalar_t> grid_values_;
  rng_t relabel_rng_;
};

/// Tabular scalar ESR learner for generalized linear scalarization. Replayed
/// experiences are also updated under a random grid weight (same
/// off-preference relabeling as the tabular gTLO learner).
class LinearTabularLearner final : public Learner {
 public:
  LinearTabularLearner(int state_count, int action_count, PreferenceGrid phi_grid, scalar_t gamma,
                       scalar_t alpha, std::uint64_t seed, scalar_t optimistic_init = 0.0,
                       bool decay_alpha = true);

  void observe(const Experience& exp) override { replay_.push(exp); }
  void update(int batches, int batch_size) override;
  const GeneralizedQ& online() const override { return q_; }
  Preference preference_from(scalar_t phi) const override {
    return LinearWeight{1.0 - phi, phi};
  }
  void save(std::ostream& out) const override;
  void load(std::istream& in) override;

  TabularLinearQ& table() { return q_; }

 private:
  TabularLinearQ q_;
  ReplayBuffer replay_;
  scalar_t alpha_;
  bool decay_alpha_;
  std::vector<scalar_t> grid_values_;
  rng_t relabel_rng_;

  void update_one(const Experience& exp);
};

/// Network-backed scalar ESR estimate conditioned on the weight (phi is
/// appended to the state features).
class NetworkLinearQ final : public GeneralizedQ {
 public:
  NetworkLinearQ(MultiHeadNet net) : net_(std::move(net)) {}

  int action_count() const override { return net_.action_count(); }
  int objective_count() const override { return 1; }
  matrix_t qrow(const StateSample& s, const Preference& pref) const override;
  std::unique_ptr<GeneralizedQ> clone() const override {
    return std::make_unique<NetworkLinearQ>(*this);
  }

  MultiHeadNet& net() { return net_; }
  const MultiHeadNet& net() const { return net_; }

 private:
  MultiHeadNet net_;
};

class LinearNetworkLearner final : public Learner {
 public:
  LinearNetworkLearner(int obs_dim, int action_count, MlpSpec spec, scalar_t gamma, scalar_t lr,
                       scalar_t grad_clip, std::uint64_t seed);

  void observe(const Experience& exp) override { replay_.push(exp); }
  void update(int batches, int batch_size) override;
  void sync_target() override { target_ = online_; }
  const GeneralizedQ& online() const override { return online_; }
  Preference preference_from(scalar_t phi) const override {
    return LinearWeight{1.0 - phi, phi};
  }
  void save(std::ostream& out) const override;
  void load(std::istream& in) override;

 private:
  NetworkLinearQ online_;
  NetworkLinearQ target_;
  ReplayBuffer replay_;
  scalar_t gamma_;
  scalar_t lr_;
  scalar_t grad_clip_;
};

}  // namespace morl::learners
