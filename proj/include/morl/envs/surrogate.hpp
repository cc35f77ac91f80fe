#pragma once

#include "morl/env.hpp"

#include <vector>

namespace morl::envs {

/// Stochastic two-objective process-control surrogate. A hidden context is
/// drawn per episode from a discretized beta distribution; the agent picks
/// five discrete control levels and receives a terminal reward vector in
/// [0,1]^2. From step 1 onward a noisy context observable is exposed.
struct SurrogateConfig {
  int episode_length = 5;
  int action_levels = 7;
  int context_bins = 10;
  scalar_t beta_alpha = 1.75;
  scalar_t beta_beta = 5.0;
  scalar_t context_scale = 0.14;   // beta support rescaled to [0, context_scale]
  scalar_t obs_noise_sigma = 0.005;

  void validate() const;

  /// Probability mass of each discretized context bin.
  vector_t bin_masses() const;

  /// Center of context bin k on the rescaled support.
  scalar_t bin_center(int k) const {
    return (k + 0.5) * context_scale / context_bins;
  }

  /// Closed-form terminal reward for a context bin and a full action
  /// sequence. With mean control level m = sum(a)/(L*(levels-1)) and
  /// context-dependent exponent p = 1.5 + 2*(k+0.5)/bins:
  ///   r0 = m^p   (process quality, convex in m)
  ///   r1 = 1 - m (material saving, linear in m)
  /// so every per-context Pareto front is non-convex.
  RewardVector terminal_reward(int context, const std::vector<int>& actions) const;
};

class SurrogateEnv final : public MomdpEnv {
 public:
  explicit SurrogateEnv(SurrogateConfig cfg = SurrogateConfig{});

  int action_count() const override { return cfg_.action_levels; }
  int objective_count() const override { return 2; }
  int max_episode_steps() const override { return cfg_.episode_length; }

  void seed(std::uint64_t s) override { rng_.seed(s); }
  void reset() override;
  StepResult step(int action) override;
  bool terminal() const override { return terminal_; }

  int state_id() const override;
  int state_count() const override;

  vector_t observation() const override;
  int observation_size() const override;

  int context_count() const override { return cfg_.context_bins; }
  vector_t context_probabilities() const override { return masses_; }
  void force_context(int context) override;
  void clear_forced_context() override { forced_context_ = -1; }

  std::unique_ptr<MomdpEnv> clone() const override;

  const SurrogateConfig& config() const { return cfg_; }
  int context() const { return context_; }
  const std::vector<int>& action_history() const { return history_; }

 private:
  SurrogateConfig cfg_;
  vector_t masses_;  // cached: the Simpson integration is too slow per reset
  rng_t rng_{0};
  int forced_context_ = -1;

  int context_ = 0;
  scalar_t observed_context_ = 0.0;  // noisy, fixed per episode
  int observed_bin_ = 0;
  std::vector<int> history_;
  bool terminal_ = true;
};

}  // namespace morl::envs
