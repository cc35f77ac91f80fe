#pragma once

#include "morl/env.hpp"

#include <array>

namespace morl::envs {

/// Tiny deterministic two-objective chain MOMDP used for exact convergence
/// checks. Three states, two actions, two decisions per episode:
///
///   s0 --a0 (0,-2)--> s1 --a0--> end (5,-4)   |  --a1--> end (4,-1)
///   s0 --a1 (0,-1)--> s2 --a0--> end (2,-3)   |  --a1--> end (1,-1)
///
/// Episode returns: (5,-6), (4,-3), (2,-4), (1,-2). Objective 0 is non-zero
/// on terminal transitions only.
class ChainMomdp final : public MomdpEnv {
 public:
  ChainMomdp() { reset(); }

  int action_count() const override { return 2; }
  int objective_count() const override { return 2; }
  int max_episode_steps() const override { return 2; }

  void seed(std::uint64_t) override {}
  void reset() override {
    state_ = 0;
    terminal_ = false;
  }

  StepResult step(int action) override {
    if (terminal_) throw ContractViolation("chain: step on terminal state");
    if (action < 0 || action > 1) throw ContractViolation("chain: action index out of range");
    if (state_ == 0) {
      state_ = action == 0 ? 1 : 2;
      return StepResult{RewardVector{0.0, action == 0 ? -2.0 : -1.0}, false};
    }
    static const std::array<std::array<RewardVector, 2>, 2> kTerminal = {
        std::array<RewardVector, 2>{RewardVector{5.0, -4.0}, RewardVector{4.0, -1.0}},
        std::array<RewardVector, 2>{RewardVector{2.0, -3.0}, RewardVector{1.0, -1.0}}};
    terminal_ = true;
    return StepResult{kTerminal[static_cast<std::size_t>(state_ - 1)][static_cast<std::size_t>(action)],
                      true};
  }

  bool terminal() const override { return terminal_; }

  int state_id() const override { return terminal_ ? state_count() : state_; }
  int state_count() const override { return 3; }

  vector_t observation() const override {
    vector_t v = vector_t::Zero(3);
    if (!terminal_) v(state_) = 1.0;
    return v;
  }
  int observation_size() const override { return 3; }

  std::unique_ptr<MomdpEnv> clone() const override { return std::make_unique<ChainMomdp>(*this); }

 private:
  int state_ = 0;
  bool terminal_ = false;
};

}  // namespace morl::envs
