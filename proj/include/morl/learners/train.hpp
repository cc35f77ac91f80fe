#pragma once

#include "morl/env.hpp"
#include "morl/learners/learner.hpp"
#include "morl/metrics.hpp"

#include <functional>

namespace morl::learners {

/// Episode-loop schedule and optimizer settings shared by all learners.
struct TrainConfig {
  std::vector<scalar_t> gammas{1.0, 1.0};
  scalar_t learning_rate = 1e-3;  // network backends
  scalar_t tabular_alpha = 0.1;   // base step size, decays as 1/sqrt(visits)
  int batch_size = 32;
  int batches_per_step = 8;
  long target_sync = 5000;
  long warmup = 1000;
  scalar_t eps_start = 1.0;
  scalar_t eps_end = 0.05;
  scalar_t eps_decay_frac = 0.2;  // fraction of total steps spent annealing
  PreferenceGrid grid;
  long total_steps = 250000;
  long eval_period = 1000;
  std::uint64_t seed = 0;
  scalar_t grad_clip = 10.0;
  MlpSpec mlp;

  void validate() const;

  /// Linearly annealed exploration rate at a given step of a run.
  scalar_t epsilon(long step, long total) const;
};

using EvalHook = std::function<void(long step, const GeneralizedQ& q)>;

/// Runs the generalized training protocol: one preference drawn uniformly
/// from the grid per episode, epsilon-greedy acting, replay updates after the
/// warm-up, periodic target sync, and the evaluation hook at step 0 and every
/// eval_period steps.
void train(MomdpEnv& env, Learner& learner, const TrainConfig& cfg, const EvalHook& hook);

using LearnerFactory = std::function<std::unique_ptr<Learner>(scalar_t preference)>;
using OuterEvalHook =
    std::function<void(long global_step, const std::vector<std::unique_ptr<Learner>>& learners)>;

/// Outer-loop baseline: one independent single-preference learner per listed
/// preference, trained sequentially with a local exploration schedule. The
/// hook fires on global environment steps across the whole sequence. Returns
/// the union of final greedy episode returns, one per (preference, context).
metrics::SolutionSet outer_loop_train(MomdpEnv& env, const std::vector<scalar_t>& preferences,
                                      long steps_per_preference, const LearnerFactory& factory,
                                      const TrainConfig& cfg, const OuterEvalHook& hook);

}  // namespace morl::learners
