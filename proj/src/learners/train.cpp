#include "morl/learners/train.hpp"

#include <algorithm>
#include <string>

namespace morl::learners {

void TrainConfig::validate() const {
  std::string bad;
  auto flag = [&](const char* key) {
    if (!bad.empty()) bad += ", ";
    bad += key;
  };
  if (gammas.empty() || std::any_of(gammas.begin(), gammas.end(),
                                    [](scalar_t g) { return g < 0 || g > 1; }))
    flag("gammas");
  if (learning_rate <= 0) flag("learning_rate");
  if (tabular_alpha <= 0) flag("tabular_alpha");
  if (batch_size < 1) flag("batch_size");
  if (batches_per_step < 1) flag("batches_per_step");
  if (target_sync < 1) flag("target_sync");
  if (warmup < 0) flag("warmup");
  if (eps_start < 0 || eps_start > 1) flag("eps_start");
  if (eps_end < 0 || eps_end > 1) flag("eps_end");
  if (eps_decay_frac <= 0 || eps_decay_frac > 1) flag("eps_decay_frac");
  if (grid.count < 1) flag("grid.count");
  if (total_steps < 0) flag("total_steps");
  if (eval_period < 1) flag("eval_period");
  if (grad_clip < 0) flag("grad_clip");
  if (!bad.empty()) throw ConfigError("invalid training config: " + bad);
}

scalar_t TrainConfig::epsilon(long step, long total) const {
  const long horizon = std::max<long>(1, static_cast<long>(eps_decay_frac * total));
  const scalar_t frac = std::min<scalar_t>(1.0, static_cast<scalar_t>(step) / horizon);
  return eps_start + frac * (eps_end - eps_start);
}

namespace {

void training_loop(MomdpEnv& env, Learner& learner, const TrainConfig& cfg, long total_steps,
                   rng_t& rng, const std::function<void(long)>& per_step) {
  const std::vector<scalar_t> grid_values = cfg.grid.values();
  std::uniform_int_distribution<std::size_t> pick(0, grid_values.size() - 1);
  Preference pref = learner.preference_from(grid_values[0]);
  bool start_episode = true;
  for (long step = 1; step <= total_steps; ++step) {
    if (start_episode || env.terminal()) {
      env.reset();
      pref = learner.preference_from(grid_values[pick(rng)]);
      start_episode = false;
    }
    const StateSample s = env.current_state();
    const int a = act(learner.online(), s, pref, cfg.epsilon(step, total_steps), rng);
    const StepResult res = env.step(a);
    learner.observe(Experience{s, a, res.terminal ? env.absorbing_state() : env.current_state(),
                               res.reward, res.terminal, pref});
    if (step > cfg.warmup) learner.update(cfg.batches_per_step, cfg.batch_size);
    if (step % cfg.target_sync == 0) learner.sync_target();
    if (per_step) per_step(step);
  }
}

}  // namespace

void train(MomdpEnv& env, Learner& learner, const TrainConfig& cfg, const EvalHook& hook) {
  cfg.validate();
  rng_t rng(cfg.seed);
  env.seed(cfg.seed ^ 0xc2b2ae3d27d4eb4full);
  if (hook) hook(0, learner.online());
  training_loop(env, learner, cfg, cfg.total_steps, rng, [&](long step) {
    if (hook && step % cfg.eval_period == 0) hook(step, learner.online());
  });
}

metrics::SolutionSet outer_loop_train(MomdpEnv& env, const std::vector<scalar_t>& preferences,
                                      long steps_per_preference, const LearnerFactory& factory,
                                      const TrainConfig& cfg, const OuterEvalHook& hook) {
  cfg.validate();
  std::vector<std::unique_ptr<Learner>> learners;
  learners.reserve(preferences.size());
  for (scalar_t p : preferences) learners.push_back(factory(p));

  if (hook) hook(0, learners);
  long global_step = 0;
  for (std::size_t k = 0; k < preferences.size(); ++k) {
    TrainConfig local = cfg;
    local.grid = PreferenceGrid{preferences[k], preferences[k], 1};
    local.total_steps = steps_per_preference;
    rng_t rng(cfg.seed + k);
    env.seed((cfg.seed + k) ^ 0xc2b2ae3d27d4eb4full);
    training_loop(env, *learners[k], local, steps_per_preference, rng, [&](long) {
      ++global_step;
      if (hook && global_step % cfg.eval_period == 0) hook(global_step, learners);
    });
  }

  metrics::SolutionSet solutions;
  for (std::size_t k = 0; k < preferences.size(); ++k) {
    const Preference pref = learners[k]->preference_from(preferences[k]);
    for (int c = 0; c < env.context_count(); ++c) {
      std::unique_ptr<MomdpEnv> rollout_env = env.clone();
      rollout_env->seed(cfg.seed ^ 0x9e3779b97f4a7c15ull);
      rollout_env->force_context(c);
      rollout_env->reset();
      vector_t total = vector_t::Zero(rollout_env->objective_count());
      while (!rollout_env->terminal()) {
        const int a = greedy_action(learners[k]->online(), rollout_env->current_state(), pref);
        total += rollout_env->step(a).reward.values();
      }
      solutions.push_back({preferences[k], c, RewardVector(std::move(total))});
    }
  }
  return solutions;
}

}  // namespace morl::learners
