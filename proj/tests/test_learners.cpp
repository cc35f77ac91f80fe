#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "morl/envs/chain.hpp"
#include "morl/learners/learner.hpp"
#include "morl/learners/train.hpp"
#include "morl/metrics.hpp"

#include <algorithm>
#include <map>

using namespace morl;
using namespace morl::learners;

namespace {

/// All four deterministic chain policies and their episode returns.
std::vector<RewardVector> chain_returns() {
  return {{5, -6}, {4, -3}, {2, -4}, {1, -2}};
}

/// Constrained-optimal return for a threshold on objective 0: best objective-1
/// return among policies meeting the threshold, max objective 0 if none does.
RewardVector brute_force_tlo(scalar_t threshold) {
  const auto all = chain_returns();
  const RewardVector* best = nullptr;
  for (const auto& r : all)
    if (r[0] >= threshold && (!best || r[1] > (*best)[1])) best = &r;
  if (best) return *best;
  for (const auto& r : all)
    if (!best || r[0] > (*best)[0]) best = &r;
  return *best;
}

/// Greedy episode return of a learner snapshot for one preference.
RewardVector rollout(const GeneralizedQ& q, const Preference& pref) {
  envs::ChainMomdp env;
  env.reset();
  vector_t total = vector_t::Zero(2);
  while (!env.terminal()) {
    const auto res = env.step(greedy_action(q, env.current_state(), pref));
    total += res.reward.values();
  }
  return RewardVector(total);
}

TabularGtloQ exact_chain_q() {
  // Consistent values for grid {1.5, 4.5}; see the evaluation-phase test for
  // the derivation.
  TabularGtloQ q(3, 2, PreferenceGrid{1.5, 4.5, 2});
  q.q0(0, 0) = 5;  q.q0(0, 1) = 2;
  q.q0(1, 0) = 5;  q.q0(1, 1) = 4;
  q.q0(2, 0) = 2;  q.q0(2, 1) = 1;
  q.q1(0, 0, 0) = -3;  q.q1(0, 1, 0) = -4;
  q.q1(1, 0, 0) = -4;  q.q1(1, 1, 0) = -1;
  q.q1(2, 0, 0) = -3;  q.q1(2, 1, 0) = -1;
  q.q1(0, 0, 1) = -6;  q.q1(0, 1, 1) = -4;
  q.q1(1, 0, 1) = -4;  q.q1(1, 1, 1) = -1;
  q.q1(2, 0, 1) = -3;  q.q1(2, 1, 1) = -1;
  return q;
}

}  // namespace

TEST_CASE("gtlo_target") {
  const TabularGtloQ q = exact_chain_q();
  Experience e;
  e.state = StateSample{0, vector_t::Zero(3)};
  e.action = 0;
  e.next_state = StateSample{1, vector_t::Zero(3)};
  e.reward = RewardVector{0, -2};
  e.terminal = false;
  e.preference = ThresholdPreference::from_constrained({1.5});

  // Objective 0 backs up the unconstrained max over both actions: 0 + 1*5.
  CHECK(gtlo_target(e, q, 0, 1.0) == 5.0);
  // Objective 1 backs up over the restricted set {a1} (TLO pick at s1).
  CHECK(gtlo_target(e, q, 1, 1.0) == -2.0 + 1.0 * -1.0);
  // Threshold 4.5 restricts to a0 at s1.
  e.preference = ThresholdPreference::from_constrained({4.5});
  CHECK(gtlo_target(e, q, 1, 1.0) == -2.0 + 1.0 * -4.0);
  // Discounting scales the bootstrap only.
  CHECK(gtlo_target(e, q, 1, 0.5) == -2.0 + 0.5 * -4.0);

  // Terminal transitions use the reward exactly: no bootstrap leakage.
  e.terminal = true;
  e.reward = RewardVector{5, -4};
  CHECK(gtlo_target(e, q, 0, 1.0) == 5.0);
  CHECK(gtlo_target(e, q, 1, 1.0) == -4.0);

  CHECK_THROWS_AS(gtlo_target(e, q, 2, 1.0), ContractViolation);
}

TEST_CASE("glinear_target") {
  TabularLinearQ q(3, 2, PreferenceGrid{0.0, 1.0, 3}, 1.0);
  q.q(1, 0, 1) = 2.0;
  q.q(1, 1, 1) = 0.5;
  Experience e;
  e.state = StateSample{0, vector_t::Zero(3)};
  e.action = 0;
  e.next_state = StateSample{1, vector_t::Zero(3)};
  e.reward = RewardVector{0, -2};
  e.terminal = false;
  e.preference = LinearWeight{0.5, 0.5};
  // Scalarized reward -1 plus the max over the phi=0.5 table row at s1.
  CHECK(glinear_target(e, q, LinearWeight{0.5, 0.5}, 1.0) == -1.0 + 2.0);
  CHECK(glinear_target(e, q, LinearWeight{0.5, 0.5}, 0.25) == -1.0 + 0.5);
  e.terminal = true;
  e.reward = RewardVector{4, -2};
  CHECK(glinear_target(e, q, LinearWeight{0.5, 0.5}, 1.0) == 1.0);
}

TEST_CASE("tabular_update step sizes") {
  Experience e;
  e.state = StateSample{0, vector_t::Zero(3)};
  e.action = 1;
  e.next_state = StateSample{1, vector_t::Zero(3)};
  e.reward = RewardVector{3, -1};
  e.terminal = true;
  e.preference = ThresholdPreference::from_constrained({1.5});

  TabularGtloQ q(3, 2, PreferenceGrid{1.5, 4.5, 2});
  tabular_update(e, q, 1.0);  // full step lands on the target
  CHECK(q.q0(0, 1) == 3.0);
  CHECK(q.q1(0, 1, 0) == -1.0);
  CHECK(q.q1(0, 1, 1) == 0.0);  // other bin untouched

  tabular_update(e, q, 0.0);  // zero step changes nothing
  CHECK(q.q0(0, 1) == 3.0);

  // Repeated fractional steps contract toward the target monotonically.
  TabularGtloQ q2(3, 2, PreferenceGrid{1.5, 4.5, 2});
  scalar_t prev_gap = 3.0;
  for (int k = 0; k < 20; ++k) {
    tabular_update(e, q2, 0.25);
    const scalar_t gap = std::abs(3.0 - q2.q0(0, 1));
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
}

TEST_CASE("act is greedy at eps 0 and uniform at eps 1") {
  const TabularGtloQ q = exact_chain_q();
  const Preference pref = ThresholdPreference::from_constrained({1.5});
  const StateSample s1{1, vector_t::Zero(3)};
  rng_t rng(3);
  for (int k = 0; k < 20; ++k) CHECK(act(q, s1, pref, 0.0, rng) == 1);

  std::map<int, int> counts;
  for (int k = 0; k < 2000; ++k) ++counts[act(q, s1, pref, 1.0, rng)];
  CHECK(counts.size() == 2);
  CHECK(counts[0] > 800);  // both actions drawn at comparable rates
  CHECK(counts[1] > 800);

  CHECK_THROWS_AS(act(q, s1, pref, 1.5, rng), ContractViolation);
}

TEST_CASE("replay sampling is seed-deterministic") {
  ReplayBuffer a(7), b(7), c(8);
  Experience e;
  e.state = StateSample{0, vector_t::Zero(1)};
  e.next_state = StateSample{1, vector_t::Zero(1)};
  e.reward = RewardVector{0, 0};
  for (int k = 0; k < 100; ++k) {
    a.push(e);
    b.push(e);
    c.push(e);
  }
  CHECK(a.sample_indices(32) == b.sample_indices(32));
  CHECK(a.sample_indices(32) == b.sample_indices(32));
  CHECK(a.sample_indices(32) != c.sample_indices(32));
  ReplayBuffer empty(1);
  CHECK_THROWS_AS(empty.sample_indices(1), ContractViolation);
}

TEST_CASE("TrainConfig validation and exploration schedule") {
  TrainConfig cfg;
  cfg.validate();

  TrainConfig bad = cfg;
  bad.batch_size = 0;
  bad.eps_end = 2.0;
  try {
    bad.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    const std::string what = err.what();
    CHECK(what.find("batch_size") != std::string::npos);
    CHECK(what.find("eps_end") != std::string::npos);
  }

  cfg.eps_start = 1.0;
  cfg.eps_end = 0.05;
  cfg.eps_decay_frac = 0.2;
  CHECK(cfg.epsilon(0, 1000) == 1.0);
  CHECK(cfg.epsilon(100, 1000) == doctest::Approx(0.525));
  CHECK(cfg.epsilon(200, 1000) == doctest::Approx(0.05));
  CHECK(cfg.epsilon(900, 1000) == doctest::Approx(0.05));
}

TEST_CASE("gTLO tabular learner converges to the constrained optimum per bin") {
  // The chain analogue of the brute-force acceptance check: every sampling
  // grid bin must reproduce the enumerated TLO-optimal return.
  envs::ChainMomdp env;
  TrainConfig cfg;
  cfg.grid = PreferenceGrid{0.5, 5.5, 6};
  cfg.total_steps = 20000;
  cfg.eval_period = 20000;
  cfg.warmup = 50;
  cfg.batches_per_step = 2;
  cfg.batch_size = 16;
  cfg.seed = 1;
  GtloTabularLearner learner(env.state_count(), env.action_count(), cfg.grid, cfg.gammas,
                             cfg.tabular_alpha, cfg.seed);
  train(env, learner, cfg, [](long, const GeneralizedQ&) {});

  for (scalar_t t : cfg.grid.values()) {
    const RewardVector expected = brute_force_tlo(t);
    const RewardVector got = rollout(learner.online(), learner.preference_from(t));
    CHECK(got == expected);
  }
}

TEST_CASE("gLinear tabular learner converges to the scalarized optimum per bin") {
  envs::ChainMomdp env;
  TrainConfig cfg;
  cfg.grid = PreferenceGrid{0.0, 1.0, 5};
  cfg.total_steps = 20000;
  cfg.eval_period = 20000;
  cfg.warmup = 50;
  cfg.batches_per_step = 2;
  cfg.batch_size = 16;
  cfg.seed = 3;
  LinearTabularLearner learner(env.state_count(), env.action_count(), cfg.grid, 1.0,
                               cfg.tabular_alpha, cfg.seed);
  train(env, learner, cfg, [](long, const GeneralizedQ&) {});

  for (scalar_t phi : cfg.grid.values()) {
    const LinearWeight w{1.0 - phi, phi};
    scalar_t best = -1e30;
    for (const auto& r : chain_returns()) best = std::max(best, scalarize_linear(r, w));
    const RewardVector got = rollout(learner.online(), learner.preference_from(phi));
    CHECK(scalarize_linear(got, w) == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("train fires the evaluation hook on schedule") {
  envs::ChainMomdp env;
  TrainConfig cfg;
  cfg.grid = PreferenceGrid{0.5, 5.5, 2};
  cfg.total_steps = 3000;
  cfg.eval_period = 1000;
  cfg.warmup = 50;
  cfg.batches_per_step = 1;
  cfg.batch_size = 8;
  GtloTabularLearner learner(env.state_count(), env.action_count(), cfg.grid, cfg.gammas,
                             cfg.tabular_alpha, cfg.seed);
  std::vector<long> fired;
  train(env, learner, cfg, [&](long step, const GeneralizedQ&) { fired.push_back(step); });
  CHECK(fired == std::vector<long>{0, 1000, 2000, 3000});
}

TEST_CASE("outer loop trains one learner per preference") {
  envs::ChainMomdp env;
  TrainConfig cfg;
  cfg.total_steps = 20000;
  cfg.eval_period = 5000;
  cfg.warmup = 50;
  cfg.batches_per_step = 2;
  cfg.batch_size = 16;
  const std::vector<scalar_t> prefs{0.5, 3.5, 4.5};
  std::vector<long> fired;
  const auto factory = [&](scalar_t pref) {
    return std::make_unique<GtloTabularLearner>(env.state_count(), env.action_count(),
                                                PreferenceGrid{pref, pref, 1}, cfg.gammas,
                                                cfg.tabular_alpha, cfg.seed);
  };
  const auto solutions = outer_loop_train(
      env, prefs, 5000, factory, cfg,
      [&](long step, const std::vector<std::unique_ptr<Learner>>&) { fired.push_back(step); });

  REQUIRE(solutions.size() == prefs.size());
  for (std::size_t k = 0; k < prefs.size(); ++k) {
    CHECK(solutions[k].preference == prefs[k]);
    CHECK(solutions[k].ret == brute_force_tlo(prefs[k]));
  }
  // Hooks fire on the global step axis across the sequence.
  CHECK(std::is_sorted(fired.begin(), fired.end()));
  CHECK(fired.back() == 15000);
}

TEST_CASE("learner checkpoints round trip") {
  envs::ChainMomdp env;
  const PreferenceGrid grid{1.5, 4.5, 2};
  GtloTabularLearner a(env.state_count(), env.action_count(), grid, {1.0, 1.0}, 0.5, 9);
  // A couple of updates to move the tables off zero.
  Experience e;
  e.state = StateSample{0, vector_t::Zero(3)};
  e.action = 0;
  e.next_state = StateSample{1, vector_t::Zero(3)};
  e.reward = RewardVector{2, -1};
  e.terminal = true;
  e.preference = ThresholdPreference::from_constrained({1.5});
  a.observe(e);
  a.update(4, 8);

  std::stringstream ss;
  a.save(ss);
  GtloTabularLearner b(env.state_count(), env.action_count(), grid, {1.0, 1.0}, 0.5, 10);
  b.load(ss);
  const StateSample s0{0, vector_t::Zero(3)};
  const Preference pref = ThresholdPreference::from_constrained({1.5});
  CHECK(a.online().qrow(s0, pref) == b.online().qrow(s0, pref));

  GtloTabularLearner wrong(env.state_count() + 2, env.action_count(), grid, {1.0, 1.0}, 0.5, 9);
  std::stringstream ss2;
  a.save(ss2);
  CHECK_THROWS_AS(wrong.load(ss2), ConfigError);
}
