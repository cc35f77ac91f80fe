#include "morl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace morl::metrics {

scalar_t hypervolume_2d(const std::vector<RewardVector>& points, const RewardVector& ref) {
  if (ref.arity() != 2) throw ContractViolation("hypervolume_2d: reference arity must be 2");
  std::vector<RewardVector> eligible;
  for (const auto& p : points) {
    if (p.arity() != 2) throw ContractViolation("hypervolume_2d: point arity must be 2");
    if (p[0] > ref[0] && p[1] > ref[1]) eligible.push_back(p);
  }
  std::vector<RewardVector> front = pareto_filter(eligible);
  std::sort(front.begin(), front.end(),
            [](const RewardVector& a, const RewardVector& b) { return a[0] < b[0]; });
  scalar_t hv = 0;
  scalar_t x_prev = ref[0];
  for (const auto& p : front) {
    hv += (p[0] - x_prev) * (p[1] - ref[1]);
    x_prev = p[0];
  }
  return hv;
}

namespace {

bool close(const RewardVector& a, const RewardVector& b, scalar_t tol) {
  if (a.arity() != b.arity()) return false;
  for (int i = 0; i < a.arity(); ++i)
    if (std::abs(a[i] - b[i]) > tol) return false;
  return true;
}

std::vector<RewardVector> dedup(const std::vector<RewardVector>& points, scalar_t tol) {
  std::vector<RewardVector> out;
  for (const auto& p : points) {
    bool seen = false;
    for (const auto& q : out)
      if (close(p, q, tol)) {
        seen = true;
        break;
      }
    if (!seen) out.push_back(p);
  }
  return out;
}

}  // namespace

CoverageScores coverage_scores(const SolutionSet& found, const ParetoFront& front, scalar_t tol) {
  if (front.empty()) throw ContractViolation("coverage_scores: front must be non-empty");
  std::vector<RewardVector> returns;
  returns.reserve(found.size());
  for (const auto& rec : found) returns.push_back(rec.ret);
  const std::vector<RewardVector> distinct = dedup(returns, tol);

  CoverageScores scores;
  if (distinct.empty()) {
    scores.precision_undefined = true;
    return scores;
  }
  int hits = 0;
  for (const auto& s : distinct)
    for (const auto& p : front)
      if (close(s, p, tol)) {
        ++hits;
        break;
      }
  scores.precision = static_cast<scalar_t>(hits) / static_cast<scalar_t>(distinct.size());
  scores.recall = static_cast<scalar_t>(hits) / static_cast<scalar_t>(front.size());
  const scalar_t pr = scores.precision + scores.recall;
  scores.f1 = pr > 0 ? 2 * scores.precision * scores.recall / pr : 0;
  return scores;
}

std::vector<int> dst_shortest_steps(const envs::DstConfig& cfg) {
  cfg.validate();
  // Breadth-first search from the start cell over water cells; treasure cells
  // are terminal, so paths may not pass through them.
  const int cells = cfg.rows * cfg.columns;
  std::vector<int> dist(static_cast<std::size_t>(cells), -1);
  std::deque<std::pair<int, int>> frontier;  // (col, row)
  dist[0] = 0;
  if (!cfg.is_treasure(0, 0)) frontier.emplace_back(0, 0);
  const int dc[4] = {-1, 1, 0, 0};
  const int dr[4] = {0, 0, -1, 1};
  while (!frontier.empty()) {
    const auto [c, r] = frontier.front();
    frontier.pop_front();
    for (int k = 0; k < 4; ++k) {
      const int nc = c + dc[k];
      const int nr = r + dr[k];
      if (nc < 0 || nc >= cfg.columns || nr < 0 || nr >= cfg.rows) continue;
      if (cfg.is_seabed(nc, nr)) continue;
      const int idx = nr * cfg.columns + nc;
      if (dist[static_cast<std::size_t>(idx)] >= 0) continue;
      dist[static_cast<std::size_t>(idx)] = dist[static_cast<std::size_t>(r * cfg.columns + c)] + 1;
      if (!cfg.is_treasure(nc, nr)) frontier.emplace_back(nc, nr);
    }
  }
  std::vector<int> steps(static_cast<std::size_t>(cfg.columns));
  for (int c = 0; c < cfg.columns; ++c) {
    const int idx = cfg.treasure_depths[static_cast<std::size_t>(c)] * cfg.columns + c;
    const int d = dist[static_cast<std::size_t>(idx)];
    if (d < 0) throw ConfigError("dst oracle: treasure in column " + std::to_string(c) +
                                 " is unreachable");
    steps[static_cast<std::size_t>(c)] = d;
  }
  return steps;
}

ParetoFront dst_pareto_oracle(const envs::DstConfig& cfg) {
  const std::vector<int> steps = dst_shortest_steps(cfg);
  std::vector<RewardVector> candidates;
  candidates.reserve(static_cast<std::size_t>(cfg.columns));
  for (int c = 0; c < cfg.columns; ++c)
    candidates.push_back(RewardVector{cfg.treasure_values[static_cast<std::size_t>(c)],
                                      -static_cast<scalar_t>(steps[static_cast<std::size_t>(c)])});
  return pareto_filter(candidates);
}

ParetoFront surrogate_pareto_oracle(const envs::SurrogateConfig& cfg, int context) {
  cfg.validate();
  if (context < 0 || context >= cfg.context_bins)
    throw ContractViolation("surrogate oracle: context out of range");
  std::vector<int> actions(static_cast<std::size_t>(cfg.episode_length), 0);
  std::vector<RewardVector> returns;
  for (;;) {
    const RewardVector r = cfg.terminal_reward(context, actions);
    bool seen = false;
    for (const auto& q : returns)
      if (q == r) {
        seen = true;
        break;
      }
    if (!seen) returns.push_back(r);
    // Odometer increment over all action sequences.
    int pos = 0;
    while (pos < cfg.episode_length && ++actions[static_cast<std::size_t>(pos)] == cfg.action_levels) {
      actions[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == cfg.episode_length) break;
  }
  return pareto_filter(returns);
}

namespace {

RewardVector greedy_rollout(const learners::GeneralizedQ& q, MomdpEnv& env,
                            const Preference& pref) {
  env.reset();
  vector_t total = vector_t::Zero(env.objective_count());
  while (!env.terminal()) {
    const int a = learners::greedy_action(q, env.current_state(), pref);
    total += env.step(a).reward.values();
  }
  return RewardVector(std::move(total));
}

}  // namespace

EvalResult evaluation_phase(const learners::GeneralizedQ& q, const MomdpEnv& env,
                            const std::vector<scalar_t>& preference_grid,
                            const std::function<Preference(scalar_t)>& preference_from,
                            const RewardVector& ref, const std::vector<ParetoFront>& fronts,
                            scalar_t match_tol, std::uint64_t seed) {
  const int contexts = env.context_count();
  if (!fronts.empty() && static_cast<int>(fronts.size()) != contexts)
    throw ContractViolation("evaluation_phase: one oracle front per context required");
  const vector_t weights = env.context_probabilities();

  EvalResult result;
  scalar_t hv = 0, precision = 0, recall = 0, f1 = 0;
  bool any_undefined = false;
  std::vector<RewardVector> all_returns;

  for (int c = 0; c < contexts; ++c) {
    std::unique_ptr<MomdpEnv> rollout_env = env.clone();
    rollout_env->seed(seed + static_cast<std::uint64_t>(c));
    rollout_env->force_context(c);
    SolutionSet per_context;
    for (scalar_t v : preference_grid) {
      SolutionRecord rec;
      rec.preference = v;
      rec.context = c;
      rec.ret = greedy_rollout(q, *rollout_env, preference_from(v));
      per_context.push_back(rec);
      all_returns.push_back(rec.ret);
      result.solutions.push_back(std::move(rec));
    }
    std::vector<RewardVector> returns;
    returns.reserve(per_context.size());
    for (const auto& rec : per_context) returns.push_back(rec.ret);
    hv += weights(c) * hypervolume_2d(returns, ref);
    if (!fronts.empty()) {
      const CoverageScores s = coverage_scores(per_context, fronts[static_cast<std::size_t>(c)],
                                               match_tol);
      precision += weights(c) * s.precision;
      recall += weights(c) * s.recall;
      f1 += weights(c) * s.f1;
      any_undefined = any_undefined || s.precision_undefined;
    }
  }

  result.metrics.hypervolume = hv;
  result.metrics.precision = precision;
  result.metrics.recall = recall;
  result.metrics.f1 = f1;
  result.metrics.precision_undefined = any_undefined;
  result.metrics.n_solutions = static_cast<int>(dedup(all_returns, match_tol).size());
  return result;
}

}  // namespace morl::metrics
