#pragma once

#include "morl/env.hpp"
#include "morl/envs/dst.hpp"
#include "morl/envs/surrogate.hpp"
#include "morl/learners/generalized_q.hpp"

#include <functional>
#include <vector>

namespace morl::metrics {

/// One greedy evaluation rollout: the sampled preference (grid scalar), the
/// forced context (0 for deterministic environments) and the episode return.
struct SolutionRecord {
  scalar_t preference = 0;
  int context = 0;
  RewardVector ret;
};

using SolutionSet = std::vector<SolutionRecord>;
using ParetoFront = std::vector<RewardVector>;

/// Exact 2-D hypervolume of the non-dominated subset that strictly dominates
/// the reference point, by staircase rectangle decomposition.
scalar_t hypervolume_2d(const std::vector<RewardVector>& points, const RewardVector& ref);

struct CoverageScores {
  scalar_t precision = 0;
  scalar_t recall = 0;
  scalar_t f1 = 0;
  bool precision_undefined = false;  // no solutions found
};

/// Set-semantics precision/recall/F1 of the found returns against a known
/// front. Duplicates collapse before counting; membership uses componentwise
/// tolerance `tol`.
CoverageScores coverage_scores(const SolutionSet& found, const ParetoFront& front,
                               scalar_t tol = 1e-9);

/// Minimal step count from the start cell to each column's treasure
/// (breadth-first search over water cells).
std::vector<int> dst_shortest_steps(const envs::DstConfig& cfg);

/// The exact Pareto front of a deep-sea treasure layout: non-dominated
/// (value, -steps) pairs over all treasures.
ParetoFront dst_pareto_oracle(const envs::DstConfig& cfg);

/// Brute-force per-context front of the surrogate environment: enumerates
/// every action sequence and filters the terminal returns.
ParetoFront surrogate_pareto_oracle(const envs::SurrogateConfig& cfg, int context);

struct EvalMetrics {
  scalar_t hypervolume = 0;
  scalar_t precision = 0;
  scalar_t recall = 0;
  scalar_t f1 = 0;
  int n_solutions = 0;
  bool precision_undefined = false;
};

struct EvalResult {
  SolutionSet solutions;
  EvalMetrics metrics;
};

/// Greedy rollout sweep over (preference, context): one episode per pair with
/// the context forced, returns accumulated undiscounted. Hypervolume and
/// coverage are probability-weighted means over contexts; `fronts` holds one
/// oracle front per context (empty to skip coverage).
EvalResult evaluation_phase(const learners::GeneralizedQ& q, const MomdpEnv& env,
                            const std::vector<scalar_t>& preference_grid,
                            const std::function<Preference(scalar_t)>& preference_from,
                            const RewardVector& ref, const std::vector<ParetoFront>& fronts,
                            scalar_t match_tol, std::uint64_t seed);

}  // namespace morl::metrics
