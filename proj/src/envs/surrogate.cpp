#include "morl/envs/surrogate.hpp"

#include <cmath>
#include <numeric>

namespace morl::envs {

void SurrogateConfig::validate() const {
  if (episode_length < 1) throw ConfigError("surrogate: episode_length must be positive");
  if (action_levels < 2) throw ConfigError("surrogate: need at least two action levels");
  if (context_bins < 1) throw ConfigError("surrogate: context_bins must be positive");
  if (!(context_scale > 0)) throw ConfigError("surrogate: context_scale must be positive");
  if (obs_noise_sigma < 0) throw ConfigError("surrogate: obs_noise_sigma must be >= 0");
}

vector_t SurrogateConfig::bin_masses() const {
  // Simpson integration of the beta(alpha, beta) density over equal bins of
  // [0,1]; rescaling the support does not change the masses.
  const scalar_t norm = std::beta(beta_alpha, beta_beta);
  auto pdf = [&](scalar_t x) {
    if (x <= 0.0 || x >= 1.0) return scalar_t(0);
    return std::pow(x, beta_alpha - 1) * std::pow(1 - x, beta_beta - 1) / norm;
  };
  vector_t masses(context_bins);
  const int n = 2000;  // even
  for (int k = 0; k < context_bins; ++k) {
    const scalar_t lo = static_cast<scalar_t>(k) / context_bins;
    const scalar_t hi = static_cast<scalar_t>(k + 1) / context_bins;
    const scalar_t h = (hi - lo) / n;
    scalar_t s = pdf(lo) + pdf(hi);
    for (int j = 1; j < n; ++j) s += pdf(lo + j * h) * (j % 2 ? 4.0 : 2.0);
    masses(k) = s * h / 3.0;
  }
  masses /= masses.sum();
  return masses;
}

RewardVector SurrogateConfig::terminal_reward(int context, const std::vector<int>& actions) const {
  if (context < 0 || context >= context_bins) throw ContractViolation("surrogate: context out of range");
  if (static_cast<int>(actions.size()) != episode_length)
    throw ContractViolation("surrogate: action sequence length mismatch");
  int sum = 0;
  for (int a : actions) {
    if (a < 0 || a >= action_levels) throw ContractViolation("surrogate: action out of range");
    sum += a;
  }
  const scalar_t m =
      static_cast<scalar_t>(sum) / (static_cast<scalar_t>(episode_length) * (action_levels - 1));
  const scalar_t theta = (context + 0.5) / context_bins;
  const scalar_t p = 1.5 + 2.0 * theta;
  return RewardVector{std::pow(m, p), 1.0 - m};
}

SurrogateEnv::SurrogateEnv(SurrogateConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  masses_ = cfg_.bin_masses();
  reset();
}

void SurrogateEnv::force_context(int context) {
  if (context < 0 || context >= cfg_.context_bins)
    throw ContractViolation("surrogate: forced context out of range");
  forced_context_ = context;
}

void SurrogateEnv::reset() {
  if (forced_context_ >= 0) {
    context_ = forced_context_;
  } else {
    const vector_t& masses = masses_;
    std::uniform_real_distribution<scalar_t> u(0.0, 1.0);
    const scalar_t x = u(rng_);
    scalar_t acc = 0.0;
    context_ = cfg_.context_bins - 1;
    for (int k = 0; k < cfg_.context_bins; ++k) {
      acc += masses(k);
      if (x < acc) {
        context_ = k;
        break;
      }
    }
  }
  std::normal_distribution<scalar_t> noise(0.0, cfg_.obs_noise_sigma);
  observed_context_ = std::clamp(cfg_.bin_center(context_) + noise(rng_), scalar_t(0),
                                 cfg_.context_scale);
  observed_bin_ = std::min(cfg_.context_bins - 1,
                           static_cast<int>(observed_context_ / cfg_.context_scale * cfg_.context_bins));
  history_.clear();
  terminal_ = false;
}

StepResult SurrogateEnv::step(int action) {
  if (terminal_) throw ContractViolation("surrogate: step on terminal state");
  if (action < 0 || action >= cfg_.action_levels)
    throw ContractViolation("surrogate: action index out of range");
  history_.push_back(action);
  if (static_cast<int>(history_.size()) == cfg_.episode_length) {
    terminal_ = true;
    return StepResult{cfg_.terminal_reward(context_, history_), true};
  }
  return StepResult{RewardVector{0.0, 0.0}, false};
}

int SurrogateEnv::state_id() const {
  // Tabular index over (step, sum of levels so far, observed context bin).
  // The terminal reward depends on the history only through its sum, so the
  // running sum is a sufficient statistic for the tabular backend.
  if (terminal_) return state_count();  // absorbing marker
  const int step = static_cast<int>(history_.size());
  if (step == 0) return 0;
  int base = 1;
  for (int k = 1; k < step; ++k) base += cfg_.context_bins * ((cfg_.action_levels - 1) * k + 1);
  const int sums = (cfg_.action_levels - 1) * step + 1;
  const int sum = std::accumulate(history_.begin(), history_.end(), 0);
  return base + observed_bin_ * sums + sum;
}

int SurrogateEnv::state_count() const {
  int n = 1;
  for (int k = 1; k < cfg_.episode_length; ++k)
    n += cfg_.context_bins * ((cfg_.action_levels - 1) * k + 1);
  return n;
}

vector_t SurrogateEnv::observation() const {
  // One-hot per-step action history, normalized step index, and the noisy
  // context observable (zero before the first decision is made).
  vector_t v = vector_t::Zero(observation_size());
  for (std::size_t k = 0; k < history_.size(); ++k)
    v(static_cast<Eigen::Index>(k) * cfg_.action_levels + history_[k]) = 1.0;
  const int step = static_cast<int>(history_.size());
  v(cfg_.episode_length * cfg_.action_levels) =
      static_cast<scalar_t>(step) / cfg_.episode_length;
  v(cfg_.episode_length * cfg_.action_levels + 1) =
      step >= 1 ? observed_context_ / cfg_.context_scale : 0.0;
  return v;
}

int SurrogateEnv::observation_size() const {
  return cfg_.episode_length * cfg_.action_levels + 2;
}

std::unique_ptr<MomdpEnv> SurrogateEnv::clone() const {
  return std::make_unique<SurrogateEnv>(*this);
}

}  // namespace morl::envs
