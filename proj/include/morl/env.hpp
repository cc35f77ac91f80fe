#pragma once

#include "morl/core.hpp"

#include <cstdint>
#include <memory>

namespace morl {

enum class StateEncoding { OneHot, Coordinate, GridImage };

StateEncoding parse_encoding(const std::string& name);

struct StepResult {
  RewardVector reward;
  bool terminal = false;
};

/// Abstract finite-horizon MOMDP. One instance per worker; RNG is
/// instance-owned and seeded explicitly.
class MomdpEnv {
 public:
  virtual ~MomdpEnv() = default;

  virtual int action_count() const = 0;
  virtual int objective_count() const = 0;
  virtual int max_episode_steps() const = 0;

  virtual void seed(std::uint64_t s) = 0;
  virtual void reset() = 0;
  virtual StepResult step(int action) = 0;
  virtual bool terminal() const = 0;

  /// Tabular index of the current state, in [0, state_count()).
  virtual int state_id() const = 0;
  virtual int state_count() const = 0;

  /// Dense encoding of the current state for approximate backends.
  virtual vector_t observation() const = 0;
  virtual int observation_size() const = 0;

  /// Id used to mark the absorbing end-of-episode state in experiences.
  int absorbing_state_id() const { return state_count(); }

  StateSample current_state() const { return StateSample{state_id(), observation()}; }

  StateSample absorbing_state() const {
    return StateSample{absorbing_state_id(), vector_t::Zero(observation_size())};
  }

  // Stochastic-context hooks; deterministic environments have one context.
  virtual int context_count() const { return 1; }
  virtual vector_t context_probabilities() const { return vector_t::Ones(1); }
  virtual void force_context(int /*context*/) {}
  virtual void clear_forced_context() {}

  virtual std::unique_ptr<MomdpEnv> clone() const = 0;
};

}  // namespace morl
