#pragma once

#include "morl/env.hpp"

#include <string>
#include <vector>

namespace morl::envs {

/// Deep-sea treasure grid layout. Columns hold exactly one treasure each;
/// cells below a treasure are seabed and block movement.
struct DstConfig {
  int columns = 10;
  int rows = 11;
  std::vector<int> treasure_depths;        // per-column row index of the treasure
  std::vector<scalar_t> treasure_values;   // per-column value, strictly increasing
  int max_steps = 50;
  scalar_t timeout_treasure_reward = 0.0;

  /// The classic non-convex layout.
  static DstConfig classic();

  void validate() const;

  bool is_treasure(int col, int row) const { return row == treasure_depths[static_cast<std::size_t>(col)]; }
  bool is_seabed(int col, int row) const { return row > treasure_depths[static_cast<std::size_t>(col)]; }
};

/// Loads a layout from a plain-text grid file: a `values:` header line, then
/// one row per line with `.` water, `#` seabed and digit / `T<k>` treasure
/// markers indexing the value table.
DstConfig load_dst_layout(const std::string& path);

struct DstState {
  int col = 0;
  int row = 0;
  int steps = 0;
};

/// Deep-sea treasure environment. Actions: 0 left, 1 right, 2 up, 3 down.
/// Objective 0 is the treasure value (terminal only), objective 1 the step
/// cost of -1 per move.
class DeepSeaTreasure final : public MomdpEnv {
 public:
  explicit DeepSeaTreasure(DstConfig cfg = DstConfig::classic(),
                           StateEncoding encoding = StateEncoding::OneHot);

  int action_count() const override { return 4; }
  int objective_count() const override { return 2; }
  int max_episode_steps() const override { return cfg_.max_steps; }

  void seed(std::uint64_t) override {}  // deterministic environment
  void reset() override;
  StepResult step(int action) override;
  bool terminal() const override { return terminal_; }

  int state_id() const override { return state_.row * cfg_.columns + state_.col; }
  int state_count() const override { return cfg_.rows * cfg_.columns; }

  vector_t observation() const override;
  int observation_size() const override;

  std::unique_ptr<MomdpEnv> clone() const override;

  const DstConfig& config() const { return cfg_; }
  const DstState& state() const { return state_; }

  /// Test and oracle hook: place the submarine on a given non-terminal cell.
  void set_state(const DstState& s);

 private:
  DstConfig cfg_;
  StateEncoding encoding_;
  DstState state_;
  bool terminal_ = true;
};

}  // namespace morl::envs
