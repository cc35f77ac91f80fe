#pragma once

#include "morl/core.hpp"
#include "morl/tlo.hpp"

#include <cmath>
#include <memory>
#include <vector>

namespace morl::learners {

/// Equidistant preference sampling grid on [lo, hi].
struct PreferenceGrid {
  scalar_t lo = 0.5;
  scalar_t hi = 100.0;
  int count = 100;

  std::vector<scalar_t> values() const {
    if (count < 1) throw ConfigError("preference grid: count must be >= 1");
    std::vector<scalar_t> v(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
      v[static_cast<std::size_t>(k)] =
          count == 1 ? lo : lo + (hi - lo) * static_cast<scalar_t>(k) / (count - 1);
    return v;
  }

  /// Index of an on-grid value; off-grid values violate the contract.
  int index_of(scalar_t value) const {
    if (count == 1) {
      if (std::abs(value - lo) > 1e-9) throw ContractViolation("preference off-grid");
      return 0;
    }
    const scalar_t step = (hi - lo) / (count - 1);
    const int k = static_cast<int>(std::lround((value - lo) / step));
    if (k < 0 || k >= count || std::abs(lo + k * step - value) > 1e-9)
      throw ContractViolation("preference off-grid");
    return k;
  }
};

/// Preference-conditioned multi-objective action-value function.
/// qrow(s, t)_i depends only on thresholds with index < i.
class GeneralizedQ {
 public:
  virtual ~GeneralizedQ() = default;

  virtual int action_count() const = 0;
  virtual int objective_count() const = 0;

  /// Per-action estimates (action_count x objective_count) for one state and
  /// preference.
  virtual matrix_t qrow(const StateSample& s, const Preference& pref) const = 0;

  virtual std::unique_ptr<GeneralizedQ> clone() const = 0;
};

/// Greedy action for a preference: TLO selection under thresholds, argmax of
/// the scalar estimate under linear weights.
int greedy_action(const GeneralizedQ& q, const StateSample& s, const Preference& pref);

/// Exact tabular backend of the generalized TLO Q-function for two
/// objectives. Head 0 is a plain (state, action) table shared by every
/// preference; head 1 holds one (state, action) table per threshold bin of
/// the sampling grid.
class TabularGtloQ final : public GeneralizedQ {
 public:
  TabularGtloQ(int state_count, int action_count, PreferenceGrid grid,
               std::vector<scalar_t> gammas = {1.0, 1.0});

  int action_count() const override { return actions_; }
  int objective_count() const override { return 2; }

  matrix_t qrow(const StateSample& s, const Preference& pref) const override;
  std::unique_ptr<GeneralizedQ> clone() const override { return std::make_unique<TabularGtloQ>(*this); }

  const PreferenceGrid& grid() const { return grid_; }
  const std::vector<scalar_t>& gammas() const { return gammas_; }
  /// Table rows, including the trailing absorbing-marker slot.
  int state_count() const { return states_; }

  scalar_t& q0(int s, int a) { return q0_(s, a); }
  scalar_t& q1(int s, int a, int bin) { return q1_[static_cast<std::size_t>(bin)](s, a); }
  scalar_t q0(int s, int a) const { return q0_(s, a); }
  scalar_t q1(int s, int a, int bin) const { return q1_[static_cast<std::size_t>(bin)](s, a); }

  /// Number of updates applied to a cell so far (for 1/sqrt decay).
  long visits(int s, int a, int bin, int objective) const {
    return objective == 0 ? n0_(s, a)
                          : static_cast<long>(n1_[static_cast<std::size_t>(bin)](s, a));
  }
  void count_visit(int s, int a, int bin, int objective) {
    if (objective == 0)
      ++n0_(s, a);
    else
      ++n1_[static_cast<std::size_t>(bin)](s, a);
  }

 private:
  int states_;
  int actions_;
  PreferenceGrid grid_;
  std::vector<scalar_t> gammas_;
  matrix_t q0_;
  std::vector<matrix_t> q1_;  // per threshold bin
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> n0_;
  std::vector<Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>> n1_;
};

/// Tabular scalar backend for generalized linear scalarization: one
/// (state, action) table of expected scalarized returns per weight bin.
class TabularLinearQ final : public GeneralizedQ {
 public:
  /// `init` optimistically initializes every cell (drives systematic
  /// exploration under the greedy policy).
  TabularLinearQ(int state_count, int action_count, PreferenceGrid phi_grid, scalar_t gamma,
                 scalar_t init = 0.0);

  int action_count() const override { return actions_; }
  int objective_count() const override { return 1; }

  matrix_t qrow(const StateSample& s, const Preference& pref) const override;
  std::unique_ptr<GeneralizedQ> clone() const override {
    return std::make_unique<TabularLinearQ>(*this);
  }

  const PreferenceGrid& grid() const { return grid_; }
  scalar_t gamma() const { return gamma_; }
  /// Table rows, including the trailing absorbing-marker slot.
  int state_count() const { return states_; }

  /// Grid index of a weight (keyed on the second component phi = w_1).
  int bin_of(const LinearWeight& w) const { return grid_.index_of(w[1]); }

  scalar_t& q(int s, int a, int bin) { return q_[static_cast<std::size_t>(bin)](s, a); }
  scalar_t q(int s, int a, int bin) const { return q_[static_cast<std::size_t>(bin)](s, a); }
  long visits(int s, int a, int bin) const {
    return static_cast<long>(n_[static_cast<std::size_t>(bin)](s, a));
  }
  void count_visit(int s, int a, int bin) { ++n_[static_cast<std::size_t>(bin)](s, a); }

 private:
  int states_;
  int actions_;
  PreferenceGrid grid_;
  scalar_t gamma_;
  std::vector<matrix_t> q_;
  std::vector<Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>> n_;
};

/// gTLO training target for one experience and objective i: the reward alone
/// on terminal transitions, otherwise bootstrapped over the restricted set.
scalar_t gtlo_target(const Experience& exp, const GeneralizedQ& q_target, int i, scalar_t gamma_i);

/// ESR target for generalized linear scalarization.
scalar_t glinear_target(const Experience& exp, const GeneralizedQ& q_target, const LinearWeight& w,
                        scalar_t gamma);

/// Applies the TLO temporal-difference update for every objective to the
/// tabular backend with a fixed step size.
void tabular_update(const Experience& exp, TabularGtloQ& q, scalar_t alpha);

}  // namespace morl::learners
