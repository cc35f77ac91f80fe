#include "morl/learners/generalized_q.hpp"

namespace morl::learners {

int greedy_action(const GeneralizedQ& q, const StateSample& s, const Preference& pref) {
  const matrix_t row = q.qrow(s, pref);
  if (std::holds_alternative<ThresholdPreference>(pref) && q.objective_count() > 1)
    return tlo_select_sets(row, std::get<ThresholdPreference>(pref));
  int best = 0;
  for (int a = 1; a < row.rows(); ++a)
    if (row(a, 0) > row(best, 0)) best = a;
  return best;
}

TabularGtloQ::TabularGtloQ(int state_count, int action_count, PreferenceGrid grid,
                           std::vector<scalar_t> gammas)
    : states_(state_count + 1),  // one extra slot for the absorbing marker
      actions_(action_count),
      grid_(grid),
      gammas_(std::move(gammas)) {
  if (gammas_.size() != 2) throw ConfigError("tabular gTLO backend supports two objectives");
  q0_ = matrix_t::Zero(states_, actions_);
  n0_.setZero(states_, actions_);
  q1_.assign(static_cast<std::size_t>(grid_.count), matrix_t::Zero(states_, actions_));
  n1_.assign(static_cast<std::size_t>(grid_.count), n0_);
}

matrix_t TabularGtloQ::qrow(const StateSample& s, const Preference& pref) const {
  const auto& t = std::get<ThresholdPreference>(pref);
  if (t.arity() != 2) throw ContractViolation("tabular gTLO backend supports two objectives");
  if (s.id < 0 || s.id >= states_) throw ContractViolation("tabular qrow: state id out of range");
  const int bin = grid_.index_of(t[0]);
  matrix_t row(actions_, 2);
  row.col(0) = q0_.row(s.id).transpose();
  row.col(1) = q1_[static_cast<std::size_t>(bin)].row(s.id).transpose();
  return row;
}

TabularLinearQ::TabularLinearQ(int state_count, int action_count, PreferenceGrid phi_grid,
                               scalar_t gamma, scalar_t init)
    : states_(state_count + 1), actions_(action_count), grid_(phi_grid), gamma_(gamma) {
  q_.assign(static_cast<std::size_t>(grid_.count), matrix_t::Constant(states_, actions_, init));
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> zero;
  zero.setZero(states_, actions_);
  n_.assign(static_cast<std::size_t>(grid_.count), zero);
}

matrix_t TabularLinearQ::qrow(const StateSample& s, const Preference& pref) const {
  const auto& w = std::get<LinearWeight>(pref);
  if (s.id < 0 || s.id >= states_) throw ContractViolation("tabular qrow: state id out of range");
  return q_[static_cast<std::size_t>(bin_of(w))].row(s.id).transpose();
}

scalar_t gtlo_target(const Experience& exp, const GeneralizedQ& q_target, int i, scalar_t gamma_i) {
  if (i < 0 || i >= exp.reward.arity()) throw ContractViolation("gtlo_target: objective out of range");
  if (exp.terminal) return exp.reward[i];
  const auto& t = std::get<ThresholdPreference>(exp.preference);
  const matrix_t next = q_target.qrow(exp.next_state, exp.preference);
  const ActionSet restricted = restricted_set(next, t, i);
  scalar_t best = next(restricted.front(), i);
  for (int a : restricted) best = std::max(best, next(a, i));
  return exp.reward[i] + gamma_i * best;
}

scalar_t glinear_target(const Experience& exp, const GeneralizedQ& q_target, const LinearWeight& w,
                        scalar_t gamma) {
  const scalar_t r = scalarize_linear(exp.reward, w);
  if (exp.terminal) return r;
  const matrix_t next = q_target.qrow(exp.next_state, exp.preference);
  return r + gamma * next.col(0).maxCoeff();
}

void tabular_update(const Experience& exp, TabularGtloQ& q, scalar_t alpha) {
  const auto& t = std::get<ThresholdPreference>(exp.preference);
  const int bin = q.grid().index_of(t[0]);
  const int s = exp.state.id;
  const int a = exp.action;
  for (int i = 0; i < 2; ++i) {
    const scalar_t y = gtlo_target(exp, q, i, q.gammas()[static_cast<std::size_t>(i)]);
    scalar_t& cell = i == 0 ? q.q0(s, a) : q.q1(s, a, bin);
    cell += alpha * (y - cell);
  }
}

}  // namespace morl::learners
