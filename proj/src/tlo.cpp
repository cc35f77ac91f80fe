#include "morl/tlo.hpp"

#include <cmath>

namespace morl {

namespace {

void check_arity(const QRow& q, const ThresholdPreference& t) {
  if (q.cols() != t.arity()) throw ContractViolation("tlo: QRow/threshold arity mismatch");
  if (q.rows() < 1) throw ContractViolation("tlo: QRow must have at least one action");
}

int argmax_over(const QRow& q, int objective, const ActionSet& actions) {
  int best = actions.front();
  for (int a : actions)
    if (q(a, objective) > q(best, objective)) best = a;
  return best;
}

ActionSet all_actions(const QRow& q) {
  ActionSet out(static_cast<std::size_t>(q.rows()));
  for (int a = 0; a < q.rows(); ++a) out[static_cast<std::size_t>(a)] = a;
  return out;
}

}  // namespace

QRow thresholded_q(const QRow& q, const ThresholdPreference& t) {
  check_arity(q, t);
  QRow out = q;
  for (int i = 0; i < out.cols(); ++i)
    out.col(i) = out.col(i).array().min(t[i]);
  return out;
}

ActionSet sufficient_set(const QRow& q, const ThresholdPreference& t, int i) {
  check_arity(q, t);
  if (i < 0 || i >= t.arity()) throw ContractViolation("sufficient_set: objective index out of range");
  ActionSet out;
  for (int a = 0; a < q.rows(); ++a) {
    bool ok = true;
    for (int j = 0; j <= i; ++j) {
      if (std::isinf(t[j]) && t[j] > 0) continue;  // unconstrained level
      if (!(q(a, j) > t[j])) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(a);
  }
  return out;
}

int tlo_select_sets(const QRow& q, const ThresholdPreference& t) {
  check_arity(q, t);
  const int last = t.arity() - 1;
  if (sufficient_set(q, t, 0).empty()) return argmax_over(q, 0, all_actions(q));
  const ActionSet at_last = sufficient_set(q, t, last);
  if (!at_last.empty()) return argmax_over(q, last, at_last);
  int i = 0;
  for (int level = last - 1; level >= 0; --level) {
    if (!sufficient_set(q, t, level).empty()) {
      i = level;
      break;
    }
  }
  return argmax_over(q, i + 1, sufficient_set(q, t, i));
}

namespace {

bool sup(const QRow& qt, int a_star, int a, int i) {
  const int last = static_cast<int>(qt.cols()) - 1;
  if (qt(a_star, i) > qt(a, i)) return true;
  if (qt(a_star, i) == qt(a, i)) return i == last || sup(qt, a_star, a, i + 1);
  return false;
}

}  // namespace

int tlo_select_sup(const QRow& q, const ThresholdPreference& t) {
  check_arity(q, t);
  const QRow qt = thresholded_q(q, t);
  for (int a_star = 0; a_star < q.rows(); ++a_star) {
    bool superior = true;
    for (int a = 0; a < q.rows(); ++a) {
      if (a == a_star) continue;
      if (!sup(qt, a_star, a, 0)) {
        superior = false;
        break;
      }
    }
    if (superior) return a_star;
  }
  throw ContractViolation("tlo_select_sup: no superior action (unreachable)");
}

ActionSet restricted_set(const QRow& q_next, const ThresholdPreference& t, int i) {
  check_arity(q_next, t);
  if (i < 0 || i >= t.arity()) throw ContractViolation("restricted_set: objective index out of range");
  if (i == 0) return all_actions(q_next);
  ActionSet prev = sufficient_set(q_next, t, i - 1);
  if (!prev.empty()) return prev;
  return {tlo_select_sets(q_next, t)};
}

}  // namespace morl
