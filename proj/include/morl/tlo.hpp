#pragma once

#include "morl/core.hpp"

#include <vector>

namespace morl {

/// Per-action multi-objective estimates for one state and preference:
/// row a holds Q(s,a)_0 .. Q(s,a)_{I-1}.
using QRow = matrix_t;

/// Action subset, kept sorted ascending.
using ActionSet = std::vector<int>;

/// Componentwise min(Q_i, t_i). The unconstrained last component passes
/// through (t_{I-1} = +inf).
QRow thresholded_q(const QRow& q, const ThresholdPreference& t);

/// Actions whose estimates strictly exceed every threshold up to objective i.
/// Comparisons against an infinite threshold are skipped, so the set at the
/// unconstrained level equals the set one level below.
ActionSet sufficient_set(const QRow& q, const ThresholdPreference& t, int i);

/// TLO action selection, set formulation. Ties break to the lowest index.
int tlo_select_sets(const QRow& q, const ThresholdPreference& t);

/// TLO action selection via the recursive superior-proposition over
/// thresholded values. Differential-testing oracle for tlo_select_sets.
int tlo_select_sup(const QRow& q, const ThresholdPreference& t);

/// Action set over which the TLO Bellman backup maximizes for objective i:
/// the sufficient set at level i-1 when non-empty, otherwise the singleton
/// TLO action. For i = 0 the backup is unconstrained (full action set).
ActionSet restricted_set(const QRow& q_next, const ThresholdPreference& t, int i);

}  // namespace morl
