#pragma once

#include "morl/types.hpp"

#include <cmath>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

namespace morl {

/// Thrown when an operation is called outside its contract.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Thrown for invalid configuration (bad keys, bad layouts, unknown ids).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-objective reward or return. Fixed arity I >= 2, all components finite,
/// immutable after construction.
class RewardVector {
 public:
  RewardVector() = default;

  explicit RewardVector(vector_t components) : v_(std::move(components)) {
    if (v_.size() < 2) throw ContractViolation("RewardVector: arity must be >= 2");
    if (!v_.allFinite()) throw ContractViolation("RewardVector: components must be finite");
  }

  RewardVector(std::initializer_list<scalar_t> components)
      : RewardVector(vector_t(Eigen::Map<const vector_t>(components.begin(),
                                                         static_cast<Eigen::Index>(components.size())))) {}

  int arity() const { return static_cast<int>(v_.size()); }
  scalar_t operator[](int i) const { return v_(i); }
  const vector_t& values() const { return v_; }

  RewardVector operator+(const RewardVector& other) const {
    if (other.arity() != arity()) throw ContractViolation("RewardVector: arity mismatch");
    return RewardVector(vector_t(v_ + other.v_));
  }

  bool operator==(const RewardVector& other) const { return v_ == other.v_; }

 private:
  vector_t v_;
};

/// Minimum acceptable expected return per objective. The last component is
/// +inf by construction (the unconstrained objective).
class ThresholdPreference {
 public:
  ThresholdPreference() = default;

  explicit ThresholdPreference(vector_t thresholds) : t_(std::move(thresholds)) {
    if (t_.size() < 2) throw ContractViolation("ThresholdPreference: arity must be >= 2");
    if (!std::isinf(t_(t_.size() - 1)) || t_(t_.size() - 1) < 0)
      throw ContractViolation("ThresholdPreference: last component must be +inf");
    for (Eigen::Index i = 0; i + 1 < t_.size(); ++i)
      if (std::isnan(t_(i)) || t_(i) == std::numeric_limits<scalar_t>::infinity())
        throw ContractViolation("ThresholdPreference: constrained components must not be +inf/NaN");
  }

  /// Builds the full vector from the I-1 constrained thresholds.
  static ThresholdPreference from_constrained(const vector_t& constrained) {
    vector_t t(constrained.size() + 1);
    t.head(constrained.size()) = constrained;
    t(constrained.size()) = std::numeric_limits<scalar_t>::infinity();
    return ThresholdPreference(std::move(t));
  }

  static ThresholdPreference from_constrained(std::initializer_list<scalar_t> constrained) {
    return from_constrained(vector_t(Eigen::Map<const vector_t>(
        constrained.begin(), static_cast<Eigen::Index>(constrained.size()))));
  }

  int arity() const { return static_cast<int>(t_.size()); }
  scalar_t operator[](int i) const { return t_(i); }
  const vector_t& values() const { return t_; }

 private:
  vector_t t_;
};

/// Non-negative weights summing to one (weighted-sum scalarization).
class LinearWeight {
 public:
  LinearWeight() = default;

  explicit LinearWeight(vector_t weights) : w_(std::move(weights)) {
    if (w_.size() < 2) throw ContractViolation("LinearWeight: arity must be >= 2");
    if ((w_.array() < 0).any()) throw ContractViolation("LinearWeight: weights must be >= 0");
    if (std::abs(w_.sum() - 1.0) > 1e-12) throw ContractViolation("LinearWeight: weights must sum to 1");
  }

  LinearWeight(std::initializer_list<scalar_t> weights)
      : LinearWeight(vector_t(Eigen::Map<const vector_t>(weights.begin(),
                                                         static_cast<Eigen::Index>(weights.size())))) {}

  int arity() const { return static_cast<int>(w_.size()); }
  scalar_t operator[](int i) const { return w_(i); }
  const vector_t& values() const { return w_; }

 private:
  vector_t w_;
};

/// The preference active when a transition was collected.
using Preference = std::variant<ThresholdPreference, LinearWeight>;

/// A state as handed to learners: an opaque integer id for tabular backends
/// plus a dense encoding for approximate backends.
struct StateSample {
  int id = -1;
  vector_t features;
};

/// Transition tuple, tagged with the preference at collection time.
struct Experience {
  StateSample state;
  int action = 0;
  StateSample next_state;
  RewardVector reward;
  bool terminal = false;
  Preference preference;
};

/// Pareto dominance: a dominates b iff a >= b componentwise and a != b.
inline bool dominates(const RewardVector& a, const RewardVector& b) {
  if (a.arity() != b.arity()) throw ContractViolation("dominates: arity mismatch");
  bool strict = false;
  for (int i = 0; i < a.arity(); ++i) {
    if (a[i] < b[i]) return false;
    if (a[i] > b[i]) strict = true;
  }
  return strict;
}

/// Returns the points not dominated by any other point, duplicates collapsed.
inline std::vector<RewardVector> pareto_filter(const std::vector<RewardVector>& points) {
  std::vector<RewardVector> out;
  for (const auto& p : points) {
    bool keep = true;
    for (const auto& q : points) {
      if (dominates(q, p)) {
        keep = false;
        break;
      }
    }
    if (!keep) continue;
    bool dup = false;
    for (const auto& r : out)
      if (r == p) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(p);
  }
  return out;
}

/// Weighted-sum scalarization.
inline scalar_t scalarize_linear(const RewardVector& r, const LinearWeight& w) {
  if (r.arity() != w.arity()) throw ContractViolation("scalarize_linear: arity mismatch");
  return r.values().dot(w.values());
}

}  // namespace morl
