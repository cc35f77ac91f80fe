#include "morl/learners/learner.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace morl::learners {

int act(const GeneralizedQ& q, const StateSample& s, const Preference& pref, scalar_t eps,
        rng_t& rng) {
  if (eps < 0 || eps > 1) throw ContractViolation("act: eps must be in [0,1]");
  if (eps > 0) {
    std::uniform_real_distribution<scalar_t> coin(0.0, 1.0);
    if (coin(rng) < eps) {
      std::uniform_int_distribution<int> pick(0, q.action_count() - 1);
      return pick(rng);
    }
  }
  return greedy_action(q, s, pref);
}

// ---------------------------------------------------------------------------
// Tabular gTLO

GtloTabularLearner::GtloTabularLearner(int state_count, int action_count, PreferenceGrid grid,
                                       std::vector<scalar_t> gammas, scalar_t alpha,
                                       std::uint64_t seed, bool decay_alpha)
    : q_(state_count, action_count, grid, std::move(gammas)),
      replay_(seed),
      alpha_(alpha),
      decay_alpha_(decay_alpha),
      grid_values_(grid.values()),
      relabel_rng_(seed ^ 0x94d049bb133111ebull) {}

void GtloTabularLearner::update_one(const Experience& exp) {
  const auto& t = std::get<ThresholdPreference>(exp.preference);
  const int bin = q_.grid().index_of(t[0]);
  const int s = exp.state.id;
  const int a = exp.action;
  for (int i = 0; i < 2; ++i) {
    const scalar_t y = gtlo_target(exp, q_, i, q_.gammas()[static_cast<std::size_t>(i)]);
    const scalar_t alpha =
        decay_alpha_ ? alpha_ / std::sqrt(static_cast<scalar_t>(1 + q_.visits(s, a, bin, i)))
                     : alpha_;
    scalar_t& cell = i == 0 ? q_.q0(s, a) : q_.q1(s, a, bin);
    cell += alpha * (y - cell);
    q_.count_visit(s, a, bin, i);
  }
}

void GtloTabularLearner::update(int batches, int batch_size) {
  std::uniform_int_distribution<std::size_t> pick(0, grid_values_.size() - 1);
  for (int b = 0; b < batches; ++b)
    for (std::size_t i : replay_.sample_indices(batch_size)) {
      update_one(replay_[i]);
      Experience relabeled = replay_[i];
      relabeled.preference = ThresholdPreference::from_constrained({grid_values_[pick(relabel_rng_)]});
      update_one(relabeled);
    }
}

// ---------------------------------------------------------------------------
// Network gTLO

matrix_t NetworkGtloQ::qrow(const StateSample& s, const Preference& pref) const {
  const auto& t = std::get<ThresholdPreference>(pref);
  matrix_t X = s.features;
  matrix_t T(net_.threshold_inputs(), 1);
  for (int j = 0; j < net_.threshold_inputs(); ++j) T(j, 0) = normalize(t[j]);
  const auto out = net_.forward(X, T);
  matrix_t row(net_.action_count(), net_.objective_count());
  for (int i = 0; i < net_.objective_count(); ++i) row.col(i) = out[static_cast<std::size_t>(i)];
  return row;
}

GtloNetworkLearner::GtloNetworkLearner(int obs_dim, int action_count, int objective_count,
                                       PreferenceGrid grid, MlpSpec spec,
                                       std::vector<scalar_t> gammas, scalar_t lr,
                                       scalar_t grad_clip, std::uint64_t seed)
    : online_([&] {
        rng_t init_rng(seed);
        return NetworkGtloQ(
            MultiHeadNet(obs_dim, action_count, objective_count, objective_count - 1,
                         std::move(spec), init_rng),
            grid);
      }()),
      target_(online_),
      replay_(seed ^ 0x9e3779b97f4a7c15ull),
      gammas_(std::move(gammas)),
      lr_(lr),
      grad_clip_(grad_clip),
      grid_values_(grid.values()),
      relabel_rng_(seed ^ 0x94d049bb133111ebull) {}

LossGrads gtlo_loss(const std::vector<Experience>& batch, NetworkGtloQ& online,
                    const NetworkGtloQ& target, const std::vector<scalar_t>& gammas) {
  if (batch.empty()) throw ContractViolation("gtlo_loss: empty batch");
  const auto& net = online.net();
  const int B = static_cast<int>(batch.size());
  const int I = net.objective_count();
  const int A = net.action_count();

  matrix_t X(net.input_dim(), B), Xn(net.input_dim(), B);
  matrix_t T(net.threshold_inputs(), B);
  for (int k = 0; k < B; ++k) {
    const Experience& e = batch[static_cast<std::size_t>(k)];
    X.col(k) = e.state.features;
    Xn.col(k) = e.next_state.features;
    const auto& t = std::get<ThresholdPreference>(e.preference);
    for (int j = 0; j < net.threshold_inputs(); ++j) T(j, k) = online.normalize(t[j]);
  }

  // Targets from the frozen parameters.
  const auto next_q = target.net().forward(Xn, T);
  matrix_t y(I, B);
  for (int k = 0; k < B; ++k) {
    const Experience& e = batch[static_cast<std::size_t>(k)];
    if (e.terminal) {
      for (int i = 0; i < I; ++i) y(i, k) = e.reward[i];
      continue;
    }
    QRow row(A, I);
    for (int i = 0; i < I; ++i) row.col(i) = next_q[static_cast<std::size_t>(i)].col(k);
    const auto& t = std::get<ThresholdPreference>(e.preference);
    for (int i = 0; i < I; ++i) {
      const ActionSet restricted = restricted_set(row, t, i);
      scalar_t best = row(restricted.front(), i);
      for (int a : restricted) best = std::max(best, row(a, i));
      y(i, k) = e.reward[i] + gammas[static_cast<std::size_t>(i)] * best;
    }
  }

  MultiHeadNet::Cache cache;
  const auto q = net.forward(X, T, &cache);

  LossGrads out;
  std::vector<matrix_t> dQ(static_cast<std::size_t>(I), matrix_t::Zero(A, B));
  for (int k = 0; k < B; ++k) {
    const int a = batch[static_cast<std::size_t>(k)].action;
    for (int i = 0; i < I; ++i) {
      const scalar_t res = y(i, k) - q[static_cast<std::size_t>(i)](a, k);
      out.loss += huber(res);
      dQ[static_cast<std::size_t>(i)](a, k) = -huber_grad(res) / B;
    }
  }
  out.loss /= B;
  out.grads = net.backward(cache, dQ);
  return out;
}

void GtloNetworkLearner::update(int batches, int batch_size) {
  std::uniform_int_distribution<std::size_t> pick(0, grid_values_.size() - 1);
  std::uniform_real_distribution<scalar_t> coin(0.0, 1.0);
  for (int b = 0; b < batches; ++b) {
    std::vector<Experience> batch;
    batch.reserve(static_cast<std::size_t>(batch_size));
    for (std::size_t i : replay_.sample_indices(batch_size)) {
      batch.push_back(replay_[i]);
      if (coin(relabel_rng_) < 0.5)
        batch.back().preference =
            ThresholdPreference::from_constrained({grid_values_[pick(relabel_rng_)]});
    }
    LossGrads lg = gtlo_loss(batch, online_, target_, gammas_);
    if (!std::isfinite(lg.loss))
      throw TrainingDivergence("gTLO network training diverged (non-finite loss)");
    online_.net().sgd_step(std::move(lg.grads), lr_, grad_clip_);
  }
}

void GtloNetworkLearner::save(std::ostream& out) const {
  out << "gtlo-network\n";
  online_.net().save(out);
}

void GtloNetworkLearner::load(std::istream& in) {
  std::string tag;
  std::getline(in, tag);
  if (tag != "gtlo-network") throw ConfigError("checkpoint: expected gtlo-network, got " + tag);
  online_.net().load(in);
  target_ = online_;
}

// ---------------------------------------------------------------------------
// Tabular gLinear

LinearTabularLearner::LinearTabularLearner(int state_count, int action_count,
                                           PreferenceGrid phi_grid, scalar_t gamma, scalar_t alpha,
                                           std::uint64_t seed, scalar_t optimistic_init,
                                           bool decay_alpha)
    : q_(state_count, action_count, phi_grid, gamma, optimistic_init),
      replay_(seed),
      alpha_(alpha),
      decay_alpha_(decay_alpha),
      grid_values_(phi_grid.values()),
      relabel_rng_(seed ^ 0x94d049bb133111ebull) {}

void LinearTabularLearner::update_one(const Experience& exp) {
  const auto& w = std::get<LinearWeight>(exp.preference);
  const int bin = q_.bin_of(w);
  const int s = exp.state.id;
  const int a = exp.action;
  const scalar_t y = glinear_target(exp, q_, w, q_.gamma());
  const scalar_t alpha =
      decay_alpha_ ? alpha_ / std::sqrt(static_cast<scalar_t>(1 + q_.visits(s, a, bin))) : alpha_;
  scalar_t& cell = q_.q(s, a, bin);
  cell += alpha * (y - cell);
  q_.count_visit(s, a, bin);
}

void LinearTabularLearner::update(int batches, int batch_size) {
  std::uniform_int_distribution<std::size_t> pick(0, grid_values_.size() - 1);
  for (int b = 0; b < batches; ++b)
    for (std::size_t idx : replay_.sample_indices(batch_size)) {
      update_one(replay_[idx]);
      Experience relabeled = replay_[idx];
      const scalar_t phi = grid_values_[pick(relabel_rng_)];
      relabeled.preference = LinearWeight{1.0 - phi, phi};
      update_one(relabeled);
    }
}

// ---------------------------------------------------------------------------
// Network gLinear

matrix_t NetworkLinearQ::qrow(const StateSample& s, const Preference& pref) const {
  const auto& w = std::get<LinearWeight>(pref);
  matrix_t X(s.features.size() + 1, 1);
  X.topRows(s.features.size()) = s.features;
  X(s.features.size(), 0) = w[1];  // phi
  return net_.forward(X, matrix_t(0, 1)).front();
}

LinearNetworkLearner::LinearNetworkLearner(int obs_dim, int action_count, MlpSpec spec,
                                           scalar_t gamma, scalar_t lr, scalar_t grad_clip,
                                           std::uint64_t seed)
    : online_([&] {
        rng_t init_rng(seed);
        MlpSpec scalar_spec;
        scalar_spec.trunk = spec.trunk;
        scalar_spec.heads = {spec.heads.empty() ? std::vector<int>{} : spec.heads.front()};
        return NetworkLinearQ(
            MultiHeadNet(obs_dim + 1, action_count, 1, 0, std::move(scalar_spec), init_rng));
      }()),
      target_(online_),
      replay_(seed ^ 0x9e3779b97f4a7c15ull),
      gamma_(gamma),
      lr_(lr),
      grad_clip_(grad_clip) {}

void LinearNetworkLearner::update(int batches, int batch_size) {
  const auto& net = online_.net();
  const int A = net.action_count();
  for (int b = 0; b < batches; ++b) {
    const auto idxs = replay_.sample_indices(batch_size);
    const int B = static_cast<int>(idxs.size());
    matrix_t X(net.input_dim(), B), Xn(net.input_dim(), B);
    for (int k = 0; k < B; ++k) {
      const Experience& e = replay_[idxs[static_cast<std::size_t>(k)]];
      const auto& w = std::get<LinearWeight>(e.preference);
      X.col(k).topRows(e.state.features.size()) = e.state.features;
      X(net.input_dim() - 1, k) = w[1];
      Xn.col(k).topRows(e.next_state.features.size()) = e.next_state.features;
      Xn(net.input_dim() - 1, k) = w[1];
    }
    const matrix_t next_q = target_.net().forward(Xn, matrix_t(0, B)).front();
    MultiHeadNet::Cache cache;
    const matrix_t q = online_.net().forward(X, matrix_t(0, B), &cache).front();

    scalar_t loss = 0;
    std::vector<matrix_t> dQ{matrix_t::Zero(A, B)};
    for (int k = 0; k < B; ++k) {
      const Experience& e = replay_[idxs[static_cast<std::size_t>(k)]];
      const auto& w = std::get<LinearWeight>(e.preference);
      const scalar_t y = scalarize_linear(e.reward, w) +
                         (e.terminal ? 0.0 : gamma_ * next_q.col(k).maxCoeff());
      const scalar_t res = y - q(e.action, k);
      loss += huber(res);
      dQ[0](e.action, k) = -huber_grad(res) / B;
    }
    loss /= B;
    if (!std::isfinite(loss))
      throw TrainingDivergence("gLinear network training diverged (non-finite loss)");
    online_.net().sgd_step(online_.net().backward(cache, dQ), lr_, grad_clip_);
  }
}

void LinearNetworkLearner::save(std::ostream& out) const {
  out << "glinear-network\n";
  online_.net().save(out);
}

void LinearNetworkLearner::load(std::istream& in) {
  std::string tag;
  std::getline(in, tag);
  if (tag != "glinear-network") throw ConfigError("checkpoint: expected glinear-network, got " + tag);
  online_.net().load(in);
  target_ = online_;
}

// ---------------------------------------------------------------------------
// Tabular checkpoints

namespace {

void save_matrix(std::ostream& out, const matrix_t& m) {
  out.precision(17);
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) out << m(r, c) << '\n';
}

void load_matrix(std::istream& in, matrix_t& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (!(in >> m(r, c))) throw ConfigError("checkpoint: truncated table block");
}

}  // namespace

void GtloTabularLearner::save(std::ostream& out) const {
  out << "gtlo-tabular states=" << q_.state_count() << " actions=" << q_.action_count()
      << " bins=" << q_.grid().count << '\n';
  matrix_t q0(q_.state_count(), q_.action_count());
  for (int s = 0; s < q_.state_count(); ++s)
    for (int a = 0; a < q_.action_count(); ++a) q0(s, a) = q_.q0(s, a);
  save_matrix(out, q0);
  for (int bin = 0; bin < q_.grid().count; ++bin) {
    matrix_t q1(q_.state_count(), q_.action_count());
    for (int s = 0; s < q_.state_count(); ++s)
      for (int a = 0; a < q_.action_count(); ++a) q1(s, a) = q_.q1(s, a, bin);
    save_matrix(out, q1);
  }
}

void GtloTabularLearner::load(std::istream& in) {
  std::string header;
  std::getline(in, header);
  std::ostringstream expect;
  expect << "gtlo-tabular states=" << q_.state_count() << " actions=" << q_.action_count()
         << " bins=" << q_.grid().count;
  if (header != expect.str()) throw ConfigError("checkpoint: architecture mismatch: " + header);
  matrix_t q0(q_.state_count(), q_.action_count());
  load_matrix(in, q0);
  for (int s = 0; s < q_.state_count(); ++s)
    for (int a = 0; a < q_.action_count(); ++a) q_.q0(s, a) = q0(s, a);
  for (int bin = 0; bin < q_.grid().count; ++bin) {
    matrix_t q1(q_.state_count(), q_.action_count());
    load_matrix(in, q1);
    for (int s = 0; s < q_.state_count(); ++s)
      for (int a = 0; a < q_.action_count(); ++a) q_.q1(s, a, bin) = q1(s, a);
  }
}

void LinearTabularLearner::save(std::ostream& out) const {
  out << "glinear-tabular states=" << q_.state_count() << " actions=" << q_.action_count()
      << " bins=" << q_.grid().count << '\n';
  for (int bin = 0; bin < q_.grid().count; ++bin) {
    matrix_t q(q_.state_count(), q_.action_count());
    for (int s = 0; s < q_.state_count(); ++s)
      for (int a = 0; a < q_.action_count(); ++a) q(s, a) = q_.q(s, a, bin);
    save_matrix(out, q);
  }
}

void LinearTabularLearner::load(std::istream& in) {
  std::string header;
  std::getline(in, header);
  std::ostringstream expect;
  expect << "glinear-tabular states=" << q_.state_count() << " actions=" << q_.action_count()
         << " bins=" << q_.grid().count;
  if (header != expect.str()) throw ConfigError("checkpoint: architecture mismatch: " + header);
  for (int bin = 0; bin < q_.grid().count; ++bin) {
    matrix_t q(q_.state_count(), q_.action_count());
    load_matrix(in, q);
    for (int s = 0; s < q_.state_count(); ++s)
      for (int a = 0; a < q_.action_count(); ++a) q_.q(s, a, bin) = q(s, a);
  }
}

}  // namespace morl::learners
