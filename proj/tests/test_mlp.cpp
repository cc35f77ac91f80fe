#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "morl/learners/learner.hpp"
#include "morl/learners/network.hpp"

#include <random>
#include <sstream>

using namespace morl;
using namespace morl::learners;

namespace {

MlpSpec small_spec() {
  MlpSpec spec;
  spec.trunk = {8};
  spec.heads = {{8}, {8}};
  return spec;
}

MultiHeadNet small_net(std::uint64_t seed = 3) {
  rng_t rng(seed);
  return MultiHeadNet(5, 3, 2, 1, small_spec(), rng);
}

/// Mean Huber loss over the batch, summed across objectives, on action row 0.
scalar_t batch_loss(const MultiHeadNet& net, const matrix_t& X, const matrix_t& T,
                    const matrix_t& y) {
  const auto q = net.forward(X, T);
  scalar_t loss = 0;
  for (int k = 0; k < X.cols(); ++k)
    for (int i = 0; i < net.objective_count(); ++i)
      loss += huber(y(i, k) - q[static_cast<std::size_t>(i)](0, k));
  return loss / static_cast<scalar_t>(X.cols());
}

}  // namespace

TEST_CASE("huber loss values and derivative") {
  CHECK(huber(0.5) == 0.125);
  CHECK(huber(-0.5) == 0.125);
  CHECK(huber(3.0) == 2.5);  // 1 * (3 - 0.5)
  CHECK(huber(-3.0) == 2.5);
  CHECK(huber(1.0) == 0.5);  // boundary agrees from both branches
  CHECK(huber_grad(0.5) == 0.5);
  CHECK(huber_grad(3.0) == 1.0);
  CHECK(huber_grad(-3.0) == -1.0);
}

TEST_CASE("forward shapes and determinism") {
  const MultiHeadNet net = small_net();
  CHECK(net.parameter_count() > 0);
  matrix_t X = matrix_t::Random(5, 4);
  matrix_t T = matrix_t::Random(1, 4).cwiseAbs();
  const auto out = net.forward(X, T);
  REQUIRE(out.size() == 2);
  CHECK(out[0].rows() == 3);
  CHECK(out[0].cols() == 4);
  const auto again = net.forward(X, T);
  CHECK(out[0] == again[0]);
  CHECK(out[1] == again[1]);
}

TEST_CASE("head 0 ignores the threshold input") {
  // Q_i may depend only on thresholds with index < i: head 0 consumes none,
  // so perturbing t_0 must leave head 0 bit-identical while head 1 moves.
  const MultiHeadNet net = small_net();
  matrix_t X = matrix_t::Random(5, 3);
  matrix_t T0 = matrix_t::Constant(1, 3, 0.2);
  matrix_t T1 = matrix_t::Constant(1, 3, 0.9);
  const auto a = net.forward(X, T0);
  const auto b = net.forward(X, T1);
  CHECK(a[0] == b[0]);
  CHECK(a[1] != b[1]);
}

TEST_CASE("analytic gradient matches finite differences") {
  MultiHeadNet net = small_net(11);
  rng_t rng(5);
  std::uniform_real_distribution<scalar_t> dist(-1, 1);
  const int B = 6;
  matrix_t X(5, B), T(1, B), y(2, B);
  for (int k = 0; k < B; ++k) {
    for (int r = 0; r < 5; ++r) X(r, k) = dist(rng);
    T(0, k) = 0.5 + 0.4 * dist(rng);
    for (int i = 0; i < 2; ++i) y(i, k) = dist(rng) * 2;
  }

  // Analytic gradient of the action-0 Huber objective.
  MultiHeadNet::Cache cache;
  const auto q = net.forward(X, T, &cache);
  std::vector<matrix_t> dQ(2, matrix_t::Zero(3, B));
  for (int k = 0; k < B; ++k)
    for (int i = 0; i < 2; ++i)
      dQ[static_cast<std::size_t>(i)](0, k) =
          -huber_grad(y(i, k) - q[static_cast<std::size_t>(i)](0, k)) / B;
  const vector_t analytic = MultiHeadNet::flatten_grads(net.backward(cache, dQ));

  const vector_t theta = net.flatten_parameters();
  REQUIRE(analytic.size() == theta.size());
  const scalar_t h = 1e-6;
  scalar_t max_rel = 0;
  for (Eigen::Index p = 0; p < theta.size(); ++p) {
    vector_t t1 = theta, t2 = theta;
    t1(p) += h;
    t2(p) -= h;
    net.set_parameters(t1);
    const scalar_t lp = batch_loss(net, X, T, y);
    net.set_parameters(t2);
    const scalar_t lm = batch_loss(net, X, T, y);
    const scalar_t fd = (lp - lm) / (2 * h);
    const scalar_t rel = std::abs(fd - analytic(p)) /
                         std::max(scalar_t(1.0), std::max(std::abs(fd), std::abs(analytic(p))));
    max_rel = std::max(max_rel, rel);
  }
  net.set_parameters(theta);
  CHECK(max_rel < 1e-4);
}

TEST_CASE("gtlo_loss gradient matches finite differences") {
  // End-to-end check through the learner's own loss, including the restricted
  // set in the bootstrapped target (targets come from frozen parameters, so
  // they are constants for the derivative).
  rng_t rng(21);
  MultiHeadNet net(4, 2, 2, 1, small_spec(), rng);
  NetworkGtloQ online(net, PreferenceGrid{0.0, 1.0, 5});
  const NetworkGtloQ target = online;

  std::uniform_real_distribution<scalar_t> dist(-1, 1);
  std::vector<Experience> batch;
  for (int k = 0; k < 5; ++k) {
    Experience e;
    vector_t s(4), sn(4);
    for (int r = 0; r < 4; ++r) {
      s(r) = dist(rng);
      sn(r) = dist(rng);
    }
    e.state = StateSample{0, s};
    e.next_state = StateSample{1, sn};
    e.action = k % 2;
    e.reward = RewardVector{dist(rng), dist(rng)};
    e.terminal = k == 4;
    e.preference = ThresholdPreference::from_constrained({0.25 * k});
    batch.push_back(e);
  }
  const std::vector<scalar_t> gammas{1.0, 1.0};

  const LossGrads lg = gtlo_loss(batch, online, target, gammas);
  const vector_t analytic = MultiHeadNet::flatten_grads(lg.grads);
  const vector_t theta = online.net().flatten_parameters();
  const scalar_t h = 1e-6;
  scalar_t max_rel = 0;
  for (Eigen::Index p = 0; p < theta.size(); ++p) {
    vector_t t1 = theta, t2 = theta;
    t1(p) += h;
    t2(p) -= h;
    online.net().set_parameters(t1);
    const scalar_t lp = gtlo_loss(batch, online, target, gammas).loss;
    online.net().set_parameters(t2);
    const scalar_t lm = gtlo_loss(batch, online, target, gammas).loss;
    const scalar_t fd = (lp - lm) / (2 * h);
    const scalar_t rel = std::abs(fd - analytic(p)) /
                         std::max(scalar_t(1.0), std::max(std::abs(fd), std::abs(analytic(p))));
    max_rel = std::max(max_rel, rel);
  }
  online.net().set_parameters(theta);
  CHECK(max_rel < 1e-4);
}

TEST_CASE("sgd_step descends and clips") {
  MultiHeadNet net = small_net(31);
  matrix_t X = matrix_t::Random(5, 8);
  matrix_t T = matrix_t::Random(1, 8).cwiseAbs();
  matrix_t y = matrix_t::Constant(2, 8, 2.0);

  const scalar_t before = batch_loss(net, X, T, y);
  for (int it = 0; it < 200; ++it) {
    MultiHeadNet::Cache cache;
    const auto q = net.forward(X, T, &cache);
    std::vector<matrix_t> dQ(2, matrix_t::Zero(3, 8));
    for (int k = 0; k < 8; ++k)
      for (int i = 0; i < 2; ++i)
        dQ[static_cast<std::size_t>(i)](0, k) =
            -huber_grad(y(i, k) - q[static_cast<std::size_t>(i)](0, k)) / 8;
    net.sgd_step(net.backward(cache, dQ), 0.05, 10.0);
  }
  CHECK(batch_loss(net, X, T, y) < 0.5 * before);

  // A tiny clip norm bounds the parameter change of one step.
  MultiHeadNet clipped = small_net(31);
  const vector_t theta = clipped.flatten_parameters();
  MultiHeadNet::Cache cache;
  const auto q = clipped.forward(X, T, &cache);
  std::vector<matrix_t> dQ(2, matrix_t::Constant(3, 8, 1.0));
  clipped.sgd_step(clipped.backward(cache, dQ), 1.0, 1e-3);
  CHECK((clipped.flatten_parameters() - theta).norm() <= 1e-3 + 1e-12);
}

TEST_CASE("checkpoint round trip") {
  MultiHeadNet net = small_net(41);
  std::stringstream ss;
  net.save(ss);

  MultiHeadNet other = small_net(99);  // same shape, different parameters
  matrix_t X = matrix_t::Random(5, 2);
  matrix_t T = matrix_t::Random(1, 2).cwiseAbs();
  CHECK(net.forward(X, T)[0] != other.forward(X, T)[0]);
  other.load(ss);
  CHECK(net.forward(X, T)[0] == other.forward(X, T)[0]);
  CHECK(net.forward(X, T)[1] == other.forward(X, T)[1]);

  // A mismatched architecture is rejected.
  std::stringstream ss2;
  net.save(ss2);
  rng_t rng(1);
  MultiHeadNet wrong(5, 4, 2, 1, small_spec(), rng);
  CHECK_THROWS_AS(wrong.load(ss2), ConfigError);
}

TEST_CASE("flat parameter access round trips") {
  MultiHeadNet net = small_net(51);
  const vector_t theta = net.flatten_parameters();
  vector_t shifted = theta;
  shifted.array() += 0.125;
  net.set_parameters(shifted);
  CHECK(net.flatten_parameters() == shifted);
  vector_t bad(theta.size() + 1);
  bad.setZero();
  CHECK_THROWS_AS(net.set_parameters(bad), ContractViolation);
}
