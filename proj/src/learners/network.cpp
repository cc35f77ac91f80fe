#include "morl/learners/network.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace morl::learners {

namespace {

DenseLayer make_layer(int in, int out, rng_t& rng) {
  std::normal_distribution<scalar_t> dist(0.0, std::sqrt(2.0 / in));
  DenseLayer layer;
  layer.W = matrix_t::NullaryExpr(out, in, [&]() { return dist(rng); });
  layer.b = vector_t::Zero(out);
  return layer;
}

matrix_t relu(const matrix_t& z) { return z.cwiseMax(0.0); }

}  // namespace

scalar_t NetGrads::squared_norm() const {
  scalar_t s = 0;
  for (const auto& g : trunk) s += g.W.squaredNorm() + g.b.squaredNorm();
  for (const auto& head : heads)
    for (const auto& g : head) s += g.W.squaredNorm() + g.b.squaredNorm();
  return s;
}

void NetGrads::scale(scalar_t f) {
  for (auto& g : trunk) {
    g.W *= f;
    g.b *= f;
  }
  for (auto& head : heads)
    for (auto& g : head) {
      g.W *= f;
      g.b *= f;
    }
}

MultiHeadNet::MultiHeadNet(int input_dim, int action_count, int objective_count,
                           int threshold_inputs, MlpSpec spec, rng_t& rng)
    : input_dim_(input_dim),
      actions_(action_count),
      objectives_(objective_count),
      threshold_inputs_(threshold_inputs),
      spec_(std::move(spec)) {
  if (static_cast<int>(spec_.heads.size()) != objectives_)
    throw ConfigError("network: one head spec per objective required");
  int in = input_dim_;
  for (int w : spec_.trunk) {
    if (w < 1) throw ConfigError("network: layer widths must be positive");
    trunk_.push_back(make_layer(in, w, rng));
    in = w;
  }
  const int trunk_out = in;
  for (int i = 0; i < objectives_; ++i) {
    std::vector<DenseLayer> head;
    int head_in = trunk_out + std::min(i, threshold_inputs_);
    for (int w : spec_.heads[static_cast<std::size_t>(i)]) {
      if (w < 1) throw ConfigError("network: layer widths must be positive");
      head.push_back(make_layer(head_in, w, rng));
      head_in = w;
    }
    head.push_back(make_layer(head_in, actions_, rng));  // linear output
    heads_.push_back(std::move(head));
  }
}

std::vector<matrix_t> MultiHeadNet::forward(const matrix_t& X, const matrix_t& T,
                                            Cache* cache) const {
  if (X.rows() != input_dim_) throw ContractViolation("network: input dimension mismatch");
  if (T.rows() < std::min(threshold_inputs_, objectives_ - 1) && objectives_ > 1 &&
      threshold_inputs_ > 0)
    throw ContractViolation("network: missing threshold inputs");
  if (cache) {
    cache->input = X;
    cache->thresholds = T;
    cache->trunk_acts.clear();
    cache->head_acts.assign(static_cast<std::size_t>(objectives_), {});
  }
  matrix_t h = X;
  for (const auto& layer : trunk_) {
    h = relu((layer.W * h).colwise() + layer.b);
    if (cache) cache->trunk_acts.push_back(h);
  }
  std::vector<matrix_t> out;
  out.reserve(static_cast<std::size_t>(objectives_));
  for (int i = 0; i < objectives_; ++i) {
    const int extra = std::min(i, threshold_inputs_);
    matrix_t a(h.rows() + extra, h.cols());
    a.topRows(h.rows()) = h;
    if (extra > 0) a.bottomRows(extra) = T.topRows(extra);
    const auto& head = heads_[static_cast<std::size_t>(i)];
    for (std::size_t l = 0; l < head.size(); ++l) {
      matrix_t z = (head[l].W * a).colwise() + head[l].b;
      a = (l + 1 == head.size()) ? z : relu(z);
      if (cache) cache->head_acts[static_cast<std::size_t>(i)].push_back(a);
    }
    out.push_back(std::move(a));
  }
  return out;
}

NetGrads MultiHeadNet::zero_grads() const {
  NetGrads g;
  for (const auto& layer : trunk_)
    g.trunk.push_back({matrix_t::Zero(layer.W.rows(), layer.W.cols()), vector_t::Zero(layer.b.size())});
  for (const auto& head : heads_) {
    std::vector<LayerGrad> hg;
    for (const auto& layer : head)
      hg.push_back({matrix_t::Zero(layer.W.rows(), layer.W.cols()), vector_t::Zero(layer.b.size())});
    g.heads.push_back(std::move(hg));
  }
  return g;
}

NetGrads MultiHeadNet::backward(const Cache& cache, const std::vector<matrix_t>& dQ) const {
  NetGrads g = zero_grads();
  const matrix_t& trunk_out =
      trunk_.empty() ? cache.input : cache.trunk_acts.back();
  matrix_t d_trunk_out = matrix_t::Zero(trunk_out.rows(), trunk_out.cols());

  for (int i = 0; i < objectives_; ++i) {
    const auto& head = heads_[static_cast<std::size_t>(i)];
    const auto& acts = cache.head_acts[static_cast<std::size_t>(i)];
    const int extra = std::min(i, threshold_inputs_);

    matrix_t delta = dQ[static_cast<std::size_t>(i)];
    for (int l = static_cast<int>(head.size()) - 1; l >= 0; --l) {
      // Input to layer l of this head.
      matrix_t in;
      if (l == 0) {
        in.resize(trunk_out.rows() + extra, trunk_out.cols());
        in.topRows(trunk_out.rows()) = trunk_out;
        if (extra > 0) in.bottomRows(extra) = cache.thresholds.topRows(extra);
      } else {
        in = acts[static_cast<std::size_t>(l - 1)];
      }
      auto& lg = g.heads[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)];
      lg.W += delta * in.transpose();
      lg.b += delta.rowwise().sum();
      matrix_t d_in = head[static_cast<std::size_t>(l)].W.transpose() * delta;
      if (l > 0) {
        // Gate through the ReLU of the previous hidden layer.
        d_in = d_in.cwiseProduct((acts[static_cast<std::size_t>(l - 1)].array() > 0).cast<scalar_t>().matrix());
        delta = std::move(d_in);
      } else {
        d_trunk_out += d_in.topRows(trunk_out.rows());
      }
    }
  }

  matrix_t delta = d_trunk_out;
  for (int l = static_cast<int>(trunk_.size()) - 1; l >= 0; --l) {
    delta = delta.cwiseProduct(
        (cache.trunk_acts[static_cast<std::size_t>(l)].array() > 0).cast<scalar_t>().matrix());
    const matrix_t& in = l == 0 ? cache.input : cache.trunk_acts[static_cast<std::size_t>(l - 1)];
    auto& lg = g.trunk[static_cast<std::size_t>(l)];
    lg.W += delta * in.transpose();
    lg.b += delta.rowwise().sum();
    if (l > 0) delta = trunk_[static_cast<std::size_t>(l)].W.transpose() * delta;
  }
  return g;
}

void MultiHeadNet::sgd_step(NetGrads grads, scalar_t lr, scalar_t clip_norm) {
  if (clip_norm > 0) {
    const scalar_t norm = std::sqrt(grads.squared_norm());
    if (norm > clip_norm) grads.scale(clip_norm / norm);
  }
  for (std::size_t l = 0; l < trunk_.size(); ++l) {
    trunk_[l].W -= lr * grads.trunk[l].W;
    trunk_[l].b -= lr * grads.trunk[l].b;
  }
  for (std::size_t i = 0; i < heads_.size(); ++i)
    for (std::size_t l = 0; l < heads_[i].size(); ++l) {
      heads_[i][l].W -= lr * grads.heads[i][l].W;
      heads_[i][l].b -= lr * grads.heads[i][l].b;
    }
}

Eigen::Index MultiHeadNet::parameter_count() const {
  Eigen::Index n = 0;
  for (const auto& layer : trunk_) n += layer.W.size() + layer.b.size();
  for (const auto& head : heads_)
    for (const auto& layer : head) n += layer.W.size() + layer.b.size();
  return n;
}

namespace {

void append_layer(vector_t& flat, Eigen::Index& pos, const matrix_t& W, const vector_t& b) {
  flat.segment(pos, W.size()) = Eigen::Map<const vector_t>(W.data(), W.size());
  pos += W.size();
  flat.segment(pos, b.size()) = b;
  pos += b.size();
}

void extract_layer(const vector_t& flat, Eigen::Index& pos, matrix_t& W, vector_t& b) {
  W = Eigen::Map<const matrix_t>(flat.data() + pos, W.rows(), W.cols());
  pos += W.size();
  b = flat.segment(pos, b.size());
  pos += b.size();
}

}  // namespace

vector_t MultiHeadNet::flatten_parameters() const {
  vector_t flat(parameter_count());
  Eigen::Index pos = 0;
  for (const auto& layer : trunk_) append_layer(flat, pos, layer.W, layer.b);
  for (const auto& head : heads_)
    for (const auto& layer : head) append_layer(flat, pos, layer.W, layer.b);
  return flat;
}

void MultiHeadNet::set_parameters(const vector_t& flat) {
  if (flat.size() != parameter_count()) throw ContractViolation("network: parameter size mismatch");
  Eigen::Index pos = 0;
  for (auto& layer : trunk_) extract_layer(flat, pos, layer.W, layer.b);
  for (auto& head : heads_)
    for (auto& layer : head) extract_layer(flat, pos, layer.W, layer.b);
}

vector_t MultiHeadNet::flatten_grads(const NetGrads& g) {
  Eigen::Index n = 0;
  for (const auto& lg : g.trunk) n += lg.W.size() + lg.b.size();
  for (const auto& head : g.heads)
    for (const auto& lg : head) n += lg.W.size() + lg.b.size();
  vector_t flat(n);
  Eigen::Index pos = 0;
  for (const auto& lg : g.trunk) append_layer(flat, pos, lg.W, lg.b);
  for (const auto& head : g.heads)
    for (const auto& lg : head) append_layer(flat, pos, lg.W, lg.b);
  return flat;
}

std::string MultiHeadNet::architecture_string() const {
  std::ostringstream os;
  os << "in=" << input_dim_ << " actions=" << actions_ << " objectives=" << objectives_
     << " thr=" << threshold_inputs_ << " trunk=";
  for (int w : spec_.trunk) os << w << ',';
  os << " heads=";
  for (const auto& head : spec_.heads) {
    for (int w : head) os << w << ',';
    os << ';';
  }
  return os.str();
}

void MultiHeadNet::save(std::ostream& out) const {
  out << architecture_string() << '\n';
  const vector_t flat = flatten_parameters();
  out.precision(17);
  for (Eigen::Index i = 0; i < flat.size(); ++i) out << flat(i) << '\n';
}

void MultiHeadNet::load(std::istream& in) {
  std::string arch;
  std::getline(in, arch);
  if (arch != architecture_string())
    throw ConfigError("checkpoint: architecture mismatch: " + arch);
  vector_t flat(parameter_count());
  for (Eigen::Index i = 0; i < flat.size(); ++i)
    if (!(in >> flat(i))) throw ConfigError("checkpoint: truncated parameter block");
  set_parameters(flat);
}

}  // namespace morl::learners
