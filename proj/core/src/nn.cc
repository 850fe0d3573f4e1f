// Copyright 2026 The EarlySD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "earlysd/nn.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "earlysd/error.h"

namespace earlysd::nn {
namespace {

void ApplyActivation(Matrix& m, Activation act) {
  if (act == Activation::kReLU) m = m.cwiseMax(0.0);
}

// grad_out masked by the activation derivative at `pre`.
Matrix ActivationBackward(const Matrix& grad_out, const Matrix& pre, Activation act) {
  if (act == Activation::kIdentity) return grad_out;
  return (pre.array() > 0.0).select(grad_out, 0.0);
}

void CheckCols(const Matrix& x, Eigen::Index expected, const char* what) {
  if (x.cols() != expected) {
    throw ShapeError(fmt::format("{}: input has {} columns, layer expects {}", what,
                                 x.cols(), expected));
  }
}

double Scale(const SparseRelation& rel, std::size_t t, Aggregation agg) {
  if (agg == Aggregation::kSum) return 1.0;
  const std::size_t d = rel.degree(t);
  return d == 0 ? 0.0 : 1.0 / static_cast<double>(d);
}

// out[t] += scale_t * sum_e w_e * msg[src_e]
void Aggregate(const SparseRelation& rel, const Matrix& msg, Aggregation agg, Matrix& out) {
  for (std::size_t t = 0; t < rel.num_targets; ++t) {
    const double s = Scale(rel, t, agg);
    if (s == 0.0) continue;
    for (std::size_t e = rel.offsets[t]; e < rel.offsets[t + 1]; ++e) {
      out.row(static_cast<Eigen::Index>(t)).noalias() +=
          (s * rel.weights[e]) * msg.row(static_cast<Eigen::Index>(rel.sources[e]));
    }
  }
}

void CheckRelation(const SparseRelation& rel, std::size_t targets, std::size_t sources,
                   const char* what) {
  if (rel.num_targets != targets || rel.num_sources != sources) {
    throw ShapeError(fmt::format("{} relation is {}x{}, embeddings are {}x{}", what,
                                 rel.num_targets, rel.num_sources, targets, sources));
  }
}

}  // namespace

void InitGlorot(Param& p, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
  for (Eigen::Index i = 0; i < p.value.size(); ++i) {
    p.value.data()[i] = rng.Uniform(-limit, limit);
  }
}

FfnLayer::FfnLayer(const std::string& name, std::size_t in, std::size_t out, Activation act)
    : weight(name + ".weight", static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)),
      bias(name + ".bias", 1, static_cast<Eigen::Index>(out)),
      activation(act) {}

void FfnLayer::Init(Rng& rng) {
  InitGlorot(weight, rng);
  bias.value.setZero();
}

Matrix FfnLayer::Forward(const Matrix& x, Cache* cache) const {
  CheckCols(x, weight.value.cols(), weight.name.c_str());
  Matrix pre = x * weight.value.transpose();
  pre.rowwise() += bias.value.row(0);
  Matrix y = pre;
  ApplyActivation(y, activation);
  if (cache) {
    cache->input = x;
    cache->pre = std::move(pre);
  }
  return y;
}

Matrix FfnLayer::Backward(const Matrix& grad_out, const Cache& cache) {
  const Matrix g = ActivationBackward(grad_out, cache.pre, activation);
  weight.grad.noalias() += g.transpose() * cache.input;
  bias.grad.row(0) += g.colwise().sum();
  return g * weight.value;
}

void SparseRelation::SetSlotWeights(std::span<const double> slot_weights) {
  for (std::size_t e = 0; e < slot.size(); ++e) {
    if (slot[e] >= 0) weights[e] = slot_weights[static_cast<std::size_t>(slot[e])];
  }
}

SparseRelation UserUserRelation(const HeteroSocialGraph& g) {
  SparseRelation r;
  r.num_targets = r.num_sources = g.num_users();
  for (std::size_t u = 0; u < g.num_users(); ++u) {
    for (const auto& adj : g.user_neighbors(u)) {
      r.sources.push_back(adj.neighbor);
      r.weights.push_back(g.uu_edges()[adj.edge].weight);
      r.slot.push_back(static_cast<std::ptrdiff_t>(adj.edge));
    }
    r.offsets.push_back(r.sources.size());
  }
  return r;
}

SparseRelation UserTopicRelation(const HeteroSocialGraph& g) {
  SparseRelation r;
  r.num_targets = g.num_users();
  r.num_sources = g.num_topics();
  for (std::size_t u = 0; u < g.num_users(); ++u) {
    for (std::size_t t : g.user_topics(u)) {
      r.sources.push_back(t);
      r.weights.push_back(1.0);
      r.slot.push_back(-1);
    }
    r.offsets.push_back(r.sources.size());
  }
  return r;
}

SparseRelation TopicUserRelation(const HeteroSocialGraph& g) {
  SparseRelation r;
  r.num_targets = g.num_topics();
  r.num_sources = g.num_users();
  for (std::size_t t = 0; t < g.num_topics(); ++t) {
    for (std::size_t u : g.topic_users(t)) {
      r.sources.push_back(u);
      r.weights.push_back(1.0);
      r.slot.push_back(-1);
    }
    r.offsets.push_back(r.sources.size());
  }
  return r;
}

SparseRelation EmptyRelation(std::size_t num_targets, std::size_t num_sources) {
  SparseRelation r;
  r.num_targets = num_targets;
  r.num_sources = num_sources;
  r.offsets.assign(num_targets + 1, 0);
  return r;
}

HeteroConvLayer::HeteroConvLayer(const std::string& name, std::size_t in_same,
                                 std::size_t in_cross, std::size_t out, Options options)
    : f_same(name + ".f_same", static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in_same)),
      f_cross(name + ".f_cross", static_cast<Eigen::Index>(out),
              static_cast<Eigen::Index>(in_cross)),
      f_self(name + ".f_self", static_cast<Eigen::Index>(out),
             static_cast<Eigen::Index>(options.self_loop ? in_same : 0)),
      options_(options) {
  if (options.tied && in_same != in_cross) {
    throw ShapeError("tied hetero conv needs equal user and topic input dims");
  }
}

void HeteroConvLayer::Init(Rng& rng) {
  InitGlorot(f_same, rng);
  InitGlorot(f_cross, rng);
  if (options_.self_loop) InitGlorot(f_self, rng);
}

std::vector<Param*> HeteroConvLayer::params() {
  std::vector<Param*> ps = {&f_same};
  if (!options_.tied) ps.push_back(&f_cross);
  if (options_.self_loop) ps.push_back(&f_self);
  return ps;
}

Matrix HeteroConvLayer::Forward(const SparseRelation& same, const SparseRelation& cross,
                                const Matrix& h_same, const Matrix& h_cross,
                                Cache* cache) const {
  CheckCols(h_same, f_same.value.cols(), f_same.name.c_str());
  CheckCols(h_cross, cross_weight().cols(), f_cross.name.c_str());
  const auto n = static_cast<std::size_t>(h_same.rows());
  CheckRelation(same, n, n, "same-type");
  CheckRelation(cross, n, static_cast<std::size_t>(h_cross.rows()), "cross-type");

  Matrix msg_same = h_same * f_same.value.transpose();
  Matrix msg_cross = h_cross * cross_weight().transpose();
  Matrix pre = Matrix::Zero(h_same.rows(), f_same.value.rows());
  Aggregate(same, msg_same, options_.aggregation, pre);
  Aggregate(cross, msg_cross, options_.aggregation, pre);
  if (options_.self_loop) pre.noalias() += h_same * f_self.value.transpose();

  Matrix out = pre;
  ApplyActivation(out, options_.activation);
  if (cache) {
    cache->h_same = h_same;
    cache->h_cross = h_cross;
    cache->msg_same = std::move(msg_same);
    cache->msg_cross = std::move(msg_cross);
    cache->pre = std::move(pre);
  }
  return out;
}

HeteroConvLayer::Grads HeteroConvLayer::Backward(const Matrix& grad_out,
                                                 const SparseRelation& same,
                                                 const SparseRelation& cross,
                                                 const Cache& cache, std::size_t num_slots) {
  const Matrix g = ActivationBackward(grad_out, cache.pre, options_.activation);
  Grads out;
  out.d_slot.assign(num_slots, 0.0);
  out.d_same = Matrix::Zero(cache.h_same.rows(), cache.h_same.cols());
  out.d_cross = Matrix::Zero(cache.h_cross.rows(), cache.h_cross.cols());

  if (options_.self_loop) {
    f_self.grad.noalias() += g.transpose() * cache.h_same;
    out.d_same.noalias() += g * f_self.value;
  }

  Matrix d_msg_same = Matrix::Zero(cache.msg_same.rows(), cache.msg_same.cols());
  for (std::size_t t = 0; t < same.num_targets; ++t) {
    const double s = Scale(same, t, options_.aggregation);
    if (s == 0.0) continue;
    const auto gt = g.row(static_cast<Eigen::Index>(t));
    for (std::size_t e = same.offsets[t]; e < same.offsets[t + 1]; ++e) {
      const auto src = static_cast<Eigen::Index>(same.sources[e]);
      d_msg_same.row(src).noalias() += (s * same.weights[e]) * gt;
      if (same.slot[e] >= 0 && static_cast<std::size_t>(same.slot[e]) < num_slots) {
        out.d_slot[static_cast<std::size_t>(same.slot[e])] +=
            s * gt.dot(cache.msg_same.row(src));
      }
    }
  }
  Matrix d_msg_cross = Matrix::Zero(cache.msg_cross.rows(), cache.msg_cross.cols());
  for (std::size_t t = 0; t < cross.num_targets; ++t) {
    const double s = Scale(cross, t, options_.aggregation);
    if (s == 0.0) continue;
    const auto gt = g.row(static_cast<Eigen::Index>(t));
    for (std::size_t e = cross.offsets[t]; e < cross.offsets[t + 1]; ++e) {
      d_msg_cross.row(static_cast<Eigen::Index>(cross.sources[e])).noalias() +=
          (s * cross.weights[e]) * gt;
    }
  }

  f_same.grad.noalias() += d_msg_same.transpose() * cache.h_same;
  out.d_same.noalias() += d_msg_same * f_same.value;
  if (options_.tied) {
    f_same.grad.noalias() += d_msg_cross.transpose() * cache.h_cross;
  } else {
    f_cross.grad.noalias() += d_msg_cross.transpose() * cache.h_cross;
  }
  out.d_cross.noalias() += d_msg_cross * cross_weight();
  return out;
}

Matrix HeteroConv(const HeteroConvLayer& layer, const HeteroSocialGraph& g,
                  const Matrix& h_user, const Matrix& h_topic) {
  return layer.Forward(UserUserRelation(g), UserTopicRelation(g), h_user, h_topic, nullptr);
}

namespace {

constexpr double kKnotSpacing = 2.0 / (KanEdgeModule::kKnots - 1);

struct SplinePos {
  int left;
  double t;  // position within [knot_left, knot_left + 1]
};

SplinePos Locate(double x) {
  if (x < -1.0 - 1e-6 || x > 1.0 + 1e-6 || std::isnan(x)) {
    throw DomainError(fmt::format("KAN input {} outside [-1, 1]", x));
  }
  x = std::clamp(x, -1.0, 1.0);
  const double u = (x + 1.0) / kKnotSpacing;
  int left = static_cast<int>(std::floor(u));
  left = std::clamp(left, 0, KanEdgeModule::kKnots - 2);
  return {left, u - left};
}

double Spline(const Param& c, SplinePos p) {
  return (1.0 - p.t) * c.value(0, p.left) + p.t * c.value(0, p.left + 1);
}

double SplineSlope(const Param& c, SplinePos p) {
  return (c.value(0, p.left + 1) - c.value(0, p.left)) / kKnotSpacing;
}

}  // namespace

KanEdgeModule::KanEdgeModule()
    : coef_f("kan.coef_f", 1, kKnots), coef_t("kan.coef_t", 1, kKnots), bias("kan.bias", 1, 1) {}

double KanEdgeModule::Alpha(double sim_f, double sim_t) const {
  const SplinePos pf = Locate(sim_f);
  const SplinePos pt = Locate(sim_t);
  return Sigmoid(Spline(coef_f, pf) + Spline(coef_t, pt) + bias.value(0, 0));
}

std::vector<double> KanEdgeModule::Forward(std::span<const double> sim_f,
                                           std::span<const double> sim_t) const {
  if (sim_f.size() != sim_t.size()) throw ShapeError("KAN inputs differ in length");
  std::vector<double> out(sim_f.size());
  for (std::size_t i = 0; i < sim_f.size(); ++i) out[i] = Alpha(sim_f[i], sim_t[i]);
  return out;
}

void KanEdgeModule::Backward(std::span<const double> sim_f, std::span<const double> sim_t,
                             std::span<const double> grad_alpha, std::span<double> d_sim_f,
                             std::span<double> d_sim_t) {
  for (std::size_t i = 0; i < sim_f.size(); ++i) {
    const SplinePos pf = Locate(sim_f[i]);
    const SplinePos pt = Locate(sim_t[i]);
    const double a = Sigmoid(Spline(coef_f, pf) + Spline(coef_t, pt) + bias.value(0, 0));
    const double dz = grad_alpha[i] * a * (1.0 - a);
    coef_f.grad(0, pf.left) += dz * (1.0 - pf.t);
    coef_f.grad(0, pf.left + 1) += dz * pf.t;
    coef_t.grad(0, pt.left) += dz * (1.0 - pt.t);
    coef_t.grad(0, pt.left + 1) += dz * pt.t;
    bias.grad(0, 0) += dz;
    if (!d_sim_f.empty()) d_sim_f[i] += dz * SplineSlope(coef_f, pf);
    if (!d_sim_t.empty()) d_sim_t[i] += dz * SplineSlope(coef_t, pt);
  }
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double Bce(std::span<const double> p, std::span<const double> y, std::span<double> grad) {
  if (p.size() != y.size() || p.empty()) throw ShapeError("BCE needs equal, nonempty inputs");
  constexpr double kClamp = 1e-7;
  const double n = static_cast<double>(p.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::isnan(p[i]) || std::isnan(y[i])) throw NumericError("BCE input is NaN");
    const double q = std::clamp(p[i], kClamp, 1.0 - kClamp);
    loss -= y[i] * std::log(q) + (1.0 - y[i]) * std::log(1.0 - q);
    if (!grad.empty()) grad[i] = (-y[i] / q + (1.0 - y[i]) / (1.0 - q)) / n;
  }
  return loss / n;
}

double CrossEntropy(const Matrix& logits, std::span<const int> labels, Matrix* grad) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size() || labels.empty()) {
    throw ShapeError("cross-entropy needs one label per logit row");
  }
  if (logits.hasNaN()) throw NumericError("cross-entropy logits contain NaN");
  const double n = static_cast<double>(labels.size());
  double loss = 0.0;
  if (grad) grad->setZero(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    const RowVector e = (logits.row(i).array() - mx).exp().matrix();
    const double z = e.sum();
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= logits.cols()) throw ShapeError("cross-entropy label out of range");
    loss -= (logits(i, y) - mx) - std::log(z);
    if (grad) {
      grad->row(i) = e / (z * n);
      (*grad)(i, y) -= 1.0 / n;
    }
  }
  return loss / n;
}

double Cosine(const RowVector& a, const RowVector& b, CosineGrad* grad) {
  if (a.size() != b.size()) throw ShapeError("cosine needs equal-length vectors");
  const double na = a.norm();
  const double nb = b.norm();
  if (na < 1e-12 || nb < 1e-12) throw NumericError("cosine of a near-zero vector");
  const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  if (grad) {
    grad->d_a = b / (na * nb) - (c / (na * na)) * a;
    grad->d_b = a / (na * nb) - (c / (nb * nb)) * b;
  }
  return c;
}

Adam::Adam(std::vector<Param*> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  for (Param* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::Step() {
  ++step_;
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Param& p = *params_[i];
    Matrix g = p.grad;
    if (options_.weight_decay > 0.0) g += options_.weight_decay * p.value;
    m_[i] = options_.beta1 * m_[i] + (1.0 - options_.beta1) * g;
    v_[i] = options_.beta2 * v_[i] + (1.0 - options_.beta2) * g.cwiseProduct(g);
    p.value.array() -= options_.lr * (m_[i].array() / bc1) /
                       ((v_[i].array() / bc2).sqrt() + options_.eps);
  }
}

void Adam::ZeroGrad() {
  for (Param* p : params_) p->ZeroGrad();
}

Matrix DropoutMask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Matrix mask(rows, cols);
  const double keep = 1.0 - rate;
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = rng.Uniform() < keep ? 1.0 / keep : 0.0;
  }
  return mask;
}

}  // namespace earlysd::nn
