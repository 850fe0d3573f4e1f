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

#ifndef EARLYSD_NN_H_
#define EARLYSD_NN_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "earlysd/graph.h"
#include "earlysd/rng.h"

// Small differentiable core with hand-written backward passes. Each layer
// exposes Forward(..., cache) and Backward(grad_out, cache); Backward
// accumulates into the layer's Param::grad and returns input gradients.
namespace earlysd::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

struct Param {
  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)) {}

  void ZeroGrad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }

  std::string name;
  Matrix value;
  Matrix grad;
};

enum class Activation { kReLU, kIdentity };
enum class Aggregation { kSum, kDegreeMean };

// Glorot-uniform fill.
void InitGlorot(Param& p, Rng& rng);

// y = act(x W^T + b), x: n x in, W: out x in, b: 1 x out.
class FfnLayer {
 public:
  struct Cache {
    Matrix input;
    Matrix pre;
  };

  FfnLayer() = default;
  FfnLayer(const std::string& name, std::size_t in, std::size_t out, Activation act);

  void Init(Rng& rng);
  // Throws ShapeError when x has the wrong column count.
  Matrix Forward(const Matrix& x, Cache* cache) const;
  Matrix Backward(const Matrix& grad_out, const Cache& cache);

  std::size_t in_dim() const { return static_cast<std::size_t>(weight.value.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(weight.value.rows()); }
  std::vector<Param*> params() { return {&weight, &bias}; }

  Param weight;
  Param bias;
  Activation activation = Activation::kReLU;
};

// Target-major sparse incidence: target i receives from sources
// [offsets[i], offsets[i+1]) with per-entry weight. `slot` names the
// differentiable edge weight an entry reads (or -1 for a constant).
struct SparseRelation {
  std::size_t num_targets = 0;
  std::size_t num_sources = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> sources;
  std::vector<double> weights;
  std::vector<std::ptrdiff_t> slot;

  std::size_t degree(std::size_t t) const { return offsets[t + 1] - offsets[t]; }
  std::size_t num_entries() const { return sources.size(); }
  // Rewrites entry weights from per-slot values (entries with slot -1 keep
  // their constant weight).
  void SetSlotWeights(std::span<const double> slot_weights);
};

// Users receiving from user neighbors; slot = u-u edge index.
SparseRelation UserUserRelation(const HeteroSocialGraph& g);
// Users receiving from topic neighbors (weight 1).
SparseRelation UserTopicRelation(const HeteroSocialGraph& g);
// Topics receiving from user neighbors (weight 1).
SparseRelation TopicUserRelation(const HeteroSocialGraph& g);
// Relation with no entries, for node types without same-type edges.
SparseRelation EmptyRelation(std::size_t num_targets, std::size_t num_sources);

// One heterogeneous message-passing layer for a target node type:
//   h' = act( agg_{s in N_same} w_s f_same(h_s) + agg_{c in N_cross} f_cross(x_c)
//             [+ f_self(h)] )
// with linear f's. For users, same = u-u and cross = u-t.
class HeteroConvLayer {
 public:
  struct Options {
    Aggregation aggregation = Aggregation::kSum;
    Activation activation = Activation::kReLU;
    bool self_loop = false;
    // Homogeneous control: f_cross shares f_same's weight.
    bool tied = false;
  };
  struct Cache {
    Matrix h_same;
    Matrix h_cross;
    Matrix msg_same;   // h_same W_same^T
    Matrix msg_cross;  // h_cross W_cross^T
    Matrix pre;
  };
  struct Grads {
    Matrix d_same;
    Matrix d_cross;
    // d loss / d slot weight, sized to the number of slots in `same`.
    std::vector<double> d_slot;
  };

  HeteroConvLayer() = default;
  HeteroConvLayer(const std::string& name, std::size_t in_same, std::size_t in_cross,
                  std::size_t out, Options options);

  void Init(Rng& rng);
  Matrix Forward(const SparseRelation& same, const SparseRelation& cross,
                 const Matrix& h_same, const Matrix& h_cross, Cache* cache) const;
  Grads Backward(const Matrix& grad_out, const SparseRelation& same,
                 const SparseRelation& cross, const Cache& cache, std::size_t num_slots);

  std::vector<Param*> params();
  const Options& options() const { return options_; }
  std::size_t out_dim() const { return static_cast<std::size_t>(f_same.value.rows()); }

  Param f_same;   // f_uu for user targets
  Param f_cross;  // f_ut for user targets
  Param f_self;

 private:
  const Matrix& cross_weight() const { return options_.tied ? f_same.value : f_cross.value; }
  Options options_;
};

// User update over the graph's own u-u and u-t edges and weights.
Matrix HeteroConv(const HeteroConvLayer& layer, const HeteroSocialGraph& g,
                  const Matrix& h_user, const Matrix& h_topic);

// alpha = sigmoid(phi_f(sim_f) + phi_t(sim_t) + b) with phi piecewise-linear
// on kKnots evenly spaced knots over [-1, 1].
class KanEdgeModule {
 public:
  static constexpr int kKnots = 8;

  KanEdgeModule();

  // Throws DomainError for inputs outside [-1, 1] by more than 1e-6.
  double Alpha(double sim_f, double sim_t) const;
  std::vector<double> Forward(std::span<const double> sim_f,
                              std::span<const double> sim_t) const;
  // Accumulates parameter gradients given d loss / d alpha. Outputs the
  // input gradients when the spans are nonempty.
  void Backward(std::span<const double> sim_f, std::span<const double> sim_t,
                std::span<const double> grad_alpha, std::span<double> d_sim_f,
                std::span<double> d_sim_t);

  std::vector<Param*> params() { return {&coef_f, &coef_t, &bias}; }

  Param coef_f;
  Param coef_t;
  Param bias;
};

// Mean binary cross-entropy with p clamped to [1e-7, 1 - 1e-7]. Writes
// d loss / d p into `grad` when nonempty. Throws NumericError on NaN.
double Bce(std::span<const double> p, std::span<const double> y, std::span<double> grad = {});

// Mean softmax cross-entropy over rows of `logits`; `grad` (if non-null)
// receives d loss / d logits. Throws NumericError on NaN.
double CrossEntropy(const Matrix& logits, std::span<const int> labels, Matrix* grad = nullptr);

struct CosineGrad {
  RowVector d_a;
  RowVector d_b;
};
// Throws NumericError when either norm is below 1e-12.
double Cosine(const RowVector& a, const RowVector& b, CosineGrad* grad = nullptr);

double Sigmoid(double x);

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

class Adam {
 public:
  Adam(std::vector<Param*> params, AdamOptions options);
  void Step();
  void ZeroGrad();
  const AdamOptions& options() const { return options_; }

 private:
  std::vector<Param*> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  AdamOptions options_;
  long step_ = 0;
};

// Inverted dropout; returns the keep mask scaled by 1/(1-rate).
Matrix DropoutMask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng);

}  // namespace earlysd::nn

#endif  // EARLYSD_NN_H_
