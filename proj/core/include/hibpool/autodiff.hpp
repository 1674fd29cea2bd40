#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "hibpool/matrix.hpp"

namespace hibpool::ad {

struct Node {
  Matrix value;
  Matrix grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward;

  bool is_leaf() const noexcept { return parents.empty(); }
  void ensure_grad();
};

/// Handle to a node of a reverse-mode computation graph holding a dense matrix value.
///
/// Copies share the node. Leaves created with `parameter` accumulate gradients across
/// `backward` calls until `zero_grad`.
class Var {
 public:
  Var() = default;
  explicit Var(Matrix value, bool requires_grad = false);

  static Var parameter(Matrix value) { return Var(std::move(value), true); }
  static Var constant(Matrix value) { return Var(std::move(value), false); }
  static Var scalar(double v) { return Var(Matrix(1, 1, v), false); }

  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  /// Gradient; an all-zero matrix of the value's shape when nothing has been accumulated.
  const Matrix& grad() const;
  void zero_grad();

  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }
  bool requires_grad() const { return node_->requires_grad; }
  double item() const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  friend Var make_result(Matrix value, std::vector<Var> inputs, std::function<void(Node&)> backward);
  std::shared_ptr<Node> node_;
};

/// While alive, ops on this thread record no backward graph.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

  static bool active() noexcept;

 private:
  bool previous_;
};

/// Builds an op output node. `backward` is dropped when no input requires a gradient
/// or a NoGradGuard is active.
Var make_result(Matrix value, std::vector<Var> inputs, std::function<void(Node&)> backward);

/// Populates gradients of every requires-grad leaf reachable from a 1x1 `loss`.
/// Leaf gradients accumulate; intermediate gradients are recomputed on each call.
void backward(const Var& loss);

using Membership = std::span<const std::size_t>;

Var matmul(const Var& a, const Var& b);
/// Elementwise sum; `b` may also be a 1 x cols row broadcast over a's rows.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var hadamard(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double offset);
/// Row i of `a` multiplied by col(i, 0); `col` is N x 1.
Var mul_rows(const Var& a, const Var& col);
Var concat_cols(std::span<const Var> parts);
Var concat_cols(std::initializer_list<Var> parts);
Var slice_cols(const Var& a, std::size_t begin, std::size_t end);

Var relu(const Var& a);
Var softplus(const Var& a);
Var sqrt(const Var& a);
Var row_softmax(const Var& a);

/// Row reductions over groups of rows sharing a membership id in [0, num_segments).
/// Max/min route the gradient to the first row attaining the extremum.
Var segment_sum(const Var& a, Membership membership, std::size_t num_segments);
Var segment_mean(const Var& a, Membership membership, std::size_t num_segments);
Var segment_max(const Var& a, Membership membership, std::size_t num_segments);
Var segment_min(const Var& a, Membership membership, std::size_t num_segments);
/// Per segment and column: log sum_{rows in segment} exp(a).
Var segment_log_sum_exp(const Var& a, Membership membership, std::size_t num_segments);

/// Output row i is row index[i] of `a`.
Var gather_rows(const Var& a, Membership index);

/// Elementwise log N(x; mu, var). Throws DomainError when any variance is <= 0.
Var gaussian_log_pdf(const Var& x, const Var& mu, const Var& var);

/// Stabilized log of the sum of exp over every entry; 1 x 1.
Var log_sum_exp(const Var& a);
Var mean_rows(const Var& a);  // 1 x cols
Var sum_cols(const Var& a);   // rows x 1
Var sum_all(const Var& a);    // 1 x 1
Var pick(const Var& a, std::size_t row, std::size_t col);  // 1 x 1

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, double s) { return scale(a, s); }
inline Var operator*(double s, const Var& a) { return scale(a, s); }

struct AdamOptions {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::size_t step = 0;
  AdamOptions options;
};

/// Adam with bias correction over `params`, reading each parameter's accumulated gradient.
class Adam {
 public:
  Adam(std::vector<Var> params, AdamOptions options = {});

  void step();
  void zero_grad();
  const AdamState& state() const noexcept { return state_; }

 private:
  std::vector<Var> params_;
  AdamState state_;
};

/// One Adam update of `params` with explicit gradients, in place.
void adam_step(std::span<Matrix> params, std::span<const Matrix> grads, AdamState& state);

}  // namespace hibpool::ad
