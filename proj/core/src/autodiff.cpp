#include "hibpool/autodiff.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_set>

#include "hibpool/error.hpp"

namespace hibpool::ad {
namespace {

void accumulate(const std::shared_ptr<Node>& target, const Matrix& delta) {
  if (!target->requires_grad) return;
  target->ensure_grad();
  auto& g = target->grad.data();
  const auto& d = delta.data();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += d[i];
}

// Accumulates through a callback writing into the target's gradient buffer directly.
template <typename Fn>
void accumulate_with(const std::shared_ptr<Node>& target, Fn&& fn) {
  if (!target->requires_grad) return;
  target->ensure_grad();
  fn(target->grad);
}

[[noreturn]] void shape_error(const char* op, const Matrix& a, const Matrix& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " +
                   b.shape_string());
}

void check_membership(const char* op, const Matrix& a, Membership membership, std::size_t k) {
  if (membership.size() != a.rows()) {
    throw ShapeError(std::string(op) + ": membership has " + std::to_string(membership.size()) +
                     " entries for " + std::to_string(a.rows()) + " rows");
  }
  for (std::size_t id : membership) {
    if (id >= k) {
      throw ShapeError(std::string(op) + ": membership id " + std::to_string(id) + " >= " +
                       std::to_string(k));
    }
  }
}

std::vector<std::size_t> segment_counts(const char* op, Membership membership, std::size_t k,
                                        bool require_nonempty) {
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t id : membership) ++counts[id];
  if (require_nonempty) {
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        throw ArgumentError(std::string(op) + ": segment " + std::to_string(c) + " is empty");
      }
    }
  }
  return counts;
}

template <typename Better>
Var segment_extremum(const char* op, const Var& a, Membership membership, std::size_t k, Better better) {
  const Matrix& x = a.value();
  check_membership(op, x, membership, k);
  segment_counts(op, membership, k, true);
  const std::size_t cols = x.cols();
  Matrix out(k, cols);
  std::vector<std::size_t> arg(k * cols, x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const std::size_t s = membership[i];
    for (std::size_t j = 0; j < cols; ++j) {
      std::size_t& best = arg[s * cols + j];
      if (best == x.rows() || better(x(i, j), out(s, j))) {
        best = i;
        out(s, j) = x(i, j);
      }
    }
  }
  return make_result(std::move(out), {a}, [arg = std::move(arg), cols](Node& n) {
    accumulate_with(n.parents[0], [&](Matrix& g) {
      for (std::size_t s = 0; s < n.grad.rows(); ++s)
        for (std::size_t j = 0; j < cols; ++j) g(arg[s * cols + j], j) += n.grad(s, j);
    });
  });
}

// Expects state.step to be already advanced for this update.
void adam_update(Matrix& value, const Matrix& grad, Matrix& m, Matrix& v, const AdamState& state) {
  const auto& o = state.options;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < value.size(); ++i) {
    const double g = grad.data()[i];
    double& mi = m.data()[i];
    double& vi = v.data()[i];
    mi = o.beta1 * mi + (1.0 - o.beta1) * g;
    vi = o.beta2 * vi + (1.0 - o.beta2) * g * g;
    value.data()[i] -= o.lr * (mi / c1) / (std::sqrt(vi / c2) + o.eps);
  }
}

thread_local bool g_no_grad = false;

}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_no_grad) { g_no_grad = true; }
NoGradGuard::~NoGradGuard() { g_no_grad = previous_; }
bool NoGradGuard::active() noexcept { return g_no_grad; }

void Node::ensure_grad() {
  if (!grad.same_shape(value)) grad = Matrix(value.rows(), value.cols());
}

Var::Var(Matrix value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

const Matrix& Var::grad() const {
  node_->ensure_grad();
  return node_->grad;
}

void Var::zero_grad() {
  node_->ensure_grad();
  node_->grad.fill(0.0);
}

double Var::item() const {
  if (rows() != 1 || cols() != 1) throw ShapeError("item: value is " + value().shape_string());
  return value()(0, 0);
}

Var make_result(Matrix value, std::vector<Var> inputs, std::function<void(Node&)> backward) {
  Var out;
  out.node_ = std::make_shared<Node>();
  out.node_->value = std::move(value);
  const bool needs = !g_no_grad && std::any_of(inputs.begin(), inputs.end(),
                                 [](const Var& v) { return v.requires_grad(); });
  if (needs) {
    out.node_->requires_grad = true;
    out.node_->parents.reserve(inputs.size());
    for (const auto& in : inputs) out.node_->parents.push_back(in.node());
    out.node_->backward = std::move(backward);
  }
  return out;
}

void backward(const Var& loss) {
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw ArgumentError("backward: loss must be 1x1, got " + loss.value().shape_string());
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order (parents before children).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node().get(), 0}};
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (!n->is_leaf()) {
      n->ensure_grad();
      n->grad.fill(0.0);
    }
  }
  Node* root = loss.node().get();
  root->ensure_grad();
  root->grad(0, 0) += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward) n->backward(*n);
  }
}

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a.value(), b.value());
  return make_result(hibpool::matmul(a.value(), b.value()), {a, b}, [](Node& n) {
    const auto& pa = n.parents[0];
    const auto& pb = n.parents[1];
    if (pa->requires_grad) accumulate(pa, matmul_a_bt(n.grad, pb->value));
    if (pb->requires_grad) accumulate(pb, matmul_at_b(pa->value, n.grad));
  });
}

namespace {

Var add_impl(const char* op, const Var& a, const Var& b, double sign) {
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  const bool broadcast = !x.same_shape(y);
  if (broadcast && !(y.rows() == 1 && y.cols() == x.cols())) shape_error(op, x, y);
  Matrix out = x;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    const auto yr = y.row(broadcast ? 0 : i);
    auto orow = out.row(i);
    for (std::size_t j = 0; j < out.cols(); ++j) orow[j] += sign * yr[j];
  }
  return make_result(std::move(out), {a, b}, [broadcast, sign](Node& n) {
    accumulate(n.parents[0], n.grad);
    accumulate_with(n.parents[1], [&](Matrix& g) {
      for (std::size_t i = 0; i < n.grad.rows(); ++i)
        for (std::size_t j = 0; j < n.grad.cols(); ++j) g(broadcast ? 0 : i, j) += sign * n.grad(i, j);
    });
  });
}

template <typename F, typename DF>
Var unary(const Var& a, F f, DF df) {
  Matrix out = a.value();
  for (double& v : out.data()) v = f(v);
  return make_result(std::move(out), {a}, [df](Node& n) {
    accumulate_with(n.parents[0], [&](Matrix& g) {
      const auto& x = n.parents[0]->value.data();
      const auto& y = n.value.data();
      const auto& dy = n.grad.data();
      for (std::size_t i = 0; i < x.size(); ++i) g.data()[i] += dy[i] * df(x[i], y[i]);
    });
  });
}

}  // namespace

Var add(const Var& a, const Var& b) { return add_impl("add", a, b, 1.0); }
Var sub(const Var& a, const Var& b) { return add_impl("sub", a, b, -1.0); }

Var hadamard(const Var& a, const Var& b) {
  if (!a.value().same_shape(b.value())) shape_error("hadamard", a.value(), b.value());
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.value().data()[i];
  return make_result(std::move(out), {a, b}, [](Node& n) {
    const auto& pa = n.parents[0];
    const auto& pb = n.parents[1];
    accumulate_with(pa, [&](Matrix& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] += n.grad.data()[i] * pb->value.data()[i];
    });
    accumulate_with(pb, [&](Matrix& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] += n.grad.data()[i] * pa->value.data()[i];
    });
  });
}

Var scale(const Var& a, double factor) {
  return unary(a, [factor](double x) { return factor * x; }, [factor](double, double) { return factor; });
}

Var add_scalar(const Var& a, double offset) {
  return unary(a, [offset](double x) { return x + offset; }, [](double, double) { return 1.0; });
}

Var mul_rows(const Var& a, const Var& col) {
  const Matrix& x = a.value();
  const Matrix& c = col.value();
  if (c.cols() != 1 || c.rows() != x.rows()) shape_error("mul_rows", x, c);
  Matrix out = x;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (double& v : out.row(i)) v *= c(i, 0);
  return make_result(std::move(out), {a, col}, [](Node& n) {
    const auto& pa = n.parents[0];
    const auto& pc = n.parents[1];
    accumulate_with(pa, [&](Matrix& g) {
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) += n.grad(i, j) * pc->value(i, 0);
    });
    accumulate_with(pc, [&](Matrix& g) {
      for (std::size_t i = 0; i < n.grad.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n.grad.cols(); ++j) s += n.grad(i, j) * pa->value(i, j);
        g(i, 0) += s;
      }
    });
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no operands");
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    if (p.rows() != rows) shape_error("concat_cols", parts.front().value(), p.value());
    offsets.push_back(cols);
    cols += p.cols();
  }
  Matrix out(rows, cols);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Matrix& v = parts[k].value();
    for (std::size_t i = 0; i < rows; ++i)
      std::copy(v.row(i).begin(), v.row(i).end(), out.row(i).begin() + static_cast<long>(offsets[k]));
  }
  return make_result(std::move(out), std::vector<Var>(parts.begin(), parts.end()),
                     [offsets = std::move(offsets)](Node& n) {
                       for (std::size_t k = 0; k < n.parents.size(); ++k) {
                         accumulate_with(n.parents[k], [&](Matrix& g) {
                           for (std::size_t i = 0; i < g.rows(); ++i)
                             for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) += n.grad(i, offsets[k] + j);
                         });
                       }
                     });
}

Var concat_cols(std::initializer_list<Var> parts) {
  return concat_cols(std::span<const Var>(parts.begin(), parts.size()));
}

Var slice_cols(const Var& a, std::size_t begin, std::size_t end) {
  if (begin > end || end > a.cols()) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") outside " + a.value().shape_string());
  }
  Matrix out(a.rows(), end - begin);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = begin; j < end; ++j) out(i, j - begin) = a.value()(i, j);
  return make_result(std::move(out), {a}, [begin](Node& n) {
    accumulate_with(n.parents[0], [&](Matrix& g) {
      for (std::size_t i = 0; i < n.grad.rows(); ++i)
        for (std::size_t j = 0; j < n.grad.cols(); ++j) g(i, begin + j) += n.grad(i, j);
    });
  });
}

Var relu(const Var& a) {
  return unary(a, [](double x) { return x > 0.0 || std::isnan(x) ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var softplus(const Var& a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); },
      [](double x, double) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); });
}

Var sqrt(const Var& a) {
  for (double v : a.value().data()) {
    if (v < 0.0) throw DomainError("sqrt: negative operand " + std::to_string(v));
  }
  return unary(a, [](double x) { return std::sqrt(x); }, [](double, double y) { return 0.5 / y; });
}

Var row_softmax(const Var& a) {
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    const double m = *std::max_element(r.begin(), r.end());
    double z = 0.0;
    for (double& v : r) z += (v = std::exp(v - m));
    for (double& v : r) v /= z;
  }
  return make_result(std::move(out), {a}, [](Node& n) {
    accumulate_with(n.parents[0], [&](Matrix& g) {
      for (std::size_t i = 0; i < n.value.rows(); ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n.value.cols(); ++j) dot += n.grad(i, j) * n.value(i, j);
        for (std::size_t j = 0; j < n.value.cols(); ++j) g(i, j) += n.value(i, j) * (n.grad(i, j) - dot);
      }
    });
  });
}

Var segment_sum(const Var& a, Membership membership, std::size_t k) {
  const Matrix& x = a.value();
  check_membership("segment_sum", x, membership, k);
  Matrix out(k, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(membership[i], j) += x(i, j);
  std::vector<std::size_t> ids(membership.begin(), membership.end());
  return make_result(std::move(out), {a}, [ids = std::move(ids)](Node& n) {
    accumulate_with(n.parents[0], [&](Matrix& g) {
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) += n.grad(ids[i], j);
    });
  });
}

Var segment_mean(const Var& a, Membership membership, std::size_t k) {
  const Matrix& x = a.value();
  check_membership("segment_mean", x, membership, k);
  const auto counts = segment_counts("segment_mean", membership, k, true);
  Matrix out(k, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(membership[i], j) += x(i, j);
  for (std::size_t s = 0; s < k; ++s)
    for (double& v : out.row(s)) v /= static_cast<double>(counts[s]);
  std::vector<std::size_t> ids(membership.begin(), membership.end());
  return make_result(std::move(out), {a}, [ids = std::move(ids), counts](Node& n) {
    accumulate_with(n.parents[0], [&](Matrix& g) {
      for (std::size_t i = 0; i < g.rows(); ++i) {
        const double inv = 1.0 / static_cast<double>(counts[ids[i]]);
        for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) += n.grad(ids[i], j) * inv;
      }
    });
  });
}

Var segment_max(const Var& a, Membership membership, std::size_t k) {
  return segment_extremum("segment_max", a, membership, k, [](double x, double cur) { return x > cur; });
}

Var segment_min(const Var& a, Membership membership, std::size_t k) {
  return segment_extremum("segment_min", a, membership, k, [](double x, double cur) { return x < cur; });
}

Var segment_log_sum_exp(const Var& a, Membership membership, std::size_t k) {
  const Matrix& x = a.value();
  check_membership("segment_log_sum_exp", x, membership, k);
  segment_counts("segment_log_sum_exp", membership, k, true);
  const std::size_t cols = x.cols();
  Matrix peak(k, cols, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < cols; ++j) peak(membership[i], j) = std::max(peak(membership[i], j), x(i, j));
  Matrix acc(k, cols);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < cols; ++j) acc(membership[i], j) += std::exp(x(i, j) - peak(membership[i], j));
  Matrix out(k, cols);
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t j = 0; j < cols; ++j) out(s, j) = peak(s, j) + std::log(acc(s, j));
  std::vector<std::size_t> ids(membership.begin(), membership.end());
  return make_result(std::move(out), {a}, [ids = std::move(ids)](Node& n) {
    accumulate_with(n.parents[0], [&](Matrix& g) {
      const Matrix& in = n.parents[0]->value;
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j)
          g(i, j) += n.grad(ids[i], j) * std::exp(in(i, j) - n.value(ids[i], j));
    });
  });
}

Var gather_rows(const Var& a, Membership index) {
  const Matrix& x = a.value();
  for (std::size_t id : index) {
    if (id >= x.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(id) + " outside " + x.shape_string());
    }
  }
  Matrix out(index.size(), x.cols());
  for (std::size_t i = 0; i < index.size(); ++i)
    std::copy(x.row(index[i]).begin(), x.row(index[i]).end(), out.row(i).begin());
  std::vector<std::size_t> ids(index.begin(), index.end());
  return make_result(std::move(out), {a}, [ids = std::move(ids)](Node& n) {
    accumulate_with(n.parents[0], [&](Matrix& g) {
      for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) g(ids[i], j) += n.grad(i, j);
    });
  });
}

Var gaussian_log_pdf(const Var& x, const Var& mu, const Var& var) {
  if (!x.value().same_shape(mu.value())) shape_error("gaussian_log_pdf", x.value(), mu.value());
  if (!x.value().same_shape(var.value())) shape_error("gaussian_log_pdf", x.value(), var.value());
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double s2 = var.value().data()[i];
    if (s2 <= 0.0) throw DomainError("gaussian_log_pdf: non-positive variance " + std::to_string(s2));
    const double d = x.value().data()[i] - mu.value().data()[i];
    out.data()[i] = -0.5 * (log_two_pi + std::log(s2)) - d * d / (2.0 * s2);
  }
  return make_result(std::move(out), {x, mu, var}, [](Node& n) {
    const Matrix& xv = n.parents[0]->value;
    const Matrix& mv = n.parents[1]->value;
    const Matrix& sv = n.parents[2]->value;
    const std::size_t size = n.value.size();
    accumulate_with(n.parents[0], [&](Matrix& g) {
      for (std::size_t i = 0; i < size; ++i)
        g.data()[i] -= n.grad.data()[i] * (xv.data()[i] - mv.data()[i]) / sv.data()[i];
    });
    accumulate_with(n.parents[1], [&](Matrix& g) {
      for (std::size_t i = 0; i < size; ++i)
        g.data()[i] += n.grad.data()[i] * (xv.data()[i] - mv.data()[i]) / sv.data()[i];
    });
    accumulate_with(n.parents[2], [&](Matrix& g) {
      for (std::size_t i = 0; i < size; ++i) {
        const double s2 = sv.data()[i];
        const double d = xv.data()[i] - mv.data()[i];
        g.data()[i] += n.grad.data()[i] * (-0.5 / s2 + d * d / (2.0 * s2 * s2));
      }
    });
  });
}

Var log_sum_exp(const Var& a) {
  const auto& d = a.value().data();
  if (d.empty()) throw ShapeError("log_sum_exp: empty operand");
  const double m = *std::max_element(d.begin(), d.end());
  double s = 0.0;
  for (double v : d) s += std::exp(v - m);
  return make_result(Matrix(1, 1, m + std::log(s)), {a}, [](Node& n) {
    accumulate_with(n.parents[0], [&](Matrix& g) {
      const double out = n.value(0, 0);
      const double up = n.grad(0, 0);
      const auto& in = n.parents[0]->value.data();
      for (std::size_t i = 0; i < in.size(); ++i) g.data()[i] += up * std::exp(in[i] - out);
    });
  });
}

Var mean_rows(const Var& a) {
  const Matrix& x = a.value();
  if (x.rows() == 0) throw ShapeError("mean_rows: no rows");
  Matrix out(1, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(0, j) += x(i, j);
  const double inv = 1.0 / static_cast<double>(x.rows());
  for (double& v : out.data()) v *= inv;
  return make_result(std::move(out), {a}, [inv](Node& n) {
    accumulate_with(n.parents[0], [&](Matrix& g) {
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) += n.grad(0, j) * inv;
    });
  });
}

Var sum_cols(const Var& a) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), 1);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (double v : x.row(i)) out(i, 0) += v;
  return make_result(std::move(out), {a}, [](Node& n) {
    accumulate_with(n.parents[0], [&](Matrix& g) {
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) += n.grad(i, 0);
    });
  });
}

Var sum_all(const Var& a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return make_result(Matrix(1, 1, s), {a}, [](Node& n) {
    accumulate_with(n.parents[0], [&](Matrix& g) {
      for (double& v : g.data()) v += n.grad(0, 0);
    });
  });
}

Var pick(const Var& a, std::size_t row, std::size_t col) {
  if (row >= a.rows() || col >= a.cols()) {
    throw ShapeError("pick: (" + std::to_string(row) + ", " + std::to_string(col) + ") outside " +
                     a.value().shape_string());
  }
  return make_result(Matrix(1, 1, a.value()(row, col)), {a}, [row, col](Node& n) {
    accumulate_with(n.parents[0], [&](Matrix& g) { g(row, col) += n.grad(0, 0); });
  });
}

Adam::Adam(std::vector<Var> params, AdamOptions options) : params_(std::move(params)) {
  state_.options = options;
  for (const auto& p : params_) {
    state_.first_moment.emplace_back(p.rows(), p.cols());
    state_.second_moment.emplace_back(p.rows(), p.cols());
  }
}

void Adam::step() {
  ++state_.step;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    adam_update(params_[k].mutable_value(), params_[k].grad(), state_.first_moment[k],
                state_.second_moment[k], state_);
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void adam_step(std::span<Matrix> params, std::span<const Matrix> grads, AdamState& state) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: parameter/gradient count mismatch");
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.rows(), p.cols());
      state.second_moment.emplace_back(p.rows(), p.cols());
    }
  }
  if (state.first_moment.size() != params.size()) throw ShapeError("adam_step: state/parameter count mismatch");
  ++state.step;
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params[k].same_shape(grads[k]) || !params[k].same_shape(state.first_moment[k])) {
      throw ShapeError("adam_step: shape mismatch for parameter " + std::to_string(k));
    }
    adam_update(params[k], grads[k], state.first_moment[k], state.second_moment[k], state);
  }
}

}  // namespace hibpool::ad
