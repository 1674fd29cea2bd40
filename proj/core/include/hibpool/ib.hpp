#pragma once

#include <cstdint>

#include "hibpool/autodiff.hpp"
#include "hibpool/community.hpp"
#include "hibpool/model.hpp"

namespace hibpool {

inline constexpr double kVarianceFloor = 1e-6;

/// Diagonal Gaussians, one per row.
struct GaussianBundle {
  Var mu;
  Var var;
  std::size_t layer = 0;

  std::size_t rows() const { return mu.rows(); }
  std::size_t dim() const { return mu.cols(); }
};

/// mu = H[:, :h], var = softplus(H[:, h:]) + 1e-6.
GaussianBundle bundle_from_h(const Var& h, std::size_t layer = 0);

/// N(0, 1) per row, the prior on input node features.
GaussianBundle standard_normal_prior(std::size_t rows, std::size_t dim);

/// mu + sqrt(var) * eps with seeded eps ~ N(0, 1) held constant in the backward pass.
Var reparameterized_sample(const Var& mu, const Var& var, std::uint64_t seed);
Var reparameterized_sample(const Var& mu, const Var& var, const Matrix& eps);

/// Sum over communities k of
///   log phi(x_k; mu_k, var_k) - log sum_{v in P_k} phi(x_k; mu_prev_v, var_prev_v)
/// for the given samples x (K x h). `prev` has one row per node of the layer graph.
Var mi_upper_bound_at(const Var& samples, const GaussianBundle& current, const GaussianBundle& prev,
                      const Partition& partition);

/// Same bound with `num_samples` reparameterized draws per community, averaged.
Var mi_upper_bound(const GaussianBundle& current, const GaussianBundle& prev, const Partition& partition,
                   std::uint64_t seed, std::size_t num_samples = 1);

/// -log softmax(S W_out)[label]. Throws ArgumentError when label >= c.
Var cross_entropy_loss(const Var& summary, const Var& w_out, std::size_t label);
Var cross_entropy_from_logits(const Var& logits, std::size_t label);

struct LossReport {
  double cross_entropy = 0.0;
  double ib_term = 0.0;
  double total = 0.0;
  double beta = 0.0;
};

struct IbLoss {
  Var total;
  Var cross_entropy;
  Var ib_term;
  LossReport report;
};

/// total = CE(final summary) + beta * sum over layers of the MI bound. With beta = 0 the
/// total is the cross-entropy node itself.
IbLoss ib_loss(const ForwardResult& forward, const ModelParams& params, const GraphStructure& structure,
               std::size_t label, double beta, std::uint64_t seed, std::size_t num_samples = 1);

}  // namespace hibpool
