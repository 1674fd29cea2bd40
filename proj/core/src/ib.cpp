#include "hibpool/ib.hpp"

#include "hibpool/error.hpp"
#include "hibpool/rng.hpp"

namespace hibpool {

GaussianBundle bundle_from_h(const Var& h, std::size_t layer) {
  if (h.cols() % 2 != 0) throw ShapeError("bundle_from_h: H has odd width " + std::to_string(h.cols()));
  const std::size_t half = h.cols() / 2;
  return {ad::slice_cols(h, 0, half), ad::add_scalar(ad::softplus(ad::slice_cols(h, half, h.cols())), kVarianceFloor),
          layer};
}

GaussianBundle standard_normal_prior(std::size_t rows, std::size_t dim) {
  return {Var::constant(Matrix(rows, dim, 0.0)), Var::constant(Matrix(rows, dim, 1.0)), 0};
}

Var reparameterized_sample(const Var& mu, const Var& var, const Matrix& eps) {
  if (!mu.value().same_shape(var.value()) || !mu.value().same_shape(eps)) {
    throw ShapeError("reparameterized_sample: mu " + mu.value().shape_string() + ", var " +
                     var.value().shape_string() + ", eps " + eps.shape_string());
  }
  for (double v : var.value().data()) {
    if (v <= 0.0) throw DomainError("reparameterized_sample: non-positive variance");
  }
  return mu + ad::hadamard(ad::sqrt(var), Var::constant(eps));
}

Var reparameterized_sample(const Var& mu, const Var& var, std::uint64_t seed) {
  NormalSampler normal(derive_seed(seed, {tag(SeedStream::kSample)}));
  Matrix eps(mu.rows(), mu.cols());
  for (double& e : eps.data()) e = normal();
  return reparameterized_sample(mu, var, eps);
}

Var mi_upper_bound_at(const Var& samples, const GaussianBundle& current, const GaussianBundle& prev,
                      const Partition& partition) {
  const std::size_t k = partition.num_communities;
  if (current.rows() != k || samples.rows() != k) {
    throw ShapeError("mi_upper_bound: " + std::to_string(current.rows()) + " bundles and " +
                     std::to_string(samples.rows()) + " samples for " + std::to_string(k) + " communities");
  }
  if (prev.rows() != partition.num_nodes()) {
    throw ShapeError("mi_upper_bound: previous bundle has " + std::to_string(prev.rows()) +
                     " rows for " + std::to_string(partition.num_nodes()) + " nodes");
  }
  if (prev.dim() != current.dim()) {
    throw ShapeError("mi_upper_bound: dimension " + std::to_string(prev.dim()) + " vs " +
                     std::to_string(current.dim()));
  }
  const Var numerator = ad::sum_cols(ad::gaussian_log_pdf(samples, current.mu, current.var));
  const Var at_members = ad::gather_rows(samples, partition.assignment);
  const Var member_log_pdf = ad::sum_cols(ad::gaussian_log_pdf(at_members, prev.mu, prev.var));
  const Var denominator = ad::segment_log_sum_exp(member_log_pdf, partition.assignment, k);
  return ad::sum_all(numerator - denominator);
}

Var mi_upper_bound(const GaussianBundle& current, const GaussianBundle& prev, const Partition& partition,
                   std::uint64_t seed, std::size_t num_samples) {
  if (num_samples == 0) throw ArgumentError("mi_upper_bound: need at least one sample");
  Var total;
  for (std::size_t s = 0; s < num_samples; ++s) {
    const Var x = reparameterized_sample(current.mu, current.var, derive_seed(seed, {s}));
    const Var term = mi_upper_bound_at(x, current, prev, partition);
    total = s == 0 ? term : total + term;
  }
  return num_samples == 1 ? total : ad::scale(total, 1.0 / static_cast<double>(num_samples));
}

Var cross_entropy_from_logits(const Var& logits, std::size_t label) {
  if (logits.rows() != 1) throw ShapeError("cross_entropy: logits must be a single row");
  if (label >= logits.cols()) {
    throw ArgumentError("cross_entropy: label " + std::to_string(label) + " outside " +
                        std::to_string(logits.cols()) + " classes");
  }
  return ad::log_sum_exp(logits) - ad::pick(logits, 0, label);
}

Var cross_entropy_loss(const Var& summary, const Var& w_out, std::size_t label) {
  return cross_entropy_from_logits(ad::matmul(summary, w_out), label);
}

IbLoss ib_loss(const ForwardResult& fwd, const ModelParams& params, const GraphStructure& structure,
               std::size_t label, double beta, std::uint64_t seed, std::size_t num_samples) {
  if (fwd.layers.empty()) throw ArgumentError("ib_loss: no layers");
  if (!(beta >= 0.0)) throw ArgumentError("ib_loss: beta must be >= 0");
  IbLoss out;
  out.cross_entropy = cross_entropy_loss(fwd.summary, params.w_out, label);

  GaussianBundle prev = standard_normal_prior(structure.layers.front().partition.num_nodes(), params.shape.hidden);
  for (std::size_t l = 0; l < fwd.layers.size(); ++l) {
    GaussianBundle current = bundle_from_h(fwd.layers[l].h, l);
    const Var term = mi_upper_bound(current, prev, structure.layers[l].partition, derive_seed(seed, {l}), num_samples);
    out.ib_term = l == 0 ? term : out.ib_term + term;
    prev = std::move(current);
  }
  out.total = beta == 0.0 ? out.cross_entropy : out.cross_entropy + ad::scale(out.ib_term, beta);

  out.report.cross_entropy = out.cross_entropy.item();
  out.report.ib_term = out.ib_term.item();
  out.report.total = out.total.item();
  out.report.beta = beta;
  return out;
}

}  // namespace hibpool
