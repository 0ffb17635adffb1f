#include "ovl/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ovl/errors.hpp"
#include "ovl/rng.hpp"

namespace ovl {

void AlignConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha) || !(beta >= 0.0) ||
      !std::isfinite(beta)) {
    throw InvalidParams("alignment weights must be finite and nonnegative");
  }
  if (period < 1) throw InvalidParams("alignment period must be at least 1");
  if (k3 < 1) throw InvalidParams("k3 must be at least 1");
  if (!(mmd_sigma > 0.0) || !std::isfinite(mmd_sigma)) {
    throw NonPositiveSigma("kernel bandwidth must be positive and finite");
  }
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw InvalidLearningRate("learning rate must be positive and finite");
  }
}

DiscreteDistribution batch_posterior(const SampleSet& batch, const PromptParams& params,
                                     const ClassBank& bank,
                                     const std::vector<int>& class_set) {
  if (batch.empty()) throw EmptyBatch("batch posterior over an empty batch");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(class_set.size()));
  for (const Sample& s : batch.samples()) {
    mean += posterior(s.feature, params, bank, class_set).probs();
  }
  mean /= static_cast<double>(batch.size());
  return DiscreteDistribution(mean);
}

double kl_align_loss(const DiscreteDistribution& p_seen,
                     const DiscreteDistribution& p_gen) {
  return kl_divergence(p_seen, p_gen);
}

double elbo_estimate(const DiscreteDistribution& p_seen,
                     const DiscreteDistribution& p_gen) {
  double entropy_term = 0.0;
  for (int y = 0; y < static_cast<int>(p_seen.size()); ++y) {
    const double p = p_seen[y];
    if (p > 0.0) entropy_term += p * std::log(p);
  }
  return entropy_term - kl_divergence(p_seen, p_gen);
}

std::vector<int> select_topk_smallest(const std::vector<double>& values, int k) {
  if (values.empty()) throw EmptyList("top-k selection over an empty list");
  if (k < 1) throw InvalidParams("k must be at least 1");
  std::vector<int> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  });
  idx.resize(std::min<std::size_t>(static_cast<std::size_t>(k), idx.size()));
  return idx;
}

namespace {

std::vector<FeatureVector> embed_batch(const SampleSet& batch,
                                       const PromptParams& params) {
  std::vector<FeatureVector> out;
  out.reserve(batch.size());
  for (const Sample& s : batch.samples()) {
    out.push_back(image_embedding(s.feature, params));
  }
  return out;
}

std::vector<SampleSet> chunk(const SampleSet& set, int batch_size) {
  std::vector<SampleSet> out;
  SampleSet cur;
  for (const Sample& s : set.samples()) {
    cur.add(s);
    if (static_cast<int>(cur.size()) == batch_size) {
      out.push_back(std::move(cur));
      cur = SampleSet{};
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

void check_trigger_context(const TriggerContext& ctx,
                           const std::vector<int>& class_set) {
  if (ctx.gen_unseen_batches.empty() || ctx.gen_seen_batches.empty()) {
    throw EmptyGenerated("alignment step requires generated batches of both kinds");
  }
  if (ctx.stored_embeddings.empty()) {
    throw InvalidParams("alignment step requires stored seen embeddings");
  }
  if (ctx.accumulated_posterior.size() !=
      static_cast<Eigen::Index>(class_set.size())) {
    throw DimensionMismatch("accumulated posterior length differs from class set");
  }
}

/// Per-batch feature-alignment values: stored seen embeddings are paired
/// round-robin with the generated batches and both sides are truncated to a
/// common length before the kernel discrepancy.
std::vector<double> mmd_values(const TriggerContext& ctx, const PromptParams& params,
                               double sigma,
                               std::vector<std::vector<FeatureVector>>* embedded_out) {
  std::vector<double> vals;
  vals.reserve(ctx.gen_seen_batches.size());
  for (std::size_t m = 0; m < ctx.gen_seen_batches.size(); ++m) {
    const std::vector<FeatureVector>& stored =
        ctx.stored_embeddings[m % ctx.stored_embeddings.size()];
    std::vector<FeatureVector> gen = embed_batch(ctx.gen_seen_batches[m], params);
    const std::size_t n = std::min(stored.size(), gen.size());
    if (n == 0) throw EmptyBatch("feature alignment over an empty batch");
    std::vector<FeatureVector> x(stored.begin(), stored.begin() + n);
    std::vector<FeatureVector> y(gen.begin(), gen.begin() + n);
    vals.push_back(mmd(x, y, sigma));
    if (embedded_out) embedded_out->push_back(std::move(gen));
  }
  return vals;
}

}  // namespace

TriggerLosses trigger_losses(const TriggerContext& ctx, const PromptParams& params,
                             const ClassBank& bank, const std::vector<int>& class_set,
                             const AlignConfig& cfg) {
  cfg.validate();
  check_trigger_context(ctx, class_set);

  TriggerLosses out;
  out.l_ce = ce_loss(ctx.seen_batch, params, bank, class_set);

  const DiscreteDistribution target(ctx.accumulated_posterior);
  std::vector<double> kl_vals;
  kl_vals.reserve(ctx.gen_unseen_batches.size());
  for (const SampleSet& gb : ctx.gen_unseen_batches) {
    kl_vals.push_back(kl_align_loss(target, batch_posterior(gb, params, bank, class_set)));
  }
  const std::vector<int> kl_sel = select_topk_smallest(kl_vals, cfg.k3);
  for (int j : kl_sel) out.l_kl += kl_vals[j];
  out.l_kl /= static_cast<double>(kl_sel.size());

  const std::vector<double> mmd_vals = mmd_values(ctx, params, cfg.mmd_sigma, nullptr);
  const std::vector<int> mmd_sel = select_topk_smallest(mmd_vals, cfg.k3);
  for (int m : mmd_sel) out.l_mmd += mmd_vals[m];
  out.l_mmd /= static_cast<double>(mmd_sel.size());

  out.l_total = out.l_ce + cfg.alpha * out.l_kl + cfg.beta * out.l_mmd;
  return out;
}

TriggerGrads trigger_grads(const TriggerContext& ctx, const PromptParams& params,
                           const ClassBank& bank, const std::vector<int>& class_set,
                           const AlignConfig& cfg) {
  cfg.validate();
  check_trigger_context(ctx, class_set);
  const int d = static_cast<int>(params.v1.size());

  TriggerGrads out{zero_grad(d), zero_grad(d), zero_grad(d), zero_grad(d)};
  out.ce = grad_ce(ctx.seen_batch, params, bank, class_set);

  // Posterior-alignment gradient. The target q is a constant; only the
  // generated batch posteriors depend on the params. For the selected
  // batches, d KL(q || p) / d p_y = -q_y / p_y, averaged over the selection
  // and over each batch's samples.
  const DiscreteDistribution target(ctx.accumulated_posterior);
  std::vector<double> kl_vals;
  std::vector<std::vector<DiscreteDistribution>> per_sample;
  std::vector<Eigen::VectorXd> batch_means;
  kl_vals.reserve(ctx.gen_unseen_batches.size());
  for (const SampleSet& gb : ctx.gen_unseen_batches) {
    if (gb.empty()) throw EmptyBatch("batch posterior over an empty batch");
    std::vector<DiscreteDistribution> ps;
    ps.reserve(gb.size());
    Eigen::VectorXd mean =
        Eigen::VectorXd::Zero(static_cast<Eigen::Index>(class_set.size()));
    for (const Sample& s : gb.samples()) {
      ps.push_back(posterior(s.feature, params, bank, class_set));
      mean += ps.back().probs();
    }
    mean /= static_cast<double>(gb.size());
    kl_vals.push_back(kl_divergence(target, DiscreteDistribution(mean)));
    per_sample.push_back(std::move(ps));
    batch_means.push_back(std::move(mean));
  }
  const std::vector<int> kl_sel = select_topk_smallest(kl_vals, cfg.k3);
  const double kl_sel_inv = 1.0 / static_cast<double>(kl_sel.size());
  for (int j : kl_sel) {
    const SampleSet& gb = ctx.gen_unseen_batches[static_cast<std::size_t>(j)];
    Eigen::VectorXd dL_dmean(static_cast<Eigen::Index>(class_set.size()));
    for (Eigen::Index y = 0; y < dL_dmean.size(); ++y) {
      const double q = target[static_cast<int>(y)];
      dL_dmean[y] = q > 0.0 ? -kl_sel_inv * q / batch_means[j][y] : 0.0;
    }
    const Eigen::VectorXd dL_dsample = dL_dmean / static_cast<double>(gb.size());
    for (std::size_t i = 0; i < gb.size(); ++i) {
      const Eigen::VectorXd dL_ds = softmax_score_grad(
          per_sample[j][i], dL_dsample, bank.tau());
      accumulate_score_grad(gb.samples()[i].feature, params, bank, class_set, dL_ds,
                            out.kl);
    }
  }

  // Feature-alignment gradient. Stored embeddings are constants; only the
  // generated side is differentiated. With y_a the embedded generated
  // features, x_j the stored ones and kernel k:
  //   d MMD / d y_a = (2 / (n^2 sigma^2)) *
  //       ( sum_j k(y_a, y_j)(y_j - y_a) - sum_j k(x_j, y_a)(x_j - y_a) ).
  std::vector<std::vector<FeatureVector>> embedded;
  const std::vector<double> mmd_vals =
      mmd_values(ctx, params, cfg.mmd_sigma, &embedded);
  const std::vector<int> mmd_sel = select_topk_smallest(mmd_vals, cfg.k3);
  const double mmd_sel_inv = 1.0 / static_cast<double>(mmd_sel.size());
  const double sigma2 = cfg.mmd_sigma * cfg.mmd_sigma;
  for (int m : mmd_sel) {
    const std::vector<FeatureVector>& stored =
        ctx.stored_embeddings[static_cast<std::size_t>(m) % ctx.stored_embeddings.size()];
    const std::vector<FeatureVector>& gen = embedded[static_cast<std::size_t>(m)];
    const SampleSet& gb = ctx.gen_seen_batches[static_cast<std::size_t>(m)];
    const std::size_t n = std::min(stored.size(), gen.size());
    const double scale = mmd_sel_inv * 2.0 / (static_cast<double>(n) *
                                              static_cast<double>(n) * sigma2);
    for (std::size_t a = 0; a < n; ++a) {
      FeatureVector dmmd_dy = FeatureVector::Zero(gen[a].size());
      for (std::size_t j = 0; j < n; ++j) {
        if (j != a) {
          dmmd_dy += gaussian_kernel(gen[a], gen[j], cfg.mmd_sigma) * (gen[j] - gen[a]);
        }
        dmmd_dy -= gaussian_kernel(stored[j], gen[a], cfg.mmd_sigma) * (stored[j] - gen[a]);
      }
      dmmd_dy *= scale;
      // Back through y_a = normalize(x_a + v1).
      const FeatureVector u = gb.samples()[a].feature + params.v1;
      const double u_norm = u.norm();
      out.mmd.v1 += (dmmd_dy - gen[a].dot(dmmd_dy) * gen[a]) / u_norm;
    }
  }

  out.total.v1 = out.ce.v1 + cfg.alpha * out.kl.v1 + cfg.beta * out.mmd.v1;
  out.total.v2 = out.ce.v2 + cfg.alpha * out.kl.v2 + cfg.beta * out.mmd.v2;
  return out;
}

namespace {

void check_disjoint(const SampleSet& seen, const SampleSet& gen_unseen) {
  std::set<int> seen_ids;
  for (const Sample& s : seen.samples()) seen_ids.insert(s.class_id);
  for (const Sample& s : gen_unseen.samples()) {
    if (seen_ids.count(s.class_id)) {
      throw DisjointnessViolation("generated-unseen class id " +
                                  std::to_string(s.class_id) +
                                  " also appears in the seen set");
    }
  }
}

}  // namespace

EpochResult sparse_train_epoch(const SampleSet& seen, const SampleSet& gen_unseen,
                               const SampleSet& gen_seen, PromptParams params,
                               const ClassBank& bank, const AlignConfig& cfg,
                               int batch_size, std::uint64_t seed,
                               const TriggerObserver& observer) {
  cfg.validate();
  if (batch_size < 1) throw InvalidParams("batch size must be at least 1");
  if (seen.empty()) throw EmptyBatch("training epoch requires seen samples");
  check_disjoint(seen, gen_unseen);

  const std::vector<int> class_set = bank.class_ids();

  rng::Stream shuffle_stream(rng::derive(seed, "shuffle"));
  const std::vector<int> order =
      shuffle_stream.shuffled_indices(static_cast<int>(seen.size()));

  std::vector<SampleSet> batches;
  {
    SampleSet shuffled;
    for (int i : order) shuffled.add(seen.samples()[static_cast<std::size_t>(i)]);
    batches = chunk(shuffled, batch_size);
  }
  const std::vector<SampleSet> gen_u_batches = chunk(gen_unseen, batch_size);
  const std::vector<SampleSet> gen_s_batches = chunk(gen_seen, batch_size);

  AccumulatorState acc;
  EpochMetrics metrics;
  metrics.reserve(batches.size());

  for (std::size_t b = 0; b < batches.size(); ++b) {
    const int iter = static_cast<int>(b) + 1;
    const SampleSet& batch = batches[b];

    acc.stored_posteriors.push_back(
        batch_posterior(batch, params, bank, class_set).probs());
    acc.stored_embeddings.push_back(embed_batch(batch, params));

    if (iter % cfg.period == 0) {
      Eigen::VectorXd accumulated =
          Eigen::VectorXd::Zero(static_cast<Eigen::Index>(class_set.size()));
      for (const Eigen::VectorXd& p : acc.stored_posteriors) accumulated += p;
      accumulated /= static_cast<double>(acc.stored_posteriors.size());

      TriggerContext ctx{batch, std::move(accumulated), acc.stored_embeddings,
                         gen_u_batches, gen_s_batches};
      const TriggerLosses losses = trigger_losses(ctx, params, bank, class_set, cfg);
      const TriggerGrads grads = trigger_grads(ctx, params, bank, class_set, cfg);
      if (observer) observer(iter, ctx, params);
      // With both weights zero the update is exactly the cross-entropy
      // gradient, keeping the trajectory bit-identical to plain training.
      const PromptGrad& update =
          (cfg.alpha == 0.0 && cfg.beta == 0.0) ? grads.ce : grads.total;
      params = sgd_step(params, update, cfg.lr);
      metrics.push_back(
          {iter, losses.l_ce, losses.l_kl, losses.l_mmd, losses.l_total, true});
      acc.clear();
    } else {
      const double l_ce = ce_loss(batch, params, bank, class_set);
      const PromptGrad g = grad_ce(batch, params, bank, class_set);
      params = sgd_step(params, g, cfg.lr);
      metrics.push_back({iter, l_ce, 0.0, 0.0, l_ce, false});
    }
  }

  return {std::move(params), std::move(metrics), std::move(acc)};
}

EpochResult ce_train_epoch(const SampleSet& seen, PromptParams params,
                           const ClassBank& bank, double lr, int batch_size,
                           std::uint64_t seed) {
  if (batch_size < 1) throw InvalidParams("batch size must be at least 1");
  if (seen.empty()) throw EmptyBatch("training epoch requires seen samples");
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw InvalidLearningRate("learning rate must be positive and finite");
  }
  const std::vector<int> class_set = bank.class_ids();

  rng::Stream shuffle_stream(rng::derive(seed, "shuffle"));
  const std::vector<int> order =
      shuffle_stream.shuffled_indices(static_cast<int>(seen.size()));
  SampleSet shuffled;
  for (int i : order) shuffled.add(seen.samples()[static_cast<std::size_t>(i)]);
  const std::vector<SampleSet> batches = chunk(shuffled, batch_size);

  EpochMetrics metrics;
  metrics.reserve(batches.size());
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const int iter = static_cast<int>(b) + 1;
    const double l_ce = ce_loss(batches[b], params, bank, class_set);
    const PromptGrad g = grad_ce(batches[b], params, bank, class_set);
    params = sgd_step(params, g, lr);
    metrics.push_back({iter, l_ce, 0.0, 0.0, l_ce, false});
  }
  return {std::move(params), std::move(metrics), AccumulatorState{}};
}

AlignmentDiagnostics alignment_diagnostics(const SampleSet& seen_batch,
                                           const SampleSet& gen_batch,
                                           const PromptParams& params,
                                           const ClassBank& bank,
                                           const std::vector<int>& class_set) {
  const DiscreteDistribution p_seen = batch_posterior(seen_batch, params, bank, class_set);
  const DiscreteDistribution p_gen = batch_posterior(gen_batch, params, bank, class_set);

  AlignmentDiagnostics out;
  out.elbo = elbo_estimate(p_seen, p_gen);

  const Eigen::VectorXd product = p_seen.probs().cwiseProduct(p_gen.probs());
  const double z = product.sum();
  if (!(z > 0.0)) {
    throw SupportViolation("posterior product has no common support");
  }
  out.gap = (product.array() / z).log().matrix();
  out.gap.array() -= out.elbo;
  return out;
}

}  // namespace ovl
