#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ovl/core_math.hpp"
#include "ovl/model.hpp"

namespace ovl {

/// Values squirreled away between alignment steps: one batch-mean posterior
/// and one list of embedded features per seen batch since the last trigger.
/// Everything stored here is a snapshot — later gradients treat it as data.
struct AccumulatorState {
  std::vector<Eigen::VectorXd> stored_posteriors;
  std::vector<std::vector<FeatureVector>> stored_embeddings;

  bool empty() const { return stored_posteriors.empty() && stored_embeddings.empty(); }
  std::size_t size() const { return stored_posteriors.size(); }
  void clear() {
    stored_posteriors.clear();
    stored_embeddings.clear();
  }
};

struct AlignConfig {
  double alpha = 1.0;     // weight of the posterior-alignment loss
  double beta = 1.0;      // weight of the feature-alignment loss
  int period = 8;         // alignment step every `period` iterations
  int k3 = 1;             // how many smallest per-batch losses to average
  double mmd_sigma = 1.0; // Gaussian kernel bandwidth for the feature loss
  double lr = 0.0025;     // SGD learning rate

  void validate() const;
};

/// Mean of the per-sample posteriors over the batch.
DiscreteDistribution batch_posterior(const SampleSet& batch, const PromptParams& params,
                                     const ClassBank& bank,
                                     const std::vector<int>& class_set);

/// Posterior-alignment loss between a seen-batch posterior and a generated
/// batch posterior: their KL divergence.
double kl_align_loss(const DiscreteDistribution& p_seen,
                     const DiscreteDistribution& p_gen);

/// Evidence lower bound of the generated posterior under the seen posterior:
/// sum_y p_seen(y) ln p_seen(y) - KL(p_seen || p_gen), which algebraically
/// equals sum_y p_seen(y) ln p_gen(y).
double elbo_estimate(const DiscreteDistribution& p_seen,
                     const DiscreteDistribution& p_gen);

/// Indices of the min(k, n) smallest values, ordered by value (ties by index).
std::vector<int> select_topk_smallest(const std::vector<double>& values, int k);

/// One metrics row per training iteration (iter is 1-based within the epoch).
struct EpochMetricsRow {
  int iter = 0;
  double l_ce = 0.0;
  double l_kl = 0.0;
  double l_mmd = 0.0;
  double l_total = 0.0;
  bool aligned = false;
};
using EpochMetrics = std::vector<EpochMetricsRow>;

/**
 * Frozen view of one alignment step: the current seen batch (live), the
 * accumulator contents (constants), and the generated batches (live). The
 * losses and gradients below are functions of PromptParams with everything
 * stored here held fixed, which makes the step finite-difference checkable.
 */
struct TriggerContext {
  SampleSet seen_batch;
  Eigen::VectorXd accumulated_posterior;                  // mean of stored posteriors
  std::vector<std::vector<FeatureVector>> stored_embeddings;
  std::vector<SampleSet> gen_unseen_batches;
  std::vector<SampleSet> gen_seen_batches;
};

struct TriggerLosses {
  double l_ce = 0.0;
  double l_kl = 0.0;
  double l_mmd = 0.0;
  double l_total = 0.0;  // l_ce + alpha * l_kl + beta * l_mmd
};

/// All loss terms of one alignment step at the given params.
TriggerLosses trigger_losses(const TriggerContext& ctx, const PromptParams& params,
                             const ClassBank& bank, const std::vector<int>& class_set,
                             const AlignConfig& cfg);

struct TriggerGrads {
  PromptGrad ce;
  PromptGrad kl;
  PromptGrad mmd;
  PromptGrad total;  // ce + alpha * kl + beta * mmd
};

/// Exact gradients of the alignment-step losses with respect to (v1, v2).
TriggerGrads trigger_grads(const TriggerContext& ctx, const PromptParams& params,
                           const ClassBank& bank, const std::vector<int>& class_set,
                           const AlignConfig& cfg);

/// Called at each alignment step with the 1-based iteration, the context the
/// step consumed, and the params it was evaluated at (before the update).
/// Used by tests and diagnostics.
using TriggerObserver =
    std::function<void(int iter, const TriggerContext& ctx, const PromptParams& at)>;

struct EpochResult {
  PromptParams params;
  EpochMetrics metrics;
  AccumulatorState accumulator;  // whatever remains accumulated at epoch end
};

/**
 * One epoch of sparse-alignment training.
 *
 * The seen set is shuffled once (stream derived from seed) and split into
 * consecutive batches of batch_size. Every iteration takes a cross-entropy
 * step and stores the batch posterior and embedded features; every period-th
 * iteration additionally applies the alignment losses against the generated
 * sets, using the stored values as constants, then empties the accumulator.
 * Generated batches are split in input order (no shuffle).
 *
 * With alpha = beta = 0 the parameter update is exactly the cross-entropy
 * update, so the trajectory is bit-identical to ce_train_epoch; the
 * alignment losses are still computed and recorded in the metrics.
 */
EpochResult sparse_train_epoch(const SampleSet& seen, const SampleSet& gen_unseen,
                               const SampleSet& gen_seen, PromptParams params,
                               const ClassBank& bank, const AlignConfig& cfg,
                               int batch_size, std::uint64_t seed,
                               const TriggerObserver& observer = {});

/// Reference loop: identical shuffling and batching, cross-entropy steps
/// only. Used to pin down what sparse training must reduce to when both
/// alignment weights are zero.
EpochResult ce_train_epoch(const SampleSet& seen, PromptParams params,
                           const ClassBank& bank, double lr, int batch_size,
                           std::uint64_t seed);

/// Per-class agreement between a seen-batch posterior and a generated-batch
/// posterior: gap(y) = ln(p_seen(y) p_gen(y) / Z) - elbo, with Z the
/// normalizer of the posterior product. All-zero products are a support
/// violation, matching KL.
struct AlignmentDiagnostics {
  double elbo = 0.0;
  Eigen::VectorXd gap;
};

AlignmentDiagnostics alignment_diagnostics(const SampleSet& seen_batch,
                                           const SampleSet& gen_batch,
                                           const PromptParams& params,
                                           const ClassBank& bank,
                                           const std::vector<int>& class_set);

}  // namespace ovl
