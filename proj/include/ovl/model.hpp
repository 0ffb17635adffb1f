#pragma once

#include <map>
#include <vector>

#include "ovl/core_math.hpp"

namespace ovl {

/// The only trainable state: a visual offset added to image features and a
/// textual offset added to class embeddings, both before renormalization.
struct PromptParams {
  FeatureVector v1;  // visual prompt offset
  FeatureVector v2;  // textual prompt offset
};

PromptParams zero_prompts(int d);

/**
 * Frozen per-class unit embeddings plus the softmax temperature. Class ids
 * are arbitrary nonnegative ints; iteration order is ascending id.
 */
class ClassBank {
 public:
  ClassBank(std::map<int, FeatureVector> base_embeddings, double tau);

  const FeatureVector& base(int class_id) const;
  bool contains(int class_id) const { return base_.count(class_id) > 0; }
  double tau() const { return tau_; }
  int dim() const { return dim_; }
  std::size_t size() const { return base_.size(); }
  std::vector<int> class_ids() const;

 private:
  std::map<int, FeatureVector> base_;
  double tau_ = 1.0;
  int dim_ = 0;
};

/// normalize(base(c) + v2). The sum must keep norm >= 1e-9.
FeatureVector text_embedding(int class_id, const PromptParams& params,
                             const ClassBank& bank);

/// normalize(x + v1). The sum must keep norm >= 1e-9.
FeatureVector image_embedding(const FeatureVector& x, const PromptParams& params);

/// Cosine scores f(x) . g(c) for each class in class_set, in class_set order.
Eigen::VectorXd class_scores(const FeatureVector& x, const PromptParams& params,
                             const ClassBank& bank, const std::vector<int>& class_set);

/// softmax(scores / tau) over class_set, computed with max-shift stability.
DiscreteDistribution posterior(const FeatureVector& x, const PromptParams& params,
                               const ClassBank& bank,
                               const std::vector<int>& class_set);

/// Mean negative log posterior probability of the true class over the batch.
double ce_loss(const SampleSet& batch, const PromptParams& params,
               const ClassBank& bank, const std::vector<int>& class_set);

struct PromptGrad {
  FeatureVector v1;
  FeatureVector v2;
};

PromptGrad zero_grad(int d);

/**
 * Push a per-class score gradient dL/ds (aligned with class_set) back to the
 * prompt offsets for one input x, accumulating into grad. Both normalizations
 * are differentiated exactly: with u = x + v1, f = u/|u|, w_c = base_c + v2,
 * g_c = w_c/|w_c| and s_c = f.g_c,
 *   dL/dv1 += sum_c (dL/ds_c) (g_c - s_c f) / |u|
 *   dL/dv2 += sum_c (dL/ds_c) (f - s_c g_c) / |w_c|.
 */
void accumulate_score_grad(const FeatureVector& x, const PromptParams& params,
                           const ClassBank& bank, const std::vector<int>& class_set,
                           const Eigen::VectorXd& dL_ds, PromptGrad& grad);

/// Convert a posterior-space gradient dL/dp into a score-space gradient for a
/// temperature-tau softmax: dL/ds_c = p_c (dL/dp_c - sum_k p_k dL/dp_k) / tau.
Eigen::VectorXd softmax_score_grad(const DiscreteDistribution& p,
                                   const Eigen::VectorXd& dL_dp, double tau);

/// Exact gradient of ce_loss with respect to (v1, v2).
PromptGrad grad_ce(const SampleSet& batch, const PromptParams& params,
                   const ClassBank& bank, const std::vector<int>& class_set);

/// One plain gradient step: params - lr * grad. lr must be positive and finite.
PromptParams sgd_step(const PromptParams& params, const PromptGrad& grad, double lr);

}  // namespace ovl
