#include "ovl/model.hpp"

#include <cmath>
#include <string>

#include "ovl/errors.hpp"

namespace ovl {

namespace {
constexpr double kNormFloor = 1e-9;
constexpr double kUnitNormTolerance = 1e-6;
}  // namespace

PromptParams zero_prompts(int d) {
  if (d < 1) throw InvalidParams("dimension must be positive");
  return {FeatureVector::Zero(d), FeatureVector::Zero(d)};
}

PromptGrad zero_grad(int d) {
  if (d < 1) throw InvalidParams("dimension must be positive");
  return {FeatureVector::Zero(d), FeatureVector::Zero(d)};
}

ClassBank::ClassBank(std::map<int, FeatureVector> base_embeddings, double tau)
    : base_(std::move(base_embeddings)), tau_(tau) {
  if (base_.empty()) throw InvalidParams("class bank must hold at least one class");
  if (!(tau_ > 0.0) || !std::isfinite(tau_)) {
    throw InvalidParams("temperature must be positive and finite");
  }
  dim_ = static_cast<int>(base_.begin()->second.size());
  for (const auto& [id, emb] : base_) {
    if (id < 0) throw InvalidParams("class ids must be nonnegative");
    if (emb.size() != dim_) {
      throw DimensionMismatch("class embeddings must share one dimension");
    }
    if (!emb.allFinite()) throw InvalidParams("class embeddings must be finite");
    if (std::abs(emb.norm() - 1.0) > kUnitNormTolerance) {
      throw InvalidParams("class embedding for id " + std::to_string(id) +
                          " is not unit norm");
    }
  }
}

const FeatureVector& ClassBank::base(int class_id) const {
  auto it = base_.find(class_id);
  if (it == base_.end()) {
    throw UnknownClass("class id " + std::to_string(class_id) + " not in bank");
  }
  return it->second;
}

std::vector<int> ClassBank::class_ids() const {
  std::vector<int> ids;
  ids.reserve(base_.size());
  for (const auto& [id, emb] : base_) ids.push_back(id);
  return ids;
}

namespace {

FeatureVector normalized_sum(const FeatureVector& a, const FeatureVector& b,
                             const char* what) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(std::string(what) + ": offset dimension mismatch");
  }
  FeatureVector sum = a + b;
  const double norm = sum.norm();
  if (norm < kNormFloor) {
    throw DegenerateSum(std::string(what) + ": offset cancels the input to near zero");
  }
  sum /= norm;
  return sum;
}

void check_class_set(const ClassBank& bank, const std::vector<int>& class_set) {
  if (class_set.empty()) throw InvalidParams("class set must be nonempty");
  for (int id : class_set) (void)bank.base(id);
}

}  // namespace

FeatureVector text_embedding(int class_id, const PromptParams& params,
                             const ClassBank& bank) {
  return normalized_sum(bank.base(class_id), params.v2, "text embedding");
}

FeatureVector image_embedding(const FeatureVector& x, const PromptParams& params) {
  if (!x.allFinite()) throw InvalidParams("image feature must be finite");
  return normalized_sum(x, params.v1, "image embedding");
}

Eigen::VectorXd class_scores(const FeatureVector& x, const PromptParams& params,
                             const ClassBank& bank,
                             const std::vector<int>& class_set) {
  check_class_set(bank, class_set);
  const FeatureVector f = image_embedding(x, params);
  Eigen::VectorXd s(static_cast<Eigen::Index>(class_set.size()));
  for (std::size_t c = 0; c < class_set.size(); ++c) {
    s[static_cast<Eigen::Index>(c)] = f.dot(text_embedding(class_set[c], params, bank));
  }
  return s;
}

DiscreteDistribution posterior(const FeatureVector& x, const PromptParams& params,
                               const ClassBank& bank,
                               const std::vector<int>& class_set) {
  const Eigen::VectorXd s = class_scores(x, params, bank, class_set);
  const double shift = s.maxCoeff();
  Eigen::VectorXd e = ((s.array() - shift) / bank.tau()).exp();
  e /= e.sum();
  return DiscreteDistribution(e);
}

namespace {

int index_in_class_set(const std::vector<int>& class_set, int class_id) {
  for (std::size_t c = 0; c < class_set.size(); ++c) {
    if (class_set[c] == class_id) return static_cast<int>(c);
  }
  throw LabelOutsideClassSet("sample labeled with class id " +
                             std::to_string(class_id) + " outside the class set");
}

}  // namespace

double ce_loss(const SampleSet& batch, const PromptParams& params,
               const ClassBank& bank, const std::vector<int>& class_set) {
  if (batch.empty()) throw EmptyBatch("cross-entropy over an empty batch");
  double total = 0.0;
  for (const Sample& s : batch.samples()) {
    const int idx = index_in_class_set(class_set, s.class_id);
    const DiscreteDistribution p = posterior(s.feature, params, bank, class_set);
    total += -std::log(p[idx]);
  }
  return total / static_cast<double>(batch.size());
}

void accumulate_score_grad(const FeatureVector& x, const PromptParams& params,
                           const ClassBank& bank, const std::vector<int>& class_set,
                           const Eigen::VectorXd& dL_ds, PromptGrad& grad) {
  check_class_set(bank, class_set);
  if (dL_ds.size() != static_cast<Eigen::Index>(class_set.size())) {
    throw DimensionMismatch("score gradient length differs from class set");
  }
  if (grad.v1.size() != params.v1.size() || grad.v2.size() != params.v2.size()) {
    throw DimensionMismatch("gradient accumulator dimension differs from params");
  }

  const FeatureVector u = x + params.v1;
  const double u_norm = u.norm();
  if (u_norm < kNormFloor) throw DegenerateSum("image offset cancels the input");
  const FeatureVector f = u / u_norm;

  for (std::size_t c = 0; c < class_set.size(); ++c) {
    const double gc_coeff = dL_ds[static_cast<Eigen::Index>(c)];
    if (gc_coeff == 0.0) continue;
    const FeatureVector w = bank.base(class_set[c]) + params.v2;
    const double w_norm = w.norm();
    if (w_norm < kNormFloor) throw DegenerateSum("text offset cancels the embedding");
    const FeatureVector g = w / w_norm;
    const double s = f.dot(g);
    grad.v1 += gc_coeff / u_norm * (g - s * f);
    grad.v2 += gc_coeff / w_norm * (f - s * g);
  }
}

Eigen::VectorXd softmax_score_grad(const DiscreteDistribution& p,
                                   const Eigen::VectorXd& dL_dp, double tau) {
  if (dL_dp.size() != static_cast<Eigen::Index>(p.size())) {
    throw DimensionMismatch("posterior gradient length differs from distribution");
  }
  if (!(tau > 0.0)) throw InvalidParams("temperature must be positive");
  const Eigen::VectorXd& probs = p.probs();
  const double inner = probs.dot(dL_dp);
  return (probs.array() * (dL_dp.array() - inner) / tau).matrix();
}

PromptGrad grad_ce(const SampleSet& batch, const PromptParams& params,
                   const ClassBank& bank, const std::vector<int>& class_set) {
  if (batch.empty()) throw EmptyBatch("cross-entropy gradient over an empty batch");
  PromptGrad grad = zero_grad(static_cast<int>(params.v1.size()));
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const Sample& s : batch.samples()) {
    const int idx = index_in_class_set(class_set, s.class_id);
    const DiscreteDistribution p = posterior(s.feature, params, bank, class_set);
    // d(-ln p_y)/ds_c = (p_c - [c == y]) / tau, averaged over the batch.
    Eigen::VectorXd dL_ds = p.probs() / bank.tau();
    dL_ds[idx] -= 1.0 / bank.tau();
    dL_ds *= inv_n;
    accumulate_score_grad(s.feature, params, bank, class_set, dL_ds, grad);
  }
  return grad;
}

PromptParams sgd_step(const PromptParams& params, const PromptGrad& grad, double lr) {
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw InvalidLearningRate("learning rate must be positive and finite");
  }
  if (grad.v1.size() != params.v1.size() || grad.v2.size() != params.v2.size()) {
    throw DimensionMismatch("gradient dimension differs from params");
  }
  return {params.v1 - lr * grad.v1, params.v2 - lr * grad.v2};
}

}  // namespace ovl
