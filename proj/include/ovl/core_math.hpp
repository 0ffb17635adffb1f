#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "ovl/errors.hpp"

namespace ovl {

using FeatureVector = Eigen::VectorXd;

/// Absolute tolerance on the total mass of a probability vector.
inline constexpr double kProbSumTolerance = 1e-9;
/// Slack allowed on algebraic identities (kl(p,p)=0, mmd symmetry, ...).
inline constexpr double kIdentityTolerance = 1e-12;

enum class Provenance { Seen, GeneratedUnseen, GeneratedSeen };

struct Sample {
  int class_id = 0;
  FeatureVector feature;
  Provenance provenance = Provenance::Seen;
};

/**
 * A list of labeled feature vectors sharing one dimension d.
 * Appending a sample with a different dimension or a negative class id
 * throws; an empty set has dim() == -1 until the first sample fixes d.
 */
class SampleSet {
 public:
  SampleSet() = default;

  void add(Sample s) {
    if (s.class_id < 0) throw InvalidParams("SampleSet: class_id must be >= 0");
    if (!s.feature.allFinite())
      throw InvalidParams("SampleSet: feature entries must be finite");
    if (!samples_.empty() && s.feature.size() != dim())
      throw DimensionMismatch("SampleSet: inconsistent feature dimension");
    samples_.push_back(std::move(s));
  }

  const std::vector<Sample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  int dim() const {
    return samples_.empty() ? -1 : static_cast<int>(samples_.front().feature.size());
  }

  std::vector<FeatureVector> features() const {
    std::vector<FeatureVector> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) out.push_back(s.feature);
    return out;
  }

 private:
  std::vector<Sample> samples_;
};

/**
 * Probability vector over a finite alphabet 0..n-1.
 * Invariants checked on construction: nonempty, finite, every entry >= 0,
 * total mass within kProbSumTolerance of 1.
 */
class DiscreteDistribution {
 public:
  explicit DiscreteDistribution(Eigen::VectorXd probs);

  int size() const { return static_cast<int>(probs_.size()); }
  double operator[](int i) const { return probs_[i]; }
  const Eigen::VectorXd& probs() const { return probs_; }

 private:
  Eigen::VectorXd probs_;
};

/**
 * Kullback–Leibler divergence sum_i p_i·ln(p_i/q_i), natural log.
 * Terms with p_i = 0 contribute exactly 0 (they are skipped, never evaluated
 * as 0·ln 0). A point where p_i > 0 but q_i = 0 makes the divergence
 * infinite and throws SupportViolation instead of returning inf.
 */
double kl_divergence(const DiscreteDistribution& p, const DiscreteDistribution& q);

/// Frequency vector of alphabet indices: count_i / n over 0..alphabet_size-1.
DiscreteDistribution empirical_distribution(const std::vector<int>& samples,
                                            int alphabet_size);

/// cos(a, b) = a·b / (‖a‖·‖b‖). Accepts any dense Eigen expressions.
template <typename DerivedA, typename DerivedB>
double cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                         const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size())
    throw DimensionMismatch("cosine_similarity: length mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0)
    throw ZeroVector("cosine_similarity: zero-norm argument");
  return a.derived().dot(b.derived()) / (na * nb);
}

/// Gaussian kernel K(x,y) = exp(−‖x−y‖² / (2σ²)).
template <typename DerivedA, typename DerivedB>
double gaussian_kernel(const Eigen::MatrixBase<DerivedA>& x,
                       const Eigen::MatrixBase<DerivedB>& y, double sigma) {
  if (x.size() != y.size())
    throw DimensionMismatch("gaussian_kernel: length mismatch");
  if (!(sigma > 0.0)) throw NonPositiveSigma("gaussian_kernel: sigma must be > 0");
  const double d2 = (x.derived() - y.derived()).squaredNorm();
  return std::exp(-d2 / (2.0 * sigma * sigma));
}

/**
 * Biased maximum mean discrepancy with Gaussian kernel, diagonal terms kept:
 *
 *   mmd(X, Y) = (1/n²)·ΣΣ K(x_i,x_j) + (1/n²)·ΣΣ K(y_i,y_j)
 *             − (2/n²)·ΣΣ K(x_i,y_j)
 *
 * Requires |X| = |Y| = n > 0. The value is a squared RKHS distance between
 * mean embeddings, hence >= 0 up to rounding.
 */
double mmd(const std::vector<FeatureVector>& X, const std::vector<FeatureVector>& Y,
           double sigma);

}  // namespace ovl
