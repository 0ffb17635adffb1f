#include "ovl/core_math.hpp"

#include <cmath>

namespace ovl {

DiscreteDistribution::DiscreteDistribution(Eigen::VectorXd probs)
    : probs_(std::move(probs)) {
  if (probs_.size() == 0)
    throw InvalidDistribution("DiscreteDistribution: empty probability vector");
  if (!probs_.allFinite())
    throw InvalidDistribution("DiscreteDistribution: non-finite entry");
  if ((probs_.array() < 0.0).any())
    throw InvalidDistribution("DiscreteDistribution: negative entry");
  if (std::abs(probs_.sum() - 1.0) > kProbSumTolerance)
    throw InvalidDistribution("DiscreteDistribution: entries do not sum to 1");
}

double kl_divergence(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  if (p.size() != q.size())
    throw DimensionMismatch("kl_divergence: alphabet size mismatch");
  double sum = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    if (pi == 0.0) continue;  // limit convention: 0·ln(0/q) = 0
    const double qi = q[i];
    if (qi == 0.0)
      throw SupportViolation("kl_divergence: p has mass where q is zero");
    sum += pi * std::log(pi / qi);
  }
  return sum;
}

DiscreteDistribution empirical_distribution(const std::vector<int>& samples,
                                            int alphabet_size) {
  if (samples.empty()) throw EmptySample("empirical_distribution: no samples");
  if (alphabet_size < 1)
    throw InvalidParams("empirical_distribution: alphabet_size must be >= 1");
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(alphabet_size);
  for (int s : samples) {
    if (s < 0 || s >= alphabet_size)
      throw IndexOutOfRange("empirical_distribution: index outside alphabet");
    counts[s] += 1.0;
  }
  return DiscreteDistribution(counts / static_cast<double>(samples.size()));
}

double mmd(const std::vector<FeatureVector>& X, const std::vector<FeatureVector>& Y,
           double sigma) {
  if (X.size() != Y.size()) throw LengthMismatch("mmd: |X| != |Y|");
  if (X.empty()) throw EmptyBatch("mmd: empty batches");
  if (!(sigma > 0.0)) throw NonPositiveSigma("mmd: sigma must be > 0");
  const std::size_t n = X.size();
  const auto d = X.front().size();
  for (const auto& v : X)
    if (v.size() != d) throw DimensionMismatch("mmd: inconsistent dimension in X");
  for (const auto& v : Y)
    if (v.size() != d) throw DimensionMismatch("mmd: inconsistent dimension in Y");

  // Accumulation order is chosen so that (a) swapping X and Y feeds every
  // accumulator the same addend sequence up to IEEE-commutative pair swaps,
  // making mmd(X,Y) == mmd(Y,X) bit-exact, and (b) X == Y drives all three
  // accumulators through identical sequences, cancelling to exactly 0.
  double kxx = 0.0, kyy = 0.0, kxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    kxx += gaussian_kernel(X[i], X[i], sigma);
    kyy += gaussian_kernel(Y[i], Y[i], sigma);
    kxy += gaussian_kernel(X[i], Y[i], sigma);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      kxx += 2.0 * gaussian_kernel(X[i], X[j], sigma);
      kyy += 2.0 * gaussian_kernel(Y[i], Y[j], sigma);
      kxy += gaussian_kernel(X[i], Y[j], sigma) + gaussian_kernel(X[j], Y[i], sigma);
    }
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  return kxx / n2 + kyy / n2 - 2.0 * kxy / n2;
}

}  // namespace ovl
