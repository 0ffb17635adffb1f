#include "ovl/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ovl/rng.hpp"

namespace ovl {

void JointBoundParams::validate() const {
  if (!(d_es >= 0.0)) throw InvalidParams("joint bound: d_es must be >= 0");
  if (m < 1) throw InvalidParams("joint bound: m must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidParams("joint bound: delta must lie in (0,1)");
}

void PosteriorBoundParams::validate() const {
  if (!(p_ye > 0.0 && p_ye <= 1.0))
    throw InvalidParams("posterior bound: p_ye must lie in (0,1]");
  if (m < 1) throw InvalidParams("posterior bound: m must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidParams("posterior bound: delta must lie in (0,1)");
  if (n_ye < 1) throw InvalidParams("posterior bound: n_ye must be >= 1");
  if (n_yu < n_ye) throw InvalidParams("posterior bound: n_yu must be >= n_ye");
}

double deviation_bound(const JointBoundParams& params) {
  params.validate();
  const double m = static_cast<double>(params.m);
  const double denom = 2.0 * m - 1.0;
  const double tail =
      std::log(1.0 / params.delta) + 2.5 * std::log(m) + 8.0;
  return std::sqrt(params.d_es / denom) + std::sqrt(tail / denom);
}

double joint_kl_bound(const JointBoundParams& params) {
  params.validate();
  if (params.d_es > 2.0 * static_cast<double>(params.m))
    throw ConstraintViolated("joint bound: requires d_es <= 2m");
  return params.d_es + deviation_bound(params);
}

double posterior_kl_bound(const PosteriorBoundParams& params) {
  params.validate();
  const double m = static_cast<double>(params.m);
  const double head =
      std::sqrt((std::log(1.0 / params.p_ye) + std::log(1.0 / params.delta)) /
                (2.0 * m));
  return head - std::log(static_cast<double>(params.n_ye) /
                         static_cast<double>(params.n_yu));
}

BoundCheckReport verify_joint_bound(int alphabet_size, long m, double delta,
                                    long trials, double epsilon_perturb,
                                    std::uint64_t seed) {
  if (alphabet_size < 1)
    throw InvalidParams("verify_joint_bound: alphabet_size must be >= 1");
  if (m < 1) throw InvalidParams("verify_joint_bound: m must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidParams("verify_joint_bound: delta must lie in (0,1)");
  if (trials < 1) throw InvalidParams("verify_joint_bound: trials must be >= 1");
  if (!(epsilon_perturb >= 0.0 && epsilon_perturb < 1.0))
    throw InvalidParams("verify_joint_bound: epsilon_perturb must lie in [0,1)");

  BoundCheckReport report;
  report.trials = trials;
  report.delta = delta;
  report.seed = seed;

  double lhs_sum = 0.0;
  double bound_sum = 0.0;
  long plain_violations = 0;

  for (long t = 0; t < trials; ++t) {
    rng::Stream rs(rng::derive(seed, static_cast<std::uint64_t>(t)));

    const Eigen::VectorXd o = rs.dirichlet_uniform(alphabet_size);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(alphabet_size);
    for (long i = 0; i < m; ++i) counts[rs.discrete(o)] += 1.0;

    // Add-one smoothing keeps the empirical distribution strictly positive,
    // which the bound's derivation assumes.
    const Eigen::VectorXd smoothed =
        (counts.array() + 1.0) / static_cast<double>(m + alphabet_size);
    const Eigen::VectorXd perturb = rs.dirichlet_uniform(alphabet_size);
    const Eigen::VectorXd evaluated =
        (1.0 - epsilon_perturb) * smoothed + epsilon_perturb * perturb;

    const DiscreteDistribution source(o);
    const DiscreteDistribution empirical(smoothed);
    const DiscreteDistribution eval_dist(evaluated);

    const double d_eo = kl_divergence(eval_dist, source);
    const double d_es = kl_divergence(eval_dist, empirical);
    const double lhs = std::max(0.0, d_eo - d_es);
    const double rhs = deviation_bound({d_es, m, delta});

    if (lhs > rhs) ++report.violations;
    if (d_eo > rhs) ++plain_violations;
    lhs_sum += lhs;
    bound_sum += rhs;
  }

  report.violation_rate =
      static_cast<double>(report.violations) / static_cast<double>(trials);
  report.mean_lhs = lhs_sum / static_cast<double>(trials);
  report.mean_bound = bound_sum / static_cast<double>(trials);
  report.diagnostic_plain_rate =
      static_cast<double>(plain_violations) / static_cast<double>(trials);
  return report;
}

BoundCheckReport verify_posterior_bound(int n_yu, int n_ye, long m, double delta,
                                        long trials, std::uint64_t seed) {
  if (n_ye < 1) throw InvalidParams("verify_posterior_bound: n_ye must be >= 1");
  if (n_yu < n_ye)
    throw InvalidParams("verify_posterior_bound: n_yu must be >= n_ye");
  if (m < 1) throw InvalidParams("verify_posterior_bound: m must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidParams("verify_posterior_bound: delta must lie in (0,1)");
  if (trials < 1)
    throw InvalidParams("verify_posterior_bound: trials must be >= 1");

  BoundCheckReport report;
  report.trials = trials;
  report.delta = delta;
  report.seed = seed;

  double lhs_sum = 0.0;
  double bound_sum = 0.0;

  for (long t = 0; t < trials; ++t) {
    rng::Stream rs(rng::derive(seed, static_cast<std::uint64_t>(t)));

    const Eigen::VectorXd pstar = rs.dirichlet_uniform(n_yu);

    // Predicted set = n_ye largest masses; ties break toward lower index.
    std::vector<int> order(static_cast<std::size_t>(n_yu));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return pstar[a] > pstar[b]; });
    order.resize(static_cast<std::size_t>(n_ye));

    double p_ye = 0.0;
    for (int idx : order) p_ye += pstar[idx];

    Eigen::VectorXd conditional(n_ye);
    for (int k = 0; k < n_ye; ++k) conditional[k] = pstar[order[static_cast<std::size_t>(k)]] / p_ye;

    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_ye);
    for (long i = 0; i < m; ++i) counts[rs.discrete(conditional)] += 1.0;

    // Restricted KL against the *unconditional* p*: the proof-side quantity.
    // Negative values are legitimate (ln(p^/p*) carries a −ln p_ye offset).
    double lhs = 0.0;
    for (int k = 0; k < n_ye; ++k) {
      const double ph = counts[k] / static_cast<double>(m);
      if (ph == 0.0) continue;
      lhs += ph * std::log(ph / pstar[order[static_cast<std::size_t>(k)]]);
    }

    const double rhs = posterior_kl_bound({p_ye, m, delta, n_ye, n_yu});
    if (lhs > rhs) ++report.violations;
    lhs_sum += lhs;
    bound_sum += rhs;
  }

  report.violation_rate =
      static_cast<double>(report.violations) / static_cast<double>(trials);
  report.mean_lhs = lhs_sum / static_cast<double>(trials);
  report.mean_bound = bound_sum / static_cast<double>(trials);
  return report;
}

}  // namespace ovl
