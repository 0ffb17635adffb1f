#pragma once

#include <cstdint>

#include "ovl/core_math.hpp"

namespace ovl {

/// Parameters of the joint-distribution bounds.
struct JointBoundParams {
  double d_es = 0.0;  ///< KL distance between evaluated and empirical joints, >= 0
  long m = 1;         ///< seen-sample count, >= 1
  double delta = 0.05;  ///< failure probability, in (0,1)

  void validate() const;
};

/// Parameters of the posterior (predicted class set) bound.
struct PosteriorBoundParams {
  double p_ye = 1.0;  ///< probability mass of the predicted class set, in (0,1]
  long m = 1;         ///< generated-sample count, >= 1
  double delta = 0.05;  ///< failure probability, in (0,1)
  long n_ye = 1;      ///< predicted class count, >= 1
  long n_yu = 1;      ///< unseen class count, >= n_ye

  void validate() const;
};

/// Aggregates of a Monte Carlo bound check.
struct BoundCheckReport {
  long trials = 0;
  long violations = 0;
  double violation_rate = 0.0;
  double delta = 0.0;
  double mean_lhs = 0.0;
  double mean_bound = 0.0;
  std::uint64_t seed = 0;
  /// Diagnostic only, never serialized and never a pass/fail gate: how often
  /// the no-additive-term variant (rhs without the leading d term on the
  /// left side subtracted) is exceeded. Zero for the posterior harness.
  double diagnostic_plain_rate = 0.0;
};

/**
 * High-probability deviation term
 *
 *   sqrt(d_es / (2m−1)) + sqrt((ln(1/δ) + (5/2)·ln m + 8) / (2m−1)).
 *
 * With probability at least 1−δ over m iid draws, the KL divergence from an
 * evaluated distribution E to the sample source exceeds the KL from E to the
 * empirical distribution S by at most this amount. Strictly positive and
 * nonincreasing in m for m >= 2.
 */
double deviation_bound(const JointBoundParams& params);

/**
 * Additive full bound d_es + deviation_bound(params) on the KL divergence
 * between the evaluated distribution and the open joint distribution.
 * Requires d_es <= 2m (throws ConstraintViolated beyond it).
 */
double joint_kl_bound(const JointBoundParams& params);

/**
 * Bound on the restricted KL divergence between the empirical distribution of
 * m labels drawn from the predicted-class posterior and the true unseen
 * posterior:
 *
 *   sqrt((ln(1/p_ye) + ln(1/δ)) / (2m)) − ln(n_ye / n_yu).
 *
 * Decreases as p_ye grows and is nonincreasing in m; reduces to
 * sqrt(ln(1/δ)/(2m)) when p_ye = 1 and n_ye = n_yu.
 */
double posterior_kl_bound(const PosteriorBoundParams& params);

/**
 * Monte Carlo check of the additive joint bound. Per trial (streams derived
 * from hash(seed, trial) so trials are order-independent):
 *   1. sample a source O uniformly from the simplex over the alphabet;
 *   2. draw m iid indices from O, form the empirical S, add-one smooth it to
 *      S~ (the bound's derivation assumes S has full support);
 *   3. form the evaluated E = (1−ε)·S~ + ε·D with a fresh simplex draw D;
 *   4. lhs = max(0, kl(E,O) − kl(E,S~)), rhs = deviation_bound(kl(E,S~), m, δ);
 *   5. count a violation when lhs > rhs.
 */
BoundCheckReport verify_joint_bound(int alphabet_size, long m, double delta,
                                    long trials, double epsilon_perturb,
                                    std::uint64_t seed);

/**
 * Monte Carlo check of the posterior bound. Per trial:
 *   1. sample p* uniformly from the simplex over n_yu classes;
 *   2. take the n_ye largest-mass classes as the predicted set, with mass
 *      p_ye and conditional distribution P_e;
 *   3. draw m iid labels from P_e, form the empirical p^ over the set;
 *   4. lhs = Σ p^(y)·ln(p^(y)/p*(y)) restricted to the predicted set — the
 *      exact proof-side quantity, which may be negative when p_ye < 1 and is
 *      deliberately not clamped;
 *   5. count a violation when lhs > posterior_kl_bound(p_ye, m, δ, n_ye, n_yu).
 */
BoundCheckReport verify_posterior_bound(int n_yu, int n_ye, long m, double delta,
                                        long trials, std::uint64_t seed);

}  // namespace ovl
