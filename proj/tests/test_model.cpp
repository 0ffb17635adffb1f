#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "ovl/errors.hpp"
#include "ovl/model.hpp"
#include "ovl/rng.hpp"

namespace {

ovl::FeatureVector vec(std::initializer_list<double> xs) {
  ovl::FeatureVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

ovl::ClassBank axis_bank(double tau) {
  std::map<int, ovl::FeatureVector> base;
  base[0] = vec({1.0, 0.0});
  base[1] = vec({0.0, 1.0});
  return ovl::ClassBank(std::move(base), tau);
}

/// Central finite difference of a scalar function of (v1, v2).
template <typename F>
ovl::PromptGrad fd_grad(const F& loss, const ovl::PromptParams& params, double h) {
  ovl::PromptGrad g = ovl::zero_grad(static_cast<int>(params.v1.size()));
  for (int which = 0; which < 2; ++which) {
    ovl::FeatureVector& gv = which == 0 ? g.v1 : g.v2;
    for (Eigen::Index i = 0; i < gv.size(); ++i) {
      ovl::PromptParams up = params;
      ovl::PromptParams dn = params;
      (which == 0 ? up.v1 : up.v2)[i] += h;
      (which == 0 ? dn.v1 : dn.v2)[i] -= h;
      gv[i] = (loss(up) - loss(dn)) / (2.0 * h);
    }
  }
  return g;
}

double max_rel_err(const ovl::PromptGrad& a, const ovl::PromptGrad& b) {
  double worst = 0.0;
  for (int which = 0; which < 2; ++which) {
    const ovl::FeatureVector& x = which == 0 ? a.v1 : a.v2;
    const ovl::FeatureVector& y = which == 0 ? b.v1 : b.v2;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double denom = std::max({std::abs(x[i]), std::abs(y[i]), 1e-8});
      worst = std::max(worst, std::abs(x[i] - y[i]) / denom);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("text_embedding renormalizes the shifted class embedding") {
  auto bank = axis_bank(1.0);
  ovl::PromptParams p = ovl::zero_prompts(2);
  CHECK((ovl::text_embedding(0, p, bank) - vec({1.0, 0.0})).norm() <= 1e-12);
  p.v2 = vec({0.0, 1.0});
  auto g = ovl::text_embedding(0, p, bank);
  CHECK(std::abs(g[0] - 0.70711) <= 1e-5);
  CHECK(std::abs(g[1] - 0.70711) <= 1e-5);
  CHECK(std::abs(g.norm() - 1.0) <= 1e-12);
  p.v2 = vec({-1.0, 0.0});  // cancels the class-0 embedding
  CHECK_THROWS_AS(ovl::text_embedding(0, p, bank), ovl::DegenerateSum);
}

TEST_CASE("image_embedding renormalizes the shifted feature") {
  ovl::PromptParams p = ovl::zero_prompts(2);
  CHECK((ovl::image_embedding(vec({3.0, 0.0}), p) - vec({1.0, 0.0})).norm() <= 1e-12);
  p.v1 = vec({0.0, 3.0});
  auto f = ovl::image_embedding(vec({3.0, 0.0}), p);
  CHECK(std::abs(f[0] - 0.70711) <= 1e-5);
  CHECK(std::abs(f.norm() - 1.0) <= 1e-12);
  p.v1 = vec({-3.0, 0.0});
  CHECK_THROWS_AS(ovl::image_embedding(vec({3.0, 0.0}), p), ovl::DegenerateSum);
}

TEST_CASE("class bank validation") {
  std::map<int, ovl::FeatureVector> base;
  base[0] = vec({1.0, 0.0});
  CHECK_THROWS_AS(ovl::ClassBank({}, 1.0), ovl::InvalidParams);
  CHECK_THROWS_AS(ovl::ClassBank(base, 0.0), ovl::InvalidParams);
  base[1] = vec({0.0, 2.0});  // not unit norm
  CHECK_THROWS_AS(ovl::ClassBank(base, 1.0), ovl::InvalidParams);
  base[1] = vec({0.0, 1.0, 0.0});  // dimension mismatch
  CHECK_THROWS_AS(ovl::ClassBank(base, 1.0), ovl::DimensionMismatch);
  auto bank = axis_bank(0.5);
  CHECK(bank.dim() == 2);
  CHECK(bank.tau() == 0.5);
  CHECK(bank.class_ids() == std::vector<int>{0, 1});
  CHECK_THROWS_AS((void)bank.base(7), ovl::UnknownClass);
}

TEST_CASE("posterior matches the logistic value for scores (1, 0) at tau 1") {
  auto bank = axis_bank(1.0);
  ovl::PromptParams p = ovl::zero_prompts(2);
  // f = (1,0): score 1 against class 0 and 0 against class 1.
  auto post = ovl::posterior(vec({1.0, 0.0}), p, bank, {0, 1});
  CHECK(std::abs(post[0] - 0.73106) <= 1e-5);
  CHECK(std::abs(post[1] - 0.26894) <= 1e-5);
  CHECK(std::abs(post[0] + post[1] - 1.0) <= 1e-12);
}

TEST_CASE("posterior equals the naive softmax despite the stability shift") {
  ovl::rng::Stream rs(ovl::rng::derive(42u, "model-softmax"));
  for (int rep = 0; rep < 50; ++rep) {
    std::map<int, ovl::FeatureVector> base;
    for (int c = 0; c < 4; ++c) base[c] = rs.gaussian_vector(5, 1.0).normalized();
    const double tau = 0.05 + rs.uniform();
    ovl::ClassBank bank(std::move(base), tau);
    ovl::PromptParams p{rs.gaussian_vector(5, 0.2), rs.gaussian_vector(5, 0.2)};
    const ovl::FeatureVector x = rs.gaussian_vector(5, 1.0);
    const auto post = ovl::posterior(x, p, bank, {0, 1, 2, 3});
    const Eigen::VectorXd s = ovl::class_scores(x, p, bank, {0, 1, 2, 3});
    Eigen::VectorXd naive = (s.array() / tau).exp();
    naive /= naive.sum();
    for (Eigen::Index i = 0; i < naive.size(); ++i) {
      CHECK(std::abs(post[static_cast<int>(i)] - naive[i]) <= 1e-12);
    }
  }
}

TEST_CASE("posterior flattens to uniform as tau grows") {
  auto bank = axis_bank(1e6);
  auto post = ovl::posterior(vec({1.0, 0.0}), ovl::zero_prompts(2), bank, {0, 1});
  CHECK(std::abs(post[0] - 0.5) <= 1e-6);
  CHECK(std::abs(post[1] - 0.5) <= 1e-6);
}

TEST_CASE("posterior argmax is invariant to tau") {
  ovl::rng::Stream rs(ovl::rng::derive(42u, "model-argmax"));
  for (int rep = 0; rep < 20; ++rep) {
    std::map<int, ovl::FeatureVector> base;
    for (int c = 0; c < 3; ++c) base[c] = rs.gaussian_vector(4, 1.0).normalized();
    const ovl::FeatureVector x = rs.gaussian_vector(4, 1.0);
    ovl::PromptParams p = ovl::zero_prompts(4);
    int argmax_ref = -1;
    for (double tau : {0.05, 0.5, 5.0}) {
      ovl::ClassBank bank(base, tau);
      const auto post = ovl::posterior(x, p, bank, {0, 1, 2});
      int arg = 0;
      for (int c = 1; c < 3; ++c) {
        if (post[c] > post[arg]) arg = c;
      }
      if (argmax_ref < 0) argmax_ref = arg;
      CHECK(arg == argmax_ref);
    }
  }
}

TEST_CASE("ce_loss on a single-class set is exactly zero") {
  auto bank = axis_bank(1.0);
  ovl::SampleSet batch;
  batch.add({0, vec({1.0, 0.2}), ovl::Provenance::Seen});
  CHECK(ovl::ce_loss(batch, ovl::zero_prompts(2), bank, {0}) == 0.0);
}

TEST_CASE("ce_loss is ln 2 when the posterior is uniform over two classes") {
  auto bank = axis_bank(1.0);
  ovl::SampleSet batch;
  batch.add({0, vec({1.0, 1.0}), ovl::Provenance::Seen});  // equidistant feature
  CHECK(std::abs(ovl::ce_loss(batch, ovl::zero_prompts(2), bank, {0, 1}) -
                 0.69315) <= 1e-5);
}

TEST_CASE("ce_loss averages per-sample losses") {
  auto bank = axis_bank(1.0);
  ovl::SampleSet one;
  one.add({0, vec({1.0, 0.0}), ovl::Provenance::Seen});
  ovl::SampleSet other;
  other.add({1, vec({0.3, 0.8}), ovl::Provenance::Seen});
  ovl::SampleSet both;
  both.add(one.samples()[0]);
  both.add(other.samples()[0]);
  const auto p = ovl::zero_prompts(2);
  const double a = ovl::ce_loss(one, p, bank, {0, 1});
  const double b = ovl::ce_loss(other, p, bank, {0, 1});
  CHECK(std::abs(ovl::ce_loss(both, p, bank, {0, 1}) - 0.5 * (a + b)) <= 1e-12);
}

TEST_CASE("ce_loss error cases") {
  auto bank = axis_bank(1.0);
  CHECK_THROWS_AS(ovl::ce_loss(ovl::SampleSet{}, ovl::zero_prompts(2), bank, {0, 1}),
                  ovl::EmptyBatch);
  ovl::SampleSet batch;
  batch.add({5, vec({1.0, 0.0}), ovl::Provenance::Seen});
  CHECK_THROWS_AS(ovl::ce_loss(batch, ovl::zero_prompts(2), bank, {0, 1}),
                  ovl::LabelOutsideClassSet);
  CHECK_THROWS_AS(ovl::posterior(vec({1.0, 0.0}), ovl::zero_prompts(2), bank, {}),
                  ovl::InvalidParams);
}

TEST_CASE("grad_ce matches central finite differences on random configurations") {
  ovl::rng::Stream rs(ovl::rng::derive(42u, "model-fd"));
  const double h = 1e-5;
  for (int rep = 0; rep < 10; ++rep) {
    const int d = 5;
    const int n_classes = 3 + static_cast<int>(rs.next_u64() % 3);
    std::map<int, ovl::FeatureVector> base;
    std::vector<int> class_set;
    for (int c = 0; c < n_classes; ++c) {
      base[c] = rs.gaussian_vector(d, 1.0).normalized();
      class_set.push_back(c);
    }
    ovl::ClassBank bank(std::move(base), 0.3);
    ovl::PromptParams params{rs.gaussian_vector(d, 0.1), rs.gaussian_vector(d, 0.1)};
    ovl::SampleSet batch;
    for (int i = 0; i < 4; ++i) {
      batch.add({static_cast<int>(rs.next_u64() % n_classes),
                 rs.gaussian_vector(d, 1.0), ovl::Provenance::Seen});
    }
    const ovl::PromptGrad analytic = ovl::grad_ce(batch, params, bank, class_set);
    const ovl::PromptGrad fd = fd_grad(
        [&](const ovl::PromptParams& q) { return ovl::ce_loss(batch, q, bank, class_set); },
        params, h);
    CHECK(max_rel_err(analytic, fd) <= 1e-4);
  }
}

TEST_CASE("gradient along a symmetry axis vanishes") {
  // Classes (1,0) and (0,1) are mirror images across the diagonal; a feature
  // on the diagonal keeps both scores equal as v1 slides along it, so the
  // directional derivative of the loss along the diagonal is zero.
  auto bank = axis_bank(0.7);
  ovl::SampleSet batch;
  batch.add({0, vec({1.0, 1.0}), ovl::Provenance::Seen});
  ovl::PromptParams params{vec({0.2, 0.2}), vec({0.0, 0.0})};
  const auto g = ovl::grad_ce(batch, params, bank, {0, 1});
  const ovl::FeatureVector axis = vec({1.0, 1.0}).normalized();
  CHECK(std::abs(g.v1.dot(axis)) <= 1e-10);
}

TEST_CASE("a coordinate untouched by features and embeddings gets zero gradient") {
  std::map<int, ovl::FeatureVector> base;
  base[0] = vec({1.0, 0.0, 0.0});
  base[1] = vec({0.0, 1.0, 0.0});
  ovl::ClassBank bank(std::move(base), 0.5);
  ovl::SampleSet batch;
  batch.add({0, vec({0.8, 0.3, 0.0}), ovl::Provenance::Seen});
  batch.add({1, vec({0.2, 0.9, 0.0}), ovl::Provenance::Seen});
  ovl::PromptParams params{vec({0.1, -0.1, 0.0}), vec({0.05, 0.02, 0.0})};
  const auto g = ovl::grad_ce(batch, params, bank, {0, 1});
  CHECK(g.v1[2] == 0.0);
  CHECK(g.v2[2] == 0.0);
}

TEST_CASE("softmax_score_grad matches finite differences through the posterior") {
  // Differentiate L = sum_c r_c p_c with fixed r through the softmax.
  ovl::rng::Stream rs(ovl::rng::derive(42u, "model-softmax-grad"));
  const double tau = 0.4;
  const Eigen::VectorXd r = rs.gaussian_vector(3, 1.0);
  const Eigen::VectorXd s0 = rs.gaussian_vector(3, 1.0);
  auto softmax = [&](const Eigen::VectorXd& s) {
    Eigen::VectorXd e = ((s.array() - s.maxCoeff()) / tau).exp();
    e /= e.sum();
    return e;
  };
  const Eigen::VectorXd p0 = softmax(s0);
  const Eigen::VectorXd analytic =
      ovl::softmax_score_grad(ovl::DiscreteDistribution(p0), r, tau);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < 3; ++i) {
    Eigen::VectorXd up = s0, dn = s0;
    up[i] += h;
    dn[i] -= h;
    const double fd = (r.dot(softmax(up)) - r.dot(softmax(dn))) / (2.0 * h);
    CHECK(std::abs(analytic[i] - fd) <= 1e-6);
  }
}

TEST_CASE("sgd_step applies params minus lr times grad") {
  ovl::PromptParams p{vec({1.0, 0.0}), vec({0.0, 0.0})};
  ovl::PromptGrad g{vec({1.0, 0.0}), vec({0.0, 2.0})};
  const auto q = ovl::sgd_step(p, g, 0.5);
  CHECK((q.v1 - vec({0.5, 0.0})).norm() <= 1e-15);
  CHECK((q.v2 - vec({0.0, -1.0})).norm() <= 1e-15);
  // Zero gradient leaves params unchanged.
  const auto r = ovl::sgd_step(p, ovl::zero_grad(2), 0.5);
  CHECK(r.v1 == p.v1);
  CHECK(r.v2 == p.v2);
  CHECK_THROWS_AS(ovl::sgd_step(p, g, 0.0), ovl::InvalidLearningRate);
  CHECK_THROWS_AS(ovl::sgd_step(p, g, -1.0), ovl::InvalidLearningRate);
}

TEST_CASE("cross-entropy decreases over 50 SGD steps on a separable fixture") {
  std::map<int, ovl::FeatureVector> base;
  base[0] = vec({1.0, 0.0, 0.0});
  base[1] = vec({0.0, 1.0, 0.0});
  ovl::ClassBank bank(std::move(base), 0.2);
  ovl::rng::Stream rs(ovl::rng::derive(42u, "model-train"));
  ovl::SampleSet batch;
  for (int i = 0; i < 8; ++i) {
    const int y = i % 2;
    ovl::FeatureVector f = bank.base(y) + rs.gaussian_vector(3, 0.15);
    batch.add({y, f, ovl::Provenance::Seen});
  }
  ovl::PromptParams params = ovl::zero_prompts(3);
  const double initial = ovl::ce_loss(batch, params, bank, {0, 1});
  double last = initial;
  for (int step = 0; step < 50; ++step) {
    params = ovl::sgd_step(params, ovl::grad_ce(batch, params, bank, {0, 1}), 0.0025);
    last = ovl::ce_loss(batch, params, bank, {0, 1});
  }
  CHECK(last < initial);
}
