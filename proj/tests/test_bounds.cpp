#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ovl/bounds.hpp"
#include "ovl/rng.hpp"

using ovl::JointBoundParams;
using ovl::PosteriorBoundParams;

TEST_CASE("deviation_bound frozen spot values") {
  // sqrt((ln 20 + 2.5·ln 100 + 8) / 199)
  CHECK(std::abs(ovl::deviation_bound({0.0, 100, 0.05}) - 0.33632) <= 1e-4);
  // previous value + sqrt(0.2/199)
  CHECK(std::abs(ovl::deviation_bound({0.2, 100, 0.05}) - 0.36802) <= 1e-4);
  // sqrt((8 + 0 + 8) / 1) = 4
  CHECK(std::abs(ovl::deviation_bound({0.0, 1, std::exp(-8.0)}) - 4.0) <= 1e-9);
}

TEST_CASE("deviation_bound rejects invalid parameters") {
  CHECK_THROWS_AS(ovl::deviation_bound({-0.1, 100, 0.05}), ovl::InvalidParams);
  CHECK_THROWS_AS(ovl::deviation_bound({0.0, 0, 0.05}), ovl::InvalidParams);
  CHECK_THROWS_AS(ovl::deviation_bound({0.0, 100, 0.0}), ovl::InvalidParams);
  CHECK_THROWS_AS(ovl::deviation_bound({0.0, 100, 1.0}), ovl::InvalidParams);
}

TEST_CASE("joint_kl_bound adds the distance term") {
  CHECK(ovl::joint_kl_bound({0.0, 100, 0.05}) ==
        ovl::deviation_bound({0.0, 100, 0.05}));
  CHECK(std::abs(ovl::joint_kl_bound({0.2, 100, 0.05}) - 0.56802) <= 1e-4);
  CHECK_THROWS_AS(ovl::joint_kl_bound({300.0, 100, 0.05}), ovl::ConstraintViolated);

  // difference identity over random parameters
  ovl::rng::Stream rs(ovl::rng::derive(42u, "bounds-ident"));
  for (int t = 0; t < 100; ++t) {
    JointBoundParams p{rs.uniform() * 10.0, 2 + static_cast<long>(rs.next_u64() % 1000),
                       0.01 + 0.98 * rs.uniform()};
    CHECK(std::abs((ovl::joint_kl_bound(p) - ovl::deviation_bound(p)) - p.d_es) <=
          1e-12);
  }
}

TEST_CASE("posterior_kl_bound frozen spot values") {
  // sqrt((ln 2 + ln 10)/400) + ln 2
  CHECK(std::abs(ovl::posterior_kl_bound({0.5, 200, 0.1, 5, 10}) - 0.77969) <= 1e-4);
  // sqrt(ln 10 / 400)
  CHECK(std::abs(ovl::posterior_kl_bound({1.0, 200, 0.1, 10, 10}) - 0.07586) <= 1e-4);
  // both terms vanish: p_ye = 1, n_ye = n_yu, delta → 1, m large
  CHECK(ovl::posterior_kl_bound({1.0, 1000000, 0.999, 3, 3}) < 1e-3);
}

TEST_CASE("posterior_kl_bound rejects invalid parameters") {
  CHECK_THROWS_AS(ovl::posterior_kl_bound({0.0, 200, 0.1, 5, 10}), ovl::InvalidParams);
  CHECK_THROWS_AS(ovl::posterior_kl_bound({1.1, 200, 0.1, 5, 10}), ovl::InvalidParams);
  CHECK_THROWS_AS(ovl::posterior_kl_bound({0.5, 0, 0.1, 5, 10}), ovl::InvalidParams);
  CHECK_THROWS_AS(ovl::posterior_kl_bound({0.5, 200, 0.1, 11, 10}), ovl::InvalidParams);
  CHECK_THROWS_AS(ovl::posterior_kl_bound({0.5, 200, 0.1, 0, 10}), ovl::InvalidParams);
}

TEST_CASE("bounds are nonincreasing in m over the doubling grid") {
  double prev_dev = std::numeric_limits<double>::infinity();
  double prev_post = std::numeric_limits<double>::infinity();
  for (long m = 2; m <= (1L << 14); m *= 2) {
    const double dev = ovl::deviation_bound({0.3, m, 0.05});
    const double post = ovl::posterior_kl_bound({0.7, m, 0.05, 3, 9});
    CHECK(dev <= prev_dev);
    CHECK(post <= prev_post);
    prev_dev = dev;
    prev_post = post;
  }
}

TEST_CASE("posterior_kl_bound decreases as p_ye increases") {
  double prev = std::numeric_limits<double>::infinity();
  for (double p = 0.05; p <= 1.0 + 1e-12; p += 0.05) {
    const double b = ovl::posterior_kl_bound({std::min(p, 1.0), 200, 0.1, 5, 10});
    CHECK(b < prev);
    prev = b;
  }
}

TEST_CASE("verify_joint_bound degenerate and acceptance-scale runs") {
  const auto degenerate = ovl::verify_joint_bound(1, 50, 0.1, 20, 0.05, 11);
  CHECK(degenerate.violations == 0);
  CHECK(degenerate.violation_rate == 0.0);
  CHECK(degenerate.mean_lhs == 0.0);

  const auto report = ovl::verify_joint_bound(8, 200, 0.1, 1000, 0.05, 7);
  CHECK(report.trials == 1000);
  CHECK(report.violations >= 0);
  CHECK(report.violation_rate <= 0.1);
  CHECK(report.violation_rate ==
        static_cast<double>(report.violations) / 1000.0);
  CHECK(report.mean_bound > 0.0);
  CHECK(report.seed == 7);

  CHECK_THROWS_AS(ovl::verify_joint_bound(8, 200, 0.1, 0, 0.05, 7),
                  ovl::InvalidParams);
  CHECK_THROWS_AS(ovl::verify_joint_bound(0, 200, 0.1, 10, 0.05, 7),
                  ovl::InvalidParams);
  CHECK_THROWS_AS(ovl::verify_joint_bound(8, 200, 0.1, 10, 1.0, 7),
                  ovl::InvalidParams);
}

TEST_CASE("verify_joint_bound reports are bit-identical under a shared seed") {
  const auto a = ovl::verify_joint_bound(6, 100, 0.1, 200, 0.05, 123);
  const auto b = ovl::verify_joint_bound(6, 100, 0.1, 200, 0.05, 123);
  CHECK(a.violations == b.violations);
  CHECK(a.violation_rate == b.violation_rate);
  CHECK(a.mean_lhs == b.mean_lhs);
  CHECK(a.mean_bound == b.mean_bound);
  CHECK(a.diagnostic_plain_rate == b.diagnostic_plain_rate);

  const auto c = ovl::verify_joint_bound(6, 100, 0.1, 200, 0.05, 124);
  CHECK(a.mean_lhs != c.mean_lhs);
}

TEST_CASE("verify_posterior_bound degenerate and acceptance-scale runs") {
  const auto degenerate = ovl::verify_posterior_bound(1, 1, 50, 0.1, 20, 11);
  CHECK(degenerate.violations == 0);
  CHECK(degenerate.mean_lhs == 0.0);  // single class: p^ = p* = point mass

  const auto report = ovl::verify_posterior_bound(10, 5, 200, 0.1, 1000, 7);
  CHECK(report.trials == 1000);
  CHECK(report.violation_rate <= 0.1);
  CHECK(report.seed == 7);

  CHECK_THROWS_AS(ovl::verify_posterior_bound(10, 11, 200, 0.1, 10, 7),
                  ovl::InvalidParams);
  CHECK_THROWS_AS(ovl::verify_posterior_bound(10, 5, 200, 0.1, 0, 7),
                  ovl::InvalidParams);
}

TEST_CASE("verify_posterior_bound is deterministic per seed") {
  const auto a = ovl::verify_posterior_bound(8, 3, 100, 0.1, 200, 55);
  const auto b = ovl::verify_posterior_bound(8, 3, 100, 0.1, 200, 55);
  CHECK(a.mean_lhs == b.mean_lhs);
  CHECK(a.mean_bound == b.mean_bound);
  CHECK(a.violations == b.violations);
}
