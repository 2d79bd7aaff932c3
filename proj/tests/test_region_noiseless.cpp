#include <cmath>
#include <limits>

#include "doctest.h"
#include "srdp/region_noiseless.hpp"
#include "support/random_models.hpp"

using namespace srdp;
using doctest::Approx;

namespace {

const DistortionMeasure kHamming2 = DistortionMeasure::hamming(2);

SearchConfig quick_search() {
  SearchConfig s;
  s.starts = 12;
  s.seed = 3;
  return s;
}

}  // namespace

TEST_CASE("distortion measure") {
  const auto d = DistortionMeasure::hamming(3);
  CHECK(d(1, 1) == 0.0);
  CHECK(d(0, 2) == 1.0);
  CHECK(d.max_value() == 1.0);
  CHECK(d.scaled(2.5)(0, 1) == 2.5);
  CHECK_THROWS_AS(DistortionMeasure({{0.0, -1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(DistortionMeasure({{0.0, 1.0}, {1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(d.scaled(0.0), std::invalid_argument);
  CHECK(DistortionMeasure::squared_error({-1.0, 1.0})(0, 1) == 4.0);
}

TEST_CASE("witness construction checks") {
  const Pmf q = Pmf::uniform(2);
  CHECK_NOTHROW(make_noiseless_witness(q, Channel::identity(2), Channel::identity(2)));
  // Y stuck at 0 breaks realism
  CHECK_THROWS_AS(make_noiseless_witness(q, Channel::identity(2),
                                         Channel({{1.0, 0.0}, {1.0, 0.0}})),
                  std::invalid_argument);
  // |U| = 6 > 5
  CHECK_THROWS_AS(make_noiseless_witness(q, Channel::constant(2, Pmf::uniform(6)),
                                         Channel::constant(6, q)),
                  std::invalid_argument);
}

TEST_CASE("evaluate_witness corners") {
  const Pmf q = Pmf::uniform(2);
  const RateTuple lossless = evaluate_witness(
      make_noiseless_witness(q, Channel::identity(2), Channel::identity(2)), kHamming2);
  CHECK(lossless.R == Approx(1.0));
  CHECK(lossless.R0 == Approx(1.0));
  CHECK(lossless.D == 0.0);

  const RateTuple indep = evaluate_witness(
      make_noiseless_witness(q, Channel::constant(2, Pmf::point_mass(3, 1)),
                             Channel::constant(3, q)),
      kHamming2);
  CHECK(indep.R == 0.0);
  CHECK(indep.R0 == 0.0);
  CHECK(indep.D == Approx(0.5));

  const RateTuple cascade = evaluate_witness(
      make_noiseless_witness(q, Channel::bsc(0.11), Channel::bsc(0.11)), kHamming2);
  CHECK(cascade.R == Approx(1.0 - binary_entropy(0.11)).epsilon(1e-12));
  CHECK(cascade.R0 == Approx(1.0 - binary_entropy(0.11)).epsilon(1e-12));
  CHECK(cascade.D == Approx(0.1958).epsilon(1e-12));
}

TEST_CASE("evaluate_witness rejects mismatched distortion") {
  const Pmf q = Pmf::uniform(2);
  const auto w = make_noiseless_witness(q, Channel::identity(2), Channel::identity(2));
  CHECK_THROWS_AS(evaluate_witness(w, DistortionMeasure::hamming(3)), std::invalid_argument);
}

TEST_CASE("scaling the distortion scales D only") {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const Pmf q = Pmf::uniform(3);
    const Channel uc = srdp::testing::random_channel(rng, 3, 4);
    // y channel pushed to realism by fitting
    const Pmf pu = push_forward(q, uc);
    Channel yc = Channel::normalized({{1, 2, 3}, {3, 1, 1}, {1, 1, 4}, {2, 2, 1}});
    yc = fit_output_marginal(pu, yc, q, 1e-14, 5000);
    const auto w = make_noiseless_witness(q, uc, yc);
    const auto d = DistortionMeasure({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}});
    const double lambda = 0.1 + 5.0 * rng.uniform();
    const RateTuple a = evaluate_witness(w, d);
    const RateTuple b = evaluate_witness(w, d.scaled(lambda));
    REQUIRE(b.R == a.R);
    REQUIRE(b.R0 == a.R0);
    REQUIRE(b.D == Approx(lambda * a.D).epsilon(1e-14));
  }
}

TEST_CASE("certify_achievable") {
  const Pmf q = Pmf::uniform(2);
  const auto s = quick_search();

  const auto lossless = certify_achievable(q, kHamming2, {1.0, 1.0, 0.0}, s);
  REQUIRE(lossless);
  CHECK(dominated_by(evaluate_witness(*lossless, kHamming2), {1.0, 1.0, 0.0}));

  const auto zero = certify_achievable(q, kHamming2, {0.0, 0.0, 0.5 + 1e-4}, s);
  REQUIRE(zero);
  CHECK(realism_residual(*zero) <= kRealismTol);

  CHECK_FALSE(certify_achievable(q, kHamming2, {0.1, 0.1, 0.05}, s));

  SearchConfig bad = s;
  bad.starts = 0;
  CHECK_THROWS_AS(certify_achievable(q, kHamming2, {1, 1, 0}, bad), std::invalid_argument);
  bad = s;
  bad.u_size = 6;
  CHECK_THROWS_AS(certify_achievable(q, kHamming2, {1, 1, 0}, bad), std::invalid_argument);
}

TEST_CASE("minimize_rate with uncapped common randomness") {
  const auto best = minimize_rate(Pmf::uniform(2), kHamming2,
                                  std::numeric_limits<double>::infinity(), 0.1, quick_search());
  REQUIRE(best);
  CHECK(best->corner.R == Approx(1.0 - binary_entropy(0.1)).epsilon(1e-4));
}

TEST_CASE("frontier sweep examples and witness backing") {
  const Pmf q = Pmf::uniform(2);
  const std::vector<GridPoint> grid = {
      {1.0, 0.0}, {0.0, 0.5}, {std::numeric_limits<double>::infinity(), 0.1}, {0.5, 0.3}};
  const auto f = frontier_sweep(q, kHamming2, grid, quick_search());
  REQUIRE(f.size() == 4);
  REQUIRE(f[0].r_min());
  CHECK(*f[0].r_min() == Approx(1.0).epsilon(1e-4));
  REQUIRE(f[1].r_min());
  CHECK(*f[1].r_min() == Approx(0.0).epsilon(1e-6));
  REQUIRE(f[2].r_min());
  CHECK(*f[2].r_min() == Approx(0.531004).epsilon(1e-4));
  for (const auto& p : f) {
    REQUIRE(p.best);
    CHECK(realism_residual(p.best->witness) <= kRealismTol);
    const RateTuple again = evaluate_witness(p.best->witness, kHamming2);
    CHECK(std::abs(again.R - p.best->corner.R) <= 1e-6);
    CHECK(std::abs(again.R0 - p.best->corner.R0) <= 1e-6);
    CHECK(std::abs(again.D - p.best->corner.D) <= 1e-6);
    CHECK(again.R0 <= p.at.R0 + kCertifyTol);
    CHECK(again.D <= p.at.D + kCertifyTol);
  }
  CHECK_THROWS_AS(frontier_sweep(q, kHamming2, {}, quick_search()), std::invalid_argument);
}

TEST_CASE("frontier is monotone after cleanup") {
  const Pmf q = Pmf::uniform(2);
  std::vector<GridPoint> grid;
  for (double r0 : {0.2, 0.5, 0.8})
    for (double d : {0.1, 0.25, 0.4}) grid.push_back({r0, d});
  SearchConfig s = quick_search();
  s.starts = 6;
  const auto f = frontier_sweep(q, kHamming2, grid, s);
  for (const auto& a : f)
    for (const auto& b : f) {
      if (!a.best || !b.best) continue;
      if (a.at.R0 <= b.at.R0 && a.at.D <= b.at.D) CHECK(*b.r_min() <= *a.r_min() + 1e-12);
    }
}

TEST_CASE("search is deterministic for a fixed seed") {
  const Pmf q({0.2, 0.5, 0.3});
  const auto d = DistortionMeasure::hamming(3);
  SearchConfig s;
  s.starts = 6;
  s.seed = 42;
  const auto a = minimize_rate(q, d, 0.6, 0.3, s);
  s.jobs = 3;
  const auto b = minimize_rate(q, d, 0.6, 0.3, s);
  REQUIRE(a);
  REQUIRE(b);
  CHECK(a->corner.R == b->corner.R);
  CHECK(a->corner.R0 == b->corner.R0);
  CHECK(a->corner.D == b->corner.D);
}
