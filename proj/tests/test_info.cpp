#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "srdp/info.hpp"
#include "support/random_models.hpp"

using namespace srdp;
using doctest::Approx;

TEST_CASE("entropy") {
  CHECK(entropy(Pmf::uniform(2)) == Approx(1.0));
  CHECK(entropy(Pmf::point_mass(4, 3)) == 0.0);
  CHECK(entropy(Pmf::bernoulli(0.11)) == Approx(0.49991596).epsilon(1e-7));
  CHECK(entropy(Pmf::uniform(8)) == Approx(3.0));
}

TEST_CASE("binary entropy and its inverse") {
  CHECK(binary_entropy(0.5) == 1.0);
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.2) == Approx(0.7219280949).epsilon(1e-10));
  CHECK(binary_entropy(0.3) == Approx(binary_entropy(0.7)).epsilon(1e-15));
  CHECK_THROWS_AS(binary_entropy(-0.01), std::invalid_argument);
  CHECK_THROWS_AS(binary_entropy(1.01), std::invalid_argument);

  CHECK(inverse_binary_entropy(1.0) == Approx(0.5));
  CHECK(inverse_binary_entropy(0.0) == 0.0);
  CHECK(inverse_binary_entropy(0.7219280949) == Approx(0.2).epsilon(1e-9));
  CHECK_THROWS_AS(inverse_binary_entropy(1.5), std::invalid_argument);
  CHECK_THROWS_AS(inverse_binary_entropy(-0.5), std::invalid_argument);
}

TEST_CASE("mutual information") {
  const JointPmf prod = joint_from(Pmf({0.3, 0.7}), Channel::constant(2, Pmf({0.4, 0.6})));
  CHECK(mutual_information(prod) == 0.0);
  CHECK(mutual_information(joint_from(Pmf::uniform(2), Channel::identity(2))) == Approx(1.0));

  const JointPmf bsc = joint_from(Pmf::uniform(2), Channel::bsc(0.2));
  double brute = 0.0;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b) {
      const double p = bsc.at({a, b});
      brute += p * std::log2(p / (0.5 * 0.5));
    }
  CHECK(mutual_information(bsc) == Approx(brute).epsilon(1e-13));
  CHECK(mutual_information(bsc) == Approx(0.27807190511).epsilon(1e-10));

  CHECK_THROWS_AS(mutual_information(extend(bsc, Channel::identity(4))), std::invalid_argument);
}

TEST_CASE("conditional mutual information") {
  // A independent of (B, C)
  const JointPmf bc = joint_from(Pmf({0.2, 0.8}), Channel::bsc(0.3));
  std::vector<double> cells;
  const double pa[] = {0.6, 0.4};
  for (double a : pa)
    for (double v : bc.cells()) cells.push_back(a * v);
  CHECK(conditional_mi(JointPmf({2, 2, 2}, cells)) == Approx(0.0).epsilon(1e-15));

  // constant C
  const JointPmf ab = joint_from(Pmf({0.35, 0.65}), Channel::bsc(0.15));
  const JointPmf abc = extend(ab, Channel::constant(4, Pmf::point_mass(1, 0)));
  CHECK(conditional_mi(abc) == Approx(mutual_information(ab)).epsilon(1e-14));

  // DSBS(0.1) pair (X, Z), U = X through BSC(0.2); I(U;X|Z) by cell sum.
  const JointPmf xz = joint_from(Pmf::uniform(2), Channel::bsc(0.1));
  const Channel flip = Channel::bsc(0.2);
  std::vector<std::vector<double>> rows;
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t z = 0; z < 2; ++z) {
      auto r = flip.row(x);
      rows.emplace_back(r.begin(), r.end());
    }
  const JointPmf xzu = extend(xz, Channel(rows));
  const JointPmf uxz = marginal(xzu, {2, 0, 1});
  double brute = 0.0;
  for (std::size_t u = 0; u < 2; ++u)
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t z = 0; z < 2; ++z) {
        const double p = uxz.at({u, x, z});
        double pz = 0.0, puz = 0.0, pxz = 0.0;
        for (std::size_t a = 0; a < 2; ++a)
          for (std::size_t b = 0; b < 2; ++b) pz += uxz.at({a, b, z});
        for (std::size_t b = 0; b < 2; ++b) puz += uxz.at({u, b, z});
        for (std::size_t a = 0; a < 2; ++a) pxz += uxz.at({a, x, z});
        if (p > 0.0) brute += p * std::log2(p * pz / (puz * pxz));
      }
  CHECK(conditional_mi(uxz) == Approx(brute).epsilon(1e-13));
  CHECK_THROWS_AS(conditional_mi(ab), std::invalid_argument);
}

TEST_CASE("zero-probability conditioning letters contribute nothing") {
  std::vector<double> cells(2 * 2 * 3, 0.0);
  // C = 2 never occurs
  cells[0 * 6 + 0 * 3 + 0] = 0.25;
  cells[1 * 6 + 1 * 3 + 0] = 0.25;
  cells[0 * 6 + 1 * 3 + 1] = 0.5;
  CHECK(conditional_mi(JointPmf({2, 2, 3}, cells)) == Approx(0.5));
}

TEST_CASE("tv distance") {
  const Pmf p({0.3, 0.7});
  CHECK(tv_distance(p, p) == 0.0);
  CHECK(tv_distance(Pmf::point_mass(3, 0), Pmf::point_mass(3, 2)) == 1.0);
  CHECK(tv_distance(Pmf::bernoulli(0.3), Pmf::bernoulli(0.5)) == Approx(0.2));
  CHECK_THROWS_AS(tv_distance(Pmf::uniform(2), Pmf::uniform(3)), std::invalid_argument);
}

TEST_CASE("star operator") {
  CHECK(star(0.37, 0.0) == 0.37);
  CHECK(star(0.5, 0.13) == Approx(0.5));
  CHECK(star(0.1, 0.2) == Approx(0.26));
  CHECK(star(0.2, 0.1) == star(0.1, 0.2));
  CHECK_THROWS_AS(star(1.2, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(star(0.1, -0.1), std::invalid_argument);
}

// Properties over random instances.

TEST_CASE("mutual information is symmetric and bounded") {
  Rng rng(201);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t a = srdp::testing::random_size(rng, 1, 6);
    const std::size_t b = srdp::testing::random_size(rng, 1, 6);
    const JointPmf j = srdp::testing::random_joint(rng, {a, b});
    const Bits iab = mutual_information(j);
    const Bits iba = mutual_information(marginal(j, {1, 0}));
    REQUIRE(std::abs(iab - iba) <= 1e-12);
    REQUIRE(iab >= 0.0);
    const Bits ha = entropy(marginal_pmf(j, 0));
    const Bits hb = entropy(marginal_pmf(j, 1));
    REQUIRE(iab <= std::min(ha, hb) + 1e-12);
  }
}

TEST_CASE("data processing along X - U - Y") {
  Rng rng(202);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t nx = srdp::testing::random_size(rng, 1, 5);
    const std::size_t nu = srdp::testing::random_size(rng, 1, 5);
    const std::size_t ny = srdp::testing::random_size(rng, 1, 5);
    const Pmf p = srdp::testing::random_pmf(rng, nx);
    const Channel c1 = srdp::testing::random_channel(rng, nx, nu);
    const Channel c2 = srdp::testing::random_channel(rng, nu, ny);
    const Bits ixu = mutual_information(joint_from(p, c1));
    const Bits ixy = mutual_information(joint_from(p, compose(c1, c2)));
    REQUIRE(ixy <= ixu + 1e-10);
  }
}

TEST_CASE("tv distance is a metric") {
  Rng rng(203);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = srdp::testing::random_size(rng, 1, 8);
    const Pmf p = srdp::testing::random_pmf(rng, k);
    const Pmf q = srdp::testing::random_pmf(rng, k);
    const Pmf r = srdp::testing::random_pmf(rng, k);
    REQUIRE(tv_distance(p, q) == tv_distance(q, p));
    REQUIRE(tv_distance(p, p) <= 1e-12);
    REQUIRE(tv_distance(p, r) <= tv_distance(p, q) + tv_distance(q, r) + 1e-15);
    REQUIRE(tv_distance(p, q) >= 0.0);
    REQUIRE(tv_distance(p, q) <= 1.0);
  }
}

TEST_CASE("binary entropy grows under the star operator") {
  int checked = 0;
  for (int i = 0; i <= 50; ++i)
    for (int j = 0; j <= 50; ++j) {
      const double a = 0.5 * i / 50.0, b = 0.5 * j / 50.0;
      REQUIRE(binary_entropy(star(a, b)) >= binary_entropy(a) - 1e-15);
      ++checked;
    }
  CHECK(checked >= 1000);
}

TEST_CASE("inverse binary entropy round trip") {
  Rng rng(204);
  for (int t = 0; t < 1000; ++t) {
    const double p = 0.5 * rng.uniform();
    REQUIRE(std::abs(inverse_binary_entropy(binary_entropy(p)) - p) <= 1e-9);
  }
}
