#include <doctest.h>

#include <random>

#include "test_support.hpp"
#include "tmoment/dominating.hpp"
#include "tmoment/monomial_set.hpp"

using namespace tmoment;

namespace {

MultiIndex idx(std::vector<int> e) { return MultiIndex(std::move(e)); }

Polynomial one_plus_sq(int nvars, int var) {
  return Polynomial::constant(nvars, 1.0) +
         Polynomial::variable(nvars, var) * Polynomial::variable(nvars, var);
}

} // namespace

TEST_CASE("dominator of x^3 is (1+x^2)^2") {
  const Polynomial p = dominate_monomial(idx({3}));
  CHECK(p == one_plus_sq(1, 0) * one_plus_sq(1, 0));
  CHECK(p.degree() == 4);
}

TEST_CASE("dominator of x^2 comes from the even branch") {
  CHECK(dominate_monomial(idx({2})) == one_plus_sq(1, 0));
}

TEST_CASE("dominator of x1 x2 averages the two lifted squares") {
  const Polynomial expected =
      (one_plus_sq(2, 0) * one_plus_sq(2, 0) + one_plus_sq(2, 1) * one_plus_sq(2, 1)) * 0.5;
  CHECK(dominate_monomial(idx({1, 1})) == expected);
  CHECK_THROWS_AS(dominate_monomial(idx({0, 0})), std::invalid_argument);
}

TEST_CASE("degree accounting for dominators") {
  for (int n = 1; n <= 3; ++n)
    for (const auto& alpha : MonomialSet::full_degree(n, 7)) {
      if (alpha.degree() < 1) continue;
      const Polynomial p = dominate_monomial(alpha);
      const int d = alpha.degree();
      CHECK(p.degree() <= 2 * ((d + 1) / 2) + 2);
      // odd |alpha| = 2d'+1 always lands exactly on 2d'+2
      if (d % 2 == 1) CHECK(p.degree() == d + 1);
      // the even branch with no odd exponents achieves degree 2d'
      bool all_even = true;
      for (int v = 0; v < n; ++v)
        if (alpha[v] % 2 == 1) all_even = false;
      if (all_even) CHECK(p.degree() == d);
    }
}

TEST_CASE("space dominators match the worked small cases") {
  const Polynomial k1 = dominate_space(1, 1);
  CHECK(k1 == Polynomial::constant(1, 2.0) + Polynomial::monomial(idx({2})));
  CHECK(k1.degree() == 2);

  const Polynomial k2 = dominate_space(2, 1);
  CHECK(k2 == Polynomial::constant(1, 3.0) + Polynomial::monomial(idx({2}), 2.0));
  CHECK(k2.degree() == 2);

  const Polynomial k3 = dominate_space(3, 1);
  CHECK(k3.degree() == 4);

  // degree bound: k+1 when odd, k+2 when even
  for (int k = 1; k <= 5; ++k)
    for (int n = 1; n <= 2; ++n)
      CHECK(dominate_space(k, n).degree() <= (k % 2 == 1 ? k + 1 : k + 2));
}

TEST_CASE("space dominator bounds every covered monomial on a coarse grid") {
  const int k = 4, n = 2;
  const Polynomial p = dominate_space(k, n);
  const GridK grid = box_grid(n, -10.0, 10.0, 21);
  for (const auto& x : grid.points) {
    const double pv = p.eval(x);
    CHECK(pv >= 1.0 - 1e-12);
    for (const auto& alpha : MonomialSet::full_degree(n, k))
      CHECK(std::abs(eval_monomial(alpha, x)) <= pv * (1.0 + 1e-12));
  }
}

TEST_CASE("boundedness falsifier") {
  const GridK grid = box_grid(1, -5.0, 5.0, 51);
  SUBCASE("x^3 under (1+x^2)^2 is bounded with sup below one") {
    const BoundednessReport r =
        boundedness_check(Polynomial::monomial(idx({3})), dominate_monomial(idx({3})), grid);
    CHECK(r.trend_bounded);
    CHECK(r.sup_estimate <= 1.0);
  }
  SUBCASE("x^4 over 1+x^2 grows like x^2") {
    const BoundednessReport r =
        boundedness_check(Polynomial::monomial(idx({4})), one_plus_sq(1, 0), grid);
    CHECK_FALSE(r.trend_bounded);
  }
  SUBCASE("the zero polynomial has sup zero") {
    const BoundednessReport r = boundedness_check(Polynomial(1), one_plus_sq(1, 0), grid);
    CHECK(r.sup_estimate == doctest::Approx(0.0));
    CHECK(r.trend_bounded);
  }
  SUBCASE("nonpositive p at a sample point is an error") {
    const Polynomial neg = Polynomial::constant(1, -1.0);
    CHECK_THROWS_AS(boundedness_check(Polynomial::monomial(idx({1})), neg, grid),
                    std::domain_error);
  }
}

TEST_CASE("positive part norm on grids") {
  const Polynomial x_minus_1 = Polynomial::variable(1, 0) - Polynomial::constant(1, 1.0);
  CHECK(positive_part_norm(x_minus_1, box_grid(1, 0.0, 2.0, 101)) == doctest::Approx(1.0));

  const Polynomial neg = Polynomial::constant(1, -1.0) - Polynomial::monomial(idx({2}));
  CHECK(positive_part_norm(neg, box_grid(1, -3.0, 3.0, 31)) == doctest::Approx(0.0));

  // single-character grid: max{0, beta(a)}
  const GridK beta({{0.7}}, "single character");
  CHECK(positive_part_norm(Polynomial::variable(1, 0), beta) == doctest::Approx(0.7));
}

TEST_CASE("positive part norm is sublinear and dominated by squares") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> edge(0.5, 3.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int nvars = 1 + trial % 2;
    const double hi = edge(rng);
    const GridK grid = box_grid(nvars, -hi, hi, 15);
    const Polynomial a = test_support::random_polynomial(rng, nvars, 4, 5);
    const Polynomial b = test_support::random_polynomial(rng, nvars, 4, 5);

    const double na = positive_part_norm(a, grid);
    const double nb = positive_part_norm(b, grid);
    CHECK(positive_part_norm(a + b, grid) <= na + nb + 1e-10);
    const double lambda = 1.7;
    CHECK(positive_part_norm(a * lambda, grid) == doctest::Approx(lambda * na).epsilon(1e-10));

    // adding a square can only push the sup-norm above rho_K(a_+)
    for (int s = 0; s < 5; ++s) {
      const Polynomial q = test_support::random_polynomial(rng, nvars, 2, 3);
      const Polynomial shifted = a + q * q;
      double sup = 0.0;
      for (const auto& x : grid.points) sup = std::max(sup, std::abs(shifted.eval(x)));
      CHECK(sup >= na - 1e-10);
    }
  }
}
