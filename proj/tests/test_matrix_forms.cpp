#include <doctest.h>

#include <random>

#include "test_support.hpp"
#include "tmoment/moment_matrix.hpp"

using namespace tmoment;

namespace {

MultiIndex idx(std::vector<int> e) { return MultiIndex(std::move(e)); }

MomentSequence hankel_data(std::vector<double> values) {
  std::map<MultiIndex, double> map;
  for (std::size_t k = 0; k < values.size(); ++k)
    map.emplace(idx({static_cast<int>(k)}), values[k]);
  return MomentSequence(1, std::move(map));
}

const MonomialSet kBasis1{1, {idx({0}), idx({1}), idx({2})}};

} // namespace

TEST_CASE("quadratic shift moment matrix has the 1 a b / a ac be / b be bd shape") {
  const double a = .25, b = .25, c = .5, d = .5, e = .5;
  std::map<MultiIndex, double> values{
      {idx({0, 0}), 1.0},   {idx({1, 0}), a},     {idx({0, 1}), b},
      {idx({2, 0}), a * c}, {idx({1, 1}), b * e}, {idx({0, 2}), b * d},
  };
  const MomentSequence gamma(2, std::move(values));
  const MonomialSet basis(2, {idx({0, 0}), idx({1, 0}), idx({0, 1})});
  const MomentMatrix M = moment_matrix(gamma, basis);
  Eigen::MatrixXd expected(3, 3);
  expected << 1, a, b, a, a * c, b * e, b, b * e, b * d;
  CHECK((M.entries - expected).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("hankel matrix of the counterexample data") {
  const MomentMatrix M = moment_matrix(hankel_data({1, 1, 1, 1, 2}), kBasis1);
  Eigen::MatrixXd expected(3, 3);
  expected << 1, 1, 1, 1, 1, 1, 1, 1, 2;
  CHECK((M.entries - expected).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("moment matrix of the origin atom") {
  const MomentSequence gamma =
      moments_of_atomic(AtomicMeasure({{0.0}}, {1.0}), MonomialSet::full_degree(1, 2));
  const MomentMatrix M = moment_matrix(gamma, MonomialSet(1, {idx({0}), idx({1})}));
  CHECK(M.entries(0, 0) == doctest::Approx(1.0));
  CHECK(M.entries(0, 1) == doctest::Approx(0.0));
  CHECK(M.entries(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("moment matrix reports every missing index") {
  const MomentSequence gamma = hankel_data({1, 1});
  try {
    moment_matrix(gamma, kBasis1);
    FAIL("expected MissingMomentError");
  } catch (const MissingMomentError& err) {
    CHECK(err.missing().size() == 3); // x^2, x^3, x^4
    CHECK(err.missing().front() == idx({2}));
  }
}

TEST_CASE("localizing matrix examples") {
  SUBCASE("s(1-s) at the box midpoint") {
    const MomentSequence gamma =
        moments_of_atomic(AtomicMeasure({{0.5, 0.5}}, {1.0}), MonomialSet::full_degree(2, 2));
    const Constraint g(Polynomial::variable(2, 0) -
                           Polynomial::variable(2, 0) * Polynomial::variable(2, 0),
                       "s(1-s)");
    const MomentMatrix L = localizing_matrix(gamma, g, MonomialSet(2, {idx({0, 0})}));
    CHECK(L.entries(0, 0) == doctest::Approx(0.25));
  }
  SUBCASE("the unit constraint reproduces the moment matrix") {
    const MomentSequence gamma = hankel_data({1, 0.6, 0.5, 0.4, 0.35});
    const Constraint one(Polynomial::constant(1, 1.0), "1");
    const MonomialSet basis(1, {idx({0}), idx({1})});
    CHECK((localizing_matrix(gamma, one, basis).entries -
           moment_matrix(gamma, basis).entries)
              .cwiseAbs()
              .maxCoeff() == doctest::Approx(0.0));
  }
  SUBCASE("1-x^2 certifies an atom outside [-1,1]") {
    const MomentSequence gamma =
        moments_of_atomic(AtomicMeasure({{2.0}}, {1.0}), MonomialSet::full_degree(1, 2));
    const Constraint g(Polynomial::constant(1, 1.0) - Polynomial::monomial(idx({2})), "1-x^2");
    const MomentMatrix L = localizing_matrix(gamma, g, MonomialSet(1, {idx({0})}));
    CHECK(L.entries(0, 0) == doctest::Approx(-3.0));
    CHECK_FALSE(psd_rank(L).is_psd);
  }
}

TEST_CASE("psd_rank on the counterexample matrix: psd, rank 2, kernel x-1") {
  const MomentMatrix M = moment_matrix(hankel_data({1, 1, 1, 1, 2}), kBasis1);
  const PsdReport report = psd_rank(M);
  CHECK(report.is_psd);
  CHECK(report.rank == 2);
  REQUIRE(report.kernel_basis.size() == 1);
  // kernel polynomial is proportional to x - 1
  const Polynomial& k = report.kernel_basis[0];
  const double cx = k.coeff(idx({1}));
  CHECK(cx != 0.0);
  CHECK(k.coeff(idx({0})) / cx == doctest::Approx(-1.0));
  CHECK(k.coeff(idx({2})) / cx == doctest::Approx(0.0));
}

TEST_CASE("psd_rank on the identity and an indefinite matrix") {
  MomentMatrix eye{kBasis1, Eigen::MatrixXd::Identity(3, 3),
                   hankel_data({1, 0, 1, 0, 1})};
  const PsdReport id_report = psd_rank(eye);
  CHECK(id_report.is_psd);
  CHECK(id_report.rank == 3);
  CHECK(id_report.kernel_basis.empty());

  Eigen::MatrixXd flip(2, 2);
  flip << 0, 1, 1, 0;
  MomentMatrix bad{MonomialSet(1, {idx({0}), idx({1})}), flip, hankel_data({1, 1})};
  const PsdReport bad_report = psd_rank(bad);
  CHECK_FALSE(bad_report.is_psd);
  CHECK(bad_report.min_eigenvalue == doctest::Approx(-1.0));
}

TEST_CASE("psd_rank invariant: rank + kernel dimension = basis size") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 30; ++trial) {
    const int nvars = 1 + trial % 2;
    const auto m = test_support::random_measure(rng, nvars, 1 + trial % 4, -2.0, 2.0);
    const MonomialSet basis = MonomialSet::full_degree(nvars, 2);
    const MomentSequence gamma =
        moments_of_atomic(AtomicMeasure(m.atoms, m.weights), MonomialSet::full_degree(nvars, 4));
    const PsdReport report = psd_rank(moment_matrix(gamma, basis));
    CHECK(report.rank + static_cast<int>(report.kernel_basis.size()) ==
          static_cast<int>(basis.size()));
    CHECK(report.is_psd);
    CHECK(report.rank <= static_cast<int>(m.atoms.size()));
  }
}

TEST_CASE("recursive consistency rejects the counterexample data") {
  const MomentSequence gamma = hankel_data({1, 1, 1, 1, 2});
  const MomentMatrix M = moment_matrix(gamma, kBasis1);
  const ConsistencyReport report = recursive_consistency(M, gamma);
  CHECK_FALSE(report.consistent);
  REQUIRE_FALSE(report.violations.empty());
  // Lambda(x (x-1) x^2) = gamma_4 - gamma_3 = 1 for the monic kernel
  // polynomial; the reported kernel is normalized, so rescale by its
  // leading coefficient
  const PsdReport psd = psd_rank(M);
  REQUIRE(psd.kernel_basis.size() == 1);
  const double leading = psd.kernel_basis[0].coeff(idx({1}));
  CHECK(std::abs(report.violations.front().value / leading) == doctest::Approx(1.0));
}

TEST_CASE("recursive consistency accepts atomic data and full-rank matrices") {
  SUBCASE("unit atom through degree 4, basis {1,x}") {
    const MomentSequence gamma =
        moments_of_atomic(AtomicMeasure({{1.0}}, {1.0}), MonomialSet::full_degree(1, 4));
    const MomentMatrix M = moment_matrix(gamma, MonomialSet(1, {idx({0}), idx({1})}));
    const PsdReport psd = psd_rank(M);
    REQUIRE(psd.rank == 1);
    const ConsistencyReport report = recursive_consistency(M, gamma);
    CHECK(report.consistent);
    CHECK(report.violations.empty());
  }
  SUBCASE("full rank is vacuously consistent") {
    const MomentSequence gamma =
        moments_of_atomic(AtomicMeasure({{0.0}, {1.0}, {-1.0}}, {0.3, 0.4, 0.3}),
                          MonomialSet::full_degree(1, 4));
    const MomentMatrix M = moment_matrix(gamma, kBasis1);
    REQUIRE(psd_rank(M).rank == 3);
    CHECK(recursive_consistency(M, gamma).consistent);
  }
  SUBCASE("every atomic sequence is consistent") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 25; ++trial) {
      const int nvars = 1 + trial % 2;
      const auto m = test_support::random_measure(rng, nvars, 1 + trial % 4, -2.0, 2.0);
      const MomentSequence gamma = moments_of_atomic(AtomicMeasure(m.atoms, m.weights),
                                                     MonomialSet::full_degree(nvars, 6));
      const MonomialSet basis = MonomialSet::full_degree(nvars, 2);
      CHECK(recursive_consistency(moment_matrix(gamma, basis), gamma).consistent);
    }
  }
}

TEST_CASE("smulyan block criterion") {
  SUBCASE("hand examples") {
    Eigen::MatrixXd fail(2, 2);
    fail << 1, 1, 1, 0;
    CHECK_FALSE(smulyan_check(MomentMatrix{MonomialSet(1, {idx({0}), idx({1})}), fail,
                                           hankel_data({1, 1})},
                              1, 1e-9));
    CHECK(smulyan_check(MomentMatrix{MonomialSet(1, {idx({0}), idx({1})}),
                                     Eigen::MatrixXd::Identity(2, 2), hankel_data({1, 1})},
                        1, 1e-9));
  }
  SUBCASE("every split of a PSD matrix passes") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 25; ++trial) {
      const auto m = test_support::random_measure(rng, 1, 1 + trial % 3, -2.0, 2.0);
      const MomentSequence gamma =
          moments_of_atomic(AtomicMeasure(m.atoms, m.weights), MonomialSet::full_degree(1, 4));
      const MomentMatrix M = moment_matrix(gamma, kBasis1);
      for (int split = 0; split <= 3; ++split) CHECK(smulyan_check(M, split, 1e-9));

      // random dense PSD matrices as well
      Eigen::MatrixXd G = Eigen::MatrixXd::NullaryExpr(4, 4, [&rng]() {
        return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
      });
      MomentMatrix psd{MonomialSet::full_degree(1, 3), G * G.transpose(),
                       hankel_data({1, 0, 0, 0, 0, 0, 0})};
      for (int split = 0; split <= 4; ++split) CHECK(smulyan_check(psd, split, 1e-9));
    }
  }
}

TEST_CASE("localizing matrices of supported measures are PSD") {
  std::mt19937_64 rng(47);
  const std::vector<Constraint> box = {
      Constraint(Polynomial::variable(2, 0), "s"),
      Constraint(Polynomial::constant(2, 1.0) - Polynomial::variable(2, 0), "1-s"),
      Constraint(Polynomial::variable(2, 1), "t"),
      Constraint(Polynomial::constant(2, 1.0) - Polynomial::variable(2, 1), "1-t"),
  };
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = test_support::random_measure(rng, 2, 1 + trial % 4, 0.0, 1.0);
    const MomentSequence gamma =
        moments_of_atomic(AtomicMeasure(m.atoms, m.weights), MonomialSet::full_degree(2, 6));
    for (const auto& g : box) {
      const MonomialSet basis = max_localizing_basis(gamma, g);
      REQUIRE_FALSE(basis.empty());
      CHECK(psd_rank(localizing_matrix(gamma, g, basis)).is_psd);
    }
  }
}

TEST_CASE("rank equals the atom count when the basis separates the atoms") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 25; ++trial) {
    const int nvars = 1 + trial % 2;
    const int atoms = 1 + trial % 3;
    const auto m = test_support::random_measure(rng, nvars, atoms, -2.0, 2.0);
    const MonomialSet basis = MonomialSet::full_degree(nvars, 3);
    if (basis.size() < static_cast<std::size_t>(atoms)) continue;
    const MomentSequence gamma =
        moments_of_atomic(AtomicMeasure(m.atoms, m.weights), MonomialSet::full_degree(nvars, 6));
    CHECK(psd_rank(moment_matrix(gamma, basis)).rank == atoms);
  }
}

TEST_CASE("maximal bases for sparse data") {
  // {1, s, st} data: only the unit monomial squares inside the support
  std::map<MultiIndex, double> values{
      {idx({0, 0}), 1.0}, {idx({1, 0}), 2.0}, {idx({1, 1}), 6.0}};
  const MomentSequence gamma(2, std::move(values));
  CHECK(max_matrix_basis(gamma) == MonomialSet(2, {idx({0, 0})}));

  // triangular data through degree 4 supports the degree-2 basis
  const MomentSequence full =
      moments_of_atomic(AtomicMeasure({{0.3, 0.4}}, {1.0}), MonomialSet::full_degree(2, 4));
  CHECK(max_matrix_basis(full) == MonomialSet::full_degree(2, 2));

  const Constraint g(Polynomial::variable(2, 0), "s");
  CHECK(max_localizing_basis(full, g) == MonomialSet::full_degree(2, 1));
}
