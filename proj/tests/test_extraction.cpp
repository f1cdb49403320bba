#include <doctest.h>

#include <random>

#include "test_support.hpp"
#include "tmoment/extraction.hpp"

using namespace tmoment;

namespace {

MultiIndex idx(std::vector<int> e) { return MultiIndex(std::move(e)); }

// extended matrix straight from a measure: flat by construction
MomentMatrix extended_matrix(const AtomicMeasure& mu, int degree) {
  const int nvars = mu.nvars();
  const MonomialSet principal = MonomialSet::full_degree(nvars, degree);
  const MonomialSet extended = closure(principal);
  const MomentSequence gamma = moments_of_atomic(mu, MonomialSet::full_degree(nvars, 2 * degree + 2));
  return moment_matrix(gamma, extended);
}

} // namespace

TEST_CASE("single atom gives a one-dimensional system with shift [c]") {
  const AtomicMeasure delta({{1.7}}, {1.0});
  const MomentMatrix M = extended_matrix(delta, 1);
  const MultiplicationSystem sys =
      build_multiplication_system(M, MonomialSet::full_degree(1, 1));
  REQUIRE(sys.pivot_basis.size() == 1);
  CHECK(sys.shift_matrices[0](0, 0) == doctest::Approx(1.7));

  const MomentSequence gamma = moments_of_atomic(delta, MonomialSet::full_degree(1, 2));
  const AtomicMeasure out = extract_atoms(sys, gamma);
  REQUIRE(out.size() == 1);
  CHECK(out.atoms()[0][0] == doctest::Approx(1.7));
  CHECK(out.weights()[0] == doctest::Approx(1.0));
}

TEST_CASE("two symmetric atoms: shift eigenvalues +-1, weights one half") {
  const AtomicMeasure mu({{-1.0}, {1.0}}, {0.5, 0.5});
  const MomentMatrix M = extended_matrix(mu, 1);
  const MultiplicationSystem sys =
      build_multiplication_system(M, MonomialSet::full_degree(1, 1));
  REQUIRE(sys.pivot_basis.size() == 2);
  const Eigen::VectorXcd eigs = sys.shift_matrices[0].eigenvalues();
  std::vector<double> roots{eigs(0).real(), eigs(1).real()};
  std::sort(roots.begin(), roots.end());
  CHECK(roots[0] == doctest::Approx(-1.0));
  CHECK(roots[1] == doctest::Approx(1.0));

  const MomentSequence gamma = moments_of_atomic(mu, MonomialSet::full_degree(1, 2));
  const AtomicMeasure out = extract_atoms(sys, gamma);
  REQUIRE(out.size() == 2);
  CHECK(out.weights()[0] == doctest::Approx(0.5));
  CHECK(out.weights()[1] == doctest::Approx(0.5));
}

TEST_CASE("zero-one atoms give the x(x-1) companion spectrum") {
  const AtomicMeasure mu({{0.0}, {1.0}}, {0.5, 0.5});
  const MomentMatrix M = extended_matrix(mu, 1);
  const MultiplicationSystem sys =
      build_multiplication_system(M, MonomialSet::full_degree(1, 1));
  const Eigen::VectorXcd eigs = sys.shift_matrices[0].eigenvalues();
  std::vector<double> roots{eigs(0).real(), eigs(1).real()};
  std::sort(roots.begin(), roots.end());
  CHECK(roots[0] == doctest::Approx(0.0));
  CHECK(roots[1] == doctest::Approx(1.0));
}

TEST_CASE("three atoms in two variables: commuting shifts, atoms recovered") {
  const AtomicMeasure mu({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}}, {0.25, 0.25, 0.5});
  const MomentMatrix M = extended_matrix(mu, 1);
  const MultiplicationSystem sys =
      build_multiplication_system(M, MonomialSet::full_degree(2, 1));
  REQUIRE(sys.pivot_basis.size() == 3);
  REQUIRE(sys.shift_matrices.size() == 2);
  const Eigen::MatrixXd& Ns = sys.shift_matrices[0];
  const Eigen::MatrixXd& Nt = sys.shift_matrices[1];
  CHECK((Ns * Nt - Nt * Ns).norm() <= 1e-9);

  const MomentSequence gamma = moments_of_atomic(mu, MonomialSet::full_degree(2, 2));
  const AtomicMeasure out = extract_atoms(sys, gamma);
  REQUIRE(out.size() == 3);
  double worst_position = 0.0, worst_weight = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double best = 1e9;
    std::size_t match = 0;
    for (std::size_t j = 0; j < out.size(); ++j) {
      const double d = std::hypot(out.atoms()[j][0] - mu.atoms()[i][0],
                                  out.atoms()[j][1] - mu.atoms()[i][1]);
      if (d < best) {
        best = d;
        match = j;
      }
    }
    worst_position = std::max(worst_position, best);
    worst_weight = std::max(worst_weight, std::abs(out.weights()[match] - mu.weights()[i]));
  }
  CHECK(worst_position < 1e-8);
  CHECK(worst_weight < 1e-8);
}

TEST_CASE("a negative weight aborts the extraction instead of being clamped") {
  const AtomicMeasure mu({{0.0}, {1.0}}, {0.5, 0.5});
  const MomentMatrix M = extended_matrix(mu, 1);
  const MultiplicationSystem sys =
      build_multiplication_system(M, MonomialSet::full_degree(1, 1));
  // gamma_1 > gamma_0 forces lambda at the origin atom below zero
  std::map<MultiIndex, double> skewed{{idx({0}), 1.0}, {idx({1}), 2.0}};
  CHECK_THROWS_WITH_AS(extract_atoms(sys, MomentSequence(1, skewed)),
                       doctest::Contains("negative weight"), ExtractionError);
}

TEST_CASE("non-commuting shifts are refused") {
  MultiplicationSystem sys;
  sys.pivot_basis = MonomialSet(2, {idx({0, 0}), idx({1, 0})});
  Eigen::MatrixXd A(2, 2), B(2, 2);
  A << 0, 1, 0, 0;
  B << 0, 0, 1, 0;
  sys.shift_matrices = {A, B};
  const MomentSequence gamma =
      moments_of_atomic(AtomicMeasure({{0.5, 0.5}}, {1.0}), MonomialSet::full_degree(2, 1));
  CHECK_THROWS_AS(extract_atoms(sys, gamma), ExtractionError);
}

TEST_CASE("verify_representation measures the worst relative residual") {
  const AtomicMeasure mu({{0.25}, {0.75}}, {0.5, 0.5});
  const MonomialSet c = MonomialSet::full_degree(1, 3);
  const MomentSequence gamma = moments_of_atomic(mu, c);

  SUBCASE("exact round trip") {
    const RepresentationCheck check = verify_representation(gamma, mu, c, 1e-12);
    CHECK(check.ok);
    CHECK(check.max_residual == doctest::Approx(0.0));
  }
  SUBCASE("a 1e-3 weight perturbation shows up as a 1e-3 residual") {
    const AtomicMeasure off({{0.25}, {0.75}}, {0.5 + 1e-3, 0.5});
    const RepresentationCheck check = verify_representation(gamma, off, c, 1e-6);
    CHECK_FALSE(check.ok);
    CHECK(check.max_residual == doctest::Approx(1e-3).epsilon(0.05));
  }
  SUBCASE("the unit set alone checks total mass") {
    const MonomialSet ones(1, {idx({0})});
    const AtomicMeasure off({{0.25}, {0.75}}, {0.5, 0.6});
    const RepresentationCheck check = verify_representation(gamma, off, ones, 1e-12);
    CHECK(check.max_residual == doctest::Approx(0.1));
  }
}

TEST_CASE("oracle equivalence on random measures") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 40; ++trial) {
    const int nvars = 1 + trial % 2;
    const int natoms = 1 + trial % 4;
    const int degree = nvars == 1 ? 3 : 2;
    if (static_cast<int>(MonomialSet::full_degree(nvars, degree).size()) < natoms) continue;
    const auto m = test_support::random_measure(rng, nvars, natoms, -2.0, 2.0);
    const AtomicMeasure mu(m.atoms, m.weights);

    const MomentMatrix M_ext = extended_matrix(mu, degree);
    const MultiplicationSystem sys =
        build_multiplication_system(M_ext, MonomialSet::full_degree(nvars, degree));
    const MomentSequence gamma =
        moments_of_atomic(mu, MonomialSet::full_degree(nvars, 2 * degree + 2));
    const AtomicMeasure out = extract_atoms(sys, gamma);

    // Tchakaloff: never more atoms than the pivot dimension
    CHECK(out.size() <= sys.pivot_basis.size());
    REQUIRE(out.size() == mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
      double best = 1e9;
      std::size_t match = 0;
      for (std::size_t j = 0; j < out.size(); ++j) {
        double d2 = 0.0;
        for (int v = 0; v < nvars; ++v) {
          const double d = out.atoms()[j][static_cast<std::size_t>(v)] -
                           mu.atoms()[i][static_cast<std::size_t>(v)];
          d2 += d * d;
        }
        if (d2 < best) {
          best = d2;
          match = j;
        }
      }
      CHECK(std::sqrt(best) < 1e-6);
      CHECK(std::abs(out.weights()[match] - mu.weights()[i]) < 1e-6);
    }
  }
}

TEST_CASE("extraction is deterministic for a fixed seed") {
  const AtomicMeasure mu({{0.2, 0.8}, {0.7, 0.3}}, {0.4, 0.6});
  const MomentMatrix M = extended_matrix(mu, 1);
  const MultiplicationSystem sys =
      build_multiplication_system(M, MonomialSet::full_degree(2, 1));
  const MomentSequence gamma = moments_of_atomic(mu, MonomialSet::full_degree(2, 2));
  const AtomicMeasure a = extract_atoms(sys, gamma);
  const AtomicMeasure b = extract_atoms(sys, gamma);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.weights()[i] == b.weights()[i]);
    CHECK(a.atoms()[i] == b.atoms()[i]);
  }
}
