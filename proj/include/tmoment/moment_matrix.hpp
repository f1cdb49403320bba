#ifndef TMOMENT_MOMENT_MATRIX_HPP
#define TMOMENT_MOMENT_MATRIX_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tmoment/moment_sequence.hpp"

namespace tmoment {

struct Tolerances {
  // relative to the matrix scale ||M||_2 (see psd_rank)
  double psd_tol = 1e-9;
  // relative to the largest singular value
  double rank_tol = 1e-8;
};

// Named constraint polynomial g cutting out {x : g(x) >= 0}.
struct Constraint {
  Polynomial g;
  std::string name;

  Constraint(Polynomial poly, std::string label);
};

// Symmetric matrix with monomial row/column labels; entry (a,b) = gamma_{a+b}
// (times the constraint for localizing matrices). Keeps the sequence it was
// assembled from.
struct MomentMatrix {
  MonomialSet basis;
  Eigen::MatrixXd entries;
  MomentSequence source;
};

// PSD / numerical-rank verdict with the null space expressed as polynomials
// over the matrix basis.
struct PsdReport {
  bool is_psd = true;
  double min_eigenvalue = 0.0;
  int rank = 0;
  std::vector<Polynomial> kernel_basis;
  double scale = 0.0; // ||M||_2 used for the thresholds
};

struct ConsistencyViolation {
  std::size_t kernel_index; // which kernel polynomial
  int variable;
  MultiIndex shift; // the basis monomial x^beta
  double value;     // Lambda(x_i * p * x^beta), should be ~0
};

struct ConsistencyReport {
  bool consistent = true;
  std::vector<ConsistencyViolation> violations;
  // products whose moments were unavailable, left unverified
  std::size_t untested = 0;
};

MomentMatrix moment_matrix(const MomentSequence& gamma, const MonomialSet& basis);

MomentMatrix localizing_matrix(const MomentSequence& gamma, const Constraint& g,
                               const MonomialSet& basis);

PsdReport psd_rank(const MomentMatrix& M, double psd_tol = Tolerances{}.psd_tol,
                   double rank_tol = Tolerances{}.rank_tol);

// Checks that kernel column relations propagate under multiplication by each
// variable: Lambda(x_i * p * x^beta) = 0 for every kernel polynomial p and
// basis monomial beta with available moments.
ConsistencyReport recursive_consistency(const MomentMatrix& M, const MomentSequence& gamma,
                                        double tol = 1e-8,
                                        const Tolerances& tols = Tolerances{});

// Smul'jan block test on [[A,B],[B^T,C]] split at `split` columns:
// B in range(A) and C - W^T A W >= -tol, W the minimum-norm solution.
bool smulyan_check(const MomentMatrix& M_big, int split, double tol);

// Largest downward-closed basis whose pairwise index sums all carry moments.
MonomialSet max_matrix_basis(const MomentSequence& gamma);

// Largest downward-closed basis usable for the localizing matrix of g.
MonomialSet max_localizing_basis(const MomentSequence& gamma, const Constraint& g);

} // namespace tmoment

#endif
